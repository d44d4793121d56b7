#pragma once

// Exact finite-dimensional quantum mechanics for 2^k-level systems, k <= 4.
//
// Basis convention: tensor-product computational basis with |up...up> first
// and the last tensor factor varying fastest, so for two qubits the order is
// |uu>, |ud>, |du>, |dd>.
//
// Phase convention for spin states along n = (sin t cos p, sin t sin p, cos t):
//   |up_n> = (cos(t/2), e^{ip} sin(t/2)),  with p := 0 at the poles.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qnav/error.hpp"
#include "qnav/random.hpp"

namespace qnav {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 16;

// Fixed-capacity storage: no heap traffic in sampling loops.
using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Operator = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A point on the unit sphere.
class UnitDirection {
 public:
  /// +z.
  UnitDirection() : v_(0.0, 0.0, 1.0) {}

  /// Throws kInvalidDirection unless |(x,y,z)| is 1 within 1e-9; the stored
  /// vector is renormalized so the 1e-12 invariant holds.
  UnitDirection(double x, double y, double z);
  explicit UnitDirection(const Vec3& v) : UnitDirection(v.x(), v.y(), v.z()) {}

  /// Normalizes any non-zero finite vector.
  static UnitDirection normalized(const Vec3& v);
  static UnitDirection from_angles(double polar, double azimuth);

  static UnitDirection x_axis() { return {1.0, 0.0, 0.0}; }
  static UnitDirection y_axis() { return {0.0, 1.0, 0.0}; }
  static UnitDirection z_axis() { return {0.0, 0.0, 1.0}; }

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Vec3& vec() const { return v_; }

  double dot(const UnitDirection& o) const { return v_.dot(o.v_); }
  /// Angle in [0, pi], computed with atan2 for accuracy near 0 and pi.
  double angle_to(const UnitDirection& o) const;
  double polar() const;
  double azimuth() const;

  UnitDirection operator-() const {
    UnitDirection r;
    r.v_ = -v_;
    return r;
  }
  bool operator==(const UnitDirection& o) const { return v_ == o.v_; }

 private:
  Vec3 v_;
};

/// Normalized pure state of dimension 2, 4, 8 or 16.
class StateVector {
 public:
  /// Validates the dimension and normalization (within 1e-9), then
  /// renormalizes so the norm is 1 to machine precision.
  explicit StateVector(const Amplitudes& amplitudes);
  StateVector(std::initializer_list<Complex> amplitudes);

  int dim() const { return static_cast<int>(amp_.size()); }
  int qubits() const;
  const Amplitudes& amplitudes() const { return amp_; }
  Complex operator[](int i) const { return amp_(i); }

  /// |<this|other>|.
  double overlap(const StateVector& other) const;

 private:
  Amplitudes amp_;
};

/// Mixed state; Hermitian, unit trace, positive semidefinite.
class DensityOperator {
 public:
  explicit DensityOperator(const Operator& rho);
  explicit DensityOperator(const StateVector& psi);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Operator& matrix() const { return rho_; }

 private:
  Operator rho_;
};

/// Rotation by `angle` about `axis` (right-handed). angle() reports [0, 2pi);
/// the spinor phase is tracked modulo 4pi so a 2pi turn maps states to -state.
class Rotation {
 public:
  Rotation() = default;
  Rotation(const UnitDirection& axis, double angle);

  static Rotation identity() { return {}; }
  /// Uniform (Haar) random rotation from a uniform unit quaternion.
  static Rotation haar(RandomStream& rng);
  /// Recovers axis/angle from an SO(3) matrix.
  static Rotation from_matrix(const Mat3& m);

  const UnitDirection& axis() const { return axis_; }
  double angle() const;

  /// Rodrigues matrix.
  Mat3 matrix() const;
  /// exp(-i angle/2 axis.sigma). Note su2() of a 2pi rotation is -I.
  Operator su2() const;
  Rotation inverse() const;

 private:
  UnitDirection axis_;
  double turn_ = 0.0;  // in [0, 4pi)
};

/// Finite list of positive operators summing to the identity.
class Povm {
 public:
  /// Each element is re-symmetrized as (M + M^dagger)/2, then checked for
  /// Hermiticity (1e-10), eigenvalues >= -1e-10 and closure (1e-9 entrywise).
  explicit Povm(std::vector<Operator> elements);

  /// Product POVM over qubits: one two-outcome projective measurement per
  /// qubit. Outcomes are indexed in basis order (qubit 0 slowest, + before -).
  static Povm product_projective(std::span<const UnitDirection> axes);
  /// Two-outcome Stern-Gerlach measurement along `axis` on one qubit.
  static Povm stern_gerlach(const UnitDirection& axis);

  int dim() const { return static_cast<int>(elements_.front().rows()); }
  std::size_t size() const { return elements_.size(); }
  const Operator& operator[](std::size_t k) const { return elements_[k]; }
  const std::vector<Operator>& elements() const { return elements_; }

  bool is_projective(double tol = 1e-9) const;

 private:
  std::vector<Operator> elements_;
};

// ---------------------------------------------------------------------------
// Operators and states

Operator identity_operator(int dim);
/// sigma_x, sigma_y, sigma_z for index 0, 1, 2.
Operator pauli(int index);
Operator kron(const Operator& a, const Operator& b);
/// n.sigma
Operator spin_operator(const UnitDirection& n);

StateVector bloch_to_state(const UnitDirection& n);
/// Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>); throws kDimension if dim != 2.
UnitDirection state_to_bloch(const StateVector& s);

/// (|ud> - |du>)/sqrt(2).
StateVector singlet_state();

/// Kronecker product; throws kCapacity if the result exceeds 16 dimensions.
StateVector tensor(const StateVector& a, const StateVector& b);

/// (I + sign n.sigma)/2.
Operator projector_along(const UnitDirection& n, int sign);

/// Reduced state of one qubit (0 = first tensor factor).
DensityOperator reduced_state(const DensityOperator& rho, int keep_qubit);

// ---------------------------------------------------------------------------
// Measurement

std::vector<double> born_probabilities(const StateVector& state, const Povm& povm);
std::vector<double> born_probabilities(const DensityOperator& state, const Povm& povm);

/// Inverse-CDF sampling on one uniform draw.
std::size_t sample_outcome(std::span<const double> probabilities, RandomStream& rng);

/// Normalized E_k|psi>; requires a projective POVM. Throws kDegenerateBranch
/// when outcome `index` has zero probability.
StateVector post_measurement_state(const StateVector& state, const Povm& povm, std::size_t index);

// ---------------------------------------------------------------------------
// Rotations

UnitDirection apply_rotation(const Rotation& r, const UnitDirection& n);
/// Collective rotation U x U x ... x U on every qubit of the state.
StateVector apply_rotation(const Rotation& r, const StateVector& s);

/// (1 + estimate.truth)/2, clamped to [0, 1].
double direction_fidelity(const UnitDirection& estimate, const UnitDirection& truth);

}  // namespace qnav
