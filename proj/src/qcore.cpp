#include "qnav/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qnav {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDirection: return "invalid direction";
    case ErrorCode::kDimension: return "dimension error";
    case ErrorCode::kCapacity: return "capacity error";
    case ErrorCode::kInvalidPovm: return "invalid POVM";
    case ErrorCode::kInvalidDistribution: return "invalid distribution";
    case ErrorCode::kDegenerateBranch: return "degenerate branch";
    case ErrorCode::kEmptyProtocol: return "empty protocol";
    case ErrorCode::kLengthMismatch: return "length mismatch";
    case ErrorCode::kInsufficientRecords: return "insufficient records";
    case ErrorCode::kInvalidAxes: return "invalid axes";
    case ErrorCode::kInsufficientBudget: return "insufficient budget";
    case ErrorCode::kDegeneratePosterior: return "degenerate posterior";
    case ErrorCode::kSingularOperator: return "singular operator";
    case ErrorCode::kUnknownEstimator: return "unknown estimator";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "I/O error";
  }
  return "error";
}

namespace {

constexpr double kDirectionTol = 1e-9;
constexpr double kStateTol = 1e-9;

bool is_power_of_two_dim(Eigen::Index d) {
  return d == 2 || d == 4 || d == 8 || d == 16;
}

}  // namespace

// ---------------------------------------------------------------------------
// UnitDirection

UnitDirection::UnitDirection(double x, double y, double z) {
  const Vec3 v(x, y, z);
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kDirectionTol) {
    std::ostringstream os;
    os << "(" << x << ", " << y << ", " << z << ") has norm " << n;
    throw Error(ErrorCode::kInvalidDirection, os.str());
  }
  v_ = v / n;
}

UnitDirection UnitDirection::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::kInvalidDirection, "cannot normalize a zero or non-finite vector");
  }
  UnitDirection r;
  r.v_ = v / n;
  return r;
}

UnitDirection UnitDirection::from_angles(double polar, double azimuth) {
  const double s = std::sin(polar);
  return normalized(Vec3(s * std::cos(azimuth), s * std::sin(azimuth), std::cos(polar)));
}

double UnitDirection::angle_to(const UnitDirection& o) const {
  return std::atan2(v_.cross(o.v_).norm(), v_.dot(o.v_));
}

double UnitDirection::polar() const { return std::atan2(std::hypot(v_.x(), v_.y()), v_.z()); }

double UnitDirection::azimuth() const {
  if (v_.x() == 0.0 && v_.y() == 0.0) return 0.0;
  return std::atan2(v_.y(), v_.x());
}

// ---------------------------------------------------------------------------
// StateVector / DensityOperator

StateVector::StateVector(const Amplitudes& amplitudes) : amp_(amplitudes) {
  if (!is_power_of_two_dim(amp_.size())) {
    throw Error(ErrorCode::kDimension, "state dimension must be 2, 4, 8 or 16");
  }
  const double n = amp_.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kStateTol) {
    throw Error(ErrorCode::kDimension, "state is not normalized");
  }
  amp_ /= n;
}

StateVector::StateVector(std::initializer_list<Complex> amplitudes)
    : StateVector([&] {
        Amplitudes a(static_cast<Eigen::Index>(amplitudes.size()));
        Eigen::Index i = 0;
        for (const Complex& c : amplitudes) a(i++) = c;
        return a;
      }()) {}

int StateVector::qubits() const {
  int q = 0;
  for (int d = dim(); d > 1; d >>= 1) ++q;
  return q;
}

double StateVector::overlap(const StateVector& other) const {
  if (other.dim() != dim()) throw Error(ErrorCode::kDimension, "overlap of states with different dimensions");
  return std::abs(amp_.dot(other.amp_));
}

DensityOperator::DensityOperator(const Operator& rho) : rho_(rho) {
  if (rho_.rows() != rho_.cols() || !is_power_of_two_dim(rho_.rows())) {
    throw Error(ErrorCode::kDimension, "density operator must be square with dimension 2, 4, 8 or 16");
  }
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::kDimension, "density operator is not Hermitian");
  }
  rho_ = (rho_ + rho_.adjoint()).eval() * 0.5;
  if (std::abs(rho_.trace().real() - 1.0) > 1e-12) {
    throw Error(ErrorCode::kDimension, "density operator trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Operator> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorCode::kDimension, "density operator has a negative eigenvalue");
  }
}

DensityOperator::DensityOperator(const StateVector& psi)
    : DensityOperator(Operator(psi.amplitudes() * psi.amplitudes().adjoint())) {}

// ---------------------------------------------------------------------------
// Rotation

Rotation::Rotation(const UnitDirection& axis, double angle) : axis_(axis) {
  constexpr double kFourPi = 4.0 * std::numbers::pi;
  if (!std::isfinite(angle)) throw Error(ErrorCode::kInvalidDirection, "non-finite rotation angle");
  turn_ = std::fmod(angle, kFourPi);
  if (turn_ < 0.0) turn_ += kFourPi;
}

double Rotation::angle() const { return std::fmod(turn_, 2.0 * std::numbers::pi); }

Rotation Rotation::haar(RandomStream& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  Vec3 xyz(a * std::sin(kTwoPi * u2), a * std::cos(kTwoPi * u2), b * std::sin(kTwoPi * u3));
  double w = b * std::cos(kTwoPi * u3);
  if (w < 0.0) {
    w = -w;
    xyz = -xyz;
  }
  const double s = xyz.norm();
  if (s < 1e-300) return identity();
  return {UnitDirection::normalized(xyz), 2.0 * std::atan2(s, w)};
}

Rotation Rotation::from_matrix(const Mat3& m) {
  const Eigen::AngleAxisd aa(m);
  if (aa.angle() == 0.0) return identity();
  return {UnitDirection::normalized(aa.axis()), aa.angle()};
}

Mat3 Rotation::matrix() const {
  const Vec3& k = axis_.vec();
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return Mat3::Identity() + std::sin(turn_) * kx + (1.0 - std::cos(turn_)) * (kx * kx);
}

Operator Rotation::su2() const {
  const double h = 0.5 * turn_;
  return Operator(std::cos(h) * identity_operator(2) - Complex(0.0, std::sin(h)) * spin_operator(axis_));
}

Rotation Rotation::inverse() const { return {axis_, -turn_}; }

// ---------------------------------------------------------------------------
// Povm

Povm::Povm(std::vector<Operator> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw Error(ErrorCode::kInvalidPovm, "POVM has no elements");
  const Eigen::Index d = elements_.front().rows();
  if (d < 1 || d > kMaxDim) throw Error(ErrorCode::kDimension, "POVM dimension out of range");
  Operator sum = Operator::Zero(d, d);
  for (Operator& e : elements_) {
    if (e.rows() != d || e.cols() != d) throw Error(ErrorCode::kDimension, "POVM elements differ in shape");
    if (!e.allFinite()) throw Error(ErrorCode::kInvalidPovm, "POVM element is not finite");
    if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorCode::kInvalidPovm, "POVM element is not Hermitian");
    }
    e = (e + e.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Operator> es(e, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      throw Error(ErrorCode::kInvalidPovm, "POVM element has a negative eigenvalue");
    }
    sum += e;
  }
  if ((sum - identity_operator(static_cast<int>(d))).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::kInvalidPovm, "POVM elements do not sum to the identity");
  }
}

Povm Povm::product_projective(std::span<const UnitDirection> axes) {
  if (axes.empty() || axes.size() > 4) throw Error(ErrorCode::kCapacity, "need 1 to 4 measured qubits");
  std::vector<Operator> elements;
  const std::size_t outcomes = std::size_t{1} << axes.size();
  elements.reserve(outcomes);
  for (std::size_t idx = 0; idx < outcomes; ++idx) {
    Operator e = Operator::Identity(1, 1);
    for (std::size_t q = 0; q < axes.size(); ++q) {
      const bool minus = (idx >> (axes.size() - 1 - q)) & 1U;
      e = kron(e, projector_along(axes[q], minus ? -1 : +1));
    }
    elements.push_back(std::move(e));
  }
  return Povm(std::move(elements));
}

Povm Povm::stern_gerlach(const UnitDirection& axis) {
  return Povm({projector_along(axis, +1), projector_along(axis, -1)});
}

bool Povm::is_projective(double tol) const {
  return std::all_of(elements_.begin(), elements_.end(), [tol](const Operator& e) {
    return (e * e - e).cwiseAbs().maxCoeff() <= tol;
  });
}

// ---------------------------------------------------------------------------
// Operators and states

Operator identity_operator(int dim) { return Operator::Identity(dim, dim); }

Operator pauli(int index) {
  Operator p(2, 2);
  switch (index) {
    case 0: p << 0.0, 1.0, 1.0, 0.0; break;
    case 1: p << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0; break;
    case 2: p << 1.0, 0.0, 0.0, -1.0; break;
    default: throw Error(ErrorCode::kDimension, "Pauli index must be 0, 1 or 2");
  }
  return p;
}

Operator kron(const Operator& a, const Operator& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > kMaxDim || cols > kMaxDim) throw Error(ErrorCode::kCapacity, "operator exceeds 16 dimensions");
  Operator out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator spin_operator(const UnitDirection& n) {
  Operator s(2, 2);
  s << n.z(), Complex(n.x(), -n.y()), Complex(n.x(), n.y()), -n.z();
  return s;
}

StateVector bloch_to_state(const UnitDirection& n) {
  const double rho = std::hypot(n.x(), n.y());
  const double half = 0.5 * std::atan2(rho, n.z());
  const Complex phase = rho > 0.0 ? Complex(n.x() / rho, n.y() / rho) : Complex(1.0, 0.0);
  Amplitudes a(2);
  a << std::cos(half), phase * std::sin(half);
  return StateVector(a);
}

UnitDirection state_to_bloch(const StateVector& s) {
  if (s.dim() != 2) throw Error(ErrorCode::kDimension, "Bloch vector needs a single qubit");
  const Complex a = s[0];
  const Complex b = s[1];
  const Complex ab = std::conj(a) * b;
  return UnitDirection::normalized(Vec3(2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)));
}

StateVector singlet_state() {
  const double h = std::numbers::sqrt2 / 2.0;
  return StateVector{0.0, h, -h, 0.0};
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  const int d = a.dim() * b.dim();
  if (d > kMaxDim) throw Error(ErrorCode::kCapacity, "tensor product exceeds 16 dimensions");
  Amplitudes out(d);
  for (int i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a[i] * b.amplitudes();
  }
  return StateVector(out);
}

Operator projector_along(const UnitDirection& n, int sign) {
  if (sign != 1 && sign != -1) throw Error(ErrorCode::kInvalidDirection, "projector sign must be +1 or -1");
  return Operator(0.5 * (identity_operator(2) + static_cast<double>(sign) * spin_operator(n)));
}

DensityOperator reduced_state(const DensityOperator& rho, int keep_qubit) {
  const int d = rho.dim();
  int qubits = 0;
  for (int x = d; x > 1; x >>= 1) ++qubits;
  if (keep_qubit < 0 || keep_qubit >= qubits) throw Error(ErrorCode::kDimension, "qubit index out of range");
  const int shift = qubits - 1 - keep_qubit;
  Operator out = Operator::Zero(2, 2);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      // Trace out everything except `keep_qubit`: other bits must agree.
      if ((i & ~(1 << shift)) != (j & ~(1 << shift))) continue;
      out((i >> shift) & 1, (j >> shift) & 1) += rho.matrix()(i, j);
    }
  }
  return DensityOperator(out);
}

// ---------------------------------------------------------------------------
// Measurement

namespace {

std::vector<double> finalize_probabilities(std::vector<double> p) {
  double total = 0.0;
  for (double& x : p) {
    if (!(x >= -1e-10 && x <= 1.0 + 1e-10)) {
      throw Error(ErrorCode::kInvalidPovm, "outcome probability outside [0, 1]");
    }
    x = std::clamp(x, 0.0, 1.0);
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidPovm, "probabilities do not sum to 1");
  return p;
}

}  // namespace

std::vector<double> born_probabilities(const StateVector& state, const Povm& povm) {
  if (state.dim() != povm.dim()) throw Error(ErrorCode::kDimension, "state and POVM dimensions differ");
  std::vector<double> p;
  p.reserve(povm.size());
  for (const Operator& e : povm.elements()) {
    p.push_back(state.amplitudes().dot(e * state.amplitudes()).real());
  }
  return finalize_probabilities(std::move(p));
}

std::vector<double> born_probabilities(const DensityOperator& state, const Povm& povm) {
  if (state.dim() != povm.dim()) throw Error(ErrorCode::kDimension, "state and POVM dimensions differ");
  std::vector<double> p;
  p.reserve(povm.size());
  for (const Operator& e : povm.elements()) {
    p.push_back((state.matrix() * e).trace().real());
  }
  return finalize_probabilities(std::move(p));
}

std::size_t sample_outcome(std::span<const double> probabilities, RandomStream& rng) {
  if (probabilities.empty()) throw Error(ErrorCode::kInvalidDistribution, "empty distribution");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw Error(ErrorCode::kInvalidDistribution, "negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidDistribution, "probabilities do not sum to 1");

  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    if (probabilities[k] > 0.0) last_nonzero = k;
    cumulative += probabilities[k];
    if (u < cumulative) return k;
  }
  // Rounding left u above the final cumulative sum.
  return last_nonzero;
}

StateVector post_measurement_state(const StateVector& state, const Povm& povm, std::size_t index) {
  if (state.dim() != povm.dim()) throw Error(ErrorCode::kDimension, "state and POVM dimensions differ");
  if (index >= povm.size()) throw Error(ErrorCode::kDimension, "outcome index out of range");
  if (!povm.is_projective()) throw Error(ErrorCode::kInvalidPovm, "post-measurement state needs a projective POVM");
  Amplitudes v = povm[index] * state.amplitudes();
  const double n = v.norm();
  if (n * n < 1e-14) throw Error(ErrorCode::kDegenerateBranch, "outcome has zero probability");
  v /= n;
  return StateVector(v);
}

// ---------------------------------------------------------------------------
// Rotations

UnitDirection apply_rotation(const Rotation& r, const UnitDirection& n) {
  return UnitDirection::normalized(r.matrix() * n.vec());
}

StateVector apply_rotation(const Rotation& r, const StateVector& s) {
  const Operator u = r.su2();
  Operator collective = u;
  for (int q = 1; q < s.qubits(); ++q) collective = kron(collective, u);
  return StateVector(Amplitudes(collective * s.amplitudes()));
}

double direction_fidelity(const UnitDirection& estimate, const UnitDirection& truth) {
  return std::clamp(0.5 * (1.0 + estimate.dot(truth)), 0.0, 1.0);
}

}  // namespace qnav
