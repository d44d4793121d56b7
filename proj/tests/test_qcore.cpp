#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "qnav/qcore.hpp"

using namespace qnav;

namespace {

constexpr double kH = std::numbers::sqrt2 / 2.0;

UnitDirection random_direction(RandomStream& rng) {
  return UnitDirection::normalized(Vec3(rng.normal(), rng.normal(), rng.normal()));
}

void expect_state(const StateVector& s, std::initializer_list<Complex> expected, double tol = 1e-12) {
  ASSERT_EQ(static_cast<std::size_t>(s.dim()), expected.size());
  int i = 0;
  for (const Complex& c : expected) {
    EXPECT_NEAR(s[i].real(), c.real(), tol) << "component " << i;
    EXPECT_NEAR(s[i].imag(), c.imag(), tol) << "component " << i;
    ++i;
  }
}

void expect_direction(const UnitDirection& n, double x, double y, double z, double tol = 1e-12) {
  EXPECT_NEAR(n.x(), x, tol);
  EXPECT_NEAR(n.y(), y, tol);
  EXPECT_NEAR(n.z(), z, tol);
}

// Independent route for the singlet joint statistics: explicit 2x2 projectors
// contracted against the four singlet amplitudes by hand.
double equal_outcome_probability_by_hand(const Vec3& a, const Vec3& b) {
  using C = std::complex<double>;
  auto proj = [](const Vec3& n, int s) {
    std::array<std::array<C, 2>, 2> p{};
    p[0][0] = 0.5 * (1.0 + s * n.z());
    p[1][1] = 0.5 * (1.0 - s * n.z());
    p[0][1] = 0.5 * s * C(n.x(), -n.y());
    p[1][0] = 0.5 * s * C(n.x(), n.y());
    return p;
  };
  const std::array<C, 4> psi{0.0, kH, -kH, 0.0};
  double total = 0.0;
  for (int s : {+1, -1}) {
    const auto pa = proj(a, s);
    const auto pb = proj(b, s);
    C acc = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) acc += std::conj(psi[2 * i + j]) * pa[i][k] * pb[j][l] * psi[2 * k + l];
    total += acc.real();
  }
  return total;
}

}  // namespace

TEST(UnitDirection, RejectsNonUnitInput) {
  EXPECT_THROW(UnitDirection(1.0, 1.0, 0.0), Error);
  try {
    UnitDirection(0.0, 0.0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDirection);
  }
  EXPECT_NO_THROW(UnitDirection(0.0, 0.0, 1.0 + 5e-10));
}

TEST(BlochToState, Examples) {
  expect_state(bloch_to_state(UnitDirection(0, 0, 1)), {1.0, 0.0});
  expect_state(bloch_to_state(UnitDirection(0, 0, -1)), {0.0, 1.0});
  expect_state(bloch_to_state(UnitDirection(1, 0, 0)), {kH, kH});
}

TEST(BlochToState, IsPlusOneEigenstateOfSpinOperator) {
  RandomStream rng(11);
  for (int i = 0; i < 200; ++i) {
    const UnitDirection n = random_direction(rng);
    const StateVector s = bloch_to_state(n);
    const Amplitudes diff = spin_operator(n) * s.amplitudes() - s.amplitudes();
    EXPECT_LT(diff.norm(), 1e-12);
  }
}

TEST(StateToBloch, Examples) {
  expect_direction(state_to_bloch(StateVector{1.0, 0.0}), 0, 0, 1);
  expect_direction(state_to_bloch(StateVector{kH, kH}), 1, 0, 0);
  expect_direction(state_to_bloch(StateVector{kH, Complex(0.0, kH)}), 0, 1, 0);
  EXPECT_THROW(state_to_bloch(singlet_state()), Error);
}

TEST(StateToBloch, RoundTripsOnRandomDirections) {
  RandomStream rng(12);
  for (int i = 0; i < 1000; ++i) {
    const UnitDirection n = random_direction(rng);
    const UnitDirection back = state_to_bloch(bloch_to_state(n));
    EXPECT_LT((back.vec() - n.vec()).norm(), 1e-12);
  }
}

TEST(Singlet, AmplitudesAndBasisOrder) {
  expect_state(singlet_state(), {0.0, kH, -kH, 0.0});
  // Last factor fastest: |up> x |down> lands on index 1.
  expect_state(tensor(StateVector{1.0, 0.0}, StateVector{0.0, 1.0}), {0.0, 1.0, 0.0, 0.0});
}

TEST(Singlet, ReducedStatesAreMaximallyMixed) {
  const DensityOperator rho(singlet_state());
  for (int q : {0, 1}) {
    const Operator r = reduced_state(rho, q).matrix();
    EXPECT_NEAR(std::abs(r(0, 0) - 0.5), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(r(1, 1) - 0.5), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-12);
  }
}

TEST(Singlet, CollectiveRotationInvariance) {
  RandomStream rng(13);
  const StateVector s = singlet_state();
  for (int i = 0; i < 100; ++i) {
    const Rotation r = Rotation::haar(rng);
    EXPECT_GE(apply_rotation(r, s).overlap(s), 1.0 - 1e-10);
  }
}

TEST(Tensor, Examples) {
  expect_state(tensor(StateVector{1.0, 0.0}, StateVector{1.0, 0.0}), {1.0, 0.0, 0.0, 0.0});
  expect_state(tensor(StateVector{1.0, 0.0}, StateVector{0.0, 1.0}), {0.0, 1.0, 0.0, 0.0});
  expect_state(tensor(StateVector{kH, kH}, StateVector{1.0, 0.0}), {kH, 0.0, kH, 0.0});
}

TEST(Tensor, CapacityError) {
  const StateVector four = singlet_state();
  const StateVector sixteen = tensor(four, four);
  EXPECT_EQ(sixteen.dim(), 16);
  try {
    tensor(sixteen, StateVector{1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacity);
  }
}

TEST(ProjectorAlong, Examples) {
  const Operator zp = projector_along(UnitDirection::z_axis(), +1);
  const Operator zm = projector_along(UnitDirection::z_axis(), -1);
  const Operator xp = projector_along(UnitDirection::x_axis(), +1);
  EXPECT_NEAR((zp - Operator(Eigen::Vector2cd(1.0, 0.0).asDiagonal())).norm(), 0.0, 1e-15);
  EXPECT_NEAR((zm - Operator(Eigen::Vector2cd(0.0, 1.0).asDiagonal())).norm(), 0.0, 1e-15);
  Operator half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  EXPECT_NEAR((xp - half).norm(), 0.0, 1e-15);
}

TEST(ProjectorAlong, IdempotentAndComplete) {
  RandomStream rng(14);
  for (int i = 0; i < 100; ++i) {
    const UnitDirection n = random_direction(rng);
    const Operator p = projector_along(n, +1);
    const Operator m = projector_along(n, -1);
    EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((p + m - identity_operator(2)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Povm, ConstructorRejectsInvalidElements) {
  EXPECT_THROW(Povm({projector_along(UnitDirection::z_axis(), +1)}), Error);  // no closure
  Operator not_hermitian(2, 2);
  not_hermitian << 1.0, 1.0, 0.0, 0.0;
  EXPECT_THROW(Povm({not_hermitian, identity_operator(2) - not_hermitian}), Error);
  Operator negative(2, 2);
  negative << 1.5, 0.0, 0.0, 0.0;
  try {
    Povm({negative, identity_operator(2) - negative});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidPovm);
  }
}

TEST(BornProbabilities, SingletAlongZIsPerfectlyAntiCorrelated) {
  const std::array axes{UnitDirection::z_axis(), UnitDirection::z_axis()};
  const std::vector<double> p = born_probabilities(singlet_state(), Povm::product_projective(axes));
  ASSERT_EQ(p.size(), 4U);
  EXPECT_NEAR(p[0], 0.0, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  EXPECT_NEAR(p[2], 0.5, 1e-15);
  EXPECT_NEAR(p[3], 0.0, 1e-15);
}

TEST(BornProbabilities, SixtyDegreesMatchesHandContraction) {
  const Vec3 a(0, 0, 1);
  const Vec3 b(std::sin(std::numbers::pi / 3), 0, std::cos(std::numbers::pi / 3));
  const double oracle = equal_outcome_probability_by_hand(a, b);
  EXPECT_NEAR(oracle, 0.25, 1e-15);  // (1 - cos 60)/2

  const std::array axes{UnitDirection(a), UnitDirection(b)};
  const std::vector<double> p = born_probabilities(singlet_state(), Povm::product_projective(axes));
  EXPECT_NEAR(p[0] + p[3], oracle, 1e-14);
}

TEST(BornProbabilities, AntiCorrelationLawOnRandomAxes) {
  RandomStream rng(15);
  for (int i = 0; i < 1000; ++i) {
    const std::array axes{random_direction(rng), random_direction(rng)};
    const std::vector<double> p = born_probabilities(singlet_state(), Povm::product_projective(axes));
    EXPECT_NEAR(p[0] + p[3], 0.5 * (1.0 - axes[0].dot(axes[1])), 1e-10);
  }
}

TEST(BornProbabilities, PureAndMixedRoutesAgree) {
  const Povm z = Povm::stern_gerlach(UnitDirection::z_axis());
  const std::vector<double> p = born_probabilities(StateVector{1.0, 0.0}, z);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  RandomStream rng(16);
  const UnitDirection n = random_direction(rng);
  const StateVector s = bloch_to_state(n);
  const Povm m = Povm::stern_gerlach(random_direction(rng));
  const auto pure = born_probabilities(s, m);
  const auto mixed = born_probabilities(DensityOperator(s), m);
  EXPECT_NEAR(pure[0], mixed[0], 1e-14);
}

TEST(BornProbabilities, DimensionMismatch) {
  try {
    born_probabilities(singlet_state(), Povm::stern_gerlach(UnitDirection::z_axis()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimension);
  }
}

TEST(SampleOutcome, CertainOutcome) {
  RandomStream rng(17);
  const std::vector<double> p{1.0, 0.0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_outcome(p, rng), 0U);
}

TEST(SampleOutcome, FairCoinFrequencyWithinFourSigma) {
  RandomStream rng(18);
  const std::vector<double> p{0.5, 0.5};
  constexpr int kDraws = 100000;
  int zeros = 0;
  for (int i = 0; i < kDraws; ++i) zeros += sample_outcome(p, rng) == 0;
  const double sigma = std::sqrt(0.25 / kDraws);  // 0.00158
  EXPECT_NEAR(static_cast<double>(zeros) / kDraws, 0.5, 4.0 * sigma);
}

TEST(SampleOutcome, ChiSquareAgainstBornProbabilities) {
  RandomStream rng(19);
  const std::array axes{UnitDirection::z_axis(), UnitDirection::from_angles(1.1, 0.4)};
  const std::vector<double> p = born_probabilities(singlet_state(), Povm::product_projective(axes));
  constexpr int kDraws = 100000;
  std::array<double, 4> counts{};
  for (int i = 0; i < kDraws; ++i) counts[sample_outcome(p, rng)] += 1.0;
  double chi2 = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double e = kDraws * p[k];
    chi2 += (counts[k] - e) * (counts[k] - e) / e;
  }
  // 3 degrees of freedom: mean 3, sd sqrt(6); 4 sigma.
  EXPECT_LT(chi2, 3.0 + 4.0 * std::sqrt(6.0));
}

TEST(SampleOutcome, RejectsUnnormalizedDistribution) {
  RandomStream rng(20);
  const std::vector<double> p{0.5, 0.4};
  EXPECT_THROW(sample_outcome(p, rng), Error);
}

TEST(PostMeasurement, SingletBranchLeavesBobAntiAligned) {
  const Operator id = identity_operator(2);
  const Povm alice({kron(projector_along(UnitDirection::z_axis(), +1), id),
                    kron(projector_along(UnitDirection::z_axis(), -1), id)});
  const StateVector post = post_measurement_state(singlet_state(), alice, 0);
  // |up>|down>: Bob holds |down_z> = (0, 1).
  expect_state(post, {0.0, 1.0, 0.0, 0.0});
  const DensityOperator bob = reduced_state(DensityOperator(post), 1);
  EXPECT_NEAR(bob.matrix()(1, 1).real(), 1.0, 1e-12);
}

TEST(PostMeasurement, DegenerateBranch) {
  const Povm z = Povm::stern_gerlach(UnitDirection::z_axis());
  try {
    post_measurement_state(StateVector{1.0, 0.0}, z, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateBranch);
  }
}

TEST(Rotation, Examples) {
  const Rotation flip(UnitDirection::x_axis(), std::numbers::pi);
  expect_direction(apply_rotation(flip, UnitDirection::z_axis()), 0, 0, -1);

  RandomStream rng(21);
  const Rotation full(random_direction(rng), 2.0 * std::numbers::pi);
  const StateVector s = bloch_to_state(random_direction(rng));
  const StateVector rotated = apply_rotation(full, s);
  EXPECT_LT((rotated.amplitudes() + s.amplitudes()).norm(), 1e-12);  // -1 x state
  const UnitDirection d = random_direction(rng);
  EXPECT_LT((apply_rotation(full, d).vec() - d.vec()).norm(), 1e-12);
  EXPECT_LT(full.angle(), 1e-12);
}

TEST(Rotation, MatrixIsSpecialOrthogonal) {
  RandomStream rng(22);
  for (int i = 0; i < 100; ++i) {
    const Mat3 m = Rotation::haar(rng).matrix();
    EXPECT_LT((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
  }
}

TEST(Rotation, BlochEquivariance) {
  RandomStream rng(23);
  for (int i = 0; i < 500; ++i) {
    const Rotation r = Rotation::haar(rng);
    const StateVector s = bloch_to_state(random_direction(rng));
    const UnitDirection lhs = state_to_bloch(apply_rotation(r, s));
    const UnitDirection rhs = apply_rotation(r, state_to_bloch(s));
    EXPECT_LT((lhs.vec() - rhs.vec()).norm(), 1e-12);
  }
}

TEST(Rotation, FromMatrixRoundTrip) {
  RandomStream rng(24);
  for (int i = 0; i < 50; ++i) {
    const Rotation r = Rotation::haar(rng);
    EXPECT_LT((Rotation::from_matrix(r.matrix()).matrix() - r.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((r.inverse().matrix() * r.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(DirectionFidelity, Examples) {
  const UnitDirection z = UnitDirection::z_axis();
  EXPECT_DOUBLE_EQ(direction_fidelity(z, z), 1.0);
  EXPECT_DOUBLE_EQ(direction_fidelity(z, -z), 0.0);
  EXPECT_DOUBLE_EQ(direction_fidelity(z, UnitDirection::x_axis()), 0.5);
  RandomStream rng(25);
  const UnitDirection a = random_direction(rng);
  const UnitDirection b = random_direction(rng);
  EXPECT_DOUBLE_EQ(direction_fidelity(a, b), direction_fidelity(b, a));
  const double half = 0.5 * a.angle_to(b);
  EXPECT_NEAR(direction_fidelity(a, b), std::cos(half) * std::cos(half), 1e-14);
}

TEST(RandomStream, DeterministicAndDerivedStreamsDiffer) {
  RandomStream a(99);
  RandomStream b(99);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(RandomStream(99).derive(1).next_u64(), RandomStream(99).derive(2).next_u64());
  EXPECT_NE(derive_seed(1, "navigate", 0), derive_seed(1, "navigate", 1));
  EXPECT_NE(derive_seed(1, "navigate", 0), derive_seed(1, "realizations", 0));
}
