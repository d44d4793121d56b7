#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "qnav/estimation.hpp"
#include "qnav/kernels.hpp"

using namespace qnav;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

UnitDirection random_direction(RandomStream& rng) {
  return UnitDirection::normalized(Vec3(rng.normal(), rng.normal(), rng.normal()));
}

// Records whose effective outcome is `effective` along `axis`.
void add_records(std::vector<MeasurementRecord>& out, const UnitDirection& axis, int effective, int count) {
  for (int i = 0; i < count; ++i) out.push_back({axis, -effective, +1});
}

std::vector<MeasurementRecord> simulate(const UnitDirection& truth, const std::vector<UnitDirection>& axes,
                                        std::uint64_t seed) {
  RandomStream alice(seed);
  RandomStream bob = alice.derive(3);
  const ProtocolTranscript t = run_alice(axes.size(), truth, alice);
  return bob_measure(bob_ensemble(t), axes, t.outcomes(), QubitRealization::spin_half(), bob);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST(FibonacciGrid, SinglePoint) {
  const SphereGrid g = fibonacci_grid(1);
  ASSERT_EQ(g.size(), 1U);
  EXPECT_DOUBLE_EQ(g.weights[0], 1.0);
}

TEST(FibonacciGrid, NearUniformAndUnit) {
  const SphereGrid g = fibonacci_grid(1000);
  Vec3 mean = Vec3::Zero();
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(g.points[j].vec().norm(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(g.weights[j], 1.0 / 1000.0);
    mean += g.points[j].vec();
    weight_sum += g.weights[j];
  }
  EXPECT_LT((mean / 1000.0).norm(), 0.01);
  EXPECT_NEAR(weight_sum, 1.0, 1e-12);
}

TEST(FibonacciGrid, SpiralFormula) {
  const SphereGrid g = fibonacci_grid(7);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(g.points[j].z(), 1.0 - (2.0 * j + 1.0) / 7.0, 1e-15);
}

TEST(Tomographic, HandArithmeticExample) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::x_axis(), +1, 6);
  add_records(r, UnitDirection::x_axis(), -1, 4);
  add_records(r, UnitDirection::y_axis(), +1, 5);
  add_records(r, UnitDirection::y_axis(), -1, 5);
  add_records(r, UnitDirection::z_axis(), +1, 9);
  add_records(r, UnitDirection::z_axis(), -1, 1);
  const EstimationResult e = tomographic_estimate(r);
  EXPECT_NEAR(e.raw.x(), 0.2, 1e-15);
  EXPECT_NEAR(e.raw.y(), 0.0, 1e-15);
  EXPECT_NEAR(e.raw.z(), 0.8, 1e-15);
  EXPECT_NEAR(e.estimate.x(), 0.2 / std::sqrt(0.68), 1e-12);
  EXPECT_NEAR(e.estimate.z(), 0.8 / std::sqrt(0.68), 1e-12);
  EXPECT_NEAR(e.estimate.x(), 0.24254, 1e-5);
  EXPECT_NEAR(e.estimate.z(), 0.97014, 1e-5);
  EXPECT_FALSE(e.degenerate);
}

TEST(Tomographic, AllUpAlongZ) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::x_axis(), +1, 1);
  add_records(r, UnitDirection::x_axis(), -1, 1);
  add_records(r, UnitDirection::y_axis(), +1, 1);
  add_records(r, UnitDirection::y_axis(), -1, 1);
  add_records(r, UnitDirection::z_axis(), +1, 4);
  const EstimationResult e = tomographic_estimate(r);
  EXPECT_NEAR(e.estimate.z(), 1.0, 1e-15);
}

TEST(Tomographic, BalancedIsDegenerate) {
  std::vector<MeasurementRecord> r;
  for (const auto& axis : {UnitDirection::x_axis(), UnitDirection::y_axis(), UnitDirection::z_axis()}) {
    add_records(r, axis, +1, 3);
    add_records(r, axis, -1, 3);
  }
  const EstimationResult e = tomographic_estimate(r);
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.estimate, UnitDirection::z_axis());
}

TEST(Tomographic, MissingAxis) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::x_axis(), +1, 3);
  add_records(r, UnitDirection::z_axis(), +1, 3);
  try {
    tomographic_estimate(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientRecords);
  }
}

TEST(Tomographic, NonOrthogonalAxes) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::x_axis(), +1, 3);
  add_records(r, UnitDirection::y_axis(), +1, 3);
  add_records(r, UnitDirection::normalized(Vec3(1, 1, 1)), +1, 3);
  try {
    tomographic_estimate(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidAxes);
  }
}

TEST(LogLikelihood, Examples) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::z_axis(), +1, 1);
  EXPECT_DOUBLE_EQ(log_likelihood(UnitDirection::z_axis(), r), 0.0);
  EXPECT_NEAR(log_likelihood(UnitDirection::x_axis(), r), std::log(0.5), 1e-15);
  EXPECT_EQ(log_likelihood(-UnitDirection::z_axis(), r), -std::numeric_limits<double>::infinity());
}

TEST(LogLikelihood, TallyMatchesRecords) {
  RandomStream rng(21);
  const auto records = simulate(random_direction(rng), round_robin_axes(300), 5);
  const OutcomeTally tally = OutcomeTally::from_records(records);
  EXPECT_DOUBLE_EQ(tally.total(), 300.0);
  for (int i = 0; i < 20; ++i) {
    const UnitDirection n = random_direction(rng);
    EXPECT_NEAR(log_likelihood(n, tally), log_likelihood(n, records), 1e-9);
  }
}

TEST(MaximumLikelihood, AllUpAlongZ) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::z_axis(), +1, 50);
  const EstimationResult e = ml_estimate(r, fibonacci_grid(2000));
  EXPECT_LT((e.estimate.vec() - Vec3(0, 0, 1)).norm(), 1e-6);
}

TEST(MaximumLikelihood, AzimuthalTieGoesToFirstGridIndex) {
  // Likelihood depends only on z, so every grid point on a given latitude
  // ties; with refinement disabled the argmax must be the first maximal index.
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::z_axis(), +1, 7);
  add_records(r, UnitDirection::z_axis(), -1, 3);
  SphereGrid grid;
  for (int k = 0; k < 8; ++k) {
    grid.points.push_back(UnitDirection::from_angles(std::acos(0.4), 2.0 * kPi * k / 8.0));
    grid.weights.push_back(1.0 / 8.0);
  }
  const EstimationResult e = ml_estimate(r, grid, 0);
  EXPECT_EQ(e.estimate, grid.points[0]);
  for (const auto& p : grid.points) EXPECT_NEAR(log_likelihood(p, r), e.score, 1e-12);

  // The refined estimate keeps the same score under any azimuthal rotation.
  const EstimationResult refined = ml_estimate(r, fibonacci_grid(2000));
  for (double phi : {0.3, 1.7, 4.0}) {
    const UnitDirection turned = apply_rotation(Rotation(UnitDirection::z_axis(), phi), refined.estimate);
    EXPECT_NEAR(log_likelihood(turned, r), refined.score, 1e-9);
  }
}

TEST(MaximumLikelihood, ScoreDominatesGrid) {
  RandomStream rng(22);
  const SphereGrid grid = fibonacci_grid(500);
  for (int trial = 0; trial < 30; ++trial) {
    const auto records = simulate(random_direction(rng), round_robin_axes(120), 100 + trial);
    const EstimationResult e = ml_estimate(records, grid);
    const auto grid_scores = loglik_on_grid(OutcomeTally::from_records(records), grid);
    EXPECT_GE(e.score, *std::max_element(grid_scores.begin(), grid_scores.end()));
    EXPECT_NEAR(e.score, log_likelihood(e.estimate, records), 1e-9);
  }
}

TEST(MaximumLikelihood, EmptyRecords) {
  try {
    ml_estimate(std::vector<MeasurementRecord>{}, fibonacci_grid(10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientRecords);
  }
}

TEST(MaximumLikelihood, MedianErrorAtThousandPairs) {
  const SphereGrid grid = fibonacci_grid(kDefaultGridSize);
  RandomStream rng(23);
  std::vector<double> errors;
  for (int t = 0; t < 200; ++t) {
    const UnitDirection truth = random_direction(rng);
    const auto records = simulate(truth, round_robin_axes(1000), 10000 + t);
    errors.push_back(ml_estimate(records, grid).estimate.angle_to(truth));
  }
  EXPECT_LE(median(errors), 5.0 * kDeg);
}

TEST(Bayes, SingleRecordPosteriorMean) {
  // Independent quadrature in cos(theta): int c (1+c)/2 dc / int (1+c)/2 dc.
  constexpr int kSlices = 100000;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < kSlices; ++i) {
    const double c = -1.0 + (i + 0.5) * 2.0 / kSlices;
    num += c * (1.0 + c) / 2.0;
    den += (1.0 + c) / 2.0;
  }
  const double oracle = num / den;
  ASSERT_NEAR(oracle, 1.0 / 3.0, 1e-8);

  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::z_axis(), +1, 1);
  const EstimationResult e = bayes_mean_estimate(r, fibonacci_grid(2000));
  EXPECT_NEAR(e.raw.z(), oracle, 0.01);
  EXPECT_NEAR(e.raw.x(), 0.0, 0.01);
  EXPECT_NEAR(e.raw.y(), 0.0, 0.01);
  EXPECT_NEAR(e.estimate.z(), 1.0, 1e-3);
}

TEST(Bayes, EmptyRecordsAreDegenerate) {
  const EstimationResult e = bayes_mean_estimate(std::vector<MeasurementRecord>{}, fibonacci_grid(2000));
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.estimate, UnitDirection::z_axis());
}

TEST(Bayes, ConcentratesAtPlusX) {
  std::vector<MeasurementRecord> r;
  add_records(r, UnitDirection::x_axis(), +1, 2000);
  add_records(r, UnitDirection::y_axis(), +1, 1000);
  add_records(r, UnitDirection::y_axis(), -1, 1000);
  add_records(r, UnitDirection::z_axis(), +1, 1000);
  add_records(r, UnitDirection::z_axis(), -1, 1000);
  const SphereGrid grid = fibonacci_grid(2000);
  const EstimationResult e = bayes_mean_estimate(r, grid);
  EXPECT_LT(e.estimate.angle_to(UnitDirection::x_axis()), grid_spacing(grid.size()));
}

TEST(Bayes, ShrinkageBound) {
  RandomStream rng(24);
  const SphereGrid grid = fibonacci_grid(800);
  for (int t = 0; t < 30; ++t) {
    const auto n = static_cast<std::size_t>(1 + rng.uniform() * 400);
    const auto records = simulate(random_direction(rng), round_robin_axes(n), 300 + t);
    EXPECT_LE(bayes_mean_estimate(records, grid).raw.norm(), 1.0 + 1e-12);
  }
}

TEST(Adaptive, NoiselessBudget96) {
  RandomStream rng(25);
  for (int t = 0; t < 50; ++t) {
    const UnitDirection truth = random_direction(rng);
    const CorrelationProbe probe = [&](const UnitDirection& axis) { return -axis.dot(truth); };
    const EstimationResult e = adaptive_anticorrelation_search(probe, 96, rng);
    EXPECT_LE(e.estimate.angle_to(truth), 15.0 * kDeg);
  }
}

TEST(Adaptive, BudgetSixIsOneOctahedralRound) {
  RandomStream rng(26);
  const std::vector<Vec3> octahedron = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                                        -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  for (int t = 0; t < 50; ++t) {
    const UnitDirection truth = random_direction(rng);
    const CorrelationProbe probe = [&](const UnitDirection& axis) { return -axis.dot(truth); };
    const EstimationResult e = adaptive_anticorrelation_search(probe, 6, rng);
    EXPECT_LE(e.estimate.angle_to(truth), kPi / 2.0);
    const bool on_octahedron = std::any_of(octahedron.begin(), octahedron.end(),
                                           [&](const Vec3& v) { return (v - e.estimate.vec()).norm() < 1e-12; });
    EXPECT_TRUE(on_octahedron);
  }
}

TEST(Adaptive, ConstantCallbackIsUniformOverProbes) {
  constexpr int kSeeds = 6000;
  std::map<std::tuple<long, long, long>, int> counts;
  for (int s = 0; s < kSeeds; ++s) {
    RandomStream rng(static_cast<std::uint64_t>(s));
    const EstimationResult e = adaptive_anticorrelation_search([](const UnitDirection&) { return 0.0; }, 6, rng);
    ++counts[{std::lround(e.estimate.x()), std::lround(e.estimate.y()), std::lround(e.estimate.z())}];
  }
  ASSERT_EQ(counts.size(), 6U);
  double chi2 = 0.0;
  for (const auto& [key, c] : counts) chi2 += std::pow(c - kSeeds / 6.0, 2) / (kSeeds / 6.0);
  // 5 degrees of freedom; 20.5 is the 0.999 quantile.
  EXPECT_LT(chi2, 20.5);
}

TEST(Adaptive, BudgetBelowSix) {
  RandomStream rng(27);
  try {
    adaptive_anticorrelation_search([](const UnitDirection&) { return 0.0; }, 5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientBudget);
  }
}

TEST(Covariance, TomographicRotatesExactly) {
  RandomStream rng(28);
  for (int t = 0; t < 20; ++t) {
    const Rotation r = Rotation::haar(rng);
    const auto records = simulate(random_direction(rng), round_robin_axes(90), 700 + t);
    std::vector<MeasurementRecord> rotated = records;
    for (auto& rec : rotated) rec.axis = apply_rotation(r, rec.axis);
    const EstimationResult a = tomographic_estimate(records);
    const EstimationResult b = tomographic_estimate(rotated);
    EXPECT_LT((apply_rotation(r, a.estimate).vec() - b.estimate.vec()).norm(), 1e-12);
  }
}

TEST(Covariance, MaximumLikelihoodOnRotatedGrid) {
  RandomStream rng(29);
  const SphereGrid grid = fibonacci_grid(kDefaultGridSize);
  for (int t = 0; t < 10; ++t) {
    const Rotation r = Rotation::haar(rng);
    const auto records = simulate(random_direction(rng), round_robin_axes(600), 800 + t);
    std::vector<MeasurementRecord> rotated = records;
    for (auto& rec : rotated) rec.axis = apply_rotation(r, rec.axis);
    const SphereGrid rotated_grid = rotate_grid(grid, r);

    // Coarse-grid scores are invariant point by point.
    const auto s0 = loglik_on_grid(OutcomeTally::from_records(records), grid);
    const auto s1 = loglik_on_grid(OutcomeTally::from_records(rotated), rotated_grid);
    for (std::size_t j = 0; j < s0.size(); ++j) ASSERT_NEAR(s0[j], s1[j], 1e-9 * (1.0 + std::abs(s0[j])));

    const EstimationResult a = ml_estimate(records, grid);
    const EstimationResult b = ml_estimate(rotated, rotated_grid);
    EXPECT_NEAR(a.score, b.score, 1e-8 * std::abs(a.score));
    EXPECT_LT(apply_rotation(r, a.estimate).angle_to(b.estimate), 1e-4);
  }
}

TEST(Consistency, FidelityMonotoneAndRmsScaling) {
  const SphereGrid grid = fibonacci_grid(kDefaultGridSize);
  const std::vector<std::size_t> sweep = {100, 400, 1600, 6400};
  using Estimator = EstimationResult (*)(std::span<const MeasurementRecord>, const SphereGrid&);
  const std::vector<std::pair<const char*, Estimator>> estimators = {
      {"tomographic", [](std::span<const MeasurementRecord> r, const SphereGrid&) { return tomographic_estimate(r); }},
      {"ml", [](std::span<const MeasurementRecord> r, const SphereGrid& g) { return ml_estimate(r, g); }},
      {"bayes", [](std::span<const MeasurementRecord> r, const SphereGrid& g) { return bayes_mean_estimate(r, g); }},
  };
  for (const auto& [name, estimate] : estimators) {
    std::vector<double> mean_fidelity;
    std::vector<double> rms_error;
    for (std::size_t n : sweep) {
      RandomStream rng(30);
      std::vector<double> errors;
      double fidelity = 0.0;
      for (int t = 0; t < 200; ++t) {
        const UnitDirection truth = random_direction(rng);
        const auto records = simulate(truth, round_robin_axes(n), derive_seed(31, "consistency", t));
        const UnitDirection est = estimate(records, grid).estimate;
        fidelity += direction_fidelity(est, truth);
        errors.push_back(est.angle_to(truth));
      }
      mean_fidelity.push_back(fidelity / 200.0);
      rms_error.push_back(rms(errors));
    }
    for (std::size_t i = 1; i < sweep.size(); ++i) EXPECT_GE(mean_fidelity[i], mean_fidelity[i - 1]) << name;
    const double ratio = rms_error[1] / rms_error[3];
    EXPECT_GE(ratio, 4.0 / 1.5) << name;
    EXPECT_LE(ratio, 4.0 * 1.5) << name;
  }
}
