#pragma once

// Direction estimators Bob runs on his Stern-Gerlach records. Every
// estimator targets +a_z via the effective outcome -alice_sign * outcome.

#include <functional>
#include <span>
#include <vector>

#include "qnav/protocol.hpp"
#include "qnav/qcore.hpp"

namespace qnav {

struct EstimationResult {
  UnitDirection estimate;
  double score = 0.0;
  /// Raw vector was shorter than 1e-9; estimate is the +z fallback.
  bool degenerate = false;
  /// Unnormalized estimate (mean vector) where the estimator has one.
  Vec3 raw = Vec3::Zero();
};

struct SphereGrid {
  std::vector<UnitDirection> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

/// Golden-angle spiral: z_j = 1 - (2j+1)/M, azimuth_j = 2 pi j (golden ratio
/// conjugate), uniform weights.
SphereGrid fibonacci_grid(std::size_t count);

/// Typical angular spacing sqrt(4 pi / M) of an M-point near-uniform grid.
double grid_spacing(std::size_t count);

/// Every point rotated by `r`; weights unchanged.
SphereGrid rotate_grid(const SphereGrid& grid, const Rotation& r);

/// Effective-outcome counts grouped by measurement axis. Weights may be
/// fractional (exact expectation values stand in for counts in the
/// noiseless idealization).
struct OutcomeTally {
  struct Group {
    UnitDirection axis;
    double plus = 0.0;   // effective outcome +1
    double minus = 0.0;  // effective outcome -1
  };
  std::vector<Group> groups;

  static OutcomeTally from_records(std::span<const MeasurementRecord> records);
  /// Expected counts for `count` measurements along each axis of a spin
  /// pointing along `truth`.
  static OutcomeTally expected(const UnitDirection& truth, std::span<const UnitDirection> axes, double count);

  double total() const;
  bool empty() const { return groups.empty(); }
};

/// Sum over records of log[(1 + e_i axis_i.n)/2]; -infinity when any
/// record has zero probability under n.
double log_likelihood(const UnitDirection& n, std::span<const MeasurementRecord> records);
double log_likelihood(const UnitDirection& n, const OutcomeTally& tally);

/// Mean effective outcome along each of three orthogonal axes, summed as a
/// vector and normalized. Throws kInsufficientRecords when fewer than three
/// axes carry records and kInvalidAxes when the axes are not an orthogonal triple.
EstimationResult tomographic_estimate(std::span<const MeasurementRecord> records);
EstimationResult tomographic_estimate(const OutcomeTally& tally);

inline constexpr int kDefaultRefineSteps = 12;
inline constexpr std::size_t kDefaultGridSize = 2000;

/// Grid search followed by alternating golden-section refinement in a local
/// (polar, azimuth) chart centred on the incumbent. The returned score is
/// never below the best coarse-grid score; ties go to the first grid index.
EstimationResult ml_estimate(std::span<const MeasurementRecord> records, const SphereGrid& grid,
                             int refine_steps = kDefaultRefineSteps);
EstimationResult ml_estimate(const OutcomeTally& tally, const SphereGrid& grid, int refine_steps = kDefaultRefineSteps);

/// Posterior mean under the uniform prior represented by `grid`.
/// Score is the log marginal likelihood.
EstimationResult bayes_mean_estimate(std::span<const MeasurementRecord> records, const SphereGrid& grid);
EstimationResult bayes_mean_estimate(const OutcomeTally& tally, const SphereGrid& grid);

/// Returns one correlation sample for a measurement along the axis: the
/// product alice_sign * bob_outcome in [-1, 1] (a noiseless oracle may
/// return the expectation value instead of a +-1 draw).
using CorrelationProbe = std::function<double(const UnitDirection&)>;

/// Coarse-to-fine search for the axis of strongest anti-correlation. Half
/// the budget goes to the six octahedral directions; each later round halves
/// the remaining budget and the neighbourhood radius around the incumbent.
/// Ties are broken uniformly at random. Throws kInsufficientBudget below 6.
EstimationResult adaptive_anticorrelation_search(const CorrelationProbe& probe, std::size_t budget,
                                                 RandomStream& rng);

}  // namespace qnav
