#pragma once

// Locating Alice from her local vertical: spherical Earth, radius 6371 km.

#include <cstdint>
#include <optional>
#include <string>

#include "qnav/estimation.hpp"
#include "qnav/protocol.hpp"

namespace qnav {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Latitude in [-90, 90], longitude in (-180, 180]; longitude is 0 at the poles.
class GeoPosition {
 public:
  GeoPosition() = default;
  /// Normalizes longitude into range; throws kConfig for |latitude| > 90 or
  /// non-finite input.
  GeoPosition(double latitude_deg, double longitude_deg);

  /// Area-uniform: uniform in longitude and in sin(latitude).
  static GeoPosition random(RandomStream& rng);

  double latitude() const { return lat_; }
  double longitude() const { return lon_; }

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

UnitDirection geo_to_vertical(const GeoPosition& p);
GeoPosition vertical_to_geo(const UnitDirection& n);

/// Central angle in radians (Vincenty-form arctangent).
double central_angle(const GeoPosition& p, const GeoPosition& q);
double great_circle_km(const GeoPosition& p, const GeoPosition& q);

enum class EstimatorKind { kTomographic, kMaximumLikelihood, kBayesMean, kAdaptive };

/// "tomographic", "ml", "bayes", "adaptive"; throws kUnknownEstimator.
EstimatorKind parse_estimator(const std::string& name);
const char* to_string(EstimatorKind kind);
std::size_t minimum_pairs(EstimatorKind kind);

struct RescueOptions {
  std::size_t pairs = 10000;
  EstimatorKind estimator = EstimatorKind::kMaximumLikelihood;
  /// Unset: drawn area-uniformly from the seed.
  std::optional<GeoPosition> true_position;
  std::uint64_t seed = 1;
  std::size_t grid_size = kDefaultGridSize;
  int refine_steps = kDefaultRefineSteps;
  /// Exact expectation values replace sampled counts (tomographic and ML).
  bool noiseless = false;
  RealizationKind realization = RealizationKind::kSpinHalf;
  /// Photon realization only: use the identity as the hidden frame.
  bool fix_hidden_frame = false;
};

struct RescueReport {
  GeoPosition true_position;
  GeoPosition estimated_position;
  std::size_t pair_count = 0;
  std::string estimator_name;
  double angular_error = 0.0;   // radians
  double distance_error = 0.0;  // km
  bool degenerate = false;
};

/// Full pipeline: position -> vertical -> Alice -> Bob's ensemble -> Bob's
/// measurements (x/y/z round robin) -> estimate -> position. Deterministic in
/// the seed. `grid` may be supplied to avoid rebuilding it per trial.
RescueReport run_rescue(const RescueOptions& options, const SphereGrid* grid = nullptr);

/// Estimated direction and score for one protocol run, without the geography.
/// Used by the Monte Carlo experiments for arbitrary true directions.
EstimationResult run_direction_trial(const UnitDirection& truth, const RescueOptions& options,
                                     const SphereGrid& grid);

}  // namespace qnav
