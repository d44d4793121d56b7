#include "qnav/navigation.hpp"

#include <cmath>
#include <numbers>

namespace qnav {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double normalize_longitude(double lon) {
  double r = std::fmod(lon, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

}  // namespace

GeoPosition::GeoPosition(double latitude_deg, double longitude_deg) {
  if (!std::isfinite(latitude_deg) || !std::isfinite(longitude_deg) || std::abs(latitude_deg) > 90.0) {
    throw Error(ErrorCode::kConfig, "latitude must lie in [-90, 90]");
  }
  lat_ = latitude_deg;
  lon_ = std::abs(latitude_deg) == 90.0 ? 0.0 : normalize_longitude(longitude_deg);
}

GeoPosition GeoPosition::random(RandomStream& rng) {
  const double sin_lat = 2.0 * rng.uniform() - 1.0;
  const double lon = 360.0 * rng.uniform() - 180.0;
  return {std::asin(sin_lat) / kDeg, lon};
}

UnitDirection geo_to_vertical(const GeoPosition& p) {
  const double lat = p.latitude() * kDeg;
  const double lon = p.longitude() * kDeg;
  return UnitDirection::normalized(
      Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)));
}

GeoPosition vertical_to_geo(const UnitDirection& n) {
  const double horizontal = std::hypot(n.x(), n.y());
  const double lat = std::atan2(n.z(), horizontal) / kDeg;
  if (horizontal == 0.0) return {n.z() > 0.0 ? 90.0 : -90.0, 0.0};
  return {lat, std::atan2(n.y(), n.x()) / kDeg};
}

double central_angle(const GeoPosition& p, const GeoPosition& q) {
  const double phi1 = p.latitude() * kDeg;
  const double phi2 = q.latitude() * kDeg;
  const double dl = (q.longitude() - p.longitude()) * kDeg;
  const double a = std::cos(phi2) * std::sin(dl);
  const double b = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dl);
  const double c = std::sin(phi1) * std::sin(phi2) + std::cos(phi1) * std::cos(phi2) * std::cos(dl);
  return std::atan2(std::hypot(a, b), c);
}

double great_circle_km(const GeoPosition& p, const GeoPosition& q) { return kEarthRadiusKm * central_angle(p, q); }

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "tomographic") return EstimatorKind::kTomographic;
  if (name == "ml") return EstimatorKind::kMaximumLikelihood;
  if (name == "bayes") return EstimatorKind::kBayesMean;
  if (name == "adaptive") return EstimatorKind::kAdaptive;
  throw Error(ErrorCode::kUnknownEstimator, "unknown estimator '" + name + "'");
}

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kTomographic: return "tomographic";
    case EstimatorKind::kMaximumLikelihood: return "ml";
    case EstimatorKind::kBayesMean: return "bayes";
    case EstimatorKind::kAdaptive: return "adaptive";
  }
  return "unknown";
}

std::size_t minimum_pairs(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kTomographic: return 3;
    case EstimatorKind::kAdaptive: return 6;
    default: return 1;
  }
}

namespace {

// Stream tags: the hidden photon frame comes from its own stream so that all
// realizations consume the main stream identically.
constexpr std::uint64_t kTagPosition = 1;
constexpr std::uint64_t kTagAlice = 2;
constexpr std::uint64_t kTagBob = 3;
constexpr std::uint64_t kTagFrame = 4;
constexpr std::uint64_t kTagEstimator = 5;

QubitRealization make_realization(const RescueOptions& options, const RandomStream& root) {
  switch (options.realization) {
    case RealizationKind::kSpinHalf: return QubitRealization::spin_half();
    case RealizationKind::kScalar: return QubitRealization::scalar();
    case RealizationKind::kPhotonPolarization: {
      if (options.fix_hidden_frame) return QubitRealization::photon(Rotation::identity());
      RandomStream frame_rng = root.derive(kTagFrame);
      return QubitRealization::photon(Rotation::haar(frame_rng));
    }
  }
  throw Error(ErrorCode::kConfig, "unknown realization");
}

EstimationResult estimate_direction(const UnitDirection& truth, const RescueOptions& options, const SphereGrid& grid,
                                    const RandomStream& root) {
  if (options.pairs < minimum_pairs(options.estimator)) {
    throw Error(ErrorCode::kInsufficientRecords,
                std::string(to_string(options.estimator)) + " needs at least " +
                    std::to_string(minimum_pairs(options.estimator)) + " pairs");
  }

  if (options.noiseless) {
    if (options.estimator != EstimatorKind::kTomographic && options.estimator != EstimatorKind::kMaximumLikelihood) {
      throw Error(ErrorCode::kConfig, "noiseless mode supports the tomographic and ml estimators");
    }
    if (options.realization != RealizationKind::kSpinHalf) {
      throw Error(ErrorCode::kConfig, "noiseless mode models the spin-half realization");
    }
    const std::vector<UnitDirection> axes{UnitDirection::x_axis(), UnitDirection::y_axis(), UnitDirection::z_axis()};
    const OutcomeTally tally = OutcomeTally::expected(truth, axes, static_cast<double>(options.pairs) / 3.0);
    return options.estimator == EstimatorKind::kTomographic ? tomographic_estimate(tally)
                                                            : ml_estimate(tally, grid, options.refine_steps);
  }

  RandomStream alice_rng = root.derive(kTagAlice);
  RandomStream bob_rng = root.derive(kTagBob);
  const QubitRealization realization = make_realization(options, root);
  const ProtocolTranscript transcript = run_alice(options.pairs, truth, alice_rng);
  const std::vector<StateVector> ensemble = bob_ensemble(transcript);

  if (options.estimator == EstimatorKind::kAdaptive) {
    // Each probe spends one fresh pair: Bob measures along the requested axis
    // and correlates with Alice's announced sign.
    std::size_t next = 0;
    const CorrelationProbe probe = [&](const UnitDirection& axis) {
      const std::size_t i = next++;
      const std::vector<MeasurementRecord> r =
          bob_measure({ensemble[i]}, {axis}, {transcript.outcomes()[i]}, realization, bob_rng);
      return static_cast<double>(r.front().alice_sign * r.front().outcome);
    };
    RandomStream tie_rng = root.derive(kTagEstimator);
    return adaptive_anticorrelation_search(probe, options.pairs, tie_rng);
  }

  const std::vector<MeasurementRecord> records =
      bob_measure(ensemble, round_robin_axes(options.pairs), transcript.outcomes(), realization, bob_rng);
  switch (options.estimator) {
    case EstimatorKind::kTomographic: return tomographic_estimate(records);
    case EstimatorKind::kMaximumLikelihood: return ml_estimate(records, grid, options.refine_steps);
    case EstimatorKind::kBayesMean: return bayes_mean_estimate(records, grid);
    case EstimatorKind::kAdaptive: break;
  }
  throw Error(ErrorCode::kUnknownEstimator, "unhandled estimator");
}

}  // namespace

EstimationResult run_direction_trial(const UnitDirection& truth, const RescueOptions& options,
                                     const SphereGrid& grid) {
  return estimate_direction(truth, options, grid, RandomStream(options.seed));
}

RescueReport run_rescue(const RescueOptions& options, const SphereGrid* grid) {
  const RandomStream root(options.seed);
  GeoPosition truth_position;
  if (options.true_position) {
    truth_position = *options.true_position;
  } else {
    RandomStream position_rng = root.derive(kTagPosition);
    truth_position = GeoPosition::random(position_rng);
  }

  SphereGrid local_grid;
  if (grid == nullptr &&
      (options.estimator == EstimatorKind::kMaximumLikelihood || options.estimator == EstimatorKind::kBayesMean)) {
    local_grid = fibonacci_grid(options.grid_size);
    grid = &local_grid;
  }
  static const SphereGrid kUnused;
  const UnitDirection truth = geo_to_vertical(truth_position);
  const EstimationResult estimate = estimate_direction(truth, options, grid ? *grid : kUnused, root);

  RescueReport report;
  report.true_position = truth_position;
  report.estimated_position = vertical_to_geo(estimate.estimate);
  report.pair_count = options.pairs;
  report.estimator_name = to_string(options.estimator);
  report.angular_error = estimate.estimate.angle_to(truth);
  report.distance_error = kEarthRadiusKm * report.angular_error;
  report.degenerate = estimate.degenerate;
  return report;
}

}  // namespace qnav
