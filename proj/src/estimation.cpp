#include "qnav/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "qnav/kernels.hpp"

namespace qnav {

namespace {

constexpr double kDegenerateNorm = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

EstimationResult from_raw_vector(const Vec3& raw, double score) {
  EstimationResult r;
  r.raw = raw;
  r.score = score;
  if (!(raw.norm() >= kDegenerateNorm)) {
    r.degenerate = true;
    r.estimate = UnitDirection::z_axis();
  } else {
    r.estimate = UnitDirection::normalized(raw);
  }
  return r;
}

// Any unit vector orthogonal to n.
Vec3 perpendicular(const Vec3& n) {
  const Vec3 trial = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (trial - trial.dot(n) * n).normalized();
}

// Golden-section search for the maximum of g on [lo, hi]. Returns the best
// evaluated abscissa and its value.
template <class G>
std::pair<double, double> golden_max(G&& g, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = g(c);
  double fd = g(d);
  std::pair<double, double> best = fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
  for (int it = 0; it < 80 && (b - a) > 1e-13; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = g(c);
      if (fc > best.second) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = g(d);
      if (fd > best.second) best = {d, fd};
    }
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids

SphereGrid fibonacci_grid(std::size_t count) {
  if (count == 0) throw Error(ErrorCode::kConfig, "grid needs at least one point");
  constexpr double kGoldenConjugate = 0.6180339887498949;  // (sqrt 5 - 1)/2
  SphereGrid grid;
  grid.points.reserve(count);
  grid.weights.assign(count, 1.0 / static_cast<double>(count));
  const double m = static_cast<double>(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double z = 1.0 - (2.0 * static_cast<double>(j) + 1.0) / m;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double turns = std::fmod(static_cast<double>(j) * kGoldenConjugate, 1.0);
    const double phi = 2.0 * std::numbers::pi * turns;
    grid.points.push_back(UnitDirection::normalized(Vec3(r * std::cos(phi), r * std::sin(phi), z)));
  }
  return grid;
}

double grid_spacing(std::size_t count) {
  return std::sqrt(4.0 * std::numbers::pi / static_cast<double>(std::max<std::size_t>(count, 1)));
}

SphereGrid rotate_grid(const SphereGrid& grid, const Rotation& r) {
  SphereGrid out;
  out.weights = grid.weights;
  out.points.reserve(grid.size());
  const Mat3 m = r.matrix();
  for (const UnitDirection& p : grid.points) out.points.push_back(UnitDirection::normalized(m * p.vec()));
  return out;
}

// ---------------------------------------------------------------------------
// Tallies and likelihood

OutcomeTally OutcomeTally::from_records(std::span<const MeasurementRecord> records) {
  OutcomeTally tally;
  std::map<std::array<double, 3>, std::size_t> index;
  for (const MeasurementRecord& r : records) {
    const std::array<double, 3> key{r.axis.x(), r.axis.y(), r.axis.z()};
    auto [it, inserted] = index.try_emplace(key, tally.groups.size());
    if (inserted) tally.groups.push_back({r.axis, 0.0, 0.0});
    Group& g = tally.groups[it->second];
    (r.effective_outcome() > 0 ? g.plus : g.minus) += 1.0;
  }
  return tally;
}

OutcomeTally OutcomeTally::expected(const UnitDirection& truth, std::span<const UnitDirection> axes, double count) {
  OutcomeTally tally;
  for (const UnitDirection& a : axes) {
    const double p_plus = std::clamp(0.5 * (1.0 + a.dot(truth)), 0.0, 1.0);
    tally.groups.push_back({a, count * p_plus, count * (1.0 - p_plus)});
  }
  return tally;
}

double OutcomeTally::total() const {
  double t = 0.0;
  for (const Group& g : groups) t += g.plus + g.minus;
  return t;
}

double log_likelihood(const UnitDirection& n, const OutcomeTally& tally) {
  double ll = 0.0;
  for (const OutcomeTally::Group& g : tally.groups) {
    const double c = std::clamp(g.axis.dot(n), -1.0, 1.0);
    if (g.plus > 0.0) {
      const double p = 0.5 * (1.0 + c);
      if (p <= 0.0) return kNegInf;
      ll += g.plus * std::log(p);
    }
    if (g.minus > 0.0) {
      const double p = 0.5 * (1.0 - c);
      if (p <= 0.0) return kNegInf;
      ll += g.minus * std::log(p);
    }
  }
  return ll;
}

double log_likelihood(const UnitDirection& n, std::span<const MeasurementRecord> records) {
  return log_likelihood(n, OutcomeTally::from_records(records));
}

// ---------------------------------------------------------------------------
// Tomographic

EstimationResult tomographic_estimate(const OutcomeTally& tally) {
  std::vector<const OutcomeTally::Group*> used;
  for (const auto& g : tally.groups) {
    if (g.plus + g.minus > 0.0) used.push_back(&g);
  }
  if (used.size() < 3) {
    throw Error(ErrorCode::kInsufficientRecords, "tomography needs records along three orthogonal axes");
  }
  if (used.size() > 3) throw Error(ErrorCode::kInvalidAxes, "tomography expects exactly three axes");
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      if (std::abs(used[i]->axis.dot(used[j]->axis)) > 1e-9) {
        throw Error(ErrorCode::kInvalidAxes, "tomography axes must be mutually orthogonal");
      }
    }
  }
  Vec3 raw = Vec3::Zero();
  for (const auto* g : used) raw += ((g->plus - g->minus) / (g->plus + g->minus)) * g->axis.vec();
  return from_raw_vector(raw, raw.norm());
}

EstimationResult tomographic_estimate(std::span<const MeasurementRecord> records) {
  return tomographic_estimate(OutcomeTally::from_records(records));
}

// ---------------------------------------------------------------------------
// Maximum likelihood

EstimationResult ml_estimate(const OutcomeTally& tally, const SphereGrid& grid, int refine_steps) {
  if (grid.size() == 0) throw Error(ErrorCode::kConfig, "empty grid");
  if (tally.total() <= 0.0) throw Error(ErrorCode::kInsufficientRecords, "ML needs at least one record");

  const std::vector<double> coarse = loglik_on_grid(tally, grid);
  std::size_t best_index = 0;
  for (std::size_t j = 1; j < coarse.size(); ++j) {
    if (coarse[j] > coarse[best_index]) best_index = j;
  }
  Vec3 best = grid.points[best_index].vec();
  double best_score = coarse[best_index];

  auto score_at = [&](const Vec3& v) { return log_likelihood(UnitDirection::normalized(v), tally); };

  // Chart centred on the incumbent b, which sits on the chart's equator:
  //   x(polar, azimuth) = cos(polar) u + sin(polar) (cos(azimuth) b + sin(azimuth) v)
  Vec3 u = perpendicular(best);
  double half_width = std::min(2.0 * grid_spacing(grid.size()), std::numbers::pi / 2.0);
  for (int step = 0; step < refine_steps; ++step) {
    for (int line = 0; line < 2; ++line) {
      u = (u - u.dot(best) * best).normalized();
      const Vec3 v = best.cross(u);
      const Vec3 b = best;
      auto chart = [&](double polar, double azimuth) -> Vec3 {
        return std::cos(polar) * u + std::sin(polar) * (std::cos(azimuth) * b + std::sin(azimuth) * v);
      };
      const double mid = line == 0 ? std::numbers::pi / 2.0 : 0.0;
      auto along = [&](double t) { return line == 0 ? chart(t, 0.0) : chart(std::numbers::pi / 2.0, t); };
      const auto [t, value] = golden_max([&](double s) { return score_at(along(s)); }, mid - half_width,
                                         mid + half_width);
      if (value > best_score) {
        best = along(t).normalized();
        best_score = value;
      }
    }
    half_width *= 0.5;
  }

  EstimationResult r;
  r.estimate = UnitDirection::normalized(best);
  r.score = best_score;
  r.raw = r.estimate.vec();
  return r;
}

EstimationResult ml_estimate(std::span<const MeasurementRecord> records, const SphereGrid& grid, int refine_steps) {
  if (records.empty()) throw Error(ErrorCode::kInsufficientRecords, "ML needs at least one record");
  return ml_estimate(OutcomeTally::from_records(records), grid, refine_steps);
}

// ---------------------------------------------------------------------------
// Bayesian posterior mean

EstimationResult bayes_mean_estimate(const OutcomeTally& tally, const SphereGrid& grid) {
  if (grid.size() == 0) throw Error(ErrorCode::kConfig, "empty grid");
  if (tally.total() <= 0.0) {
    // Posterior is the uniform prior, whose mean is the zero vector.
    return from_raw_vector(Vec3::Zero(), 0.0);
  }
  const std::vector<double> ll = loglik_on_grid(tally, grid);
  const double peak = *std::max_element(ll.begin(), ll.end());
  if (!std::isfinite(peak)) throw Error(ErrorCode::kDegeneratePosterior, "every grid point has zero likelihood");

  double mass = 0.0;
  Vec3 moment = Vec3::Zero();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double w = grid.weights[j] * std::exp(ll[j] - peak);
    mass += w;
    moment += w * grid.points[j].vec();
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::kDegeneratePosterior, "posterior weights vanish");
  return from_raw_vector(moment / mass, peak + std::log(mass));
}

EstimationResult bayes_mean_estimate(std::span<const MeasurementRecord> records, const SphereGrid& grid) {
  return bayes_mean_estimate(OutcomeTally::from_records(records), grid);
}

// ---------------------------------------------------------------------------
// Adaptive anti-correlation search

EstimationResult adaptive_anticorrelation_search(const CorrelationProbe& probe, std::size_t budget,
                                                 RandomStream& rng) {
  constexpr std::size_t kProbes = 6;
  if (budget < kProbes) throw Error(ErrorCode::kInsufficientBudget, "budget must be at least 6");

  std::vector<Vec3> directions{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                               -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  std::size_t remaining = budget;
  std::size_t round_budget = std::max(kProbes, (budget / 2) / kProbes * kProbes);
  double radius = std::numbers::pi / 4.0;
  Vec3 pick = Vec3::UnitZ();
  double pick_score = 0.0;

  while (remaining >= kProbes) {
    round_budget = std::min(round_budget, remaining / kProbes * kProbes);
    const std::size_t per_probe = round_budget / kProbes;
    std::vector<double> scores(kProbes, 0.0);
    for (std::size_t i = 0; i < kProbes; ++i) {
      const UnitDirection axis = UnitDirection::normalized(directions[i]);
      double sum = 0.0;
      // Anti-correlation strength: mean of -(alice_sign * bob_outcome).
      for (std::size_t s = 0; s < per_probe; ++s) sum -= probe(axis);
      scores[i] = sum / static_cast<double>(per_probe);
    }
    remaining -= round_budget;

    const double top = *std::max_element(scores.begin(), scores.end());
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < kProbes; ++i) {
      if (scores[i] == top) ties.push_back(i);
    }
    const std::size_t chosen =
        ties[std::min(ties.size() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(ties.size())))];
    pick = directions[chosen].normalized();
    pick_score = top;

    // Next round: the incumbent plus a ring of five at the shrunken radius.
    const Vec3 u = perpendicular(pick);
    const Vec3 v = pick.cross(u);
    directions.assign(1, pick);
    for (int k = 0; k < 5; ++k) {
      const double az = 2.0 * std::numbers::pi * k / 5.0;
      directions.push_back(std::cos(radius) * pick +
                           std::sin(radius) * (std::cos(az) * u + std::sin(az) * v));
    }
    radius *= 0.5;
    round_budget = std::max(kProbes, (remaining / 2) / kProbes * kProbes);
  }

  EstimationResult r;
  r.estimate = UnitDirection::normalized(pick);
  r.score = pick_score;
  r.raw = pick;
  return r;
}

}  // namespace qnav
