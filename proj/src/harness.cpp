#include "qnav/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include "json.hpp"

#include "qnav/kernels.hpp"
#include "qnav/povmopt.hpp"

namespace qnav {

Experiment parse_experiment(const std::string& name) {
  if (name == "fidelity-curve") return Experiment::kFidelityCurve;
  if (name == "pair-compare") return Experiment::kPairCompare;
  if (name == "navigate") return Experiment::kNavigate;
  if (name == "realizations") return Experiment::kRealizations;
  throw Error(ErrorCode::kConfig, "unknown experiment '" + name + "'");
}

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::kFidelityCurve: return "fidelity-curve";
    case Experiment::kPairCompare: return "pair-compare";
    case Experiment::kNavigate: return "navigate";
    case Experiment::kRealizations: return "realizations";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
  if (pairs == 0) fail("--pairs must be positive");
  if (trials == 0 && experiment != Experiment::kNavigate) fail("--trials must be positive");
  if (grid_size == 0) fail("--grid must be positive");
  if (outcomes < 2) fail("--outcomes must be at least 2");
  if (restarts < 1) fail("--restarts must be positive");
  if (max_iters < 1) fail("--max-iters must be positive");
  if (estimators.empty()) fail("at least one estimator is required");
  if (experiment == Experiment::kFidelityCurve && sweep.empty()) fail("--sweep must not be empty");
  for (std::size_t n : sweep) {
    if (n == 0) fail("--sweep values must be positive");
  }
  if (noiseless && experiment != Experiment::kNavigate) fail("--noiseless applies to navigate only");
  const std::vector<std::size_t> sizes = experiment == Experiment::kFidelityCurve ? sweep : std::vector{pairs};
  if (experiment != Experiment::kPairCompare) {
    for (EstimatorKind e : estimators) {
      for (std::size_t n : sizes) {
        if (n < minimum_pairs(e)) {
          fail(std::string(to_string(e)) + " needs at least " + std::to_string(minimum_pairs(e)) + " pairs");
        }
      }
      if (noiseless && e != EstimatorKind::kTomographic && e != EstimatorKind::kMaximumLikelihood) {
        fail("--noiseless supports the tomographic and ml estimators");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Shared trial statistics

namespace {

struct TrialOutcome {
  double fidelity = 0.0;
  double angle = 0.0;
};

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct Summary {
  double mean_fidelity = 0.0;
  double median_fidelity = 0.0;
  double rms_angle = 0.0;
};

Summary summarize(const std::vector<TrialOutcome>& outcomes) {
  Summary s;
  std::vector<double> fid;
  fid.reserve(outcomes.size());
  double sum = 0.0;
  double sq = 0.0;
  for (const TrialOutcome& o : outcomes) {
    fid.push_back(o.fidelity);
    sum += o.fidelity;
    sq += o.angle * o.angle;
  }
  const double n = static_cast<double>(outcomes.size());
  s.mean_fidelity = sum / n;
  s.median_fidelity = median(fid);
  s.rms_angle = std::sqrt(sq / n);
  return s;
}

RescueOptions base_options(const ExperimentConfig& config) {
  RescueOptions o;
  o.pairs = config.pairs;
  o.estimator = config.estimators.front();
  o.grid_size = config.grid_size;
  o.realization = config.realization;
  o.fix_hidden_frame = config.fix_hidden_frame;
  o.noiseless = config.noiseless;
  return o;
}

std::vector<TrialOutcome> run_trials(const ExperimentConfig& config, RescueOptions options, const SphereGrid& grid) {
  return map_trials(config.trials, [&](std::size_t t) {
    RescueOptions local = options;
    local.seed = derive_seed(config.seed, to_string(config.experiment), t);
    const RescueReport r = run_rescue(local, &grid);
    return TrialOutcome{0.5 * (1.0 + std::cos(r.angular_error)), r.angular_error};
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiments

ExperimentOutput cmd_fidelity_curve(const ExperimentConfig& config) {
  config.validate();
  const SphereGrid grid = fibonacci_grid(config.grid_size);
  ExperimentOutput out;
  out.table.columns = {"estimator", "N", "trials", "mean_fidelity", "median_fidelity", "rms_angle_rad"};
  for (std::size_t n : config.sweep) {
    for (EstimatorKind e : config.estimators) {
      RescueOptions o = base_options(config);
      o.pairs = n;
      o.estimator = e;
      const Summary s = summarize(run_trials(config, o, grid));
      out.table.rows.push_back({std::string(to_string(e)), static_cast<std::int64_t>(n),
                                static_cast<std::int64_t>(config.trials), s.mean_fidelity, s.median_fidelity,
                                s.rms_angle});
    }
  }
  return out;
}

ExperimentOutput cmd_pair_compare(const ExperimentConfig& config) {
  config.validate();
  const SphereGrid grid = fibonacci_grid(config.grid_size);
  ExperimentOutput out;
  out.table.columns = {"ensemble", "K", "grid_size", "restarts", "best_fidelity", "iterations", "converged"};
  double parallel = 0.0;
  double antiparallel = 0.0;
  for (EnsembleKind kind : {EnsembleKind::kSingle, EnsembleKind::kParallelPair, EnsembleKind::kAntiParallelPair}) {
    const DirectionalEnsemble ensemble(kind, grid);
    const RestartSummary s =
        seesaw_best_of(ensemble, config.outcomes, config.restarts, derive_seed(config.seed, "pair-compare", 0),
                       config.max_iters);
    const double best = s.best.trace.objective_history.back();
    if (kind == EnsembleKind::kParallelPair) parallel = best;
    if (kind == EnsembleKind::kAntiParallelPair) antiparallel = best;
    out.table.rows.push_back({std::string(to_string(kind)), static_cast<std::int64_t>(config.outcomes),
                              static_cast<std::int64_t>(config.grid_size),
                              static_cast<std::int64_t>(config.restarts), best,
                              static_cast<std::int64_t>(s.best.trace.iterations),
                              std::string(s.best.trace.converged ? "true" : "false")});
  }
  const bool holds = antiparallel > parallel;
  out.summary = std::string("antiparallel - parallel = ") + format_number(antiparallel - parallel) +
                (holds ? "" : " (expected a positive gap)");
  out.exit_code = holds ? 0 : 4;
  return out;
}

ExperimentOutput cmd_navigate(const ExperimentConfig& config) {
  config.validate();
  const SphereGrid grid = fibonacci_grid(config.grid_size);
  RescueOptions options = base_options(config);
  options.true_position = config.position;

  const auto reports = map_trials(config.trials, [&](std::size_t t) {
    RescueOptions local = options;
    local.seed = derive_seed(config.seed, "navigate", t);
    return run_rescue(local, &grid);
  });

  ExperimentOutput out;
  out.table.columns = {"trial", "true_lat", "true_lon", "est_lat", "est_lon", "angle_rad", "distance_km"};
  std::vector<double> distances;
  for (std::size_t t = 0; t < reports.size(); ++t) {
    const RescueReport& r = reports[t];
    out.table.rows.push_back({static_cast<std::int64_t>(t), r.true_position.latitude(), r.true_position.longitude(),
                              r.estimated_position.latitude(), r.estimated_position.longitude(), r.angular_error,
                              r.distance_error});
    distances.push_back(r.distance_error);
  }
  out.summary = distances.empty() ? "n/a"
                                  : "median distance_km: " + format_number(median(distances));
  return out;
}

ExperimentOutput cmd_realizations(const ExperimentConfig& config) {
  config.validate();
  const SphereGrid grid = fibonacci_grid(config.grid_size);
  ExperimentOutput out;
  out.table.columns = {"realization", "N", "mean_fidelity", "median_fidelity"};
  for (RealizationKind kind :
       {RealizationKind::kSpinHalf, RealizationKind::kPhotonPolarization, RealizationKind::kScalar}) {
    RescueOptions o = base_options(config);
    o.realization = kind;
    const Summary s = summarize(run_trials(config, o, grid));
    out.table.rows.push_back(
        {std::string(to_string(kind)), static_cast<std::int64_t>(config.pairs), s.mean_fidelity, s.median_fidelity});
  }
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  switch (config.experiment) {
    case Experiment::kFidelityCurve: return cmd_fidelity_curve(config);
    case Experiment::kPairCompare: return cmd_pair_compare(config);
    case Experiment::kNavigate: return cmd_navigate(config);
    case Experiment::kRealizations: return cmd_realizations(config);
  }
  throw Error(ErrorCode::kConfig, "unknown experiment");
}

// ---------------------------------------------------------------------------
// Output

std::string format_number(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::kConfig, "refusing to emit a non-finite number");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return format_number(std::get<double>(c));
}

}  // namespace

std::string render_csv(const ResultTable& table) {
  std::string text;
  for (std::size_t i = 0; i < table.columns.size(); ++i) text += (i ? "," : "") + table.columns[i];
  text += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + cell_text(row[i]);
    text += '\n';
  }
  return text;
}

std::string render_json(const ExperimentConfig& config, const ResultTable& table) {
  using nlohmann::ordered_json;
  ordered_json cfg;
  cfg["experiment"] = to_string(config.experiment);
  cfg["pairs"] = config.pairs;
  cfg["trials"] = config.trials;
  cfg["seed"] = config.seed;
  ordered_json estimators = ordered_json::array();
  for (EstimatorKind e : config.estimators) estimators.push_back(to_string(e));
  cfg["estimator"] = estimators;
  cfg["grid_size"] = config.grid_size;
  cfg["outcomes"] = config.outcomes;
  cfg["restarts"] = config.restarts;
  cfg["sweep"] = config.sweep;
  cfg["realization"] = to_string(config.realization);
  cfg["noiseless"] = config.noiseless;
  cfg["fix_hidden_frame"] = config.fix_hidden_frame;
  cfg["max_iters"] = config.max_iters;
  if (config.position) {
    cfg["lat"] = config.position->latitude();
    cfg["lon"] = config.position->longitude();
  }

  ordered_json rows = ordered_json::array();
  for (const auto& row : table.rows) {
    ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) format_number(v);  // finiteness
            obj[table.columns[i]] = v;
          },
          row[i]);
    }
    rows.push_back(std::move(obj));
  }
  ordered_json doc;
  doc["config"] = std::move(cfg);
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string render(const ExperimentConfig& config, const ResultTable& table) {
  return config.format == OutputFormat::kCsv ? render_csv(table) : render_json(config, table);
}

void write_output(const ExperimentConfig& config, const std::string& text) {
  if (config.output_path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorCode::kIo, "failed writing to stdout");
    return;
  }
  std::ofstream file(config.output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot open '" + config.output_path + "' for writing");
  file << text;
  file.flush();
  if (!file) throw Error(ErrorCode::kIo, "failed writing '" + config.output_path + "'");
}

}  // namespace qnav
