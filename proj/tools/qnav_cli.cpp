// qnav: seeded experiments on entanglement-based direction transfer.
//
//   qnav --experiment pair-compare --outcomes 6 --grid 2000 --restarts 10
//   qnav --experiment navigate --pairs 10000 --trials 100 --estimator ml --out nav.csv
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error,
// 4 anti-parallel advantage not reproduced (pair-compare).

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qnav/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

qnav::RealizationKind parse_realization(const std::string& name) {
  if (name == "spin-half" || name == "spin") return qnav::RealizationKind::kSpinHalf;
  if (name == "photon") return qnav::RealizationKind::kPhotonPolarization;
  if (name == "scalar") return qnav::RealizationKind::kScalar;
  throw qnav::Error(qnav::ErrorCode::kConfig, "unknown realization '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded experiments on entanglement-based direction transfer"};

  std::string experiment = "fidelity-curve";
  std::string estimator = "ml";
  std::string format = "csv";
  std::string sweep = "100,400,1600,6400";
  std::string realization = "spin-half";
  qnav::ExperimentConfig config;
  std::optional<double> lat;
  std::optional<double> lon;

  app.add_option("--experiment", experiment, "fidelity-curve | pair-compare | navigate | realizations")
      ->capture_default_str();
  app.add_option("--pairs", config.pairs, "Entangled pairs N per trial")->capture_default_str();
  app.add_option("--trials", config.trials, "Monte Carlo trials T")->capture_default_str();
  app.add_option("--seed", config.seed, "Master seed (64-bit)")->capture_default_str();
  app.add_option("--estimator", estimator,
                 "tomographic | ml | bayes | adaptive; comma list or 'all' for fidelity-curve")
      ->capture_default_str();
  app.add_option("--grid", config.grid_size, "Sphere grid points M")->capture_default_str();
  app.add_option("--outcomes", config.outcomes, "POVM outcomes K (pair-compare)")->capture_default_str();
  app.add_option("--restarts", config.restarts, "See-saw restarts R (pair-compare)")->capture_default_str();
  app.add_option("--max-iters", config.max_iters, "See-saw iteration cap (pair-compare)")->capture_default_str();
  app.add_option("--out", config.output_path, "Output file, '-' for stdout")->capture_default_str();
  app.add_option("--format", format, "csv | json")->capture_default_str();
  app.add_option("--sweep", sweep, "Comma-separated N values (fidelity-curve)")->capture_default_str();
  app.add_option("--realization", realization, "spin-half | photon | scalar (fidelity-curve, navigate)")
      ->capture_default_str();
  app.add_option("--lat", lat, "Fixed true latitude in degrees (navigate)");
  app.add_option("--lon", lon, "Fixed true longitude in degrees (navigate)");
  app.add_flag("--noiseless", config.noiseless, "Exact expectation values instead of sampled outcomes (navigate)");
  app.add_flag("--fix-hidden-frame", config.fix_hidden_frame, "Photon hidden frame is the identity (debug)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    config.experiment = qnav::parse_experiment(experiment);
    if (format == "csv") {
      config.format = qnav::OutputFormat::kCsv;
    } else if (format == "json") {
      config.format = qnav::OutputFormat::kJson;
    } else {
      throw qnav::Error(qnav::ErrorCode::kConfig, "unknown format '" + format + "'");
    }
    config.estimators.clear();
    const std::vector<std::string> names =
        estimator == "all" ? std::vector<std::string>{"tomographic", "ml", "bayes"} : split_list(estimator);
    for (const std::string& name : names) config.estimators.push_back(qnav::parse_estimator(name));
    config.sweep.clear();
    for (const std::string& n : split_list(sweep)) config.sweep.push_back(std::stoull(n));
    config.realization = parse_realization(realization);
    if (lat.has_value() != lon.has_value()) {
      throw qnav::Error(qnav::ErrorCode::kConfig, "--lat and --lon must be given together");
    }
    if (lat) config.position = qnav::GeoPosition(*lat, *lon);
    config.validate();

    const qnav::ExperimentOutput out = qnav::run_experiment(config);
    qnav::write_output(config, qnav::render(config, out.table));
    if (!out.summary.empty()) std::cerr << out.summary << "\n";
    return out.exit_code;
  } catch (const qnav::Error& e) {
    std::cerr << "qnav: " << e.what() << "\n";
    return e.code() == qnav::ErrorCode::kIo ? kExitIo : kExitConfig;
  } catch (const std::logic_error& e) {
    // std::stoull on a malformed --sweep value
    std::cerr << "qnav: invalid value: " << e.what() << "\n";
    return kExitConfig;
  }
}
