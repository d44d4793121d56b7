#pragma once

// Seeded experiment runner behind the `qnav` command-line tool.
//
// Trial t of an experiment draws from derive_seed(seed, <experiment>, t), so
// adding trials never changes earlier ones and rows are identical for any
// thread count.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qnav/navigation.hpp"
#include "qnav/povmopt.hpp"

namespace qnav {

enum class Experiment { kFidelityCurve, kPairCompare, kNavigate, kRealizations };
enum class OutputFormat { kCsv, kJson };

Experiment parse_experiment(const std::string& name);
const char* to_string(Experiment e);

struct ExperimentConfig {
  Experiment experiment = Experiment::kFidelityCurve;
  std::size_t pairs = 1000;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::vector<EstimatorKind> estimators{EstimatorKind::kMaximumLikelihood};
  std::size_t grid_size = kDefaultGridSize;
  int outcomes = 6;
  int restarts = 10;
  std::string output_path = "-";
  OutputFormat format = OutputFormat::kCsv;
  // fidelity-curve only
  std::vector<std::size_t> sweep{100, 400, 1600, 6400};
  RealizationKind realization = RealizationKind::kSpinHalf;
  // navigate only
  std::optional<GeoPosition> position;
  bool noiseless = false;
  // realizations only
  bool fix_hidden_frame = false;
  int max_iters = kDefaultSeesawIterations;

  /// Throws kConfig on non-positive counts or inconsistent options.
  void validate() const;
};

using Cell = std::variant<std::string, std::int64_t, double>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ExperimentOutput {
  ResultTable table;
  std::string summary;  // human-readable, may be empty
  int exit_code = 0;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

ExperimentOutput cmd_fidelity_curve(const ExperimentConfig& config);
ExperimentOutput cmd_pair_compare(const ExperimentConfig& config);
ExperimentOutput cmd_navigate(const ExperimentConfig& config);
ExperimentOutput cmd_realizations(const ExperimentConfig& config);

/// Comma-separated, header row, LF line endings, shortest round-trip doubles.
std::string render_csv(const ResultTable& table);
/// {"config": {...}, "rows": [{column: value, ...}, ...]}
std::string render_json(const ExperimentConfig& config, const ResultTable& table);
std::string render(const ExperimentConfig& config, const ResultTable& table);

/// Writes to output_path, or stdout for "-". Throws kIo.
void write_output(const ExperimentConfig& config, const std::string& text);

std::string format_number(double value);

}  // namespace qnav
