#ifndef SBCOAL_EXPERIMENTS_HPP
#define SBCOAL_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sbcoal::experiments {

// Flat key-value experiment configuration. Values for experiment-specific
// keys live in `extra` as strings and are parsed by the runner; command-line
// flags are applied on top of the file, so flags win.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t master_seed = 20150403;
  std::int64_t replicates = 0;  // 0 = experiment default
  int threads = 0;              // 0 = available parallelism
  std::string out_csv;
  std::string out_json;
  std::map<std::string, std::string> extra;
};

// Parses `key = value` lines; '#' starts a comment. Unknown keys go to extra.
ExperimentConfig load_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct ResultRow {
  std::vector<std::string> params;  // one value per param column
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> oracle;
  double tolerance = 0.0;
  bool pass = false;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<std::string> param_columns;
  std::vector<ResultRow> rows;
  ExperimentConfig config;  // echoed into the JSON summary

  bool all_pass() const;
};

ExperimentResult run_duality(const ExperimentConfig& cfg);
ExperimentResult run_tmrca_scaling(const ExperimentConfig& cfg);
ExperimentResult run_fixation(const ExperimentConfig& cfg);
ExperimentResult run_generator_convergence(const ExperimentConfig& cfg);
ExperimentResult run_ancestry_validation(const ExperimentConfig& cfg);
ExperimentResult run_deactivation_stats(const ExperimentConfig& cfg);
ExperimentResult run_coming_down_contrast(const ExperimentConfig& cfg);

const std::vector<std::string>& experiment_names();
// Dispatch by cfg.experiment; throws std::invalid_argument for unknown names.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// RFC 4180 CSV with a header row; '.' decimal separator, %.12g numbers.
std::string to_csv(const ExperimentResult& result);
// JSON summary mirroring the rows plus a config echo.
std::string to_json(const ExperimentResult& result);

void write_file(const std::string& path, const std::string& contents);

}  // namespace sbcoal::experiments

#endif
