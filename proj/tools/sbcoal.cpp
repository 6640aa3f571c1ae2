// sbcoal: command-line driver for the seed-bank coalescent experiment suite.
//
// Exit codes: 0 = all rows pass, 1 = at least one acceptance row fails,
// 2 = configuration or usage error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sbcoal/experiments.hpp"

namespace exps = sbcoal::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Seed-bank coalescent simulation and verification suite"};
  app.require_subcommand(1);

  struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> replicates;
    std::optional<int> threads;
    std::string out_csv;
    std::string out_json;
    bool quiet = false;
  };
  Flags flags;

  for (const auto& name : exps::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", flags.config_path, "key = value config file");
    sub->add_option("--seed", flags.seed, "master seed (overrides config)");
    sub->add_option("--replicates", flags.replicates, "replicate count (overrides config)");
    sub->add_option("--threads", flags.threads, "worker threads, 0 = all cores");
    sub->add_option("--out", flags.out_csv, "CSV output path");
    sub->add_option("--json", flags.out_json, "JSON summary path");
    sub->add_flag("--quiet", flags.quiet, "suppress the per-row report");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    exps::ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = exps::load_config_file(flags.config_path);
    cfg.experiment = app.get_subcommands().front()->get_name();
    if (flags.seed) cfg.master_seed = *flags.seed;
    if (flags.replicates) cfg.replicates = *flags.replicates;
    if (flags.threads) cfg.threads = *flags.threads;
    if (!flags.out_csv.empty()) cfg.out_csv = flags.out_csv;
    if (!flags.out_json.empty()) cfg.out_json = flags.out_json;

    const exps::ExperimentResult result = exps::run_experiment(cfg);

    if (!cfg.out_csv.empty()) exps::write_file(cfg.out_csv, exps::to_csv(result));
    if (!cfg.out_json.empty()) exps::write_file(cfg.out_json, exps::to_json(result));

    if (!flags.quiet) {
      std::fputs(exps::to_csv(result).c_str(), stdout);
    }
    std::fprintf(stderr, "%s: %zu rows, %s\n", result.experiment.c_str(), result.rows.size(),
                 result.all_pass() ? "all pass" : "FAILURES present");
    return result.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
