// Command-line front end: the three toy parameter studies and single runs.
//
//   adaptive_ac sweep-discount --seeds 20 --budget 5000 --out results/discount
//   adaptive_ac single --seed 3 --config results/discount/configs/discount_fixed_0.8.cfg

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptive_ac/config.hpp"
#include "adaptive_ac/experiments.hpp"

namespace {

using adaptive_ac::ConfigMap;
using adaptive_ac::Experiment;

struct CommonOptions {
  std::optional<int> seeds;
  std::optional<long long> budget;
  std::optional<int> jobs;
  std::optional<long long> seed;
  std::string out;
  std::string config;
  std::string values;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--seeds", opts.seeds, "Number of seeds per arm");
  cmd->add_option("--budget", opts.budget, "Primitive environment steps per run");
  cmd->add_option("--out", opts.out, "Output directory");
  cmd->add_option("--config", opts.config, "key = value configuration file");
  cmd->add_option("--jobs", opts.jobs, "Runs executed concurrently")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opts.seed,
                  "Master seed (falls back to $ADAPTIVE_AC_SEED, then 0)");
  cmd->add_option("--values", opts.values, "Comma-separated sweep values");
  cmd->add_option("--set", opts.overrides, "Extra key=value override (repeatable)");
}

ConfigMap collect_config(const CommonOptions& opts) {
  ConfigMap cfg;
  if (!opts.config.empty()) cfg = ConfigMap::load(opts.config);
  if (!cfg.contains("seed")) {
    if (const char* env = std::getenv("ADAPTIVE_AC_SEED")) {
      cfg.set("seed", env);
    }
  }
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seeds) cfg.set("seeds", std::to_string(*opts.seeds));
  if (opts.budget) cfg.set("budget", std::to_string(*opts.budget));
  if (opts.jobs) cfg.set("jobs", std::to_string(*opts.jobs));
  if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
  if (!opts.values.empty()) cfg.set("values", opts.values);
  return cfg;
}

int run(Experiment experiment, const CommonOptions& opts) {
  adaptive_ac::SweepSpec spec = adaptive_ac::default_sweep_spec(experiment);
  if (experiment == Experiment::kSingle) spec.num_seeds = 1;
  ConfigMap cfg = collect_config(opts);
  if (experiment == Experiment::kSingle && cfg.contains("budget") == false) {
    cfg.set("budget", std::to_string(spec.base.train.harness.total_env_steps));
  }
  adaptive_ac::apply_sweep_config(cfg, spec);

  const adaptive_ac::SweepResult result = adaptive_ac::run_sweep(spec);
  if (!opts.out.empty()) adaptive_ac::emit_outputs(result, opts.out);

  const auto summaries = adaptive_ac::summarize(result);
  for (const auto& s : summaries) {
    std::cout << result.experiment << ' ' << s.arm_label << ' '
              << adaptive_ac::format_real(s.sweep_value) << "  mean="
              << adaptive_ac::format_real(s.mean)
              << "  se=" << adaptive_ac::format_real(s.std_error) << "  n=" << s.n
              << '\n';
  }
  if (experiment == Experiment::kSingle) {
    for (const auto& row : result.rows) {
      std::cout << "seed " << row.seed << " final_metric "
                << adaptive_ac::format_real(row.final_metric) << " gamma "
                << adaptive_ac::format_real(row.log.final_gamma) << " lambda "
                << adaptive_ac::format_real(row.log.final_lambda) << '\n';
    }
  }
  for (const auto& f : result.failures) {
    std::cerr << "FAILED arm=" << f.arm_label
              << " value=" << adaptive_ac::format_real(f.sweep_value)
              << " seed=" << f.seed << ": " << f.message << '\n';
  }
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive actor-critic toy studies"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    Experiment experiment;
    CommonOptions opts;
  };
  std::vector<Entry> entries = {
      {"sweep-discount", "Fixed discounts vs meta-learned discount on the chain",
       Experiment::kDiscount, {}},
      {"sweep-scale", "Vanilla vs normalized critic under reward scaling",
       Experiment::kRewardScale, {}},
      {"sweep-repeats", "Fixed vs learned action repeats on the cycle",
       Experiment::kRepeats, {}},
      {"single", "One configuration, one or more seeds", Experiment::kSingle, {}},
  };
  std::vector<CLI::App*> commands;
  for (Entry& e : entries) {
    CLI::App* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, e.opts);
    commands.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (commands[i]->parsed()) return run(entries[i].experiment, entries[i].opts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
