#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adaptive_ac/config.hpp"
#include "adaptive_ac/harness.hpp"

namespace adaptive_ac {

// A fully specified single training run: environment id, optional fixed
// repeat wrapper, and the training configuration.
struct RunSpec {
  std::string env_id = "chain";
  int env_repeat = 1;
  TrainConfig train{};
};

EnvFactory make_env_factory(const std::string& env_id, int env_repeat);

// Applies every recognised key of `cfg` to `run`. Unknown keys are left for
// the caller; see README for the list.
void apply_run_config(const ConfigMap& cfg, RunSpec& run);
// Inverse of apply_run_config: every run setting as a key/value entry.
ConfigMap to_config(const RunSpec& run);

TrainingLog run_single(const RunSpec& run);

enum class Experiment { kDiscount, kRewardScale, kRepeats, kSingle };

std::string experiment_name(Experiment e);

struct SweepSpec {
  Experiment experiment = Experiment::kSingle;
  std::vector<double> sweep_values;
  int num_seeds = 20;
  long long budget = 5000;
  bool adaptive_arm = true;
  uint64_t master_seed = 0;
  int jobs = 1;
  RunSpec base{};
  double meta_gamma_init = 0.95;
  double meta_lambda_init = 0.95;

  void validate() const;
};

// Defaults for each study: grids, step budget, seeds and the tabular agent's
// hyper-parameters.
SweepSpec default_sweep_spec(Experiment experiment);

// Applies sweep-level keys (values, seeds, budget, jobs, adaptive_arm,
// meta_gamma_init, meta_lambda_init, seed) and all run keys to the base run.
void apply_sweep_config(const ConfigMap& cfg, SweepSpec& spec);

struct SweepRow {
  std::string experiment;
  std::string arm_label;
  double sweep_value = 0.0;
  uint64_t seed = 0;
  double final_metric = 0.0;
  std::string horizon_trace_path;  // relative to the output directory
  // Not serialized to sweep.csv.
  RunSpec run;
  TrainingLog log;
};

struct SweepFailure {
  std::string arm_label;
  double sweep_value = 0.0;
  uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::string experiment;
  std::vector<SweepRow> rows;  // arm-major, then value, then seed
  std::vector<SweepFailure> failures;

  bool ok() const { return failures.empty(); }
};

SweepResult run_discount_sweep(const SweepSpec& spec);
SweepResult run_scale_sweep(const SweepSpec& spec);
SweepResult run_repeat_sweep(const SweepSpec& spec);
// One arm ("single") over num_seeds seeds of spec.base.
SweepResult run_single_sweep(const SweepSpec& spec);
SweepResult run_sweep(const SweepSpec& spec);

struct ArmSummary {
  std::string arm_label;
  double sweep_value = 0.0;
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
};

std::vector<ArmSummary> summarize(const SweepResult& result);
const ArmSummary* find_summary(const std::vector<ArmSummary>& summaries,
                               const std::string& arm, double value);

// Writes sweep.csv, summary.csv, plotdata/*.tsv, traces/*.csv and the
// per-arm run configs under configs/. Throws std::runtime_error with the
// offending path on I/O failure.
void emit_outputs(const SweepResult& result, const std::filesystem::path& out_dir);

}  // namespace adaptive_ac
