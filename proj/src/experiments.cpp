#include "adaptive_ac/experiments.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace adaptive_ac {

namespace {

std::string target_mode_name(TargetMode m) {
  return m == TargetMode::kLambda ? "lambda" : "nstep";
}

TargetMode parse_target_mode(const std::string& s) {
  if (s == "lambda") return TargetMode::kLambda;
  if (s == "nstep") return TargetMode::kNStep;
  throw std::invalid_argument("target_mode: expected lambda or nstep, got '" +
                              s + "'");
}

std::string commitment_name(CommitmentMode m) {
  switch (m) {
    case CommitmentMode::kNone:
      return "none";
    case CommitmentMode::kFixed:
      return "fixed";
    case CommitmentMode::kLearned:
      return "learned";
  }
  return "none";
}

CommitmentMode parse_commitment(const std::string& s) {
  if (s == "none") return CommitmentMode::kNone;
  if (s == "fixed") return CommitmentMode::kFixed;
  if (s == "learned") return CommitmentMode::kLearned;
  throw std::invalid_argument("commitment: expected none, fixed or learned, got '" +
                              s + "'");
}

std::string bool_name(bool b) { return b ? "true" : "false"; }

// Compact label for file names, e.g. 0.001 -> "0.001", 1000 -> "1000".
std::string value_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Task {
  std::string arm;
  double value = 0.0;
  RunSpec run;
};

std::string trace_path(const std::string& experiment, const Task& task,
                       uint64_t seed) {
  return "traces/" + experiment + "_" + task.arm + "_" +
         value_label(task.value) + "_seed" + std::to_string(seed) + ".csv";
}

SweepResult run_tasks(const SweepSpec& spec, const std::vector<Task>& tasks) {
  spec.validate();
  SweepResult result;
  result.experiment = experiment_name(spec.experiment);
  const int seeds = spec.num_seeds;
  const int total = static_cast<int>(tasks.size()) * seeds;
  std::vector<SweepRow> rows(total);
  std::vector<std::string> errors(total);

#pragma omp parallel for num_threads(spec.jobs) schedule(dynamic)
  for (int job = 0; job < total; ++job) {
    const Task& task = tasks[job / seeds];
    const uint64_t seed = spec.master_seed + static_cast<uint64_t>(job % seeds);
    SweepRow& row = rows[job];
    row.experiment = result.experiment;
    row.arm_label = task.arm;
    row.sweep_value = task.value;
    row.seed = seed;
    row.horizon_trace_path = trace_path(result.experiment, task, seed);
    row.run = task.run;
    row.run.train.harness.seed = seed;
    row.run.train.harness.total_env_steps = spec.budget;
    try {
      row.log = run_single(row.run);
      row.final_metric = row.log.final_metric();
    } catch (const std::exception& e) {
      errors[job] = e.what();
    }
  }

  for (int job = 0; job < total; ++job) {
    if (errors[job].empty()) {
      result.rows.push_back(std::move(rows[job]));
    } else {
      result.failures.push_back({rows[job].arm_label, rows[job].sweep_value,
                                 rows[job].seed, errors[job]});
    }
  }
  return result;
}

}  // namespace

EnvFactory make_env_factory(const std::string& env_id, int env_repeat) {
  // Validate eagerly so bad ids fail before any worker starts.
  make_env(env_id);
  if (env_repeat < 1) {
    throw std::invalid_argument("env_repeat must be >= 1");
  }
  return [env_id, env_repeat]() -> std::unique_ptr<Environment> {
    auto env = make_env(env_id);
    if (env_repeat == 1) return env;
    return std::make_unique<FixedRepeatWrapper>(std::move(env), env_repeat);
  };
}

void apply_run_config(const ConfigMap& cfg, RunSpec& run) {
  TrainConfig& t = run.train;
  LearnerConfig& lc = t.inner.learner;
  run.env_id = cfg.get_string("env", run.env_id);
  run.env_repeat = static_cast<int>(cfg.get_int("env_repeat", run.env_repeat));
  t.harness.num_envs = static_cast<int>(cfg.get_int("num_envs", t.harness.num_envs));
  t.harness.rollout_len =
      static_cast<int>(cfg.get_int("rollout_len", t.harness.rollout_len));
  t.harness.total_env_steps = cfg.get_int("budget", t.harness.total_env_steps);
  t.harness.seed = static_cast<uint64_t>(
      cfg.get_int("seed", static_cast<long long>(t.harness.seed)));
  t.harness.threads = static_cast<int>(cfg.get_int("threads", t.harness.threads));
  lc.learning_rate = cfg.get_real("learning_rate", lc.learning_rate);
  lc.entropy_cost = cfg.get_real("entropy_cost", lc.entropy_cost);
  lc.baseline_cost = cfg.get_real("baseline_cost", lc.baseline_cost);
  lc.max_grad_norm = cfg.get_real("max_grad_norm", lc.max_grad_norm);
  lc.clip_rewards = cfg.get_bool("clip_rewards", lc.clip_rewards);
  t.gamma = cfg.get_real("gamma", t.gamma);
  t.lambda = cfg.get_real("lambda", t.lambda);
  if (cfg.contains("target_mode")) {
    t.inner.target_mode = parse_target_mode(cfg.get_string("target_mode", ""));
  }
  t.inner.popart = cfg.get_bool("popart", t.inner.popart);
  t.initial_stats.step_size =
      cfg.get_real("popart_step_size", t.initial_stats.step_size);
  t.metagrad = cfg.get_bool("metagrad", t.metagrad);
  t.meta.meta_learning_rate =
      cfg.get_real("meta_learning_rate", t.meta.meta_learning_rate);
  t.meta.adapt_gamma = cfg.get_bool("meta_adapt_gamma", t.meta.adapt_gamma);
  t.meta.adapt_lambda = cfg.get_bool("meta_adapt_lambda", t.meta.adapt_lambda);
  if (cfg.contains("meta_value_cost")) {
    const std::string v = cfg.get_string("meta_value_cost", "");
    if (v == "auto") {
      t.inner.meta_value_cost.reset();
    } else {
      t.inner.meta_value_cost = cfg.get_real("meta_value_cost", 0.0);
    }
  }
  if (cfg.contains("commitment")) {
    t.commitment.mode = parse_commitment(cfg.get_string("commitment", ""));
  }
  t.commitment.fixed_repeats =
      static_cast<int>(cfg.get_int("fixed_repeats", t.commitment.fixed_repeats));
  t.commitment.max_repeats =
      static_cast<int>(cfg.get_int("max_repeats", t.commitment.max_repeats));
}

ConfigMap to_config(const RunSpec& run) {
  const TrainConfig& t = run.train;
  const LearnerConfig& lc = t.inner.learner;
  ConfigMap cfg;
  cfg.set("env", run.env_id);
  cfg.set("env_repeat", std::to_string(run.env_repeat));
  cfg.set("num_envs", std::to_string(t.harness.num_envs));
  cfg.set("rollout_len", std::to_string(t.harness.rollout_len));
  cfg.set("budget", std::to_string(t.harness.total_env_steps));
  cfg.set("seed", std::to_string(t.harness.seed));
  cfg.set("threads", std::to_string(t.harness.threads));
  cfg.set("learning_rate", format_real(lc.learning_rate));
  cfg.set("entropy_cost", format_real(lc.entropy_cost));
  cfg.set("baseline_cost", format_real(lc.baseline_cost));
  cfg.set("max_grad_norm", format_real(lc.max_grad_norm));
  cfg.set("clip_rewards", bool_name(lc.clip_rewards));
  cfg.set("gamma", format_real(t.gamma));
  cfg.set("lambda", format_real(t.lambda));
  cfg.set("target_mode", target_mode_name(t.inner.target_mode));
  cfg.set("popart", bool_name(t.inner.popart));
  cfg.set("popart_step_size", format_real(t.initial_stats.step_size));
  cfg.set("metagrad", bool_name(t.metagrad));
  cfg.set("meta_learning_rate", format_real(t.meta.meta_learning_rate));
  cfg.set("meta_adapt_gamma", bool_name(t.meta.adapt_gamma));
  cfg.set("meta_adapt_lambda", bool_name(t.meta.adapt_lambda));
  cfg.set("meta_value_cost", t.inner.meta_value_cost
                                 ? format_real(*t.inner.meta_value_cost)
                                 : std::string("auto"));
  cfg.set("commitment", commitment_name(t.commitment.mode));
  cfg.set("fixed_repeats", std::to_string(t.commitment.fixed_repeats));
  cfg.set("max_repeats", std::to_string(t.commitment.max_repeats));
  return cfg;
}

TrainingLog run_single(const RunSpec& run) {
  return train(make_env_factory(run.env_id, run.env_repeat), run.train);
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kDiscount:
      return "discount";
    case Experiment::kRewardScale:
      return "scale";
    case Experiment::kRepeats:
      return "repeats";
    case Experiment::kSingle:
      return "single";
  }
  return "single";
}

void SweepSpec::validate() const {
  if (num_seeds < 1) throw std::invalid_argument("SweepSpec: num_seeds < 1");
  if (budget < 0) throw std::invalid_argument("SweepSpec: negative budget");
  if (jobs < 1) throw std::invalid_argument("SweepSpec: jobs < 1");
  if (experiment != Experiment::kSingle && sweep_values.empty()) {
    throw std::invalid_argument("SweepSpec: empty sweep_values");
  }
}

SweepSpec default_sweep_spec(Experiment experiment) {
  SweepSpec spec;
  spec.experiment = experiment;
  RunSpec& run = spec.base;
  TrainConfig& t = run.train;
  t.harness.num_envs = 1;
  t.harness.rollout_len = 15;
  t.harness.total_env_steps = 5000;
  t.inner.target_mode = TargetMode::kLambda;
  t.inner.learner.learning_rate = 0.003;
  // Step sizes and clipping are tuned per study; clipping is off unless set.
  t.inner.learner.max_grad_norm = std::numeric_limits<double>::infinity();
  t.gamma = 0.8;
  t.lambda = 0.95;
  switch (experiment) {
    case Experiment::kDiscount:
      run.env_id = "chain";
      spec.sweep_values = {0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0};
      t.meta.meta_learning_rate = 1.0;
      t.meta.adapt_lambda = false;
      t.inner.meta_value_cost = 0.0;
      break;
    case Experiment::kRewardScale:
      run.env_id = "chain";
      spec.sweep_values = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
      t.inner.learner.learning_rate = 0.3;
      t.inner.learner.max_grad_norm = 5.0;
      break;
    case Experiment::kRepeats:
      run.env_id = "cycle";
      t.gamma = 0.9;
      t.lambda = 0.8;
      t.inner.learner.learning_rate = 0.1;
      t.commitment.max_repeats = 10;
      spec.sweep_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
      break;
    case Experiment::kSingle:
      run.env_id = "chain";
      break;
  }
  return spec;
}

void apply_sweep_config(const ConfigMap& cfg, SweepSpec& spec) {
  spec.sweep_values = cfg.get_reals("values", spec.sweep_values);
  spec.num_seeds = static_cast<int>(cfg.get_int("seeds", spec.num_seeds));
  spec.budget = cfg.get_int("budget", spec.budget);
  spec.jobs = static_cast<int>(cfg.get_int("jobs", spec.jobs));
  spec.adaptive_arm = cfg.get_bool("adaptive_arm", spec.adaptive_arm);
  spec.master_seed = static_cast<uint64_t>(
      cfg.get_int("seed", static_cast<long long>(spec.master_seed)));
  spec.meta_gamma_init = cfg.get_real("meta_gamma_init", spec.meta_gamma_init);
  spec.meta_lambda_init =
      cfg.get_real("meta_lambda_init", spec.meta_lambda_init);
  apply_run_config(cfg, spec.base);
  spec.base.train.harness.total_env_steps = spec.budget;
}

SweepResult run_discount_sweep(const SweepSpec& spec) {
  std::vector<Task> tasks;
  for (double gamma : spec.sweep_values) {
    Task task{"fixed", gamma, spec.base};
    task.run.train.gamma = gamma;
    task.run.train.metagrad = false;
    tasks.push_back(std::move(task));
  }
  if (spec.adaptive_arm) {
    Task task{"meta", spec.meta_gamma_init, spec.base};
    task.run.train.gamma = spec.meta_gamma_init;
    task.run.train.lambda = spec.meta_lambda_init;
    task.run.train.metagrad = true;
    tasks.push_back(std::move(task));
  }
  return run_tasks(spec, tasks);
}

SweepResult run_scale_sweep(const SweepSpec& spec) {
  std::vector<Task> tasks;
  for (const bool popart : {false, true}) {
    if (popart && !spec.adaptive_arm) continue;
    for (double scale : spec.sweep_values) {
      Task task{popart ? "popart" : "vanilla", scale, spec.base};
      task.run.env_id = "chain-scaled:" + format_real(scale);
      task.run.train.inner.popart = popart;
      tasks.push_back(std::move(task));
    }
  }
  return run_tasks(spec, tasks);
}

SweepResult run_repeat_sweep(const SweepSpec& spec) {
  std::vector<Task> tasks;
  const int max_repeats = spec.base.train.commitment.max_repeats;
  for (double k : spec.sweep_values) {
    const int repeats = static_cast<int>(k);
    if (repeats != k || repeats < 1 || repeats > max_repeats) {
      throw std::invalid_argument("repeat sweep: value " + format_real(k) +
                                  " is not an integer in [1, max_repeats]");
    }
    Task task{"fixed", k, spec.base};
    task.run.train.commitment.mode = CommitmentMode::kFixed;
    task.run.train.commitment.fixed_repeats = repeats;
    tasks.push_back(std::move(task));
  }
  if (spec.adaptive_arm) {
    Task task{"learned", static_cast<double>(max_repeats), spec.base};
    task.run.train.commitment.mode = CommitmentMode::kLearned;
    tasks.push_back(std::move(task));
  }
  return run_tasks(spec, tasks);
}

SweepResult run_single_sweep(const SweepSpec& spec) {
  return run_tasks(spec, {Task{"single", 0.0, spec.base}});
}

SweepResult run_sweep(const SweepSpec& spec) {
  switch (spec.experiment) {
    case Experiment::kDiscount:
      return run_discount_sweep(spec);
    case Experiment::kRewardScale:
      return run_scale_sweep(spec);
    case Experiment::kRepeats:
      return run_repeat_sweep(spec);
    case Experiment::kSingle:
      return run_single_sweep(spec);
  }
  return {};
}

std::vector<ArmSummary> summarize(const SweepResult& result) {
  std::vector<ArmSummary> out;
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<std::vector<double>> samples;
  for (const SweepRow& row : result.rows) {
    const auto key = std::make_pair(row.arm_label, row.sweep_value);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({row.arm_label, row.sweep_value, 0, 0.0, 0.0});
      samples.emplace_back();
    }
    samples[it->second].push_back(row.final_metric);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::vector<double>& xs = samples[i];
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    out[i].n = static_cast<int>(xs.size());
    out[i].mean = mean;
    out[i].std_error = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  }
  return out;
}

const ArmSummary* find_summary(const std::vector<ArmSummary>& summaries,
                               const std::string& arm, double value) {
  for (const ArmSummary& s : summaries) {
    if (s.arm_label == arm && s.sweep_value == value) return &s;
  }
  return nullptr;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create directory '" + dir.string() +
                             "': " + ec.message());
  }
}

// Cumulative metric of `log` at primitive step x (last logged row at or
// before x; 0 before the first row).
double metric_at(const TrainingLog& log, long long x, double LogRow::*field,
                 double before) {
  double v = before;
  for (const LogRow& r : log.rows) {
    if (r.env_step > x) break;
    v = r.*field;
  }
  return v;
}

void write_final_panel(const SweepResult& result,
                       const std::vector<ArmSummary>& summaries,
                       const std::filesystem::path& path) {
  std::vector<std::string> arms;
  std::set<double> values;
  for (const ArmSummary& s : summaries) {
    if (std::find(arms.begin(), arms.end(), s.arm_label) == arms.end()) {
      arms.push_back(s.arm_label);
    }
    values.insert(s.sweep_value);
  }
  std::ofstream out = open_for_write(path);
  out << "sweep_value";
  for (const std::string& a : arms) out << '\t' << a << '\t' << a << "_se";
  out << '\n';
  for (double v : values) {
    out << format_real(v);
    for (const std::string& a : arms) {
      const ArmSummary* s = find_summary(summaries, a, v);
      if (s) {
        out << '\t' << format_real(s->mean) << '\t' << format_real(s->std_error);
      } else {
        out << "\tNA\tNA";
      }
    }
    out << '\n';
  }
  finish(out, path);
  (void)result;
}

void write_curve_panel(const SweepResult& result,
                       const std::vector<ArmSummary>& summaries,
                       const std::filesystem::path& path) {
  long long horizon = 0;
  for (const SweepRow& r : result.rows) horizon = std::max(horizon, r.log.env_steps);
  const long long stride = std::max<long long>(1, horizon / 100);
  std::ofstream out = open_for_write(path);
  out << "env_step";
  for (const ArmSummary& s : summaries) {
    out << '\t' << s.arm_label << '_' << value_label(s.sweep_value);
  }
  out << '\n';
  for (long long x = stride; horizon > 0 && x <= horizon; x += stride) {
    out << x;
    for (const ArmSummary& s : summaries) {
      double sum = 0.0;
      int n = 0;
      for (const SweepRow& r : result.rows) {
        if (r.arm_label != s.arm_label || r.sweep_value != s.sweep_value) continue;
        sum += metric_at(r.log, x, &LogRow::mean_reward_per_step, 0.0);
        ++n;
      }
      out << '\t' << format_real(n > 0 ? sum / n : 0.0);
    }
    out << '\n';
  }
  finish(out, path);
}

// Soft horizons (1 - gamma)^-1 and (1 - lambda)^-1, seed-averaged, for every
// arm whose discount moves during training.
void write_horizon_panel(const SweepResult& result,
                         const std::filesystem::path& path) {
  std::vector<const SweepRow*> rows;
  long long horizon = 0;
  for (const SweepRow& r : result.rows) {
    if (!r.run.train.metagrad) continue;
    rows.push_back(&r);
    horizon = std::max(horizon, r.log.env_steps);
  }
  if (rows.empty()) return;
  const long long stride = std::max<long long>(1, horizon / 100);
  std::ofstream out = open_for_write(path);
  out << "env_step\tgamma\tlambda\tgamma_horizon\tlambda_horizon\n";
  for (long long x = stride; x <= horizon; x += stride) {
    double g = 0.0;
    double l = 0.0;
    for (const SweepRow* r : rows) {
      g += metric_at(r->log, x, &LogRow::gamma, r->run.train.gamma);
      l += metric_at(r->log, x, &LogRow::lambda, r->run.train.lambda);
    }
    g /= static_cast<double>(rows.size());
    l /= static_cast<double>(rows.size());
    out << x << '\t' << format_real(g) << '\t' << format_real(l) << '\t'
        << format_real(1.0 / (1.0 - g)) << '\t' << format_real(1.0 / (1.0 - l))
        << '\n';
  }
  finish(out, path);
}

}  // namespace

void emit_outputs(const SweepResult& result, const std::filesystem::path& out_dir) {
  make_dir(out_dir);
  make_dir(out_dir / "plotdata");
  make_dir(out_dir / "traces");
  make_dir(out_dir / "configs");

  {
    const auto path = out_dir / "sweep.csv";
    std::ofstream out = open_for_write(path);
    out << "experiment,arm_label,sweep_value,seed,final_metric,horizon_trace_path\n";
    for (const SweepRow& r : result.rows) {
      out << r.experiment << ',' << r.arm_label << ',' << format_real(r.sweep_value)
          << ',' << r.seed << ',' << format_real(r.final_metric) << ','
          << r.horizon_trace_path << '\n';
    }
    finish(out, path);
  }

  const std::vector<ArmSummary> summaries = summarize(result);
  {
    const auto path = out_dir / "summary.csv";
    std::ofstream out = open_for_write(path);
    out << "experiment,arm_label,sweep_value,n,mean,std_error\n";
    for (const ArmSummary& s : summaries) {
      out << result.experiment << ',' << s.arm_label << ','
          << format_real(s.sweep_value) << ',' << s.n << ','
          << format_real(s.mean) << ',' << format_real(s.std_error) << '\n';
    }
    finish(out, path);
  }

  for (const SweepRow& r : result.rows) {
    const auto path = out_dir / r.horizon_trace_path;
    std::ofstream out = open_for_write(path);
    write_training_log_csv(r.log, out);
    finish(out, path);
  }

  std::set<std::string> written;
  for (const SweepRow& r : result.rows) {
    const std::string name = result.experiment + "_" + r.arm_label + "_" +
                             value_label(r.sweep_value) + ".cfg";
    if (!written.insert(name).second) continue;
    const auto path = out_dir / "configs" / name;
    RunSpec run = r.run;
    std::ofstream out = open_for_write(path);
    out << "# seed is supplied per row of sweep.csv (single --seed S)\n";
    const ConfigMap cfg = to_config(run);
    for (const auto& [key, value] : cfg.entries()) {
      if (key == "seed") continue;
      out << key << " = " << value << '\n';
    }
    finish(out, path);
  }

  const std::string stem = result.experiment.empty() ? "sweep" : result.experiment;
  if (!result.rows.empty()) {
    write_final_panel(result, summaries, out_dir / "plotdata" / (stem + "_final.tsv"));
    write_curve_panel(result, summaries, out_dir / "plotdata" / (stem + "_curve.tsv"));
    write_horizon_panel(result, out_dir / "plotdata" / (stem + "_horizon.tsv"));
  }
}

}  // namespace adaptive_ac
