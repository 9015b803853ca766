#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adaptive_ac/agent.hpp"
#include "adaptive_ac/commitment.hpp"
#include "adaptive_ac/env.hpp"
#include "adaptive_ac/metagrad.hpp"
#include "adaptive_ac/popart.hpp"
#include "adaptive_ac/rng.hpp"

namespace adaptive_ac {

struct HarnessConfig {
  int num_envs = 1;
  int rollout_len = 15;            // decisions per env per batch
  long long total_env_steps = 5000;  // primitive steps, summed over copies
  uint64_t seed = 0;
  int threads = 1;                 // workers stepping env copies
};

// Everything a single training run needs besides the environment.
struct TrainConfig {
  HarnessConfig harness{};
  InnerConfig inner{};
  double gamma = 0.99;
  double lambda = 1.0;
  bool metagrad = false;
  MetaParams meta{};  // eta fields are overwritten from gamma/lambda
  CommitmentConfig commitment{};
  NormStats initial_stats{};

  void validate() const;
  void validate_discount() const;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

// Per-copy acting state that persists across batches.
struct EnvCopy {
  std::unique_ptr<Environment> env;
};

// What the policy needs to act and bootstrap.
struct ActingContext {
  const AgentParams* params = nullptr;
  const NormStats* stats = nullptr;
  bool popart = false;
  const CommitmentConfig* commitment = nullptr;
  const LearnerConfig* learner = nullptr;  // reward clipping
};

struct Batch {
  std::vector<Rollout> rollouts;  // env-major, time-ordered within an env
  long long env_steps = 0;
  double raw_reward = 0.0;
  long long episodes_completed = 0;
  long long decisions = 0;
  long long repeats_chosen = 0;
};

// Steps every copy one decision at a time in lockstep (decision k finishes on
// all copies before any copy starts k + 1), up to `rollout_len` decisions or
// until `step_budget` primitive steps have been consumed. Terminal episodes
// reset immediately from the copy's env stream and start a new rollout.
Batch collect_batch(std::span<EnvCopy> envs, const ActingContext& ctx,
                    RngStreams& streams, int rollout_len,
                    long long step_budget, int threads);

// Single-threaded reference for collect_batch.
Batch collect_batch_serial(std::span<EnvCopy> envs, const ActingContext& ctx,
                           RngStreams& streams, int rollout_len,
                           long long step_budget);

struct LogRow {
  long long env_step = 0;
  double mean_reward_per_step = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;
  double sigma = 1.0;
  double mu = 0.0;
  double mean_repeats = 1.0;
  long long episodes_completed = 0;

  bool operator==(const LogRow&) const = default;
};

struct TrainingLog {
  std::vector<LogRow> rows;
  long long env_steps = 0;
  double raw_reward = 0.0;
  long long episodes_completed = 0;
  double final_gamma = 0.0;
  double final_lambda = 0.0;
  AgentParams final_params;

  // Cumulative raw reward per primitive environment step (0 if no steps).
  double final_metric() const;
};

TrainingLog train(const EnvFactory& make_env, const TrainConfig& config);

// Header `env_step,mean_reward_per_step,gamma,lambda,sigma,mu,mean_repeats,
// episodes_completed`, values with 17 significant digits.
void write_training_log_csv(const TrainingLog& log, std::ostream& out);

// printf-style %.17g, the format of every real in the CSV outputs.
std::string format_real(double x);

}  // namespace adaptive_ac
