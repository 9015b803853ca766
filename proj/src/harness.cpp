#include "adaptive_ac/harness.hpp"

#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace adaptive_ac {

void TrainConfig::validate() const {
  if (harness.num_envs < 1) {
    throw std::invalid_argument("TrainConfig: num_envs must be >= 1");
  }
  if (harness.rollout_len < 1) {
    throw std::invalid_argument("TrainConfig: rollout_len must be >= 1");
  }
  if (harness.total_env_steps < 0) {
    throw std::invalid_argument("TrainConfig: negative step budget");
  }
  if (harness.threads < 1) {
    throw std::invalid_argument("TrainConfig: threads must be >= 1");
  }
  validate_discount();
  commitment.validate();
  const LearnerConfig& lc = inner.learner;
  if (!(lc.learning_rate >= 0.0) || !(lc.entropy_cost >= 0.0) ||
      !(lc.baseline_cost >= 0.0) || !(lc.max_grad_norm > 0.0)) {
    throw std::invalid_argument("TrainConfig: invalid learner settings");
  }
  if (metagrad && !(meta.meta_learning_rate >= 0.0)) {
    throw std::invalid_argument("TrainConfig: negative meta learning rate");
  }
  if (inner.meta_value_cost && !(*inner.meta_value_cost >= 0.0)) {
    throw std::invalid_argument("TrainConfig: negative meta_value_cost");
  }
}

void TrainConfig::validate_discount() const {
  adaptive_ac::validate(DiscountSpec{gamma, lambda});
  if (metagrad && (gamma <= 0.0 || gamma >= 1.0 || lambda <= 0.0 ||
                   lambda >= 1.0)) {
    throw std::invalid_argument(
        "TrainConfig: meta-learned gamma/lambda must start inside (0, 1)");
  }
}

namespace {

struct CopyState {
  std::vector<Transition> segment;
  std::vector<Rollout> finished;
  long long steps = 0;
  double raw = 0.0;
  long long episodes = 0;
  long long decisions = 0;
  long long repeats = 0;
  std::exception_ptr error;
};

void act_once(EnvCopy& copy, int index, const ActingContext& ctx,
              RngStreams& streams, CopyState& st) {
  Environment& env = *copy.env;
  const int state = env.observation();
  const Decision d =
      sample_decision(*ctx.params, state, *ctx.commitment, streams.policy(index));
  const EnvStep step = macro_step(env, d.action, d.repeats);
  double reward = step.reward_agent;
  if (ctx.learner->clip_rewards) {
    reward = clip_reward(reward, ctx.learner->reward_clip_range);
  }
  st.segment.push_back({state, d.action, d.repeats, reward, step.reward_raw,
                        step.steps_consumed, step.terminal});
  st.steps += step.steps_consumed;
  st.raw += step.reward_raw;
  ++st.decisions;
  st.repeats += d.repeats;
  if (step.terminal) {
    st.finished.push_back(Rollout{std::move(st.segment), std::nullopt, 0.0});
    st.segment.clear();
    ++st.episodes;
    env.reset(streams.env(index)());
  }
}

void close_segment(const EnvCopy& copy, const ActingContext& ctx,
                   CopyState& st) {
  if (st.segment.empty()) return;
  Rollout r;
  r.transitions = std::move(st.segment);
  const int s = copy.env->observation();
  r.bootstrap_state = s;
  r.bootstrap_value = state_value(*ctx.params, *ctx.stats, ctx.popart, s);
  st.finished.push_back(std::move(r));
  st.segment.clear();
}

Batch gather(std::span<EnvCopy> envs, const ActingContext& ctx,
             std::vector<CopyState>& states) {
  Batch out;
  for (std::size_t i = 0; i < envs.size(); ++i) {
    CopyState& st = states[i];
    close_segment(envs[i], ctx, st);
    for (Rollout& r : st.finished) out.rollouts.push_back(std::move(r));
    out.env_steps += st.steps;
    out.raw_reward += st.raw;
    out.episodes_completed += st.episodes;
    out.decisions += st.decisions;
    out.repeats_chosen += st.repeats;
  }
  return out;
}

long long total_steps(const std::vector<CopyState>& states) {
  long long n = 0;
  for (const CopyState& st : states) n += st.steps;
  return n;
}

}  // namespace

Batch collect_batch(std::span<EnvCopy> envs, const ActingContext& ctx,
                    RngStreams& streams, int rollout_len,
                    long long step_budget, int threads) {
  const int n = static_cast<int>(envs.size());
  std::vector<CopyState> states(n);
  for (int k = 0; k < rollout_len && total_steps(states) < step_budget; ++k) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int i = 0; i < n; ++i) {
      try {
        act_once(envs[i], i, ctx, streams, states[i]);
      } catch (...) {
        states[i].error = std::current_exception();
      }
    }
    for (const CopyState& st : states) {
      if (st.error) std::rethrow_exception(st.error);
    }
  }
  return gather(envs, ctx, states);
}

Batch collect_batch_serial(std::span<EnvCopy> envs, const ActingContext& ctx,
                           RngStreams& streams, int rollout_len,
                           long long step_budget) {
  const int n = static_cast<int>(envs.size());
  std::vector<CopyState> states(n);
  for (int k = 0; k < rollout_len && total_steps(states) < step_budget; ++k) {
    for (int i = 0; i < n; ++i) act_once(envs[i], i, ctx, streams, states[i]);
  }
  return gather(envs, ctx, states);
}

double TrainingLog::final_metric() const {
  return env_steps > 0 ? raw_reward / static_cast<double>(env_steps) : 0.0;
}

TrainingLog train(const EnvFactory& make_env, const TrainConfig& config) {
  config.validate();
  const HarnessConfig& hc = config.harness;
  InnerConfig inner = config.inner;
  inner.learn_commitment = config.commitment.mode == CommitmentMode::kLearned;
  RngStreams streams(hc.seed, hc.num_envs);

  std::vector<EnvCopy> envs;
  envs.reserve(hc.num_envs);
  for (int i = 0; i < hc.num_envs; ++i) {
    EnvCopy copy{make_env()};
    copy.env->reset(streams.env(i)());
    envs.push_back(std::move(copy));
  }
  const int repeats_dim = config.commitment.mode == CommitmentMode::kLearned
                              ? config.commitment.max_repeats
                              : 1;

  TrainingLog log;
  log.final_params = AgentParams(envs.front().env->num_states(),
                                 envs.front().env->num_actions(), repeats_dim);
  AgentParams& params = log.final_params;
  NormStats stats = config.initial_stats;
  DiscountSpec discount{config.gamma, config.lambda};
  MetaParams meta = config.meta;
  if (config.metagrad) {
    meta.eta_gamma = unsquash(config.gamma);
    meta.eta_lambda = unsquash(config.lambda);
  }
  log.final_gamma = discount.gamma;
  log.final_lambda = discount.lambda;

  std::optional<InnerUpdateTrace> pending;
  while (log.env_steps < hc.total_env_steps) {
    const ActingContext ctx{&params, &stats, config.inner.popart,
                            &config.commitment, &config.inner.learner};
    Batch batch = collect_batch(envs, ctx, streams, hc.rollout_len,
                                hc.total_env_steps - log.env_steps, hc.threads);
    if (batch.env_steps <= 0) {
      throw std::runtime_error("train: environment consumed no steps");
    }
    log.env_steps += batch.env_steps;
    log.raw_reward += batch.raw_reward;
    log.episodes_completed += batch.episodes_completed;

    if (config.metagrad && pending) {
      const MetaUpdateResult m = meta_update(meta, *pending, batch.rollouts,
                                             params, stats, inner);
      if (m.meta.eta_gamma != meta.eta_gamma) {
        discount.gamma = m.meta.gamma();
      }
      if (m.meta.eta_lambda != meta.eta_lambda) {
        discount.lambda = m.meta.lambda();
      }
      meta = m.meta;
    }

    InnerUpdateResult res = inner_update_with_trace(
        params, stats, batch.rollouts, discount, inner, config.metagrad);
    if (!res.params.all_finite()) {
      throw std::runtime_error("train: parameters became non-finite");
    }
    params = std::move(res.params);
    stats = res.stats;
    if (config.metagrad) pending = std::move(res.trace);

    LogRow row;
    row.env_step = log.env_steps;
    row.mean_reward_per_step = log.final_metric();
    row.gamma = discount.gamma;
    row.lambda = discount.lambda;
    row.sigma = config.inner.popart ? stats.sigma : 1.0;
    row.mu = config.inner.popart ? stats.mu : 0.0;
    row.mean_repeats =
        batch.decisions > 0
            ? static_cast<double>(batch.repeats_chosen) / batch.decisions
            : 0.0;
    row.episodes_completed = log.episodes_completed;
    log.rows.push_back(row);
  }
  log.final_gamma = discount.gamma;
  log.final_lambda = discount.lambda;
  return log;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_training_log_csv(const TrainingLog& log, std::ostream& out) {
  out << "env_step,mean_reward_per_step,gamma,lambda,sigma,mu,mean_repeats,"
         "episodes_completed\n";
  for (const LogRow& r : log.rows) {
    out << r.env_step << ',' << format_real(r.mean_reward_per_step) << ','
        << format_real(r.gamma) << ',' << format_real(r.lambda) << ','
        << format_real(r.sigma) << ',' << format_real(r.mu) << ','
        << format_real(r.mean_repeats) << ',' << r.episodes_completed << '\n';
  }
}

}  // namespace adaptive_ac
