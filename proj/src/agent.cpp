#include "adaptive_ac/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adaptive_ac {

AgentParams::AgentParams(int states, int actions, int repeats)
    : num_states(states),
      num_actions(actions),
      max_repeats(repeats),
      policy_logits(static_cast<std::size_t>(states) * actions, 0.0),
      value_weights(states, 0.0),
      commitment_logits(static_cast<std::size_t>(states) * repeats, 0.0) {
  if (states < 1 || actions < 1 || repeats < 1) {
    throw std::invalid_argument("AgentParams: dimensions must be positive");
  }
}

std::span<double> AgentParams::policy_row(int state) {
  return std::span(policy_logits).subspan(
      static_cast<std::size_t>(state) * num_actions, num_actions);
}

std::span<const double> AgentParams::policy_row(int state) const {
  return std::span(policy_logits).subspan(
      static_cast<std::size_t>(state) * num_actions, num_actions);
}

std::span<double> AgentParams::commitment_row(int state) {
  return std::span(commitment_logits)
      .subspan(static_cast<std::size_t>(state) * max_repeats, max_repeats);
}

std::span<const double> AgentParams::commitment_row(int state) const {
  return std::span(commitment_logits)
      .subspan(static_cast<std::size_t>(state) * max_repeats, max_repeats);
}

double AgentParams::critic_output(int state) const {
  return value_weights.at(state) + value_bias;
}

bool AgentParams::same_shape(const AgentParams& o) const {
  return num_states == o.num_states && num_actions == o.num_actions &&
         max_repeats == o.max_repeats &&
         policy_logits.size() == o.policy_logits.size() &&
         value_weights.size() == o.value_weights.size() &&
         commitment_logits.size() == o.commitment_logits.size();
}

bool AgentParams::all_finite() const {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(policy_logits.begin(), policy_logits.end(), finite) &&
         std::all_of(value_weights.begin(), value_weights.end(), finite) &&
         std::isfinite(value_bias) &&
         std::all_of(commitment_logits.begin(), commitment_logits.end(), finite);
}

double AgentParams::squared_norm() const { return dot(*this); }

void AgentParams::scale(double factor) {
  for (double& x : policy_logits) x *= factor;
  for (double& x : value_weights) x *= factor;
  value_bias *= factor;
  for (double& x : commitment_logits) x *= factor;
}

void AgentParams::add_scaled(const AgentParams& o, double factor) {
  if (!same_shape(o)) throw std::invalid_argument("AgentParams: shape mismatch");
  for (std::size_t i = 0; i < policy_logits.size(); ++i)
    policy_logits[i] += factor * o.policy_logits[i];
  for (std::size_t i = 0; i < value_weights.size(); ++i)
    value_weights[i] += factor * o.value_weights[i];
  value_bias += factor * o.value_bias;
  for (std::size_t i = 0; i < commitment_logits.size(); ++i)
    commitment_logits[i] += factor * o.commitment_logits[i];
}

double AgentParams::dot(const AgentParams& o) const {
  if (!same_shape(o)) throw std::invalid_argument("AgentParams: shape mismatch");
  double s = std::inner_product(policy_logits.begin(), policy_logits.end(),
                                o.policy_logits.begin(), 0.0);
  s = std::inner_product(value_weights.begin(), value_weights.end(),
                         o.value_weights.begin(), s);
  s += value_bias * o.value_bias;
  return std::inner_product(commitment_logits.begin(), commitment_logits.end(),
                            o.commitment_logits.begin(), s);
}

Gradient zeros_like(const AgentParams& params) {
  return Gradient(params.num_states, params.num_actions, params.max_repeats);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<double> policy_probs(const AgentParams& params, int state) {
  if (state < 0 || state >= params.num_states) {
    throw std::out_of_range("policy_probs: state out of range");
  }
  return softmax(params.policy_row(state));
}

double clip_reward(double r, RewardClip range) {
  return std::min(std::max(r, range.lo), range.hi);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  const double log_z = top + std::log(total);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

std::vector<double> entropy_grad(std::span<const double> probs) {
  // p log p -> 0 as p -> 0; underflowed entries contribute nothing.
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  std::vector<double> g(probs.size(), 0.0);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > 0.0) g[j] = -probs[j] * (std::log(probs[j]) + h);
  }
  return g;
}

Gradient critic_update(const AgentParams& params, const Rollout& rollout,
                       std::span<const double> targets, double baseline_cost) {
  if (targets.size() != rollout.size()) {
    throw std::invalid_argument("critic_update: targets/rollout mismatch");
  }
  Gradient g = zeros_like(params);
  for (std::size_t t = 0; t < rollout.size(); ++t) {
    const int s = rollout.transitions[t].state;
    const double delta = baseline_cost * (targets[t] - params.critic_output(s));
    g.value_weights[s] += delta;
    g.value_bias += delta;
  }
  return g;
}

Gradient actor_update(const AgentParams& params, const Rollout& rollout,
                      std::span<const double> targets,
                      std::span<const double> baselines, double entropy_cost,
                      double advantage_scale) {
  if (targets.size() != rollout.size() || baselines.size() != rollout.size()) {
    throw std::invalid_argument("actor_update: targets/rollout mismatch");
  }
  Gradient g = zeros_like(params);
  for (std::size_t t = 0; t < rollout.size(); ++t) {
    const Transition& tr = rollout.transitions[t];
    const double adv = (targets[t] - baselines[t]) * advantage_scale;
    const std::vector<double> p = policy_probs(params, tr.state);
    auto row = g.policy_row(tr.state);
    for (int a = 0; a < params.num_actions; ++a) {
      row[a] += adv * ((a == tr.action ? 1.0 : 0.0) - p[a]);
    }
    if (entropy_cost != 0.0) {
      const std::vector<double> h = entropy_grad(p);
      for (int a = 0; a < params.num_actions; ++a) row[a] += entropy_cost * h[a];
    }
  }
  return g;
}

double clip_global_norm(Gradient& g, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip: max_norm <= 0");
  const double norm = std::sqrt(g.squared_norm());
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  g.scale(factor);
  return factor;
}

std::vector<double> clip_global_norm(std::vector<double> g, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip: max_norm <= 0");
  const double norm =
      std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (double& x : g) x *= factor;
  }
  return g;
}

AgentParams apply_sgd(const AgentParams& params, const Gradient& gradient,
                      double learning_rate) {
  AgentParams out = params;
  out.add_scaled(gradient, learning_rate);
  return out;
}

}  // namespace adaptive_ac
