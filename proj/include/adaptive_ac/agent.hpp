#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adaptive_ac/returns.hpp"

namespace adaptive_ac {

// Tabular actor, linear critic over one-hot state features, and the
// commitment head's logits. The critic output is n(s) = w[s] + b; with
// normalization off the unnormalized value equals n(s).
//
// The same layout doubles as a gradient container (see Gradient).
struct AgentParams {
  int num_states = 0;
  int num_actions = 0;
  int max_repeats = 1;
  std::vector<double> policy_logits;      // [num_states x num_actions]
  std::vector<double> value_weights;      // [num_states]
  double value_bias = 0.0;
  std::vector<double> commitment_logits;  // [num_states x max_repeats]

  AgentParams() = default;
  AgentParams(int states, int actions, int repeats);

  std::span<double> policy_row(int state);
  std::span<const double> policy_row(int state) const;
  std::span<double> commitment_row(int state);
  std::span<const double> commitment_row(int state) const;

  // Critic output in its own (possibly normalized) space.
  double critic_output(int state) const;

  bool same_shape(const AgentParams& other) const;
  bool all_finite() const;
  double squared_norm() const;
  void scale(double factor);
  // this += factor * other
  void add_scaled(const AgentParams& other, double factor);
  double dot(const AgentParams& other) const;

  bool operator==(const AgentParams&) const = default;
};

using Gradient = AgentParams;

Gradient zeros_like(const AgentParams& params);

struct RewardClip {
  double lo = -1.0;
  double hi = 1.0;
};

struct LearnerConfig {
  double learning_rate = 1e-3;
  double entropy_cost = 0.01;
  double baseline_cost = 0.5;
  double max_grad_norm = 5.0;
  bool clip_rewards = false;
  RewardClip reward_clip_range{};
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> policy_probs(const AgentParams& params, int state);

double clip_reward(double r, RewardClip range = {});

// d H(softmax(z)) / dz_j = -p_j (log p_j + H).
std::vector<double> entropy_grad(std::span<const double> probs);

// Accumulates baseline_cost * (G_t - n(S_t)) * grad n(S_t) into the critic
// entries of a zero gradient. `targets` must be in the critic's output space.
Gradient critic_update(const AgentParams& params, const Rollout& rollout,
                       std::span<const double> targets, double baseline_cost);

// Sum_t adv_t * grad log pi(A_t|S_t) + entropy_cost * grad H(pi(.|S_t)),
// with adv_t = (targets[t] - baselines[t]) * advantage_scale treated as a
// constant.
Gradient actor_update(const AgentParams& params, const Rollout& rollout,
                      std::span<const double> targets,
                      std::span<const double> baselines, double entropy_cost,
                      double advantage_scale = 1.0);

// Rescales g in place when its global L2 norm exceeds max_norm. Returns the
// applied factor (1 when unclipped).
double clip_global_norm(Gradient& g, double max_norm);

// Flat-vector form of the same rule.
std::vector<double> clip_global_norm(std::vector<double> g, double max_norm);

// params + learning_rate * gradient (ascent convention).
AgentParams apply_sgd(const AgentParams& params, const Gradient& gradient,
                      double learning_rate);

}  // namespace adaptive_ac
