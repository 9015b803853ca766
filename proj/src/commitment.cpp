#include "adaptive_ac/commitment.hpp"

#include <stdexcept>

namespace adaptive_ac {

void CommitmentConfig::validate() const {
  if (max_repeats < 1) {
    throw std::invalid_argument("CommitmentConfig: max_repeats < 1");
  }
  if (mode == CommitmentMode::kFixed &&
      (fixed_repeats < 1 || fixed_repeats > max_repeats)) {
    throw std::invalid_argument(
        "CommitmentConfig: fixed repeats outside [1, max_repeats]");
  }
}

Decision sample_decision(const AgentParams& params, int state,
                         const CommitmentConfig& config, Rng& rng) {
  Decision d;
  d.action = sample_categorical(policy_probs(params, state), rng);
  switch (config.mode) {
    case CommitmentMode::kNone:
      d.repeats = 1;
      break;
    case CommitmentMode::kFixed:
      d.repeats = config.fixed_repeats;
      break;
    case CommitmentMode::kLearned:
      d.repeats =
          1 + sample_categorical(softmax(params.commitment_row(state)), rng);
      break;
  }
  return d;
}

EnvStep macro_step(Environment& env, int action, int repeats) {
  return repeat_step(env, action, repeats);
}

Gradient commitment_update(const AgentParams& params, const Rollout& rollout,
                           std::span<const double> advantages,
                           double entropy_cost) {
  if (advantages.size() != rollout.size()) {
    throw std::invalid_argument("commitment_update: advantages/rollout mismatch");
  }
  Gradient g = zeros_like(params);
  for (std::size_t t = 0; t < rollout.size(); ++t) {
    const Transition& tr = rollout.transitions[t];
    const int chosen = tr.commitment - 1;
    if (chosen < 0 || chosen >= params.max_repeats) {
      throw std::out_of_range("commitment_update: commitment out of range");
    }
    const std::vector<double> q = softmax(params.commitment_row(tr.state));
    auto row = g.commitment_row(tr.state);
    for (int c = 0; c < params.max_repeats; ++c) {
      row[c] += advantages[t] * ((c == chosen ? 1.0 : 0.0) - q[c]);
    }
    if (entropy_cost != 0.0) {
      const std::vector<double> h = entropy_grad(q);
      for (int c = 0; c < params.max_repeats; ++c) row[c] += entropy_cost * h[c];
    }
  }
  return g;
}

}  // namespace adaptive_ac
