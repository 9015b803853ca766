#pragma once

#include <span>

#include "adaptive_ac/agent.hpp"
#include "adaptive_ac/env.hpp"
#include "adaptive_ac/rng.hpp"

namespace adaptive_ac {

enum class CommitmentMode { kNone, kFixed, kLearned };

struct CommitmentConfig {
  int max_repeats = 10;
  CommitmentMode mode = CommitmentMode::kNone;
  int fixed_repeats = 1;  // used by kFixed

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

struct Decision {
  int action = 0;
  int repeats = 1;
};

// Samples the action from the policy head, then (learned mode only) the
// repeat count from the commitment head. Fixed and none modes draw exactly
// one value from `rng` per decision.
Decision sample_decision(const AgentParams& params, int state,
                         const CommitmentConfig& config, Rng& rng);

// Holds `action` for up to `repeats` primitive steps; the agent observes only
// the final state.
EnvStep macro_step(Environment& env, int action, int repeats);

// Policy gradient for the commitment head with the action head's advantages:
// Sum_t adv_t grad log pi_c(C_t|S_t) + entropy_cost grad H(pi_c(.|S_t)).
Gradient commitment_update(const AgentParams& params, const Rollout& rollout,
                           std::span<const double> advantages,
                           double entropy_cost);

}  // namespace adaptive_ac
