#pragma once

#include <optional>
#include <span>
#include <vector>

#include "adaptive_ac/agent.hpp"
#include "adaptive_ac/popart.hpp"
#include "adaptive_ac/returns.hpp"

namespace adaptive_ac {

// Logistic squashing of an unconstrained meta-parameter into (0, 1).
double squash(double eta);
// Logit; throws std::domain_error unless p is strictly inside (0, 1).
double unsquash(double p);

// Unconstrained meta-parameters for the discount and trace.
struct MetaParams {
  double eta_gamma = 0.0;
  double eta_lambda = 0.0;
  double meta_learning_rate = 1e-3;
  int meta_rollout_len = 15;
  double gamma_m = 1.0;
  bool adapt_gamma = true;
  bool adapt_lambda = true;

  static MetaParams from(double gamma, double lambda);
  double gamma() const { return squash(eta_gamma); }
  double lambda() const { return squash(eta_lambda); }
};

enum class TargetMode {
  kLambda,  // truncated lambda-returns
  kNStep,   // n-step returns to the rollout horizon
};

struct InnerConfig {
  LearnerConfig learner{};
  TargetMode target_mode = TargetMode::kLambda;
  bool popart = false;
  bool learn_commitment = false;
  // Weight of the value term in the meta-objective; unset means
  // learner.baseline_cost.
  std::optional<double> meta_value_cost;

  double value_cost_in_meta() const {
    return meta_value_cost.value_or(learner.baseline_cost);
  }
};

// Derivatives of the applied parameter change with respect to the discount
// and the trace, alongside the change itself.
struct InnerUpdateTrace {
  Gradient d_delta_d_gamma;
  Gradient d_delta_d_lambda;
  Gradient applied_delta;
};

struct InnerUpdateResult {
  AgentParams params;  // after normalization rescale and the SGD step
  NormStats stats;
  InnerUpdateTrace trace;
  std::vector<double> targets;  // unnormalized, concatenated over rollouts
  double clip_factor = 1.0;
};

// Unnormalized state value under the given statistics (identity transform
// when normalization is off).
double state_value(const AgentParams& params, const NormStats& stats,
                   bool popart, int state);

// One complete actor-critic update on a batch of rollouts:
//   1. unnormalized targets from current params,
//   2. normalization statistics update (first batch initializes them),
//   3. output-layer rescale,
//   4. critic/actor/commitment gradients, global norm clip, SGD step.
// With `with_trace` the derivative of the applied step with respect to gamma
// and lambda is also computed; baselines and log-probabilities do not depend
// on either hyper-parameter, so only the target path contributes. The
// normalization statistics are held fixed in the derivative.
InnerUpdateResult inner_update_with_trace(const AgentParams& params,
                                          const NormStats& stats,
                                          std::span<const Rollout> batch,
                                          const DiscountSpec& discount,
                                          const InnerConfig& config,
                                          bool with_trace = true);

// Undiscounted actor-critic objective on a validation batch. Advantages and
// targets are frozen at the parameters passed to the constructor; value()
// and gradient() then evaluate the objective as a function of the params.
class MetaObjective {
 public:
  MetaObjective(const AgentParams& frozen_at, const NormStats& stats,
                std::span<const Rollout> validation, const InnerConfig& config);

  double value(const AgentParams& params) const;
  Gradient gradient(const AgentParams& params) const;

  std::span<const double> advantages() const { return advantages_; }

 private:
  struct Item {
    int state;
    int action;
    int commitment;
  };
  NormStats stats_;
  InnerConfig config_;
  std::vector<Item> items_;
  std::vector<double> advantages_;         // scaled by 1/sigma
  std::vector<double> normalized_targets_;
};

struct MetaUpdateResult {
  MetaParams meta;
  double dj_dgamma = 0.0;
  double dj_dlambda = 0.0;
};

// Ascends the validation objective in eta_gamma and eta_lambda through the
// chain dJ/dparams' . dparams'/dgamma . dgamma/deta. Throws
// std::runtime_error if either meta-gradient is non-finite.
MetaUpdateResult meta_update(const MetaParams& meta,
                             const InnerUpdateTrace& trace,
                             std::span<const Rollout> validation,
                             const AgentParams& updated_params,
                             const NormStats& stats, const InnerConfig& config);

}  // namespace adaptive_ac
