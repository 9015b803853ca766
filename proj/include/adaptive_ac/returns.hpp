#pragma once

#include <optional>
#include <span>
#include <vector>

namespace adaptive_ac {

// One agent decision. `steps_consumed` primitive steps elapsed while the
// action was held for `commitment` repeats.
struct Transition {
  int state = 0;
  int action = 0;
  int commitment = 1;
  double reward_agent = 0.0;
  double reward_raw = 0.0;
  int steps_consumed = 1;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

// A contiguous run of decisions from one environment copy. Only the last
// transition may be terminal, in which case bootstrap_value is 0.
struct Rollout {
  std::vector<Transition> transitions;
  std::optional<int> bootstrap_state;
  double bootstrap_value = 0.0;  // unnormalized

  std::size_t size() const { return transitions.size(); }
  bool operator==(const Rollout&) const = default;
};

struct DiscountSpec {
  double gamma = 0.99;
  double lambda = 1.0;
};

// Throws std::invalid_argument if the rollout breaks its invariants.
void validate(const Rollout& rollout);
void validate(const DiscountSpec& spec);

// Sum_k gamma^k r_k over the whole list.
double episode_return(std::span<const double> rewards, double gamma);

// n-step bootstrapped target from `offset`. Discount exponents are cumulative
// primitive steps. `values[t]` is the unnormalized v(S_t) for t < size(); the
// bootstrap beyond the rollout end is rollout.bootstrap_value.
double nstep_target(const Rollout& rollout, const DiscountSpec& spec,
                    std::span<const double> values, std::size_t offset,
                    std::size_t n);

// Truncated lambda-returns for every offset via the backward recursion
// G_t = r_t + gamma^{c_t} [(1 - lambda) v(S_{t+1}) + lambda G_{t+1}].
std::vector<double> lambda_targets(const Rollout& rollout,
                                   const DiscountSpec& spec,
                                   std::span<const double> values);

// Targets together with their partial derivatives in gamma and lambda.
struct TargetsWithGrad {
  std::vector<double> targets;
  std::vector<double> d_gamma;
  std::vector<double> d_lambda;
};

TargetsWithGrad lambda_targets_with_grad(const Rollout& rollout,
                                         const DiscountSpec& spec,
                                         std::span<const double> values);

// n-step targets to the rollout horizon (n = size - t at every offset), with
// derivatives; d_lambda is identically zero.
TargetsWithGrad horizon_targets_with_grad(const Rollout& rollout,
                                          const DiscountSpec& spec,
                                          std::span<const double> values);

}  // namespace adaptive_ac
