#include "adaptive_ac/returns.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptive_ac {

namespace {

// gamma^e and its derivative e * gamma^(e-1), with 0^0 = 1.
double power(double gamma, int e) { return e == 0 ? 1.0 : std::pow(gamma, e); }

double power_grad(double gamma, int e) {
  return e == 0 ? 0.0 : e * (e == 1 ? 1.0 : std::pow(gamma, e - 1));
}

void check_values(const Rollout& rollout, std::span<const double> values) {
  if (values.size() != rollout.size()) {
    throw std::invalid_argument("returns: values/rollout length mismatch");
  }
}

double next_value(const Rollout& rollout, std::span<const double> values,
                  std::size_t t) {
  if (rollout.transitions[t].terminal) return 0.0;
  return t + 1 < rollout.size() ? values[t + 1] : rollout.bootstrap_value;
}

}  // namespace

void validate(const Rollout& rollout) {
  if (rollout.transitions.empty()) {
    throw std::invalid_argument("Rollout: empty");
  }
  for (std::size_t t = 0; t + 1 < rollout.size(); ++t) {
    if (rollout.transitions[t].terminal) {
      throw std::invalid_argument("Rollout: terminal transition before end");
    }
  }
  for (const auto& tr : rollout.transitions) {
    if (tr.steps_consumed < 1) {
      throw std::invalid_argument("Rollout: steps_consumed < 1");
    }
  }
  if (rollout.transitions.back().terminal && rollout.bootstrap_value != 0.0) {
    throw std::invalid_argument("Rollout: terminal rollout with bootstrap");
  }
}

void validate(const DiscountSpec& spec) {
  if (!(spec.gamma >= 0.0 && spec.gamma <= 1.0) ||
      !(spec.lambda >= 0.0 && spec.lambda <= 1.0)) {
    throw std::invalid_argument("DiscountSpec: gamma/lambda outside [0, 1]");
  }
}

double episode_return(std::span<const double> rewards, double gamma) {
  double g = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) {
    g = *it + gamma * g;
  }
  return g;
}

double nstep_target(const Rollout& rollout, const DiscountSpec& spec,
                    std::span<const double> values, std::size_t offset,
                    std::size_t n) {
  check_values(rollout, values);
  if (offset + n > rollout.size()) {
    throw std::out_of_range("nstep_target: offset + n beyond rollout");
  }
  if (n == 0) {
    return offset < rollout.size() ? values[offset] : rollout.bootstrap_value;
  }
  double g = 0.0;
  int exponent = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Transition& tr = rollout.transitions[offset + k];
    g += power(spec.gamma, exponent) * tr.reward_agent;
    exponent += tr.steps_consumed;
    if (tr.terminal) return g;
  }
  const double boot = next_value(rollout, values, offset + n - 1);
  return g + power(spec.gamma, exponent) * boot;
}

std::vector<double> lambda_targets(const Rollout& rollout,
                                   const DiscountSpec& spec,
                                   std::span<const double> values) {
  check_values(rollout, values);
  std::vector<double> g(rollout.size());
  double next = rollout.bootstrap_value;
  for (std::size_t i = rollout.size(); i-- > 0;) {
    const Transition& tr = rollout.transitions[i];
    if (tr.terminal) {
      g[i] = tr.reward_agent;
    } else {
      const double v = next_value(rollout, values, i);
      g[i] = tr.reward_agent +
             power(spec.gamma, tr.steps_consumed) *
                 ((1.0 - spec.lambda) * v + spec.lambda * next);
    }
    next = g[i];
  }
  return g;
}

TargetsWithGrad lambda_targets_with_grad(const Rollout& rollout,
                                         const DiscountSpec& spec,
                                         std::span<const double> values) {
  check_values(rollout, values);
  const std::size_t n = rollout.size();
  TargetsWithGrad out{std::vector<double>(n), std::vector<double>(n),
                      std::vector<double>(n)};
  double next = rollout.bootstrap_value;
  double next_dg = 0.0;
  double next_dl = 0.0;
  const double lam = spec.lambda;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& tr = rollout.transitions[i];
    if (tr.terminal) {
      out.targets[i] = tr.reward_agent;
    } else {
      const double v = next_value(rollout, values, i);
      const double disc = power(spec.gamma, tr.steps_consumed);
      const double inner = (1.0 - lam) * v + lam * next;
      out.targets[i] = tr.reward_agent + disc * inner;
      out.d_gamma[i] =
          power_grad(spec.gamma, tr.steps_consumed) * inner + disc * lam * next_dg;
      out.d_lambda[i] = disc * (next - v + lam * next_dl);
    }
    next = out.targets[i];
    next_dg = out.d_gamma[i];
    next_dl = out.d_lambda[i];
  }
  return out;
}

TargetsWithGrad horizon_targets_with_grad(const Rollout& rollout,
                                          const DiscountSpec& spec,
                                          std::span<const double> values) {
  check_values(rollout, values);
  const std::size_t n = rollout.size();
  TargetsWithGrad out{std::vector<double>(n), std::vector<double>(n),
                      std::vector<double>(n, 0.0)};
  // Backward recursion G_t = r_t + gamma^c G_{t+1} is the same n-step sum.
  double next = rollout.bootstrap_value;
  double next_dg = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& tr = rollout.transitions[i];
    if (tr.terminal) {
      out.targets[i] = tr.reward_agent;
      out.d_gamma[i] = 0.0;
    } else {
      const double disc = power(spec.gamma, tr.steps_consumed);
      out.targets[i] = tr.reward_agent + disc * next;
      out.d_gamma[i] =
          power_grad(spec.gamma, tr.steps_consumed) * next + disc * next_dg;
    }
    next = out.targets[i];
    next_dg = out.d_gamma[i];
  }
  return out;
}

}  // namespace adaptive_ac
