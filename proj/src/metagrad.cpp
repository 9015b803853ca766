#include "adaptive_ac/metagrad.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "adaptive_ac/commitment.hpp"

namespace adaptive_ac {

double squash(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double unsquash(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("unsquash: argument must lie strictly in (0, 1)");
  }
  return std::log(p / (1.0 - p));
}

MetaParams MetaParams::from(double gamma, double lambda) {
  MetaParams m;
  m.eta_gamma = unsquash(gamma);
  m.eta_lambda = unsquash(lambda);
  return m;
}

double state_value(const AgentParams& params, const NormStats& stats,
                   bool popart, int state) {
  const double n = params.critic_output(state);
  return popart ? unnormalize(stats, n) : n;
}

namespace {

TargetsWithGrad targets_for(const Rollout& rollout, const DiscountSpec& spec,
                            std::span<const double> values, TargetMode mode) {
  return mode == TargetMode::kLambda
             ? lambda_targets_with_grad(rollout, spec, values)
             : horizon_targets_with_grad(rollout, spec, values);
}

// Adds the first-order response of the gradient to a change `dg` of the
// per-transition targets (in unnormalized units) into `out`.
void accumulate_target_sensitivity(const AgentParams& params,
                                   const Rollout& rollout,
                                   std::span<const double> dg,
                                   double inv_sigma, const InnerConfig& config,
                                   Gradient& out) {
  const double cb = config.learner.baseline_cost;
  for (std::size_t t = 0; t < rollout.size(); ++t) {
    const Transition& tr = rollout.transitions[t];
    const double d = dg[t] * inv_sigma;
    if (d == 0.0) continue;
    out.value_weights[tr.state] += cb * d;
    out.value_bias += cb * d;
    const std::vector<double> p = policy_probs(params, tr.state);
    auto row = out.policy_row(tr.state);
    for (int a = 0; a < params.num_actions; ++a) {
      row[a] += d * ((a == tr.action ? 1.0 : 0.0) - p[a]);
    }
    if (config.learn_commitment) {
      const std::vector<double> q = softmax(params.commitment_row(tr.state));
      auto crow = out.commitment_row(tr.state);
      for (int c = 0; c < params.max_repeats; ++c) {
        crow[c] += d * ((c == tr.commitment - 1 ? 1.0 : 0.0) - q[c]);
      }
    }
  }
}

// Directional derivative of g -> g * min(1, M / |g|) along dg.
Gradient clipped_direction(const Gradient& g, const Gradient& dg,
                           double max_norm) {
  const double norm = std::sqrt(g.squared_norm());
  Gradient out = dg;
  if (norm <= max_norm) return out;
  const double factor = max_norm / norm;
  const double radial = g.dot(dg) / (norm * norm);
  out.add_scaled(g, -radial);
  out.scale(factor);
  return out;
}

}  // namespace

InnerUpdateResult inner_update_with_trace(const AgentParams& params,
                                          const NormStats& stats,
                                          std::span<const Rollout> batch,
                                          const DiscountSpec& discount,
                                          const InnerConfig& config,
                                          bool with_trace) {
  validate(discount);
  const LearnerConfig& lc = config.learner;
  InnerUpdateResult result;
  result.params = params;
  result.stats = stats;

  std::vector<std::vector<double>> values(batch.size());
  std::vector<TargetsWithGrad> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Rollout& r = batch[i];
    values[i].reserve(r.size());
    for (const Transition& tr : r.transitions) {
      values[i].push_back(state_value(params, stats, config.popart, tr.state));
    }
    targets[i] = targets_for(r, discount, values[i], config.target_mode);
    result.targets.insert(result.targets.end(), targets[i].targets.begin(),
                          targets[i].targets.end());
  }

  AgentParams& p = result.params;
  if (config.popart) {
    const NormStats old = stats;
    result.stats = stats.count == 0 ? init_stats(stats, result.targets)
                                    : update_stats(stats, result.targets);
    rescale_output_layer(p.value_weights, p.value_bias, old.mu, old.sigma,
                         result.stats.mu, result.stats.sigma);
  }
  const NormStats& ns = result.stats;
  const double inv_sigma = config.popart ? 1.0 / ns.sigma : 1.0;

  Gradient grad = zeros_like(p);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Rollout& r = batch[i];
    const std::vector<double>& g = targets[i].targets;
    std::vector<double> critic_targets(g);
    if (config.popart) {
      for (double& x : critic_targets) x = normalize(ns, x);
    }
    grad.add_scaled(critic_update(p, r, critic_targets, lc.baseline_cost), 1.0);
    grad.add_scaled(
        actor_update(p, r, g, values[i], lc.entropy_cost, inv_sigma), 1.0);
    if (config.learn_commitment) {
      std::vector<double> adv(r.size());
      for (std::size_t t = 0; t < r.size(); ++t) {
        adv[t] = (g[t] - values[i][t]) * inv_sigma;
      }
      grad.add_scaled(commitment_update(p, r, adv, lc.entropy_cost), 1.0);
    }
  }

  if (with_trace) {
    Gradient dg_gamma = zeros_like(p);
    Gradient dg_lambda = zeros_like(p);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      accumulate_target_sensitivity(p, batch[i], targets[i].d_gamma, inv_sigma,
                                    config, dg_gamma);
      accumulate_target_sensitivity(p, batch[i], targets[i].d_lambda,
                                    inv_sigma, config, dg_lambda);
    }
    result.trace.d_delta_d_gamma =
        clipped_direction(grad, dg_gamma, lc.max_grad_norm);
    result.trace.d_delta_d_gamma.scale(lc.learning_rate);
    result.trace.d_delta_d_lambda =
        clipped_direction(grad, dg_lambda, lc.max_grad_norm);
    result.trace.d_delta_d_lambda.scale(lc.learning_rate);
  }

  result.clip_factor = clip_global_norm(grad, lc.max_grad_norm);
  result.params = apply_sgd(p, grad, lc.learning_rate);
  if (with_trace) {
    result.trace.applied_delta = grad;
    result.trace.applied_delta.scale(lc.learning_rate);
  }
  return result;
}

MetaObjective::MetaObjective(const AgentParams& frozen_at,
                             const NormStats& stats,
                             std::span<const Rollout> validation,
                             const InnerConfig& config)
    : stats_(stats), config_(config) {
  const DiscountSpec undiscounted{1.0, 1.0};
  const double inv_sigma = config.popart ? 1.0 / stats.sigma : 1.0;
  for (const Rollout& r : validation) {
    std::vector<double> values;
    values.reserve(r.size());
    for (const Transition& tr : r.transitions) {
      values.push_back(state_value(frozen_at, stats, config.popart, tr.state));
    }
    const TargetsWithGrad g =
        horizon_targets_with_grad(r, undiscounted, values);
    for (std::size_t t = 0; t < r.size(); ++t) {
      const Transition& tr = r.transitions[t];
      items_.push_back({tr.state, tr.action, tr.commitment});
      advantages_.push_back((g.targets[t] - values[t]) * inv_sigma);
      normalized_targets_.push_back(
          config.popart ? normalize(stats, g.targets[t]) : g.targets[t]);
    }
  }
}

double MetaObjective::value(const AgentParams& params) const {
  double j = 0.0;
  const double cb = config_.value_cost_in_meta();
  for (std::size_t k = 0; k < items_.size(); ++k) {
    const Item& it = items_[k];
    j += advantages_[k] * log_softmax(params.policy_row(it.state))[it.action];
    if (config_.learn_commitment) {
      j += advantages_[k] *
           log_softmax(params.commitment_row(it.state))[it.commitment - 1];
    }
    const double err = normalized_targets_[k] - params.critic_output(it.state);
    j -= 0.5 * cb * err * err;
  }
  return j;
}

Gradient MetaObjective::gradient(const AgentParams& params) const {
  Gradient g = zeros_like(params);
  const double cb = config_.value_cost_in_meta();
  for (std::size_t k = 0; k < items_.size(); ++k) {
    const Item& it = items_[k];
    const double adv = advantages_[k];
    const std::vector<double> p = policy_probs(params, it.state);
    auto row = g.policy_row(it.state);
    for (int a = 0; a < params.num_actions; ++a) {
      row[a] += adv * ((a == it.action ? 1.0 : 0.0) - p[a]);
    }
    if (config_.learn_commitment) {
      const std::vector<double> q = softmax(params.commitment_row(it.state));
      auto crow = g.commitment_row(it.state);
      for (int c = 0; c < params.max_repeats; ++c) {
        crow[c] += adv * ((c == it.commitment - 1 ? 1.0 : 0.0) - q[c]);
      }
    }
    const double err = normalized_targets_[k] - params.critic_output(it.state);
    g.value_weights[it.state] += cb * err;
    g.value_bias += cb * err;
  }
  return g;
}

MetaUpdateResult meta_update(const MetaParams& meta,
                             const InnerUpdateTrace& trace,
                             std::span<const Rollout> validation,
                             const AgentParams& updated_params,
                             const NormStats& stats,
                             const InnerConfig& config) {
  const MetaObjective objective(updated_params, stats, validation, config);
  const Gradient dj = objective.gradient(updated_params);

  MetaUpdateResult out;
  out.meta = meta;
  out.dj_dgamma = dj.dot(trace.d_delta_d_gamma);
  out.dj_dlambda = dj.dot(trace.d_delta_d_lambda);
  if (!std::isfinite(out.dj_dgamma) || !std::isfinite(out.dj_dlambda)) {
    std::ostringstream msg;
    msg << "meta_update: non-finite meta-gradient (dJ/dgamma=" << out.dj_dgamma
        << ", dJ/dlambda=" << out.dj_dlambda << ", gamma=" << meta.gamma()
        << ", lambda=" << meta.lambda() << ")";
    throw std::runtime_error(msg.str());
  }
  if (meta.adapt_gamma) {
    const double gamma = meta.gamma();
    out.meta.eta_gamma +=
        meta.meta_learning_rate * out.dj_dgamma * gamma * (1.0 - gamma);
  }
  if (meta.adapt_lambda) {
    const double lambda = meta.lambda();
    out.meta.eta_lambda +=
        meta.meta_learning_rate * out.dj_dlambda * lambda * (1.0 - lambda);
  }
  return out;
}

}  // namespace adaptive_ac
