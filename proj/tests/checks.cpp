#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "adaptive_ac/agent.hpp"
#include "adaptive_ac/commitment.hpp"
#include "adaptive_ac/popart.hpp"
#include "oracles.hpp"

namespace checks {

using namespace adaptive_ac;

namespace {

using Engine = std::mt19937_64;

double uniform(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Engine& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double log_uniform(Engine& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

constexpr int kStates = 3;
constexpr double kReward[kStates][2] = {{1.0, -2.0}, {0.5, 3.0}, {-1.0, 2.5}};
constexpr double kValue[kStates] = {2.0, -1.0, 4.0};

struct Primitive {
  int next;
  double reward;
  bool terminal;
};

Primitive primitive(int s, int a) {
  return {(s + 1 + a) % kStates, kReward[s][a], s == 2 && a == 1};
}

void extend(int state, std::vector<Transition>& prefix, int max_len,
            const std::function<void(const Rollout&,
                                     const std::vector<double>&)>& visit) {
  if (static_cast<int>(prefix.size()) == max_len) return;
  for (int a = 0; a < 2; ++a) {
    for (int c = 1; c <= 2; ++c) {
      Transition tr{state, a, c, 0.0, 0.0, 0, false};
      int s = state;
      for (int k = 0; k < c && !tr.terminal; ++k) {
        const Primitive p = primitive(s, a);
        tr.reward_agent += p.reward;
        tr.reward_raw += p.reward;
        tr.terminal = p.terminal;
        ++tr.steps_consumed;
        s = p.next;
      }
      prefix.push_back(tr);
      Rollout r;
      r.transitions = prefix;
      if (!tr.terminal) {
        r.bootstrap_state = s;
        r.bootstrap_value = kValue[s];
      }
      std::vector<double> values;
      for (const Transition& t : prefix) values.push_back(kValue[t.state]);
      visit(r, values);
      if (!tr.terminal) extend(s, prefix, max_len, visit);
      prefix.pop_back();
    }
  }
}

Rollout random_rollout(Engine& rng, int len, int states, int actions,
                       int repeats) {
  Rollout r;
  for (int t = 0; t < len; ++t) {
    Transition tr;
    tr.state = uniform_int(rng, 0, states - 1);
    tr.action = uniform_int(rng, 0, actions - 1);
    tr.commitment = uniform_int(rng, 1, repeats);
    tr.reward_agent = uniform(rng, -2.0, 2.0);
    tr.reward_raw = tr.reward_agent;
    tr.steps_consumed = uniform_int(rng, 1, 3);
    r.transitions.push_back(tr);
  }
  if (uniform(rng, 0.0, 1.0) < 0.3) {
    r.transitions.back().terminal = true;
  } else {
    r.bootstrap_state = uniform_int(rng, 0, states - 1);
    r.bootstrap_value = uniform(rng, -3.0, 3.0);
  }
  return r;
}

AgentParams random_params(Engine& rng, int states, int actions, int repeats) {
  AgentParams p(states, actions, repeats);
  for (double& x : p.policy_logits) x = uniform(rng, -1.5, 1.5);
  for (double& x : p.value_weights) x = uniform(rng, -2.0, 2.0);
  p.value_bias = uniform(rng, -1.0, 1.0);
  for (double& x : p.commitment_logits) x = uniform(rng, -1.5, 1.5);
  return p;
}

std::vector<double> row(const std::vector<double>& table, int s, int width) {
  return {table.begin() + s * width, table.begin() + (s + 1) * width};
}

}  // namespace

void for_each_small_rollout(
    int max_len,
    const std::function<void(const Rollout&, const std::vector<double>&)>&
        visit) {
  for (int s0 = 0; s0 < kStates; ++s0) {
    std::vector<Transition> prefix;
    extend(s0, prefix, max_len, visit);
  }
}

ReturnsReport exhaustive_returns(int max_len) {
  ReturnsReport report;
  const double gammas[] = {0.0, 0.3, 0.9, 1.0};
  const double lambdas[] = {0.0, 0.5, 0.95, 1.0};
  auto err = [](double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
  };
  for_each_small_rollout(max_len, [&](const Rollout& r,
                                      const std::vector<double>& values) {
    ++report.rollouts;
    for (double gamma : gammas) {
      for (double lambda : lambdas) {
        const DiscountSpec spec{gamma, lambda};
        const std::vector<double> got = lambda_targets(r, spec, values);
        for (std::size_t t = 0; t < r.size(); ++t) {
          report.lambda_max_err =
              std::max(report.lambda_max_err,
                       err(got[t], oracle::lambda_mixture(r, values, gamma,
                                                          lambda, t)));
          if (lambda != lambdas[0]) continue;
          for (std::size_t n = 0; t + n <= r.size(); ++n) {
            report.nstep_max_err = std::max(
                report.nstep_max_err,
                err(nstep_target(r, spec, values, t, n),
                    oracle::nstep(r, values, gamma, t, n)));
          }
        }
      }
    }
  });
  return report;
}

GradientReport actor_critic_fd(uint64_t seed, int instances) {
  Engine rng(seed);
  GradientReport report;
  for (int i = 0; i < instances; ++i) {
    const int states = uniform_int(rng, 2, 4);
    const int actions = uniform_int(rng, 2, 3);
    const int repeats = uniform_int(rng, 2, 4);
    const AgentParams params = random_params(rng, states, actions, repeats);
    const Rollout r =
        random_rollout(rng, uniform_int(rng, 1, 5), states, actions, repeats);
    std::vector<double> targets, baselines;
    for (std::size_t t = 0; t < r.size(); ++t) {
      targets.push_back(uniform(rng, -3.0, 3.0));
      baselines.push_back(uniform(rng, -3.0, 3.0));
    }
    const double entropy_cost = uniform(rng, 0.0, 0.1);
    const double baseline_cost = uniform(rng, 0.1, 1.0);
    const double scale = uniform(rng, 0.2, 2.0);
    std::vector<double> adv;
    for (std::size_t t = 0; t < r.size(); ++t) {
      adv.push_back((targets[t] - baselines[t]) * scale);
    }

    const Gradient actor =
        actor_update(params, r, targets, baselines, entropy_cost, scale);
    auto actor_objective = [&](const std::vector<double>& logits) {
      double j = 0.0;
      for (std::size_t t = 0; t < r.size(); ++t) {
        const auto& tr = r.transitions[t];
        const auto z = row(logits, tr.state, actions);
        j += adv[t] * oracle::log_prob(z, tr.action) +
             entropy_cost * oracle::entropy(z);
      }
      return j;
    };
    for (std::size_t k = 0; k < params.policy_logits.size(); ++k) {
      const double fd = oracle::derivative(
          [&](double x) {
            std::vector<double> z = params.policy_logits;
            z[k] = x;
            return actor_objective(z);
          },
          params.policy_logits[k]);
      report.actor = std::max(report.actor,
                              oracle::rel_err(actor.policy_logits[k], fd));
    }

    std::vector<double> critic_targets;
    for (std::size_t t = 0; t < r.size(); ++t) {
      critic_targets.push_back(uniform(rng, -3.0, 3.0));
    }
    const Gradient critic = critic_update(params, r, critic_targets, baseline_cost);
    auto critic_objective = [&](const std::vector<double>& w, double b) {
      double j = 0.0;
      for (std::size_t t = 0; t < r.size(); ++t) {
        const double e = critic_targets[t] - (w[r.transitions[t].state] + b);
        j -= 0.5 * baseline_cost * e * e;
      }
      return j;
    };
    for (std::size_t k = 0; k < params.value_weights.size(); ++k) {
      const double fd = oracle::derivative(
          [&](double x) {
            std::vector<double> w = params.value_weights;
            w[k] = x;
            return critic_objective(w, params.value_bias);
          },
          params.value_weights[k]);
      report.critic = std::max(report.critic,
                               oracle::rel_err(critic.value_weights[k], fd));
    }
    const double fd_bias = oracle::derivative(
        [&](double b) { return critic_objective(params.value_weights, b); },
        params.value_bias);
    report.critic =
        std::max(report.critic, oracle::rel_err(critic.value_bias, fd_bias));

    const Gradient commit = commitment_update(params, r, adv, entropy_cost);
    auto commit_objective = [&](const std::vector<double>& logits) {
      double j = 0.0;
      for (std::size_t t = 0; t < r.size(); ++t) {
        const auto& tr = r.transitions[t];
        const auto z = row(logits, tr.state, repeats);
        j += adv[t] * oracle::log_prob(z, tr.commitment - 1) +
             entropy_cost * oracle::entropy(z);
      }
      return j;
    };
    for (std::size_t k = 0; k < params.commitment_logits.size(); ++k) {
      const double fd = oracle::derivative(
          [&](double x) {
            std::vector<double> z = params.commitment_logits;
            z[k] = x;
            return commit_objective(z);
          },
          params.commitment_logits[k]);
      report.commitment = std::max(
          report.commitment, oracle::rel_err(commit.commitment_logits[k], fd));
    }
  }
  return report;
}

double popart_preservation(uint64_t seed, int triples) {
  Engine rng(seed);
  double worst = 0.0;
  for (int i = 0; i < triples; ++i) {
    const int n = uniform_int(rng, 1, 11);
    std::vector<double> w(n);
    for (double& x : w) x = uniform(rng, -3.0, 3.0);
    double b = uniform(rng, -3.0, 3.0);
    const double s1 = log_uniform(rng, 1e-3, 1e3);
    const double s2 = log_uniform(rng, 1e-3, 1e3);
    const double mu = s1 * uniform(rng, -5.0, 5.0);
    const double sigma = std::clamp(s1 * uniform(rng, 0.1, 10.0), 1e-4, 1e6);
    const double mu2 = s2 * uniform(rng, -5.0, 5.0);
    const double sigma2 = std::clamp(s2 * uniform(rng, 0.1, 10.0), 1e-4, 1e6);

    std::vector<std::vector<double>> xs;
    for (int k = 0; k < n; ++k) {
      std::vector<double> onehot(n, 0.0);
      onehot[k] = 1.0;
      xs.push_back(onehot);
    }
    for (int k = 0; k < 5; ++k) {
      std::vector<double> x(n);
      for (double& v : x) v = uniform(rng, -1.0, 1.0);
      xs.push_back(x);
    }
    auto predict = [](const std::vector<double>& w, double b, double mu,
                      double sigma, const std::vector<double>& x) {
      double dot = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) dot += w[k] * x[k];
      return mu + sigma * (dot + b);
    };
    std::vector<double> before;
    for (const auto& x : xs) before.push_back(predict(w, b, mu, sigma, x));
    rescale_output_layer(w, b, mu, sigma, mu2, sigma2);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double after = predict(w, b, mu2, sigma2, xs[k]);
      worst = std::max(worst,
                       std::abs(after - before[k]) / (1.0 + std::abs(before[k])));
    }
  }
  return worst;
}

TrackingReport popart_tracking(uint64_t seed, int streams) {
  Engine rng(seed);
  TrackingReport report;
  auto in_bounds = [](const NormStats& s) {
    return s.sigma >= s.sigma_lo && s.sigma <= s.sigma_hi;
  };
  for (int i = 0; i < streams; ++i) {
    NormStats stats;
    stats.step_size = log_uniform(rng, 1e-4, 0.3);
    if (i % 2 == 1) {
      stats.mu = uniform(rng, -10.0, 10.0);
      stats.nu = stats.mu * stats.mu + log_uniform(rng, 0.01, 100.0);
      stats.sigma = stats.derived_sigma();
    }
    const double m = uniform(rng, 1.0, 100.0) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1 : 1);
    const double s = std::abs(m) * uniform(rng, 0.1, 1.0);
    std::normal_distribution<double> draw(m, s);
    std::vector<double> xs(uniform_int(rng, 1, 2000));
    for (double& x : xs) x = draw(rng);

    // Absorb in random-size batches, checking the bounds after each target.
    NormStats running = stats;
    std::size_t pos = 0;
    while (pos < xs.size()) {
      const std::size_t len =
          std::min<std::size_t>(xs.size() - pos, uniform_int(rng, 1, 40));
      for (std::size_t k = 0; k < len; ++k) {
        running = update_stats(running, std::span(&xs[pos + k], 1));
        report.sigma_in_bounds = report.sigma_in_bounds && in_bounds(running);
      }
      pos += len;
    }
    const NormStats whole = update_stats(stats, xs);
    const oracle::Moments ref =
        oracle::ema_closed_form(stats.mu, stats.nu, stats.step_size, xs);
    const double ref_sigma = std::clamp(
        std::sqrt(std::max(ref.nu - ref.mu * ref.mu, stats.epsilon)),
        stats.sigma_lo, stats.sigma_hi);
    for (const NormStats& got : {running, whole}) {
      report.max_rel_err = std::max(
          {report.max_rel_err, oracle::rel_err(got.mu, ref.mu, 1e-300),
           oracle::rel_err(got.nu, ref.nu, 1e-300),
           oracle::rel_err(got.sigma, ref_sigma, 1e-300)});
    }
  }

  // Streams that push sigma onto both clamps.
  NormStats big;
  big.step_size = 0.5;
  for (int k = 0; k < 200; ++k) {
    const double g = k % 2 ? 1e9 : -1e9;
    big = update_stats(big, std::span(&g, 1));
    report.sigma_in_bounds = report.sigma_in_bounds && in_bounds(big);
  }
  report.sigma_in_bounds = report.sigma_in_bounds && big.sigma == big.sigma_hi;
  NormStats flat;
  flat.step_size = 0.5;
  for (int k = 0; k < 200; ++k) {
    const double g = 3.0;
    flat = update_stats(flat, std::span(&g, 1));
    report.sigma_in_bounds = report.sigma_in_bounds && in_bounds(flat);
  }
  report.sigma_in_bounds = report.sigma_in_bounds && flat.sigma == flat.sigma_lo;
  return report;
}

MetaInstance random_meta_instance(uint64_t seed) {
  Engine rng(seed);
  MetaInstance m;
  const bool learned = uniform(rng, 0.0, 1.0) < 0.5;
  const int repeats = learned ? 3 : 1;
  m.params = random_params(rng, kStates, 2, repeats);
  m.config.learn_commitment = learned;
  m.config.target_mode =
      uniform(rng, 0.0, 1.0) < 0.7 ? TargetMode::kLambda : TargetMode::kNStep;
  m.config.learner.learning_rate = uniform(rng, 0.05, 0.5);
  m.config.learner.entropy_cost = 0.01;
  m.config.learner.baseline_cost = 0.5;
  m.config.learner.max_grad_norm = uniform(rng, 0.0, 1.0) < 0.5
                                       ? std::numeric_limits<double>::infinity()
                                       : uniform(rng, 0.2, 2.0);
  const int inner = uniform_int(rng, 1, 2);
  for (int k = 0; k < inner; ++k) {
    m.batch.push_back(random_rollout(rng, 2, kStates, 2, repeats));
  }
  const int val = uniform_int(rng, 1, 2);
  for (int k = 0; k < val; ++k) {
    m.validation.push_back(random_rollout(rng, 2, kStates, 2, repeats));
  }
  m.discount = {uniform(rng, 0.05, 0.98), uniform(rng, 0.05, 0.98)};
  return m;
}

MetaReport meta_gradient_fd(uint64_t seed, int instances) {
  MetaReport report;
  Engine seeds(seed);
  for (int i = 0; i < instances; ++i) {
    const MetaInstance m = random_meta_instance(seeds());
    const InnerUpdateResult inner = inner_update_with_trace(
        m.params, m.stats, m.batch, m.discount, m.config, true);
    if (inner.clip_factor < 1.0) ++report.clipped;
    MetaParams meta = MetaParams::from(m.discount.gamma, m.discount.lambda);
    meta.meta_learning_rate = 0.0;
    const MetaUpdateResult analytic = meta_update(
        meta, inner.trace, m.validation, inner.params, inner.stats, m.config);

    const MetaObjective objective(inner.params, inner.stats, m.validation,
                                  m.config);
    auto j_at = [&](double gamma, double lambda) {
      return objective.value(inner_update_with_trace(m.params, m.stats, m.batch,
                                                     {gamma, lambda}, m.config,
                                                     false)
                                 .params);
    };
    auto clipped_at = [&](double gamma, double lambda) {
      return inner_update_with_trace(m.params, m.stats, m.batch,
                                     {gamma, lambda}, m.config, false)
                 .clip_factor < 1.0;
    };
    // Meta-gradients here are often ~1e-6 against |J| ~ 10, so a small step
    // drowns in cancellation. Start at 1e-3 and shrink only while the stencil
    // straddles the clipping kink.
    auto step_for = [&](const std::function<bool(double)>& clipped, double x) {
      double h = 1e-3;
      for (; h > 1e-7; h /= 10) {
        bool smooth = true;
        for (int k = -2; k <= 2; ++k) {
          smooth = smooth && clipped(x + k * h) == clipped(x);
        }
        if (smooth) break;
      }
      return h;
    };
    const double hg = step_for(
        [&](double g) { return clipped_at(g, m.discount.lambda); }, m.discount.gamma);
    const double hl = step_for(
        [&](double l) { return clipped_at(m.discount.gamma, l); }, m.discount.lambda);
    const double fd_gamma = oracle::derivative(
        [&](double g) { return j_at(g, m.discount.lambda); }, m.discount.gamma,
        hg);
    const double fd_lambda = oracle::derivative(
        [&](double l) { return j_at(m.discount.gamma, l); }, m.discount.lambda,
        hl);
    report.gamma =
        std::max(report.gamma, oracle::rel_err(analytic.dj_dgamma, fd_gamma));
    report.lambda =
        std::max(report.lambda, oracle::rel_err(analytic.dj_dlambda, fd_lambda));
  }
  return report;
}

}  // namespace checks
