#include <cmath>
#include <limits>
#include <stdexcept>

#include "adaptive_ac/metagrad.hpp"
#include "checks.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace adaptive_ac;

TEST_CASE("squash and unsquash") {
  CHECK(squash(0.0) == 0.5);
  CHECK(unsquash(0.95) == doctest::Approx(2.944439).epsilon(1e-6));
  for (double p : {1e-9, 0.01, 0.3, 0.5, 0.95, 0.999999}) {
    CHECK(squash(unsquash(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(squash(-800.0) >= 0.0);
  CHECK(squash(800.0) <= 1.0);
  CHECK_THROWS_AS(unsquash(0.0), std::domain_error);
  CHECK_THROWS_AS(unsquash(1.0), std::domain_error);
  CHECK_THROWS_AS(unsquash(NAN), std::domain_error);
}

TEST_CASE("meta params from gamma and lambda") {
  const MetaParams m = MetaParams::from(0.95, 0.8);
  CHECK(m.gamma() == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(m.lambda() == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.meta_learning_rate == 1e-3);
  CHECK(m.meta_rollout_len == 15);
  CHECK(m.gamma_m == 1.0);
}

TEST_CASE("meta-gradient matches central finite differences") {
  const checks::MetaReport rep = checks::meta_gradient_fd(1000, 100);
  CHECK(rep.gamma <= 1e-4);
  CHECK(rep.lambda <= 1e-4);
  // The sample must exercise the clipped branch of the inner update.
  CHECK(rep.clipped > 0);
  CHECK(rep.clipped < 100);
}

TEST_CASE("trace-free inner update gives the same parameters") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const checks::MetaInstance m = checks::random_meta_instance(seed);
    const auto a = inner_update_with_trace(m.params, m.stats, m.batch,
                                           m.discount, m.config, true);
    const auto b = inner_update_with_trace(m.params, m.stats, m.batch,
                                           m.discount, m.config, false);
    CHECK(a.params == b.params);
    CHECK(a.targets == b.targets);
  }
}

TEST_CASE("meta update leaves eta alone without a step") {
  const checks::MetaInstance m = checks::random_meta_instance(3);
  const auto inner = inner_update_with_trace(m.params, m.stats, m.batch,
                                             m.discount, m.config, true);
  MetaParams meta = MetaParams::from(0.9, 0.7);
  SUBCASE("zero meta learning rate") {
    meta.meta_learning_rate = 0.0;
    const auto out = meta_update(meta, inner.trace, m.validation, inner.params,
                                 inner.stats, m.config);
    CHECK(out.meta.eta_gamma == meta.eta_gamma);
    CHECK(out.meta.eta_lambda == meta.eta_lambda);
  }
  SUBCASE("zero trace") {
    InnerUpdateTrace zero;
    zero.d_delta_d_gamma = zeros_like(inner.params);
    zero.d_delta_d_lambda = zeros_like(inner.params);
    zero.applied_delta = zeros_like(inner.params);
    meta.meta_learning_rate = 0.5;
    const auto out = meta_update(meta, zero, m.validation, inner.params,
                                 inner.stats, m.config);
    CHECK(out.meta.eta_gamma == meta.eta_gamma);
    CHECK(out.meta.eta_lambda == meta.eta_lambda);
  }
}

TEST_CASE("eta moves in the direction of the gamma gradient") {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    const checks::MetaInstance m = checks::random_meta_instance(seed);
    const auto inner = inner_update_with_trace(m.params, m.stats, m.batch,
                                               m.discount, m.config, true);
    MetaParams meta = MetaParams::from(m.discount.gamma, m.discount.lambda);
    meta.meta_learning_rate = 0.1;
    const auto out = meta_update(meta, inner.trace, m.validation, inner.params,
                                 inner.stats, m.config);
    const double step = out.meta.eta_gamma - meta.eta_gamma;
    CHECK((step > 0) == (out.dj_dgamma > 0));
    const double g = meta.gamma();
    CHECK(step == doctest::Approx(0.1 * out.dj_dgamma * g * (1 - g)));
    CHECK(out.meta.gamma() > 0.0);
    CHECK(out.meta.gamma() < 1.0);
  }
}

TEST_CASE("adapt flags freeze the corresponding meta-parameter") {
  const checks::MetaInstance m = checks::random_meta_instance(5);
  const auto inner = inner_update_with_trace(m.params, m.stats, m.batch,
                                             m.discount, m.config, true);
  MetaParams meta = MetaParams::from(0.9, 0.7);
  meta.meta_learning_rate = 1.0;
  meta.adapt_lambda = false;
  const auto out = meta_update(meta, inner.trace, m.validation, inner.params,
                               inner.stats, m.config);
  CHECK(out.meta.eta_lambda == meta.eta_lambda);
}

TEST_CASE("non-finite meta-gradient aborts with diagnostics") {
  const checks::MetaInstance m = checks::random_meta_instance(8);
  auto inner = inner_update_with_trace(m.params, m.stats, m.batch, m.discount,
                                       m.config, true);
  inner.trace.d_delta_d_gamma.value_bias = NAN;
  try {
    meta_update(MetaParams::from(0.9, 0.9), inner.trace, m.validation,
                inner.params, inner.stats, m.config);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("dJ/dgamma") != std::string::npos);
  }
}

TEST_CASE("meta objective gradient matches its value") {
  for (uint64_t seed = 40; seed < 60; ++seed) {
    const checks::MetaInstance m = checks::random_meta_instance(seed);
    const MetaObjective obj(m.params, m.stats, m.validation, m.config);
    const Gradient g = obj.gradient(m.params);
    for (std::size_t k = 0; k < m.params.policy_logits.size(); ++k) {
      const double fd = oracle::derivative(
          [&](double x) {
            AgentParams p = m.params;
            p.policy_logits[k] = x;
            return obj.value(p);
          },
          m.params.policy_logits[k]);
      CHECK(oracle::rel_err(g.policy_logits[k], fd) <= 1e-6);
    }
    for (std::size_t k = 0; k < m.params.value_weights.size(); ++k) {
      const double fd = oracle::derivative(
          [&](double x) {
            AgentParams p = m.params;
            p.value_weights[k] = x;
            return obj.value(p);
          },
          m.params.value_weights[k]);
      CHECK(oracle::rel_err(g.value_weights[k], fd) <= 1e-6);
    }
    for (std::size_t k = 0; k < m.params.commitment_logits.size(); ++k) {
      const double fd = oracle::derivative(
          [&](double x) {
            AgentParams p = m.params;
            p.commitment_logits[k] = x;
            return obj.value(p);
          },
          m.params.commitment_logits[k]);
      CHECK(oracle::rel_err(g.commitment_logits[k], fd) <= 1e-6);
    }
  }
}

TEST_CASE("zero value cost drops the critic term from the meta objective") {
  checks::MetaInstance m = checks::random_meta_instance(12);
  m.config.meta_value_cost = 0.0;
  const MetaObjective obj(m.params, m.stats, m.validation, m.config);
  const Gradient g = obj.gradient(m.params);
  for (double x : g.value_weights) CHECK(x == 0.0);
  CHECK(g.value_bias == 0.0);

  m.config.meta_value_cost.reset();
  CHECK(m.config.value_cost_in_meta() == m.config.learner.baseline_cost);
}

TEST_CASE("normalized inner update preserves predictions before the step") {
  checks::MetaInstance m = checks::random_meta_instance(21);
  m.config.popart = true;
  m.config.learner.learning_rate = 0.0;
  NormStats stats;
  stats.mu = 1.5;
  stats.nu = 1.5 * 1.5 + 4.0;
  stats.sigma = stats.derived_sigma();
  stats.count = 10;
  stats.step_size = 0.2;
  const auto res = inner_update_with_trace(m.params, stats, m.batch, m.discount,
                                           m.config, false);
  CHECK(res.stats.mu != stats.mu);
  for (int s = 0; s < m.params.num_states; ++s) {
    const double before = state_value(m.params, stats, true, s);
    const double after = state_value(res.params, res.stats, true, s);
    CHECK(std::abs(after - before) <= 1e-9 * (1 + std::abs(before)));
  }
}

TEST_CASE("first normalized update initializes statistics from the batch") {
  checks::MetaInstance m = checks::random_meta_instance(22);
  m.config.popart = true;
  const auto res = inner_update_with_trace(m.params, NormStats{}, m.batch,
                                           m.discount, m.config, false);
  double mean = 0.0;
  for (double g : res.targets) mean += g;
  mean /= static_cast<double>(res.targets.size());
  CHECK(res.stats.mu == doctest::Approx(mean).epsilon(1e-12));
  CHECK(res.stats.count == static_cast<long long>(res.targets.size()));
}
