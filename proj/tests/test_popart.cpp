#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "adaptive_ac/popart.hpp"
#include "checks.hpp"
#include "doctest.h"

using namespace adaptive_ac;

TEST_CASE("one moment step") {
  NormStats s;
  const std::vector<double> g{10.0};
  const NormStats t = update_stats(s, g);
  CHECK(t.mu == doctest::Approx(0.003).epsilon(1e-14));
  CHECK(t.nu == doctest::Approx(1.0297).epsilon(1e-14));
  CHECK(t.sigma == doctest::Approx(std::sqrt(1.0297 - 9e-6)).epsilon(1e-14));
  CHECK(t.sigma == doctest::Approx(1.0147369).epsilon(1e-7));
  CHECK(t.count == 1);
}

TEST_CASE("targets at the fixed point leave the moments unchanged") {
  // A target equal to mu with nu = mu^2 is an exact fixed point; sigma then
  // sits on the lower clamp.
  NormStats flat;
  flat.mu = 2.0;
  flat.nu = 4.0;
  const std::vector<double> g(50, 2.0);
  const NormStats t = update_stats(flat, g);
  CHECK(t.mu == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.nu == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(t.sigma == t.sigma_lo);
}

TEST_CASE("huge targets saturate sigma at the upper bound") {
  NormStats s;
  s.step_size = 0.5;
  std::vector<double> g;
  for (int k = 0; k < 100; ++k) g.push_back(k % 2 ? 1e9 : -1e9);
  CHECK(update_stats(s, g).sigma == 1e6);
}

TEST_CASE("non-finite targets are rejected") {
  const std::vector<double> bad{1.0, NAN};
  CHECK_THROWS_AS(update_stats(NormStats{}, bad), std::invalid_argument);
  const std::vector<double> inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(update_stats(NormStats{}, inf), std::invalid_argument);
}

TEST_CASE("first-batch initialization uses the sample moments") {
  const std::vector<double> g{1.0, 3.0, 5.0};
  const NormStats s = init_stats(NormStats{}, g);
  CHECK(s.mu == doctest::Approx(3.0));
  CHECK(s.nu == doctest::Approx(35.0 / 3.0));
  CHECK(s.sigma == doctest::Approx(std::sqrt(35.0 / 3.0 - 9.0)));
  CHECK(s.count == 3);
}

TEST_CASE("output layer rescale example") {
  std::vector<double> w{2.0};
  double b = 1.0;
  rescale_output_layer(w, b, 0.0, 1.0, 1.0, 2.0);
  CHECK(w[0] == 1.0);
  CHECK(b == 0.0);
  CHECK(1.0 + 2.0 * (w[0] + b) == 3.0);
}

TEST_CASE("identical statistics leave the layer unchanged") {
  std::vector<double> w{0.3, -1.7, 2.2};
  double b = -0.4;
  const auto w0 = w;
  rescale_output_layer(w, b, 5.0, 2.0, 5.0, 2.0);
  CHECK(w == w0);
  CHECK(b == doctest::Approx(-0.4).epsilon(1e-15));
}

TEST_CASE("rescale preserves unnormalized predictions") {
  CHECK(checks::popart_preservation(77, 1000) <= 1e-9);
}

TEST_CASE("moments match the closed-form oracle and sigma stays bounded") {
  const checks::TrackingReport rep = checks::popart_tracking(78, 200);
  CHECK(rep.max_rel_err <= 1e-12);
  CHECK(rep.sigma_in_bounds);
}

TEST_CASE("normalize and unnormalize") {
  NormStats s;
  s.mu = 5.0;
  s.sigma = 2.0;
  CHECK(normalize(s, 9.0) == 2.0);
  CHECK(unnormalize(s, 2.0) == 9.0);
  for (double g : {-1e3, -3.3, 0.0, 1e-7, 42.0}) {
    CHECK(unnormalize(s, normalize(s, g)) == doctest::Approx(g).epsilon(1e-12));
  }
  NormStats low;
  low.mu = 0.0;
  low.sigma = 1e-4;
  CHECK(normalize(low, 1e-8) == doctest::Approx(1e-4).epsilon(1e-12));
}
