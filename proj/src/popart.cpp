#include "adaptive_ac/popart.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptive_ac {

namespace {

void require_finite(std::span<const double> targets) {
  for (double g : targets) {
    if (!std::isfinite(g)) {
      throw std::invalid_argument("popart: non-finite target");
    }
  }
}

}  // namespace

double NormStats::derived_sigma() const {
  const double var = std::max(nu - mu * mu, epsilon);
  return std::clamp(std::sqrt(var), sigma_lo, sigma_hi);
}

NormStats update_stats(NormStats stats, std::span<const double> targets) {
  require_finite(targets);
  const double beta = stats.step_size;
  for (double g : targets) {
    stats.mu += beta * (g - stats.mu);
    stats.nu += beta * (g * g - stats.nu);
  }
  stats.count += static_cast<long long>(targets.size());
  stats.sigma = stats.derived_sigma();
  return stats;
}

NormStats init_stats(NormStats stats, std::span<const double> targets) {
  require_finite(targets);
  if (targets.empty()) return stats;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double g : targets) {
    sum += g;
    sum_sq += g * g;
  }
  const double n = static_cast<double>(targets.size());
  stats.mu = sum / n;
  stats.nu = sum_sq / n;
  stats.count = static_cast<long long>(targets.size());
  stats.sigma = stats.derived_sigma();
  return stats;
}

void rescale_output_layer(std::span<double> weights, double& bias,
                          double old_mu, double old_sigma, double new_mu,
                          double new_sigma) {
  if (!(new_sigma > 0.0)) {
    throw std::invalid_argument("rescale_output_layer: sigma must be > 0");
  }
  const double ratio = old_sigma / new_sigma;
  for (double& w : weights) w *= ratio;
  bias = (old_sigma * bias + old_mu - new_mu) / new_sigma;
}

double normalize(const NormStats& stats, double g) {
  return (g - stats.mu) / stats.sigma;
}

double unnormalize(const NormStats& stats, double n) {
  return stats.mu + stats.sigma * n;
}

}  // namespace adaptive_ac
