#pragma once

#include <span>

namespace adaptive_ac {

// Exponential moving first and second moments of return targets.
struct NormStats {
  double mu = 0.0;
  double nu = 1.0;
  double sigma = 1.0;
  double step_size = 3e-4;
  double sigma_lo = 1e-4;
  double sigma_hi = 1e6;
  double epsilon = 1e-12;
  long long count = 0;  // targets absorbed so far

  // sqrt(max(nu - mu^2, epsilon)) clamped to [sigma_lo, sigma_hi].
  double derived_sigma() const;
};

// One moving-average step per target, in order. Throws
// std::invalid_argument on non-finite targets.
NormStats update_stats(NormStats stats, std::span<const double> targets);

// Sets the moments to the sample moments of `targets` (first batch).
NormStats init_stats(NormStats stats, std::span<const double> targets);

// Rewrites the output layer so mu + sigma * (w.x + b) is unchanged when the
// statistics move from (old_mu, old_sigma) to (new_mu, new_sigma).
void rescale_output_layer(std::span<double> weights, double& bias,
                          double old_mu, double old_sigma, double new_mu,
                          double new_sigma);

double normalize(const NormStats& stats, double g);
double unnormalize(const NormStats& stats, double n);

}  // namespace adaptive_ac
