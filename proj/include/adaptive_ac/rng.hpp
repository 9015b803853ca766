#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace adaptive_ac {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive well-separated child seeds.
uint64_t splitmix64(uint64_t x);

// Derives the seed of child stream (kind, index) from a master seed.
uint64_t derive_seed(uint64_t master, uint64_t kind, uint64_t index);

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform01(Rng& rng);

// Inverse-CDF draw from a probability vector. Consumes exactly one engine
// value, so replaying a stream replays the draws.
int sample_categorical(std::span<const double> probs, Rng& rng);

// Per-run random streams: one environment stream and one policy stream per
// environment copy, plus a learner stream. All are pure functions of the
// master seed.
class RngStreams {
 public:
  enum Kind : uint64_t { kEnv = 1, kPolicy = 2, kLearner = 3 };

  RngStreams(uint64_t master_seed, int num_envs);

  Rng& env(int i) { return env_.at(i); }
  Rng& policy(int i) { return policy_.at(i); }
  Rng& learner() { return learner_; }
  uint64_t master_seed() const { return master_; }

 private:
  uint64_t master_;
  std::vector<Rng> env_;
  std::vector<Rng> policy_;
  Rng learner_;
};

}  // namespace adaptive_ac
