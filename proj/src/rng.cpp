#include "adaptive_ac/rng.hpp"

namespace adaptive_ac {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master, uint64_t kind, uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ kind) + index);
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

RngStreams::RngStreams(uint64_t master_seed, int num_envs)
    : master_(master_seed), learner_(derive_seed(master_seed, kLearner, 0)) {
  env_.reserve(num_envs);
  policy_.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) {
    env_.emplace_back(derive_seed(master_seed, kEnv, i));
    policy_.emplace_back(derive_seed(master_seed, kPolicy, i));
  }
}

}  // namespace adaptive_ac
