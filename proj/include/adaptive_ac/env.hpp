#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace adaptive_ac {

// One agent-visible environment step. For wrapped environments a single
// EnvStep may cover several primitive transitions (steps_consumed > 1).
struct EnvStep {
  int observation = 0;
  double reward_raw = 0.0;    // environment-native units
  double reward_agent = 0.0;  // units seen by the learner
  bool terminal = false;
  int steps_consumed = 1;

  bool operator==(const EnvStep&) const = default;
};

class Environment {
 public:
  virtual ~Environment() = default;

  // Starts a new episode. The seed is accepted for interface uniformity;
  // the toy environments here are deterministic.
  virtual void reset(uint64_t seed) = 0;
  // Throws std::logic_error when called on a terminal environment.
  virtual EnvStep step(int action) = 0;

  virtual int observation() const = 0;
  virtual bool terminal() const = 0;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;

  virtual std::unique_ptr<Environment> clone() const = 0;
};

// Nine-state chain. LEFT costs -1; RIGHT pays 2d/9 where d is the index of
// the state entered. Both ends terminate; the right end pays an extra +9.
class ChainEnv final : public Environment {
 public:
  static constexpr int kNumStates = 9;
  static constexpr int kStart = 4;
  static constexpr int kLeft = 0;
  static constexpr int kRight = 1;

  ChainEnv() = default;

  void reset(uint64_t seed) override;
  EnvStep step(int action) override;
  int observation() const override { return position_; }
  bool terminal() const override { return terminal_; }
  int num_states() const override { return kNumStates; }
  int num_actions() const override { return 2; }
  std::unique_ptr<Environment> clone() const override;

  // Test hook: place the agent anywhere on the chain.
  void set_position(int position);

 private:
  int position_ = kStart;
  bool terminal_ = false;
};

// Eleven states on a ring. MOVE advances one state; STAY does nothing,
// except in the last state where it pays 100 and ends the episode.
class CycleEnv final : public Environment {
 public:
  static constexpr int kNumStates = 11;
  static constexpr int kMove = 0;
  static constexpr int kStay = 1;
  static constexpr double kGoalReward = 100.0;

  CycleEnv() = default;

  void reset(uint64_t seed) override;
  EnvStep step(int action) override;
  int observation() const override { return position_; }
  bool terminal() const override { return terminal_; }
  int num_states() const override { return kNumStates; }
  int num_actions() const override { return 2; }
  std::unique_ptr<Environment> clone() const override;

  void set_position(int position);

 private:
  int position_ = 0;
  bool terminal_ = false;
};

// Multiplies reward_agent by a constant; reward_raw passes through.
class RewardScaleWrapper final : public Environment {
 public:
  RewardScaleWrapper(std::unique_ptr<Environment> inner, double scale);

  void reset(uint64_t seed) override { inner_->reset(seed); }
  EnvStep step(int action) override;
  int observation() const override { return inner_->observation(); }
  bool terminal() const override { return inner_->terminal(); }
  int num_states() const override { return inner_->num_states(); }
  int num_actions() const override { return inner_->num_actions(); }
  std::unique_ptr<Environment> clone() const override;

  double scale() const { return scale_; }

 private:
  std::unique_ptr<Environment> inner_;
  double scale_;
};

// Repeats every action a fixed number of times, stopping early on
// termination.
class FixedRepeatWrapper final : public Environment {
 public:
  FixedRepeatWrapper(std::unique_ptr<Environment> inner, int repeat_count);

  void reset(uint64_t seed) override { inner_->reset(seed); }
  EnvStep step(int action) override;
  int observation() const override { return inner_->observation(); }
  bool terminal() const override { return inner_->terminal(); }
  int num_states() const override { return inner_->num_states(); }
  int num_actions() const override { return inner_->num_actions(); }
  std::unique_ptr<Environment> clone() const override;

  int repeat_count() const { return repeat_count_; }

 private:
  std::unique_ptr<Environment> inner_;
  int repeat_count_;
};

// Executes `action` up to `repeats` primitive steps on `env`, summing raw and
// agent rewards. Stops at termination.
EnvStep repeat_step(Environment& env, int action, int repeats);

// Builds an environment from its string id: "chain", "chain-scaled:<scale>"
// or "cycle". Throws std::invalid_argument on unknown ids.
std::unique_ptr<Environment> make_env(std::string_view id);

}  // namespace adaptive_ac
