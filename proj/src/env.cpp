#include "adaptive_ac/env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptive_ac {

namespace {

void require_live(bool terminal, const char* who) {
  if (terminal) {
    throw std::logic_error(std::string(who) + ": step on terminal environment");
  }
}

void require_action(int action, int num_actions, const char* who) {
  if (action < 0 || action >= num_actions) {
    throw std::out_of_range(std::string(who) + ": action " +
                            std::to_string(action) + " out of range");
  }
}

}  // namespace

void ChainEnv::reset(uint64_t /*seed*/) {
  position_ = kStart;
  terminal_ = false;
}

EnvStep ChainEnv::step(int action) {
  require_live(terminal_, "ChainEnv");
  require_action(action, 2, "ChainEnv");
  EnvStep out;
  if (action == kLeft) {
    --position_;
    out.reward_raw = -1.0;
  } else {
    ++position_;
    out.reward_raw = 2.0 * position_ / kNumStates;
    if (position_ == kNumStates - 1) out.reward_raw += kNumStates;
  }
  terminal_ = position_ == 0 || position_ == kNumStates - 1;
  out.observation = position_;
  out.reward_agent = out.reward_raw;
  out.terminal = terminal_;
  return out;
}

std::unique_ptr<Environment> ChainEnv::clone() const {
  return std::make_unique<ChainEnv>(*this);
}

void ChainEnv::set_position(int position) {
  if (position < 0 || position >= kNumStates) {
    throw std::out_of_range("ChainEnv: position out of range");
  }
  position_ = position;
  terminal_ = position_ == 0 || position_ == kNumStates - 1;
}

void CycleEnv::reset(uint64_t /*seed*/) {
  position_ = 0;
  terminal_ = false;
}

EnvStep CycleEnv::step(int action) {
  require_live(terminal_, "CycleEnv");
  require_action(action, 2, "CycleEnv");
  EnvStep out;
  if (action == kMove) {
    position_ = (position_ + 1) % kNumStates;
  } else if (position_ == kNumStates - 1) {
    out.reward_raw = kGoalReward;
    terminal_ = true;
  }
  out.observation = position_;
  out.reward_agent = out.reward_raw;
  out.terminal = terminal_;
  return out;
}

std::unique_ptr<Environment> CycleEnv::clone() const {
  return std::make_unique<CycleEnv>(*this);
}

void CycleEnv::set_position(int position) {
  if (position < 0 || position >= kNumStates) {
    throw std::out_of_range("CycleEnv: position out of range");
  }
  position_ = position;
  terminal_ = false;
}

RewardScaleWrapper::RewardScaleWrapper(std::unique_ptr<Environment> inner,
                                       double scale)
    : inner_(std::move(inner)), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("RewardScaleWrapper: scale must be positive");
  }
}

EnvStep RewardScaleWrapper::step(int action) {
  EnvStep out = inner_->step(action);
  out.reward_agent *= scale_;
  return out;
}

std::unique_ptr<Environment> RewardScaleWrapper::clone() const {
  return std::make_unique<RewardScaleWrapper>(inner_->clone(), scale_);
}

FixedRepeatWrapper::FixedRepeatWrapper(std::unique_ptr<Environment> inner,
                                       int repeat_count)
    : inner_(std::move(inner)), repeat_count_(repeat_count) {
  if (repeat_count < 1) {
    throw std::invalid_argument("FixedRepeatWrapper: repeat_count must be >= 1");
  }
}

EnvStep FixedRepeatWrapper::step(int action) {
  return repeat_step(*inner_, action, repeat_count_);
}

std::unique_ptr<Environment> FixedRepeatWrapper::clone() const {
  return std::make_unique<FixedRepeatWrapper>(inner_->clone(), repeat_count_);
}

EnvStep repeat_step(Environment& env, int action, int repeats) {
  if (repeats < 1) throw std::invalid_argument("repeat_step: repeats < 1");
  EnvStep total;
  total.steps_consumed = 0;
  for (int i = 0; i < repeats; ++i) {
    const EnvStep s = env.step(action);
    total.reward_raw += s.reward_raw;
    total.reward_agent += s.reward_agent;
    total.steps_consumed += s.steps_consumed;
    total.observation = s.observation;
    total.terminal = s.terminal;
    if (s.terminal) break;
  }
  return total;
}

std::unique_ptr<Environment> make_env(std::string_view id) {
  if (id == "chain") return std::make_unique<ChainEnv>();
  if (id == "cycle") return std::make_unique<CycleEnv>();
  constexpr std::string_view kScaled = "chain-scaled:";
  if (id.starts_with(kScaled)) {
    const std::string text(id.substr(kScaled.size()));
    std::size_t used = 0;
    double scale = 0.0;
    try {
      scale = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw std::invalid_argument("make_env: bad scale in '" +
                                  std::string(id) + "'");
    }
    return std::make_unique<RewardScaleWrapper>(std::make_unique<ChainEnv>(),
                                                scale);
  }
  throw std::invalid_argument("make_env: unknown environment '" +
                              std::string(id) + "'");
}

}  // namespace adaptive_ac
