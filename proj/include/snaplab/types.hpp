#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace snap {

using StateVec = std::vector<double>;

// Discrete actions are ids into the action set; continuous actions are
// bounded real vectors (forces, torques).
using Action = std::variant<int, std::vector<double>>;

inline bool action_equal(const Action& a, const Action& b) {
  return a == b;
}

struct DiscreteSpec {
  int count = 0;
};

struct ContinuousSpec {
  std::vector<double> low;
  std::vector<double> high;
};

struct ActionSpec {
  std::variant<DiscreteSpec, ContinuousSpec> kind;

  static ActionSpec discrete(int count) {
    if (count < 2) throw std::invalid_argument("discrete action count must be >= 2");
    return ActionSpec{DiscreteSpec{count}};
  }

  static ActionSpec continuous(std::vector<double> low, std::vector<double> high) {
    if (low.empty() || low.size() != high.size())
      throw std::invalid_argument("continuous bounds must be non-empty and same size");
    for (std::size_t i = 0; i < low.size(); ++i)
      if (!(low[i] < high[i]))
        throw std::invalid_argument("continuous bounds require low < high elementwise");
    return ActionSpec{ContinuousSpec{std::move(low), std::move(high)}};
  }

  bool is_discrete() const { return std::holds_alternative<DiscreteSpec>(kind); }
  int discrete_count() const { return std::get<DiscreteSpec>(kind).count; }
  const ContinuousSpec& continuous_spec() const { return std::get<ContinuousSpec>(kind); }
  int dim() const {
    return is_discrete() ? 1 : static_cast<int>(continuous_spec().low.size());
  }
};

struct Transition {
  StateVec state;
  Action action;
  double reward = 0.0;
  StateVec next_state;
  bool terminal = false;
  bool episode_start = false;  // true if `state` began a fresh episode
};

}  // namespace snap
