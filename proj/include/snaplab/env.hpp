#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "snaplab/rng.hpp"
#include "snaplab/types.hpp"

namespace snap {

enum class RewardSpec { none, sparse_goal, dense };

struct EnvConfig {
  std::string env_name = "minigrid";  // minigrid | sparse_grid | chain | point_mass
  int episode_length = 20;
  std::uint64_t seed = 0;
  RewardSpec reward_spec = RewardSpec::none;

  // Grid family.
  int grid_width = 51;
  int grid_height = 51;
  int start_x = 25, start_y = 25;
  int goal_x = 45, goal_y = 45;

  // Chain family.
  int chain_length = 10;

  void validate() const {
    if (episode_length < 1) throw std::invalid_argument("episode_length must be >= 1");
    if (grid_width < 1 || grid_height < 1)
      throw std::invalid_argument("grid dimensions must be >= 1");
    if (chain_length < 2) throw std::invalid_argument("chain_length must be >= 2");
  }
};

struct StepResult {
  StateVec next_state;
  double reward = 0.0;
  bool terminal = false;
};

// Seeded, resettable environment. step() before reset() or after a terminal
// transition is a contract violation and throws.
class Env {
 public:
  virtual ~Env() = default;
  virtual const ActionSpec& action_spec() const = 0;
  virtual int state_dim() const = 0;
  virtual StateVec reset() = 0;
  virtual StepResult step(const Action& action) = 0;
  virtual const StateVec& state() const = 0;
  virtual const EnvConfig& config() const = 0;
  // Fresh copy with the same dynamics but its own seed; used for evaluation.
  virtual std::unique_ptr<Env> clone_fresh(std::uint64_t seed) const = 0;

 protected:
  void require_live() const {
    if (!live_)
      throw std::logic_error(
          "env contract violation: step() requires reset() and a non-terminal state");
  }
  bool live_ = false;
};

// Grid actions. Moves that would leave the grid leave that axis unchanged;
// the two axes clamp independently.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline std::pair<int, int> grid_step(std::pair<int, int> s, int action, int width,
                                     int height) {
  if (action < 0 || action > 3) throw std::invalid_argument("grid action id out of range");
  auto [x, y] = s;
  switch (action) {
    case kUp: y += 1; break;
    case kDown: y -= 1; break;
    case kLeft: x -= 1; break;
    case kRight: x += 1; break;
  }
  if (x < 0) x = 0;
  if (x > width - 1) x = width - 1;
  if (y < 0) y = 0;
  if (y > height - 1) y = height - 1;
  return {x, y};
}

class GridEnv final : public Env {
 public:
  explicit GridEnv(EnvConfig cfg) : cfg_(std::move(cfg)), spec_(ActionSpec::discrete(4)) {
    cfg_.validate();
    if (cfg_.start_x < 0 || cfg_.start_x >= cfg_.grid_width || cfg_.start_y < 0 ||
        cfg_.start_y >= cfg_.grid_height)
      throw std::invalid_argument("grid start outside the grid");
  }

  const ActionSpec& action_spec() const override { return spec_; }
  int state_dim() const override { return 2; }
  const EnvConfig& config() const override { return cfg_; }

  StateVec reset() override {
    x_ = cfg_.start_x;
    y_ = cfg_.start_y;
    steps_ = 0;
    live_ = true;
    sync_state();
    return state_;
  }

  StepResult step(const Action& action) override {
    require_live();
    int a = std::get<int>(action);
    auto [nx, ny] = grid_step({x_, y_}, a, cfg_.grid_width, cfg_.grid_height);
    x_ = nx;
    y_ = ny;
    ++steps_;
    sync_state();

    double reward = 0.0;
    bool at_goal = (x_ == cfg_.goal_x && y_ == cfg_.goal_y);
    if (cfg_.reward_spec == RewardSpec::sparse_goal && at_goal) reward = 1.0;
    if (cfg_.reward_spec == RewardSpec::dense)
      reward = -(std::abs(x_ - cfg_.goal_x) + std::abs(y_ - cfg_.goal_y));

    bool terminal = steps_ >= cfg_.episode_length;
    if (cfg_.reward_spec == RewardSpec::sparse_goal && at_goal) terminal = true;
    if (terminal) live_ = false;
    return {state_, reward, terminal};
  }

  const StateVec& state() const override { return state_; }

  std::unique_ptr<Env> clone_fresh(std::uint64_t seed) const override {
    EnvConfig c = cfg_;
    c.seed = seed;
    return std::make_unique<GridEnv>(c);
  }

  int x() const { return x_; }
  int y() const { return y_; }

 private:
  void sync_state() { state_ = {static_cast<double>(x_), static_cast<double>(y_)}; }

  EnvConfig cfg_;
  ActionSpec spec_;
  StateVec state_;
  int x_ = 0, y_ = 0;
  int steps_ = 0;
};

// One-dimensional corridor: action 0 moves left, 1 moves right, both clamped.
// Start at cell 0; under sparse_goal the far end pays 1 and terminates.
class ChainEnv final : public Env {
 public:
  explicit ChainEnv(EnvConfig cfg) : cfg_(std::move(cfg)), spec_(ActionSpec::discrete(2)) {
    cfg_.validate();
  }

  const ActionSpec& action_spec() const override { return spec_; }
  int state_dim() const override { return 1; }
  const EnvConfig& config() const override { return cfg_; }

  StateVec reset() override {
    pos_ = 0;
    steps_ = 0;
    live_ = true;
    state_ = {0.0};
    return state_;
  }

  StepResult step(const Action& action) override {
    require_live();
    int a = std::get<int>(action);
    if (a < 0 || a > 1) throw std::invalid_argument("chain action id out of range");
    pos_ += (a == 1) ? 1 : -1;
    if (pos_ < 0) pos_ = 0;
    if (pos_ > cfg_.chain_length - 1) pos_ = cfg_.chain_length - 1;
    ++steps_;
    state_ = {static_cast<double>(pos_)};

    bool at_goal = pos_ == cfg_.chain_length - 1;
    double reward =
        (cfg_.reward_spec == RewardSpec::sparse_goal && at_goal) ? 1.0 : 0.0;
    bool terminal = steps_ >= cfg_.episode_length ||
                    (cfg_.reward_spec == RewardSpec::sparse_goal && at_goal);
    if (terminal) live_ = false;
    return {state_, reward, terminal};
  }

  const StateVec& state() const override { return state_; }

  std::unique_ptr<Env> clone_fresh(std::uint64_t seed) const override {
    EnvConfig c = cfg_;
    c.seed = seed;
    return std::make_unique<ChainEnv>(c);
  }

 private:
  EnvConfig cfg_;
  ActionSpec spec_;
  StateVec state_;
  int pos_ = 0;
  int steps_ = 0;
};

// Planar double integrator. State (px, py, vx, vy), action = force in
// [-1,1]^2, symplectic Euler with dt = 0.05: v += f*dt, p += v*dt.
// Dense reward is the negative Euclidean distance to the goal point.
class PointMassEnv final : public Env {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kGoalRadius = 0.1;

  explicit PointMassEnv(EnvConfig cfg)
      : cfg_(std::move(cfg)),
        spec_(ActionSpec::continuous({-1.0, -1.0}, {1.0, 1.0})),
        goal_{0.5, 0.5} {
    cfg_.validate();
  }

  const ActionSpec& action_spec() const override { return spec_; }
  int state_dim() const override { return 4; }
  const EnvConfig& config() const override { return cfg_; }

  StateVec reset() override {
    state_ = {0.0, 0.0, 0.0, 0.0};
    steps_ = 0;
    live_ = true;
    return state_;
  }

  StepResult step(const Action& action) override {
    require_live();
    const auto& f = std::get<std::vector<double>>(action);
    if (f.size() != 2) throw std::invalid_argument("point_mass expects a 2-d force");
    double fx = std::clamp(f[0], -1.0, 1.0);
    double fy = std::clamp(f[1], -1.0, 1.0);
    state_[2] += fx * kDt;
    state_[3] += fy * kDt;
    state_[0] += state_[2] * kDt;
    state_[1] += state_[3] * kDt;
    ++steps_;

    double dist = std::hypot(state_[0] - goal_[0], state_[1] - goal_[1]);
    double reward = 0.0;
    if (cfg_.reward_spec == RewardSpec::dense) reward = -dist;
    bool reached = dist < kGoalRadius;
    if (cfg_.reward_spec == RewardSpec::sparse_goal && reached) reward = 1.0;

    bool terminal = steps_ >= cfg_.episode_length ||
                    (cfg_.reward_spec == RewardSpec::sparse_goal && reached);
    if (terminal) live_ = false;
    return {state_, reward, terminal};
  }

  const StateVec& state() const override { return state_; }

  std::unique_ptr<Env> clone_fresh(std::uint64_t seed) const override {
    EnvConfig c = cfg_;
    c.seed = seed;
    return std::make_unique<PointMassEnv>(c);
  }

 private:
  EnvConfig cfg_;
  ActionSpec spec_;
  StateVec state_;
  double goal_[2];
  int steps_ = 0;
};

inline std::unique_ptr<Env> make_env(const EnvConfig& cfg) {
  EnvConfig c = cfg;
  if (c.env_name == "minigrid") {
    return std::make_unique<GridEnv>(c);
  } else if (c.env_name == "sparse_grid") {
    c.reward_spec = RewardSpec::sparse_goal;
    return std::make_unique<GridEnv>(c);
  } else if (c.env_name == "chain") {
    return std::make_unique<ChainEnv>(c);
  } else if (c.env_name == "point_mass") {
    if (c.reward_spec == RewardSpec::none) c.reward_spec = RewardSpec::dense;
    return std::make_unique<PointMassEnv>(c);
  }
  throw std::invalid_argument("unknown env_name: " + c.env_name);
}

}  // namespace snap
