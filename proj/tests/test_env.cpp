#include <gtest/gtest.h>

#include <queue>
#include <set>

#include "snaplab/env.hpp"

namespace snap {
namespace {

TEST(GridStep, ClampsPerAxisIndependently) {
  // Corner cases from the 51x51 grid: each axis clamps on its own.
  EXPECT_EQ(grid_step({0, 10}, kLeft, 51, 51), (std::pair<int, int>{0, 10}));
  EXPECT_EQ(grid_step({25, 25}, kUp, 51, 51), (std::pair<int, int>{25, 26}));
  EXPECT_EQ(grid_step({50, 0}, kDown, 51, 51), (std::pair<int, int>{50, 0}));
  EXPECT_EQ(grid_step({50, 0}, kLeft, 51, 51), (std::pair<int, int>{49, 0}));
  EXPECT_EQ(grid_step({50, 0}, kRight, 51, 51), (std::pair<int, int>{50, 0}));
  EXPECT_EQ(grid_step({0, 50}, kUp, 51, 51), (std::pair<int, int>{0, 50}));
}

TEST(GridStep, RejectsBadActionIds) {
  EXPECT_THROW(grid_step({0, 0}, -1, 51, 51), std::invalid_argument);
  EXPECT_THROW(grid_step({0, 0}, 4, 51, 51), std::invalid_argument);
}

TEST(GridStep, EveryCellReachableWithinManhattanBound) {
  // BFS over the full 51x51 grid from the center start: the step radius must
  // cover every cell within its Manhattan distance (max 50 moves).
  const int w = 51, h = 51;
  std::vector<int> dist(w * h, -1);
  std::queue<std::pair<int, int>> q;
  q.push({25, 25});
  dist[25 * w + 25] = 0;
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop();
    for (int a = 0; a < 4; ++a) {
      auto [nx, ny] = grid_step({x, y}, a, w, h);
      if (dist[ny * w + nx] < 0) {
        dist[ny * w + nx] = dist[y * w + x] + 1;
        q.push({nx, ny});
      }
    }
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ASSERT_GE(dist[y * w + x], 0);
      EXPECT_EQ(dist[y * w + x], std::abs(x - 25) + std::abs(y - 25));
      EXPECT_LE(dist[y * w + x], 100);
    }
}

TEST(GridEnv, ResetStartsAtCenterAndStepsAreRewardFree) {
  EnvConfig cfg;
  cfg.env_name = "minigrid";
  cfg.episode_length = 5;
  GridEnv env(cfg);
  auto s = env.reset();
  EXPECT_EQ(s, (StateVec{25.0, 25.0}));
  auto r = env.step(Action{kUp});
  EXPECT_EQ(r.next_state, (StateVec{25.0, 26.0}));
  EXPECT_DOUBLE_EQ(r.reward, 0.0);
  EXPECT_FALSE(r.terminal);
}

TEST(GridEnv, EpisodeTerminatesAtConfiguredLength) {
  EnvConfig cfg;
  cfg.episode_length = 3;
  GridEnv env(cfg);
  env.reset();
  EXPECT_FALSE(env.step(Action{kUp}).terminal);
  EXPECT_FALSE(env.step(Action{kUp}).terminal);
  EXPECT_TRUE(env.step(Action{kUp}).terminal);
}

TEST(GridEnv, StepBeforeResetOrAfterTerminalThrows) {
  EnvConfig cfg;
  cfg.episode_length = 1;
  GridEnv env(cfg);
  EXPECT_THROW(env.step(Action{kUp}), std::logic_error);
  env.reset();
  EXPECT_TRUE(env.step(Action{kUp}).terminal);
  EXPECT_THROW(env.step(Action{kUp}), std::logic_error);
  // reset() revives it.
  env.reset();
  EXPECT_NO_THROW(env.step(Action{kUp}));
}

TEST(GridEnv, SparseGoalPaysOneAndTerminates) {
  EnvConfig cfg;
  cfg.env_name = "sparse_grid";
  cfg.grid_width = 5;
  cfg.grid_height = 5;
  cfg.start_x = 0;
  cfg.start_y = 0;
  cfg.goal_x = 1;
  cfg.goal_y = 0;
  cfg.episode_length = 10;
  auto env = make_env(cfg);
  env->reset();
  auto r = env->step(Action{kRight});
  EXPECT_DOUBLE_EQ(r.reward, 1.0);
  EXPECT_TRUE(r.terminal);
}

TEST(GridEnv, DeterministicUnderSameActionSequence) {
  EnvConfig cfg;
  cfg.seed = 7;
  cfg.episode_length = 50;
  GridEnv a(cfg), b(cfg);
  a.reset();
  b.reset();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    int act = rng.uniform_int(4);
    auto ra = a.step(Action{act});
    auto rb = b.step(Action{act});
    ASSERT_EQ(ra.next_state, rb.next_state);
    ASSERT_EQ(ra.terminal, rb.terminal);
  }
}

TEST(ChainEnv, WalksToGoalAndPaysOnce) {
  EnvConfig cfg;
  cfg.env_name = "chain";
  cfg.chain_length = 4;
  cfg.episode_length = 10;
  cfg.reward_spec = RewardSpec::sparse_goal;
  ChainEnv env(cfg);
  env.reset();
  EXPECT_DOUBLE_EQ(env.step(Action{1}).reward, 0.0);
  EXPECT_DOUBLE_EQ(env.step(Action{1}).reward, 0.0);
  auto r = env.step(Action{1});
  EXPECT_DOUBLE_EQ(r.reward, 1.0);
  EXPECT_TRUE(r.terminal);
}

TEST(ChainEnv, LeftEdgeClamps) {
  EnvConfig cfg;
  cfg.env_name = "chain";
  cfg.episode_length = 10;
  ChainEnv env(cfg);
  env.reset();
  EXPECT_EQ(env.step(Action{0}).next_state, (StateVec{0.0}));
}

TEST(PointMassEnv, SymplecticEulerIntegration) {
  EnvConfig cfg;
  cfg.env_name = "point_mass";
  cfg.episode_length = 100;
  cfg.reward_spec = RewardSpec::dense;
  PointMassEnv env(cfg);
  env.reset();
  // Constant unit force along x: v1 = dt, p1 = v1*dt = dt^2.
  auto r = env.step(Action{std::vector<double>{1.0, 0.0}});
  EXPECT_DOUBLE_EQ(r.next_state[2], 0.05);
  EXPECT_DOUBLE_EQ(r.next_state[0], 0.05 * 0.05);
  EXPECT_DOUBLE_EQ(r.next_state[1], 0.0);
  // Dense reward is negative distance to the goal.
  double dist = std::hypot(r.next_state[0] - 0.5, r.next_state[1] - 0.5);
  EXPECT_DOUBLE_EQ(r.reward, -dist);
}

TEST(PointMassEnv, ForcesAreClippedToUnitBox) {
  EnvConfig cfg;
  cfg.env_name = "point_mass";
  cfg.episode_length = 10;
  PointMassEnv env(cfg);
  env.reset();
  auto r = env.step(Action{std::vector<double>{100.0, -100.0}});
  EXPECT_DOUBLE_EQ(r.next_state[2], 0.05);
  EXPECT_DOUBLE_EQ(r.next_state[3], -0.05);
}

TEST(EnvFactory, RejectsUnknownNamesAndBadConfigs) {
  EnvConfig cfg;
  cfg.env_name = "does_not_exist";
  EXPECT_THROW(make_env(cfg), std::invalid_argument);
  EnvConfig bad;
  bad.episode_length = 0;
  EXPECT_THROW(GridEnv{bad}, std::invalid_argument);
}

TEST(EnvFactory, CloneFreshGivesIndependentCopy) {
  EnvConfig cfg;
  cfg.episode_length = 10;
  auto env = make_env(cfg);
  env->reset();
  env->step(Action{kUp});
  auto copy = env->clone_fresh(99);
  auto s = copy->reset();
  EXPECT_EQ(s, (StateVec{25.0, 25.0}));
  // The original is unaffected by the copy's stepping.
  copy->step(Action{kDown});
  EXPECT_EQ(env->state(), (StateVec{25.0, 26.0}));
}

TEST(ActionSpecs, ValidateBounds) {
  EXPECT_THROW(ActionSpec::discrete(1), std::invalid_argument);
  EXPECT_NO_THROW(ActionSpec::discrete(2));
  EXPECT_THROW(ActionSpec::continuous({0.0}, {0.0}), std::invalid_argument);
  EXPECT_THROW(ActionSpec::continuous({1.0}, {-1.0}), std::invalid_argument);
  EXPECT_NO_THROW(ActionSpec::continuous({-1.0, -1.0}, {1.0, 1.0}));
}

}  // namespace
}  // namespace snap
