#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "snaplab/oracle.hpp"

namespace snap {
namespace {

// Flat enumeration oracle: expand every committed action sequence and push
// the start distribution step by step. Independent of the recursive DP.
double enumerate_best_return(const TabularMDP& mdp, int kappa, double gamma) {
  int h = (mdp.horizon + kappa - 1) / kappa;
  std::int64_t total = 1;
  for (int i = 0; i < h; ++i) total *= mdp.n_actions;
  double best = -1e300;
  for (std::int64_t code = 0; code < total; ++code) {
    // Decode block actions, then roll out.
    std::vector<int> blocks(h);
    std::int64_t c = code;
    for (int i = 0; i < h; ++i) {
      blocks[i] = static_cast<int>(c % mdp.n_actions);
      c /= mdp.n_actions;
    }
    std::vector<double> mu = mdp.rho0;
    double value = 0.0;
    for (int t = 0; t < mdp.horizon; ++t) {
      int a = blocks[t / kappa];
      double er = 0.0;
      for (int s = 0; s < mdp.n_states; ++s) er += mu[s] * mdp.reward(s, a);
      value += std::pow(gamma, t) * er;
      std::vector<double> next(mdp.n_states, 0.0);
      for (int s = 0; s < mdp.n_states; ++s)
        for (int s2 = 0; s2 < mdp.n_states; ++s2)
          next[s2] += mu[s] * mdp.prob(s, a, s2);
      mu.swap(next);
    }
    best = std::max(best, value);
  }
  return best;
}

TEST(TabularMdp, ValidatesRowsAndRewards) {
  auto m = TabularMDP::zeros(2, 2);
  EXPECT_THROW(m.validate(), std::invalid_argument);  // all-zero rows
  m = TabularMDP::random(3, 2, 5, 1);
  EXPECT_NO_THROW(m.validate());
  m.prob(0, 0, 0) += 0.5;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(TabularMdp, GridTransitionsMatchGridStep) {
  auto m = TabularMDP::grid(5, 5, 2, 2, 10);
  // From (0,0), left stays put; from (2,2), up moves to (2,3).
  EXPECT_DOUBLE_EQ(m.prob(0, kLeft, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.prob(2 * 5 + 2, kUp, 3 * 5 + 2), 1.0);
  EXPECT_DOUBLE_EQ(m.rho0[2 * 5 + 2], 1.0);
}

TEST(TabularMdp, JsonRoundTripIsExact) {
  auto m = TabularMDP::random(4, 3, 8, 42);
  auto text = m.to_json().dump();
  auto back = TabularMDP::from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.n_states, 4);
  EXPECT_EQ(back.n_actions, 3);
  EXPECT_EQ(back.horizon, 8);
  EXPECT_EQ(back.p, m.p);
  EXPECT_EQ(back.r, m.r);
  EXPECT_EQ(back.rho0, m.rho0);
  auto bad = m.to_json();
  bad["rho0"] = std::vector<double>{1.0};
  EXPECT_THROW(TabularMDP::from_json(bad), std::invalid_argument);
}

TEST(ExactVisitation, SingleStateMdpHasUnitOccupancy) {
  auto m = TabularMDP::zeros(1, 2);
  m.prob(0, 0, 0) = 1.0;
  m.prob(0, 1, 0) = 1.0;
  m.rho0[0] = 1.0;
  auto occ = exact_visitation(m, RandomWalkProcess{}, 5);
  ASSERT_EQ(occ.size(), 1u);
  EXPECT_NEAR(occ[0], 1.0, 1e-12);
}

TEST(ExactVisitation, OneRandomStepFromGridCenter) {
  auto m = TabularMDP::grid(51, 51, 25, 25);
  auto occ = exact_visitation(m, RandomWalkProcess{}, 1);
  auto id = [](int x, int y) { return y * 51 + x; };
  EXPECT_NEAR(occ[id(25, 26)], 0.25, 1e-12);
  EXPECT_NEAR(occ[id(25, 24)], 0.25, 1e-12);
  EXPECT_NEAR(occ[id(24, 25)], 0.25, 1e-12);
  EXPECT_NEAR(occ[id(26, 25)], 0.25, 1e-12);
  EXPECT_NEAR(occ[id(25, 25)], 0.0, 1e-12);
  double sum = std::accumulate(occ.begin(), occ.end(), 0.0);
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(ExactVisitation, OccupancySumsToOneForEveryProcess) {
  auto m = TabularMDP::grid(4, 4, 1, 1);
  std::vector<ExplorationProcess> procs = {
      RandomWalkProcess{}, ZetaWalkProcess{2.0, 8}, FixedRepeatProcess{3},
      FixedProbRepeatProcess{0.7}};
  for (const auto& proc : procs) {
    auto occ = exact_visitation(m, proc, 7);
    double sum = std::accumulate(occ.begin(), occ.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-10);
  }
}

TEST(ExactVisitation, RejectsOversizedAugmentedSpace) {
  auto m = TabularMDP::grid(10, 10, 0, 0);
  try {
    exact_visitation(m, ZetaWalkProcess{2.0, 100}, 5, 1000);
    FAIL() << "size cap not enforced";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("40000"), std::string::npos);
  }
}

// The simulator (GridEnv stepped by behavior_step) must agree with the exact
// propagation. Small-scale here; the acceptance suite runs the pinned 5x5
// protocol with a million rollouts.
TEST(ExactVisitation, MatchesMonteCarloSimulatorOnSmallGrid) {
  const int w = 3, h = 3, T = 6;
  auto mdp = TabularMDP::grid(w, h, 1, 1);
  const int rollouts = 100000;

  auto run_mc = [&](const PersistenceStrategy& strategy) {
    std::vector<double> occ(w * h, 0.0);
    EnvConfig cfg;
    cfg.grid_width = w;
    cfg.grid_height = h;
    cfg.start_x = 1;
    cfg.start_y = 1;
    cfg.episode_length = T;
    Rng rng(1234);
    ActionSources sources;
    sources.base = [&rng](const StateVec&) { return Action{rng.uniform_int(4)}; };
    sources.random = [&rng] { return Action{rng.uniform_int(4)}; };
    for (int i = 0; i < rollouts; ++i) {
      GridEnv env(cfg);
      env.reset();
      PersistenceState ps;
      for (int t = 0; t < T; ++t) {
        auto d = behavior_step(strategy, sources, ps, env.state(), nullptr, t, rng);
        auto res = env.step(d.action);
        occ[static_cast<int>(res.next_state[1]) * w +
            static_cast<int>(res.next_state[0])] += 1.0 / T;
      }
    }
    for (auto& v : occ) v /= rollouts;
    return occ;
  };

  struct Case {
    PersistenceStrategy strategy;
    ExplorationProcess process;
  };
  std::vector<Case> cases = {{PersistenceStrategy::none(), RandomWalkProcess{}},
                             {PersistenceStrategy::fixed(2), FixedRepeatProcess{2}},
                             {PersistenceStrategy::zeta(2.0, 5), ZetaWalkProcess{2.0, 5}}};
  for (const auto& c : cases) {
    auto exact = exact_visitation(mdp, c.process, T);
    auto mc = run_mc(c.strategy);
    for (int s = 0; s < w * h; ++s) {
      double se = std::sqrt(std::max(exact[s] * (1.0 - exact[s]), 1e-12) / rollouts);
      EXPECT_NEAR(mc[s], exact[s], std::max(4.0 * se, 2e-3))
          << "strategy " << c.strategy.name() << " state " << s;
    }
  }
}

TEST(ExactVisitation, FixedRepeatTravelsFartherThanRandomWalk) {
  auto m = TabularMDP::grid(11, 11, 5, 5);
  auto rand_occ = exact_visitation(m, RandomWalkProcess{}, 10);
  auto fixed_occ = exact_visitation(m, FixedRepeatProcess{2}, 10);
  auto mean_manhattan = [&](const std::vector<double>& occ) {
    double d = 0.0;
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 11; ++x)
        d += occ[y * 11 + x] * (std::abs(x - 5) + std::abs(y - 5));
    return d;
  };
  EXPECT_GT(mean_manhattan(fixed_occ), mean_manhattan(rand_occ) * 1.2);
}

TEST(OptimalReturn, SingleStateGeometricSeries) {
  auto m = TabularMDP::zeros(1, 2);
  m.prob(0, 0, 0) = 1.0;
  m.prob(0, 1, 0) = 1.0;
  m.reward(0, 0) = 1.0;
  m.reward(0, 1) = 1.0;
  m.rho0[0] = 1.0;
  m.horizon = 3;
  for (int kappa : {1, 2, 3, 5})
    EXPECT_NEAR(optimal_return_under_persistence(m, kappa, 0.5), 1.75, 1e-12);
}

TEST(OptimalReturn, KappaEqualToHorizonPicksBestSingleCommitment) {
  auto m = TabularMDP::random(4, 3, 5, 7);
  double dp = optimal_return_under_persistence(m, m.horizon, 0.9);
  // One decision only: brute force over the 3 single actions.
  double best = -1e300;
  for (int a = 0; a < 3; ++a) {
    std::vector<double> mu = m.rho0;
    double v = 0.0;
    for (int t = 0; t < m.horizon; ++t) {
      double er = 0.0;
      for (int s = 0; s < 4; ++s) er += mu[s] * m.reward(s, a);
      v += std::pow(0.9, t) * er;
      std::vector<double> next(4, 0.0);
      for (int s = 0; s < 4; ++s)
        for (int s2 = 0; s2 < 4; ++s2) next[s2] += mu[s] * m.prob(s, a, s2);
      mu.swap(next);
    }
    best = std::max(best, v);
  }
  EXPECT_NEAR(dp, best, 1e-12);
}

TEST(OptimalReturn, MatchesFlatEnumerationOnRandomMdps) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = TabularMDP::random(3, 2, 6, seed);
    for (int kappa : {1, 2, 3}) {
      double dp = optimal_return_under_persistence(m, kappa, 0.95);
      double brute = enumerate_best_return(m, kappa, 0.95);
      EXPECT_NEAR(dp, brute, 1e-12) << "seed " << seed << " kappa " << kappa;
    }
  }
}

TEST(OptimalReturn, ValueOrderingAcrossDividingKappas) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto m = TabularMDP::random(4, 3, 8, seed);
    for (double gamma : {0.9, 0.99, 1.0}) {
      double v1 = optimal_return_under_persistence(m, 1, gamma);
      double v2 = optimal_return_under_persistence(m, 2, gamma);
      double v4 = optimal_return_under_persistence(m, 4, gamma);
      double v8 = optimal_return_under_persistence(m, 8, gamma);
      EXPECT_GE(v1, v2 - 1e-9);
      EXPECT_GE(v2, v4 - 1e-9);
      EXPECT_GE(v4, v8 - 1e-9);
      // kappa = 1 dominates everything, dividing or not.
      EXPECT_GE(v1, optimal_return_under_persistence(m, 3, gamma) - 1e-9);
    }
  }
}

TEST(OptimalReturn, ValidatesArguments) {
  auto m = TabularMDP::random(2, 2, 4, 3);
  EXPECT_THROW(optimal_return_under_persistence(m, 0, 0.9), std::invalid_argument);
  EXPECT_THROW(optimal_return_under_persistence(m, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(optimal_return_under_persistence(m, 1, 1.5), std::invalid_argument);
  m.horizon = 0;
  EXPECT_THROW(optimal_return_under_persistence(m, 1, 0.9), std::invalid_argument);
}

TEST(ValueIteration, SolvesClosedForms) {
  // Single absorbing state paying 1 every step: V = 1 / (1 - gamma).
  auto loop = TabularMDP::zeros(1, 1);
  loop.prob(0, 0, 0) = 1.0;
  loop.reward(0, 0) = 1.0;
  loop.rho0[0] = 1.0;
  EXPECT_NEAR(value_iteration(loop, 0.9)[0], 10.0, 1e-9);

  // Two states: from s0 either loop for 0 or jump to absorbing s1 for 1.
  auto m = TabularMDP::zeros(2, 2);
  m.prob(0, 0, 0) = 1.0;
  m.prob(0, 1, 1) = 1.0;
  m.prob(1, 0, 1) = 1.0;
  m.prob(1, 1, 1) = 1.0;
  m.reward(0, 1) = 1.0;
  m.rho0[0] = 1.0;
  auto v = value_iteration(m, 0.9);
  EXPECT_NEAR(v[0], 1.0, 1e-9);
  EXPECT_NEAR(v[1], 0.0, 1e-9);
  EXPECT_THROW(value_iteration(m, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace snap
