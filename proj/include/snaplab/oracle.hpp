#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "snaplab/env.hpp"
#include "snaplab/persistence.hpp"
#include "snaplab/rng.hpp"

namespace snap {

// Dense finite MDP: P[s][a][s'], R[s][a], initial distribution rho0, and a
// finite horizon.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> p;     // n_states * n_actions * n_states
  std::vector<double> r;     // n_states * n_actions
  std::vector<double> rho0;  // n_states
  int horizon = 1;

  double& prob(int s, int a, int s2) {
    return p[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double prob(int s, int a, int s2) const {
    return p[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& reward(int s, int a) { return r[static_cast<std::size_t>(s) * n_actions + a]; }
  double reward(int s, int a) const {
    return r[static_cast<std::size_t>(s) * n_actions + a];
  }

  static TabularMDP zeros(int n_states, int n_actions) {
    TabularMDP m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.p.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
    m.r.assign(static_cast<std::size_t>(n_states) * n_actions, 0.0);
    m.rho0.assign(n_states, 0.0);
    return m;
  }

  void validate() const {
    if (n_states < 1 || n_actions < 1)
      throw std::invalid_argument("MDP needs at least one state and action");
    auto check_dist = [](const double* row, int n, const char* what) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (row[i] < -1e-15) throw std::invalid_argument(std::string(what) + ": negative mass");
        sum += row[i];
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument(std::string(what) + ": rows must sum to 1");
    };
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a)
        check_dist(&p[(static_cast<std::size_t>(s) * n_actions + a) * n_states],
                   n_states, "transition row");
    check_dist(rho0.data(), n_states, "initial distribution");
    for (double v : r)
      if (!std::isfinite(v)) throw std::invalid_argument("rewards must be finite");
  }

  // Random dense MDP: transition rows and rho0 drawn flat on the simplex
  // (normalized exponentials), rewards uniform on [0, 1].
  static TabularMDP random(int n_states, int n_actions, int horizon,
                           std::uint64_t seed) {
    TabularMDP m = zeros(n_states, n_actions);
    m.horizon = horizon;
    Rng rng(derive_seed(seed, "random_mdp"));
    auto fill_simplex = [&rng](double* row, int n) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        row[i] = -std::log(1.0 - rng.uniform());
        sum += row[i];
      }
      for (int i = 0; i < n; ++i) row[i] /= sum;
    };
    for (int s = 0; s < n_states; ++s)
      for (int a = 0; a < n_actions; ++a)
        fill_simplex(&m.p[(static_cast<std::size_t>(s) * n_actions + a) * n_states],
                     n_states);
    fill_simplex(m.rho0.data(), n_states);
    for (auto& v : m.r) v = rng.uniform();
    m.validate();
    return m;
  }

  // Deterministic grid walk as a tabular MDP (reward-free), state id = y*w + x.
  static TabularMDP grid(int width, int height, int start_x, int start_y,
                         int horizon = 1) {
    TabularMDP m = zeros(width * height, 4);
    m.horizon = horizon;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        for (int a = 0; a < 4; ++a) {
          auto [nx, ny] = grid_step({x, y}, a, width, height);
          m.prob(y * width + x, a, ny * width + nx) = 1.0;
        }
    m.rho0[start_y * width + start_x] = 1.0;
    m.validate();
    return m;
  }

  // JSON layout for regression fixtures:
  // {"n_states": S, "n_actions": A, "horizon": H,
  //  "p": [S*A*S flat], "r": [S*A flat], "rho0": [S]}
  static TabularMDP from_json(const nlohmann::json& j) {
    TabularMDP m;
    m.n_states = j.at("n_states").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.horizon = j.value("horizon", 1);
    m.p = j.at("p").get<std::vector<double>>();
    m.r = j.at("r").get<std::vector<double>>();
    m.rho0 = j.at("rho0").get<std::vector<double>>();
    if (m.p.size() != static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states ||
        m.r.size() != static_cast<std::size_t>(m.n_states) * m.n_actions ||
        m.rho0.size() != static_cast<std::size_t>(m.n_states))
      throw std::invalid_argument("MDP JSON arrays have wrong sizes");
    m.validate();
    return m;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"n_states", n_states}, {"n_actions", n_actions},
                          {"horizon", horizon},   {"p", p},
                          {"r", r},               {"rho0", rho0}};
  }
};

// Point in the augmented chain the exact analysis walks over.
struct AugmentedChainState {
  int state = 0;
  int last_action = 0;
  int repeat_remaining = 0;  // must stay >= 0
};

// Exploration processes with exactly computable occupancy.
struct RandomWalkProcess {};
struct ZetaWalkProcess {
  double mu = 2.0;
  int n_max = 100;
};
struct FixedRepeatProcess {
  int kappa = 1;
};
// Count-free SNAP surrogate: repeat the previous action with constant p.
struct FixedProbRepeatProcess {
  double p = 0.5;
};

using ExplorationProcess = std::variant<RandomWalkProcess, ZetaWalkProcess,
                                        FixedRepeatProcess, FixedProbRepeatProcess>;

// Exact per-state mean occupancy over steps t = 1..T under an exploration
// process, by propagating the full distribution over augmented states
// (state, last action, remaining repeats). The initial state at t = 0 is not
// part of the average. Episodes do not reset within the horizon.
inline std::vector<double> exact_visitation(const TabularMDP& mdp,
                                            const ExplorationProcess& process, int horizon,
                                            std::size_t max_aug_states = 50'000'000) {
  mdp.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  const int s_n = mdp.n_states;
  const int a_n = mdp.n_actions;

  // rem in [0, rem_max): committed repeats still owed after the current step.
  int rem_max = 1;
  std::vector<double> duration_pmf;  // for zeta
  if (std::holds_alternative<ZetaWalkProcess>(process)) {
    auto zp = std::get<ZetaWalkProcess>(process);
    duration_pmf = zeta_pmf(zp.mu, zp.n_max);
    rem_max = zp.n_max;
  } else if (std::holds_alternative<FixedRepeatProcess>(process)) {
    rem_max = std::get<FixedRepeatProcess>(process).kappa;
  }

  std::size_t aug = static_cast<std::size_t>(s_n) * a_n * rem_max;
  if (aug > max_aug_states)
    throw std::invalid_argument("augmented state space too large: " + std::to_string(aug));

  auto idx = [&](int s, int a, int rem) {
    return (static_cast<std::size_t>(s) * a_n + a) * rem_max + rem;
  };

  // Fresh-draw distribution over (action, remaining) for a new block.
  auto fresh = [&](double mass, int s2, std::vector<double>& dist) {
    if (std::holds_alternative<RandomWalkProcess>(process) ||
        std::holds_alternative<FixedProbRepeatProcess>(process)) {
      for (int a = 0; a < a_n; ++a) dist[idx(s2, a, 0)] += mass / a_n;
    } else if (std::holds_alternative<FixedRepeatProcess>(process)) {
      int kappa = std::get<FixedRepeatProcess>(process).kappa;
      for (int a = 0; a < a_n; ++a) dist[idx(s2, a, kappa - 1)] += mass / a_n;
    } else {
      for (int a = 0; a < a_n; ++a)
        for (int n = 1; n <= rem_max; ++n)
          dist[idx(s2, a, n - 1)] += mass * duration_pmf[n - 1] / a_n;
    }
  };

  // t = 0: no last action yet; track the plain state distribution separately.
  std::vector<double> start(mdp.rho0);
  std::vector<double> cur(aug, 0.0);
  std::vector<double> occupancy(s_n, 0.0);

  // First step: every process draws fresh from the start states.
  {
    std::vector<double> next(aug, 0.0);
    for (int s = 0; s < s_n; ++s) {
      if (start[s] == 0.0) continue;
      // Choose (a, rem) first, then move.
      std::vector<double> staged(aug, 0.0);
      fresh(start[s], s, staged);
      for (int a = 0; a < a_n; ++a)
        for (int rem = 0; rem < rem_max; ++rem) {
          double mass = staged[idx(s, a, rem)];
          if (mass == 0.0) continue;
          for (int s2 = 0; s2 < s_n; ++s2) {
            double tp = mdp.prob(s, a, s2);
            if (tp > 0.0) next[idx(s2, a, rem)] += mass * tp;
          }
        }
    }
    cur.swap(next);
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a)
        for (int rem = 0; rem < rem_max; ++rem) occupancy[s] += cur[idx(s, a, rem)];
  }

  double fixed_p = 0.0;
  if (std::holds_alternative<FixedProbRepeatProcess>(process)) {
    fixed_p = std::get<FixedProbRepeatProcess>(process).p;
    if (fixed_p < 0.0 || fixed_p > 1.0)
      throw std::invalid_argument("repeat probability must be in [0, 1]");
  }

  for (int t = 2; t <= horizon; ++t) {
    std::vector<double> staged(aug, 0.0);
    // Stage the (action, rem) decision in the current state.
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a)
        for (int rem = 0; rem < rem_max; ++rem) {
          double mass = cur[idx(s, a, rem)];
          if (mass == 0.0) continue;
          if (rem > 0) {
            staged[idx(s, a, rem - 1)] += mass;  // committed: repeat a
          } else if (std::holds_alternative<FixedProbRepeatProcess>(process)) {
            staged[idx(s, a, 0)] += mass * fixed_p;
            fresh(mass * (1.0 - fixed_p), s, staged);
          } else {
            fresh(mass, s, staged);
          }
        }
    // Execute the staged action.
    std::vector<double> next(aug, 0.0);
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a)
        for (int rem = 0; rem < rem_max; ++rem) {
          double mass = staged[idx(s, a, rem)];
          if (mass == 0.0) continue;
          for (int s2 = 0; s2 < s_n; ++s2) {
            double tp = mdp.prob(s, a, s2);
            if (tp > 0.0) next[idx(s2, a, rem)] += mass * tp;
          }
        }
    cur.swap(next);
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a)
        for (int rem = 0; rem < rem_max; ++rem) occupancy[s] += cur[idx(s, a, rem)];
  }

  for (auto& v : occupancy) v /= horizon;
  return occupancy;
}

namespace detail {

// Expected discounted reward of committing to action a for `len` steps
// starting from state distribution mu at time offset t0, plus the pushed
// distribution.
inline double commit_block(const TabularMDP& mdp, std::vector<double>& mu, int a,
                           int len, int t0, double gamma) {
  double total = 0.0;
  for (int i = 0; i < len; ++i) {
    double step_reward = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
      if (mu[s] != 0.0) step_reward += mu[s] * mdp.reward(s, a);
    total += std::pow(gamma, t0 + i) * step_reward;
    std::vector<double> next(mdp.n_states, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mu[s] == 0.0) continue;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        double tp = mdp.prob(s, a, s2);
        if (tp > 0.0) next[s2] += mu[s] * tp;
      }
    }
    mu.swap(next);
  }
  return total;
}

inline double best_open_loop(const TabularMDP& mdp, const std::vector<double>& mu,
                             int t0, int horizon, int kappa, double gamma) {
  if (t0 >= horizon) return 0.0;
  int len = std::min<int>(kappa, horizon - t0);
  double best = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < mdp.n_actions; ++a) {
    std::vector<double> pushed(mu);
    double block = commit_block(mdp, pushed, a, len, t0, gamma);
    double rest = best_open_loop(mdp, pushed, t0 + len, horizon, kappa, gamma);
    best = std::max(best, block + rest);
  }
  return best;
}

}  // namespace detail

// Best expected discounted return over open-loop action sequences committed
// in blocks of kappa over the MDP's horizon H (the final block truncates to
// H - kappa*(h-1) steps). Rewards accrue at t = 0..H-1 discounted by gamma^t.
inline double optimal_return_under_persistence(const TabularMDP& mdp, int kappa,
                                               double gamma) {
  mdp.validate();
  if (mdp.horizon < 1) throw std::invalid_argument("mdp horizon must be >= 1");
  if (kappa < 1) throw std::invalid_argument("kappa must be >= 1");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("gamma must be in (0, 1]");
  return detail::best_open_loop(mdp, mdp.rho0, 0, mdp.horizon, kappa, gamma);
}

// Infinite-horizon optimal state values by value iteration.
inline std::vector<double> value_iteration(const TabularMDP& mdp, double gamma,
                                           double tol = 1e-12, int max_iters = 1000000) {
  mdp.validate();
  if (!(gamma >= 0.0) || gamma >= 1.0)
    throw std::invalid_argument("value iteration needs gamma in [0, 1)");
  std::vector<double> v(mdp.n_states, 0.0), next(mdp.n_states, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    double delta = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.n_actions; ++a) {
        double q = mdp.reward(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          double tp = mdp.prob(s, a, s2);
          if (tp > 0.0) q += gamma * tp * v[s2];
        }
        best = std::max(best, q);
      }
      next[s] = best;
      delta = std::max(delta, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (delta < tol) break;
  }
  return v;
}

}  // namespace snap
