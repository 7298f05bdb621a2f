#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snaplab/env.hpp"
#include "snaplab/metrics.hpp"
#include "snaplab/novelty.hpp"
#include "snaplab/persistence.hpp"
#include "snaplab/rng.hpp"

namespace snap {

// The three pure-exploration policies of the coverage experiment.
enum class CoverageStrategy { random, random_zeta, count_repeat };

inline CoverageStrategy parse_coverage_strategy(const std::string& s) {
  if (s == "random") return CoverageStrategy::random;
  if (s == "random-zeta" || s == "random_zeta") return CoverageStrategy::random_zeta;
  if (s == "count-repeat" || s == "count_repeat") return CoverageStrategy::count_repeat;
  throw std::invalid_argument("unknown coverage strategy: " + s);
}

inline std::string coverage_strategy_name(CoverageStrategy s) {
  switch (s) {
    case CoverageStrategy::random: return "random";
    case CoverageStrategy::random_zeta: return "random-zeta";
    case CoverageStrategy::count_repeat: return "count-repeat";
  }
  throw std::logic_error("unreachable");
}

struct CoverageResult {
  int width = 51, height = 51;
  std::vector<std::vector<std::uint8_t>> bitmaps;  // per run, row-major y * width + x
  std::vector<double> coverage;                    // percent per run
  std::vector<std::uint64_t> seeds;                // derived seed per run
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<std::uint64_t> visit_counts;  // arrivals per cell, pooled over runs
  bool partial_final_episode = false;

  std::string to_csv() const {
    std::ostringstream out;
    out << "run_id,seed,coverage_percent\n";
    for (std::size_t r = 0; r < coverage.size(); ++r)
      out << r << "," << seeds[r] << "," << coverage[r] << "\n";
    return out.str();
  }
};

struct CoverageOptions {
  int width = 51;
  int height = 51;
  double alpha = 1.0;   // count-repeat repeat-probability scale
  double zeta_mu = 2.0; // random-zeta duration exponent
  int zeta_n_max = 100;
};

// Coverage protocol: `runs` independent rollouts on the reward-free grid, each
// resetting to the center every episode_length steps until total_steps.
// Coverage counts distinct cells (the start cell included); the pooled
// per-cell arrival counts feed the heatmap. Count-repeat drives SNAP from
// on-visit tabular counts.
inline CoverageResult run_coverage(CoverageStrategy strategy, int episode_length,
                                   std::int64_t total_steps, int runs,
                                   std::uint64_t base_seed,
                                   const CoverageOptions& opt = {}) {
  if (episode_length < 1) throw std::invalid_argument("episode_length must be >= 1");
  if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");

  CoverageResult result;
  result.width = opt.width;
  result.height = opt.height;
  result.visit_counts.assign(static_cast<std::size_t>(opt.width) * opt.height, 0);
  if (total_steps % episode_length != 0) {
    result.partial_final_episode = true;
    std::cerr << "coverage: total_steps " << total_steps
              << " is not a multiple of episode_length " << episode_length
              << "; the final partial episode still counts\n";
  }

  EnvConfig ec;
  ec.env_name = "minigrid";
  ec.reward_spec = RewardSpec::none;
  ec.grid_width = opt.width;
  ec.grid_height = opt.height;
  ec.start_x = opt.width / 2;
  ec.start_y = opt.height / 2;
  ec.episode_length = episode_length;

  PersistenceStrategy ps_strategy = PersistenceStrategy::none();
  if (strategy == CoverageStrategy::random_zeta)
    ps_strategy = PersistenceStrategy::zeta(opt.zeta_mu, opt.zeta_n_max);
  if (strategy == CoverageStrategy::count_repeat)
    ps_strategy = PersistenceStrategy::snap(opt.alpha);

  for (int r = 0; r < runs; ++r) {
    std::uint64_t run_seed = derive_seed(base_seed, "coverage_run", static_cast<std::uint64_t>(r));
    Rng rng(run_seed);
    GridEnv env(ec);
    NoveltyEstimator novelty = NoveltyEstimator::tabular();
    NoveltyEstimator* novelty_ptr =
        strategy == CoverageStrategy::count_repeat ? &novelty : nullptr;

    std::vector<std::uint8_t> bitmap(result.visit_counts.size(), 0);
    auto visit = [&](const StateVec& s) {
      auto cell = static_cast<std::size_t>(s[1]) * opt.width + static_cast<std::size_t>(s[0]);
      bitmap[cell] = 1;
      ++result.visit_counts[cell];
      if (novelty_ptr) novelty_ptr->update_count(s);
    };

    ActionSources sources;
    sources.base = [&](const StateVec&) { return Action{rng.uniform_int(4)}; };
    sources.random = [&] { return Action{rng.uniform_int(4)}; };

    PersistenceState ps;
    StateVec s = env.reset();
    visit(s);
    for (std::int64_t t = 0; t < total_steps; ++t) {
      auto decision = behavior_step(ps_strategy, sources, ps, s, novelty_ptr, t, rng);
      auto res = env.step(decision.action);
      visit(res.next_state);
      if (res.terminal && t + 1 < total_steps) {
        s = env.reset();
        ps.reset();
        visit(s);
      } else {
        s = res.next_state;
      }
    }

    result.coverage.push_back(coverage_percent(bitmap));
    result.bitmaps.push_back(std::move(bitmap));
    result.seeds.push_back(run_seed);
  }

  double sum = 0.0;
  for (double c : result.coverage) sum += c;
  result.mean = sum / runs;
  if (runs > 1) {
    double ss = 0.0;
    for (double c : result.coverage) ss += (c - result.mean) * (c - result.mean);
    result.std_error = std::sqrt(ss / (runs - 1)) / std::sqrt(static_cast<double>(runs));
  }
  return result;
}

}  // namespace snap
