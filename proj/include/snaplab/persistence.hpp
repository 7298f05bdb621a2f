#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "snaplab/novelty.hpp"
#include "snaplab/rng.hpp"
#include "snaplab/types.hpp"

namespace snap {

// p(repeat) = alpha / max(1, sqrt(n)) where n is the pseudo-count of the
// current state. Unvisited and once-visited states both give alpha.
inline double repeat_probability(std::uint64_t n, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("alpha must be in (0, 1]");
  double root = std::sqrt(static_cast<double>(n));
  return alpha / std::max(1.0, root);
}

struct SnapParams {
  double alpha = 1.0;
};

struct ZetaParams {
  double mu = 2.0;
  int n_max = 100;
};

struct FixedParams {
  int kappa = 1;
};

struct LinearScheduleParams {
  double p0 = 1.0;
  double p1 = 0.1;
  std::int64_t t_end = 500000;
};

struct SigmoidScheduleParams {
  double p0 = 1.0;
  double p1 = 0.1;
  double t_mid = 250000.0;
  double steepness = 10.0 / 500000.0;
};

struct NoPersistence {};

// Truncated zeta pmf over durations {1, ..., n_max}: p(n) proportional to
// n^(-mu).
inline std::vector<double> zeta_pmf(double mu, int n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  std::vector<double> p(static_cast<std::size_t>(n_max));
  double z = 0.0;
  for (int n = 1; n <= n_max; ++n) z += std::pow(n, -mu);
  for (int n = 1; n <= n_max; ++n) p[n - 1] = std::pow(n, -mu) / z;
  return p;
}

class ZetaSampler {
 public:
  ZetaSampler(double mu, int n_max) : pmf_(zeta_pmf(mu, n_max)) {
    cdf_.resize(pmf_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf_.size(); ++i) {
      acc += pmf_[i];
      cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
  }

  int sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(it - cdf_.begin()) + 1;
  }

  const std::vector<double>& pmf() const { return pmf_; }

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
};

inline int sample_zeta(double mu, int n_max, Rng& rng) {
  return ZetaSampler(mu, n_max).sample(rng);
}

inline double schedule_probability(const LinearScheduleParams& p, std::int64_t t) {
  if (p.t_end <= 0) throw std::invalid_argument("schedule horizon must be > 0");
  double frac = std::min(1.0, static_cast<double>(t) / static_cast<double>(p.t_end));
  return p.p0 + (p.p1 - p.p0) * frac;
}

inline double schedule_probability(const SigmoidScheduleParams& p, std::int64_t t) {
  double z = p.steepness * (static_cast<double>(t) - p.t_mid);
  return p.p1 + (p.p0 - p.p1) / (1.0 + std::exp(z));
}

class PersistenceStrategy {
 public:
  using Params = std::variant<NoPersistence, SnapParams, ZetaParams, FixedParams,
                              LinearScheduleParams, SigmoidScheduleParams>;

  static PersistenceStrategy none() { return PersistenceStrategy(NoPersistence{}); }

  static PersistenceStrategy snap(double alpha = 1.0) {
    if (!(alpha > 0.0) || alpha > 1.0)
      throw std::invalid_argument("snap alpha must be in (0, 1]");
    return PersistenceStrategy(SnapParams{alpha});
  }

  static PersistenceStrategy zeta(double mu = 2.0, int n_max = 100) {
    if (!(mu > 0.0)) throw std::invalid_argument("zeta mu must be > 0");
    if (n_max < 1) throw std::invalid_argument("zeta n_max must be >= 1");
    return PersistenceStrategy(ZetaParams{mu, n_max});
  }

  static PersistenceStrategy fixed(int kappa) {
    if (kappa < 1) throw std::invalid_argument("fixed kappa must be >= 1");
    return PersistenceStrategy(FixedParams{kappa});
  }

  static PersistenceStrategy linear(LinearScheduleParams p) {
    if (p.t_end <= 0) throw std::invalid_argument("linear schedule horizon must be > 0");
    check_prob(p.p0);
    check_prob(p.p1);
    return PersistenceStrategy(p);
  }

  static PersistenceStrategy sigmoid(SigmoidScheduleParams p) {
    check_prob(p.p0);
    check_prob(p.p1);
    return PersistenceStrategy(p);
  }

  const Params& params() const { return params_; }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(params_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(params_);
  }

  std::string name() const {
    if (is<NoPersistence>()) return "none";
    if (is<SnapParams>()) return "snap";
    if (is<ZetaParams>()) return "zeta";
    if (is<FixedParams>()) return "fixed";
    if (is<LinearScheduleParams>()) return "linear";
    return "sigmoid";
  }

 private:
  explicit PersistenceStrategy(Params p) : params_(std::move(p)) {}
  static void check_prob(double p) {
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("schedule endpoints must be probabilities");
  }
  Params params_;
};

// Parses the textual schedule forms "linear(p0, p1, T)" and
// "sigmoid(p0, p1, t_mid, k)".
inline PersistenceStrategy parse_schedule(const std::string& text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("malformed schedule string: " + text);
  std::string head = text.substr(0, open);
  std::string body = text.substr(open + 1, close - open - 1);
  std::vector<double> args;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto comma = body.find(',', pos);
    std::string tok =
        body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    args.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (head == "linear") {
    if (args.size() != 3) throw std::invalid_argument("linear(p0, p1, T) takes 3 args");
    return PersistenceStrategy::linear(
        {args[0], args[1], static_cast<std::int64_t>(args[2])});
  }
  if (head == "sigmoid") {
    if (args.size() != 4)
      throw std::invalid_argument("sigmoid(p0, p1, t_mid, k) takes 4 args");
    return PersistenceStrategy::sigmoid({args[0], args[1], args[2], args[3]});
  }
  throw std::invalid_argument("unknown schedule kind: " + head);
}

// Full textual strategy form used by config files and the CLI:
// "none" | "snap" | "snap(alpha)" | "zeta" | "zeta(mu, n_max)" | "fixed(kappa)"
// | "linear(p0, p1, T)" | "sigmoid(p0, p1, t_mid, k)".
inline PersistenceStrategy parse_strategy(const std::string& text) {
  auto open = text.find('(');
  std::string head = open == std::string::npos ? text : text.substr(0, open);
  // Strip surrounding whitespace from the head.
  auto b = head.find_first_not_of(" \t");
  auto e = head.find_last_not_of(" \t");
  head = b == std::string::npos ? "" : head.substr(b, e - b + 1);

  if (head == "none") return PersistenceStrategy::none();
  if (head == "linear" || head == "sigmoid") return parse_schedule(text);

  std::vector<double> args;
  if (open != std::string::npos) {
    auto close = text.rfind(')');
    if (close == std::string::npos || close < open)
      throw std::invalid_argument("malformed strategy string: " + text);
    std::string body = text.substr(open + 1, close - open - 1);
    std::size_t pos = 0;
    while (pos < body.size()) {
      auto comma = body.find(',', pos);
      std::string tok =
          body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (tok.find_first_not_of(" \t") != std::string::npos) args.push_back(std::stod(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  if (head == "snap") {
    if (args.size() > 1) throw std::invalid_argument("snap takes at most one arg (alpha)");
    return PersistenceStrategy::snap(args.empty() ? 1.0 : args[0]);
  }
  if (head == "zeta") {
    if (args.size() > 2) throw std::invalid_argument("zeta takes at most (mu, n_max)");
    double mu = args.empty() ? 2.0 : args[0];
    int n_max = args.size() > 1 ? static_cast<int>(args[1]) : 100;
    return PersistenceStrategy::zeta(mu, n_max);
  }
  if (head == "fixed") {
    if (args.size() != 1) throw std::invalid_argument("fixed(kappa) takes 1 arg");
    return PersistenceStrategy::fixed(static_cast<int>(args[0]));
  }
  throw std::invalid_argument("unknown strategy kind: " + text);
}

// Mutable per-run persistence bookkeeping. reset() on every episode start.
struct PersistenceState {
  std::optional<Action> last_action;
  int repeat_remaining = 0;
  bool at_episode_start = true;

  void reset() {
    last_action.reset();
    repeat_remaining = 0;
    at_episode_start = true;
  }
};

// Action producers behavior_step composes over. `base` is the exploratory
// base policy (noisy actor / epsilon-greedy); when `greedy` and `epsilon` are
// also present the zeta strategy becomes epsilon-z-greedy, where greedy
// actions are never repeated and only random actions get zeta durations.
struct ActionSources {
  std::function<Action(const StateVec&)> base;
  std::function<Action()> random;
  std::function<Action(const StateVec&)> greedy;
  std::function<double(std::int64_t)> epsilon;
};

struct BehaviorDecision {
  Action action;
  double repeat_prob = 0.0;  // probability this step's action is a repeat
  bool repeated = false;
};

namespace detail {

inline void start_zeta_block(const ZetaParams& zp, const ActionSources& sources,
                             PersistenceState& ps, const StateVec& state,
                             std::int64_t t, Rng& rng, BehaviorDecision& out) {
  bool explore = true;
  if (sources.greedy && sources.epsilon) explore = rng.uniform() < sources.epsilon(t);
  if (explore) {
    if (!sources.random)
      throw std::invalid_argument("zeta strategy requires a random action source");
    out.action = sources.random();
    ZetaSampler sampler(zp.mu, zp.n_max);
    ps.repeat_remaining = sampler.sample(rng) - 1;
  } else {
    out.action = sources.greedy(state);
    ps.repeat_remaining = 0;
  }
  out.repeated = false;
}

}  // namespace detail

// One behaviour-policy decision. A fresh episode always starts with a fresh
// draw (there is nothing to repeat). SNAP re-flips the repeat coin every step
// from the current state's pseudo-count; zeta commits to sampled durations;
// fixed repeats each fresh action exactly kappa steps; schedules replace the
// SNAP coin with p(t). The reported repeat_prob is the probability this
// step's action was a repeat, which for committed blocks is the 0/1
// indicator of being inside a block.
inline BehaviorDecision behavior_step(const PersistenceStrategy& strategy,
                                      const ActionSources& sources,
                                      PersistenceState& ps, const StateVec& state,
                                      const NoveltyEstimator* novelty, std::int64_t t,
                                      Rng& rng) {
  BehaviorDecision out;

  auto fresh_base = [&] {
    out.action = sources.base(state);
    out.repeated = false;
  };
  auto snap_prob = [&] {
    if (novelty == nullptr)
      throw std::invalid_argument("snap strategy requires a novelty estimator");
    return repeat_probability(novelty->pseudo_count(state),
                              strategy.as<SnapParams>().alpha);
  };
  auto schedule_prob = [&] {
    return strategy.is<LinearScheduleParams>()
               ? schedule_probability(strategy.as<LinearScheduleParams>(), t)
               : schedule_probability(strategy.as<SigmoidScheduleParams>(), t);
  };

  if (ps.at_episode_start || !ps.last_action.has_value()) {
    ps.repeat_remaining = 0;
    if (strategy.is<SnapParams>()) out.repeat_prob = snap_prob();
    if (strategy.is<LinearScheduleParams>() || strategy.is<SigmoidScheduleParams>())
      out.repeat_prob = schedule_prob();
    if (strategy.is<ZetaParams>()) {
      detail::start_zeta_block(strategy.as<ZetaParams>(), sources, ps, state, t, rng,
                               out);
    } else {
      fresh_base();
      if (strategy.is<FixedParams>())
        ps.repeat_remaining = strategy.as<FixedParams>().kappa - 1;
    }
    ps.last_action = out.action;
    ps.at_episode_start = false;
    return out;
  }

  if (strategy.is<NoPersistence>()) {
    fresh_base();
  } else if (strategy.is<SnapParams>()) {
    double p = snap_prob();
    out.repeat_prob = p;
    if (rng.uniform() < p) {
      out.action = *ps.last_action;
      out.repeated = true;
    } else {
      fresh_base();
    }
  } else if (strategy.is<FixedParams>()) {
    if (ps.repeat_remaining > 0) {
      out.action = *ps.last_action;
      out.repeated = true;
      out.repeat_prob = 1.0;
      --ps.repeat_remaining;
    } else {
      fresh_base();
      ps.repeat_remaining = strategy.as<FixedParams>().kappa - 1;
    }
  } else if (strategy.is<ZetaParams>()) {
    if (ps.repeat_remaining > 0) {
      out.action = *ps.last_action;
      out.repeated = true;
      out.repeat_prob = 1.0;
      --ps.repeat_remaining;
    } else {
      detail::start_zeta_block(strategy.as<ZetaParams>(), sources, ps, state, t, rng,
                               out);
    }
  } else {  // linear or sigmoid schedule
    double p = schedule_prob();
    out.repeat_prob = p;
    if (rng.uniform() < p) {
      out.action = *ps.last_action;
      out.repeated = true;
    } else {
      fresh_base();
    }
  }

  ps.last_action = out.action;
  return out;
}

// Number of distinct open-loop action sequences over horizon H when actions
// are committed in blocks of kappa: |A|^ceil(H/kappa). Exact integers; at
// long horizons (|A|^250000 and up) this needs arbitrary precision.
inline mpz_class action_sequence_count(std::int64_t horizon, std::int64_t kappa,
                                       std::int64_t action_count) {
  if (horizon < 1 || kappa < 1 || action_count < 1)
    throw std::invalid_argument("action_sequence_count requires positive arguments");
  std::int64_t blocks = (horizon + kappa - 1) / kappa;
  mpz_class result;
  mpz_ui_pow_ui(result.get_mpz_t(), static_cast<unsigned long>(action_count),
                static_cast<unsigned long>(blocks));
  return result;
}

}  // namespace snap
