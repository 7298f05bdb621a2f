#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "snaplab/agents.hpp"
#include "snaplab/env.hpp"
#include "snaplab/novelty.hpp"
#include "snaplab/persistence.hpp"
#include "snaplab/replay.hpp"
#include "snaplab/rng.hpp"

namespace snap {

// --- Agents behind a single interface ---------------------------------------

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // Exploratory behavior-policy action at training step t (0-based).
  virtual Action base_action(const StateVec& s, std::int64_t t, Rng& rng) = 0;
  // Deterministic action for evaluation.
  virtual Action greedy_action(const StateVec& s) = 0;
  virtual Action random_action(Rng& rng) = 0;
  // One off-policy update from the minibatch rooted at `idx`. Must not
  // depend on how the behavior actions were produced.
  virtual void update(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
                      Rng& rng) = 0;
};

class TabularQAgent final : public Agent {
 public:
  TabularQAgent(int n_actions, const AgentConfig& cfg) : cfg_(cfg), q_(n_actions) {}

  std::string name() const override { return "tabular_q"; }

  Action base_action(const StateVec& s, std::int64_t t, Rng& rng) override {
    double eps = schedule_probability(cfg_.epsilon_schedule, t);
    return Action{epsilon_greedy_action(q_.values(QTable::key_of(s)), eps, rng)};
  }

  Action greedy_action(const StateVec& s) override {
    return Action{greedy_argmax(q_.values(QTable::key_of(s)))};
  }

  Action random_action(Rng& rng) override {
    return Action{rng.uniform_int(q_.n_actions())};
  }

  void update(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
              Rng&) override {
    for (auto i : idx) {
      const auto& t = buffer.at(i);
      q_table_update(q_, t.state, std::get<int>(t.action), t.reward, t.next_state,
                     t.terminal, cfg_.q_lr, cfg_.gamma);
    }
  }

  const QTable& table() const { return q_; }

 private:
  AgentConfig cfg_;
  QTable q_;
};

// Discounted n-step windows rooted at the sampled indices, truncated at
// terminals and episode boundaries.
inline TrainBatch build_nstep_batch(const ReplayBuffer& buffer,
                                    const std::vector<std::size_t>& idx, int n,
                                    double gamma) {
  TrainBatch b;
  for (auto i : idx) {
    std::size_t j = i;
    double sum = 0.0, g = 1.0;
    bool terminal = false;
    int len = 0;
    while (true) {
      const auto& t = buffer.at(j);
      sum += g * t.reward;
      g *= gamma;
      ++len;
      terminal = t.terminal;
      if (len == n || terminal) break;
      if (j + 1 >= buffer.size() || buffer.at(j + 1).episode_start) break;
      ++j;
    }
    const auto& first = buffer.at(i);
    const auto& last = buffer.at(j);
    b.states.push_back(first.state);
    b.actions.push_back(std::get<std::vector<double>>(first.action));
    b.rewards.push_back(sum);
    b.discounts.push_back(terminal ? 0.0 : g);
    b.next_states.push_back(last.next_state);
  }
  return b;
}

class DdpgAgent final : public Agent {
 public:
  DdpgAgent(int state_dim, const ContinuousSpec& bounds, const AgentConfig& cfg,
            int n_step, std::uint64_t seed)
      : cfg_(cfg),
        bounds_(bounds),
        n_step_(n_step),
        actor_opt_(cfg.lr),
        critic_opt_(cfg.lr) {
    const int a_dim = static_cast<int>(bounds.low.size());
    for (int j = 0; j < a_dim; ++j)
      if (bounds.low[j] != -1.0 || bounds.high[j] != 1.0)
        throw std::invalid_argument("deep agents assume actions in [-1, 1]^d");
    Rng init(derive_seed(seed, "ddpg_init"));
    nets_.actor = TargetPair(
        DenseNet({state_dim, 64, 64, a_dim}, Activation::relu, Activation::tanh_bounded, init),
        cfg.tau);
    nets_.critic = TargetPair(
        DenseNet({state_dim + a_dim, 64, 64, 1}, Activation::relu, Activation::linear, init),
        cfg.tau);
  }

  std::string name() const override { return "ddpg"; }

  Action base_action(const StateVec& s, std::int64_t t, Rng& rng) override {
    if (t < cfg_.exploration_steps) return random_action(rng);
    auto mean = nets_.actor.online.forward(s);
    return Action{gaussian_behavior_action(mean, t, cfg_.noise_schedule, cfg_.noise_clip,
                                           bounds_, rng)};
  }

  Action greedy_action(const StateVec& s) override {
    return Action{nets_.actor.online.forward(s)};
  }

  Action random_action(Rng& rng) override {
    std::vector<double> a(bounds_.low.size());
    for (std::size_t j = 0; j < a.size(); ++j)
      a[j] = rng.uniform(bounds_.low[j], bounds_.high[j]);
    return Action{a};
  }

  void update(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
              Rng&) override {
    auto batch = build_nstep_batch(buffer, idx, n_step_, cfg_.gamma);
    std::vector<double> cgrad;
    ddpg_critic_loss(nets_, batch, &cgrad);
    critic_opt_.step(nets_.critic.online.params(), cgrad);
    std::vector<double> agrad;
    ddpg_actor_loss(nets_, batch, &agrad);
    actor_opt_.step(nets_.actor.online.params(), agrad);
    nets_.critic.online.check_finite("ddpg critic");
    nets_.actor.online.check_finite("ddpg actor");
    soft_update(nets_.critic);
    soft_update(nets_.actor);
  }

  const DdpgNets& nets() const { return nets_; }

 private:
  AgentConfig cfg_;
  ContinuousSpec bounds_;
  int n_step_;
  DdpgNets nets_;
  AdamOptimizer actor_opt_, critic_opt_;
};

class SacAgent final : public Agent {
 public:
  SacAgent(int state_dim, const ContinuousSpec& bounds, const AgentConfig& cfg,
           int n_step, std::uint64_t seed)
      : cfg_(cfg),
        bounds_(bounds),
        n_step_(n_step),
        actor_opt_(cfg.lr),
        critic_opt_(cfg.lr) {
    const int a_dim = static_cast<int>(bounds.low.size());
    for (int j = 0; j < a_dim; ++j)
      if (bounds.low[j] != -1.0 || bounds.high[j] != 1.0)
        throw std::invalid_argument("deep agents assume actions in [-1, 1]^d");
    Rng init(derive_seed(seed, "sac_init"));
    nets_.actor.net = DenseNet({state_dim, 64, 64, 2 * a_dim}, Activation::relu,
                               Activation::linear, init);
    nets_.critic = TargetPair(
        DenseNet({state_dim + a_dim, 64, 64, 1}, Activation::relu, Activation::linear, init),
        cfg.tau);
  }

  std::string name() const override { return "sac"; }

  Action base_action(const StateVec& s, std::int64_t t, Rng& rng) override {
    if (t < cfg_.exploration_steps) return random_action(rng);
    return Action{nets_.actor.sample_action(s, rng)};
  }

  Action greedy_action(const StateVec& s) override {
    return Action{nets_.actor.mean_action(s)};
  }

  Action random_action(Rng& rng) override {
    std::vector<double> a(bounds_.low.size());
    for (std::size_t j = 0; j < a.size(); ++j)
      a[j] = rng.uniform(bounds_.low[j], bounds_.high[j]);
    return Action{a};
  }

  void update(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
              Rng& rng) override {
    auto batch = build_nstep_batch(buffer, idx, n_step_, cfg_.gamma);
    const int d = nets_.actor.a_dim();
    auto draw_noise = [&](std::size_t n) {
      std::vector<std::vector<double>> eps(n, std::vector<double>(d));
      for (auto& row : eps)
        for (auto& v : row) v = rng.normal();
      return eps;
    };
    auto next_noise = draw_noise(batch.size());
    std::vector<double> cgrad;
    sac_critic_loss(nets_, batch, cfg_.entropy_alpha, next_noise, &cgrad);
    critic_opt_.step(nets_.critic.online.params(), cgrad);
    auto noise = draw_noise(batch.size());
    std::vector<double> agrad;
    sac_actor_loss(nets_, batch, cfg_.entropy_alpha, noise, &agrad);
    actor_opt_.step(nets_.actor.net.params(), agrad);
    nets_.critic.online.check_finite("sac critic");
    nets_.actor.net.check_finite("sac actor");
    soft_update(nets_.critic);
  }

  const SacNets& nets() const { return nets_; }

 private:
  AgentConfig cfg_;
  ContinuousSpec bounds_;
  int n_step_;
  SacNets nets_;
  AdamOptimizer actor_opt_, critic_opt_;
};

enum class AgentKind { tabular_q, ddpg, sac };

inline AgentKind parse_agent_kind(const std::string& s) {
  if (s == "tabular_q") return AgentKind::tabular_q;
  if (s == "ddpg") return AgentKind::ddpg;
  if (s == "sac") return AgentKind::sac;
  throw std::invalid_argument("unknown agent kind: " + s);
}

inline std::unique_ptr<Agent> make_agent(AgentKind kind, const Env& env,
                                         const AgentConfig& cfg, int effective_kappa,
                                         std::uint64_t seed) {
  int n_step = cfg.n_step_for(effective_kappa);
  switch (kind) {
    case AgentKind::tabular_q:
      if (!env.action_spec().is_discrete())
        throw std::invalid_argument("tabular_q needs a discrete action space");
      return std::make_unique<TabularQAgent>(env.action_spec().discrete_count(), cfg);
    case AgentKind::ddpg:
      if (env.action_spec().is_discrete())
        throw std::invalid_argument("ddpg needs a continuous action space");
      return std::make_unique<DdpgAgent>(env.state_dim(), env.action_spec().continuous_spec(),
                                         cfg, n_step, seed);
    case AgentKind::sac:
      if (env.action_spec().is_discrete())
        throw std::invalid_argument("sac needs a continuous action space");
      return std::make_unique<SacAgent>(env.state_dim(), env.action_spec().continuous_spec(),
                                        cfg, n_step, seed);
  }
  throw std::logic_error("unreachable");
}

// --- Run records -------------------------------------------------------------

struct EvalPoint {
  std::int64_t step = 0;
  double mean_return = 0.0;
  std::vector<double> returns;
};

struct RunRecord {
  std::string env_name;
  std::string agent_name;
  std::string strategy_name;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 0;
  std::int64_t updates = 0;
  std::int64_t first_goal_step = -1;  // -1: goal never reached
  std::uint64_t count_total = 0;
  std::vector<double> repeat_probs;  // one entry per env step
  std::vector<EvalPoint> evals;

  // One JSON object per evaluation point, preceded by a run header line.
  std::string to_jsonl() const {
    std::ostringstream out;
    nlohmann::json header{{"env", env_name},
                          {"agent", agent_name},
                          {"strategy", strategy_name},
                          {"seed", seed},
                          {"total_steps", total_steps},
                          {"updates", updates},
                          {"first_goal_step", first_goal_step},
                          {"count_total", count_total}};
    out << header.dump() << "\n";
    for (const auto& e : evals) {
      nlohmann::json line{{"step", e.step},
                          {"mean_return", e.mean_return},
                          {"returns", e.returns}};
      out << line.dump() << "\n";
    }
    return out.str();
  }

  std::string repeat_probs_csv() const {
    std::ostringstream out;
    out << "step,repeat_probability\n";
    for (std::size_t i = 0; i < repeat_probs.size(); ++i) {
      out << (i + 1) << "," << nlohmann::json(repeat_probs[i]).dump() << "\n";
    }
    return out.str();
  }
};

// Greedy evaluation on fresh env copies: no exploration noise, no action
// repetition, one-off seeds derived from (seed, episode).
inline std::vector<double> evaluate_agent(const Env& proto, Agent& agent, int episodes,
                                          std::uint64_t seed) {
  std::vector<double> returns;
  returns.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    auto env = proto.clone_fresh(derive_seed(seed, "eval_episode", ep));
    StateVec s = env->reset();
    double total = 0.0;
    while (true) {
      auto res = env->step(agent.greedy_action(s));
      total += res.reward;
      if (res.terminal) break;
      s = res.next_state;
    }
    returns.push_back(total);
  }
  return returns;
}

struct TrainOptions {
  std::int64_t total_steps = 10000;
  std::int64_t eval_every = 1000;  // 0 disables periodic evaluation
  int eval_episodes = 10;
  CountMode count_mode = CountMode::on_minibatch;

  void validate() const {
    if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
    if (eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
    if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
  }
};

// The training loop: behavior_step chooses actions (persistence-aware), every
// transition is pushed to replay, and on update steps one minibatch drives
// both the agent update and the count-table update. Evaluation runs on a
// derived RNG stream so it never perturbs training.
inline RunRecord train_snap(Env& env, AgentKind kind, const PersistenceStrategy& strategy,
                            NoveltyEstimator* novelty, const AgentConfig& cfg,
                            const TrainOptions& opts, std::uint64_t seed) {
  cfg.validate();
  opts.validate();
  if (strategy.is<SnapParams>() && novelty == nullptr)
    throw std::invalid_argument("snap strategy requires a novelty estimator");

  int effective_kappa = strategy.is<FixedParams>() ? strategy.as<FixedParams>().kappa : 1;
  int update_every = cfg.update_every_for(effective_kappa);
  auto agent = make_agent(kind, env, cfg, effective_kappa, seed);

  RunRecord rec;
  rec.env_name = env.config().env_name;
  rec.agent_name = agent->name();
  rec.strategy_name = strategy.name();
  rec.seed = seed;

  Rng rng(derive_seed(seed, "train"));
  ReplayBuffer buffer(cfg.replay_capacity);

  ActionSources sources;
  std::int64_t step_index = 0;  // 0-based step for schedules
  sources.base = [&](const StateVec& s) { return agent->base_action(s, step_index, rng); };
  sources.random = [&] { return agent->random_action(rng); };
  sources.greedy = [&](const StateVec& s) { return agent->greedy_action(s); };
  sources.epsilon = [&](std::int64_t t) {
    return schedule_probability(cfg.epsilon_schedule, t);
  };

  PersistenceState ps;
  StateVec s = env.reset();
  bool episode_start = true;
  if (novelty && opts.count_mode == CountMode::on_visit) novelty->update_count(s);

  for (std::int64_t t = 1; t <= opts.total_steps; ++t) {
    step_index = t - 1;
    auto decision = behavior_step(strategy, sources, ps, s, novelty, step_index, rng);
    rec.repeat_probs.push_back(decision.repeat_prob);

    auto res = env.step(decision.action);
    Transition tr;
    tr.state = s;
    tr.action = decision.action;
    tr.reward = res.reward;
    tr.next_state = res.next_state;
    tr.terminal = res.terminal;
    tr.episode_start = episode_start;
    episode_start = false;
    buffer.push(std::move(tr));

    if (novelty && opts.count_mode == CountMode::on_visit)
      novelty->update_count(res.next_state);
    if (res.reward > 0.0 && rec.first_goal_step < 0) rec.first_goal_step = t;

    if (t > cfg.seed_frames && (t - cfg.seed_frames) % update_every == 0 &&
        buffer.ready(static_cast<std::size_t>(cfg.batch))) {
      auto idx = buffer.sample_indices(static_cast<std::size_t>(cfg.batch), rng);
      agent->update(buffer, idx, rng);
      ++rec.updates;
      if (novelty && opts.count_mode == CountMode::on_minibatch) {
        std::vector<StateVec> states;
        states.reserve(idx.size());
        for (auto i : idx) states.push_back(buffer.at(i).state);
        novelty->update_counts(states);
      }
    }

    if (opts.eval_every > 0 && t % opts.eval_every == 0) {
      auto returns = evaluate_agent(env, *agent, opts.eval_episodes,
                                    derive_seed(seed, "eval", static_cast<std::uint64_t>(t)));
      double mean = 0.0;
      for (double r : returns) mean += r;
      mean /= returns.size();
      rec.evals.push_back({t, mean, returns});
    }

    if (res.terminal) {
      s = env.reset();
      ps.reset();
      episode_start = true;
      if (novelty && opts.count_mode == CountMode::on_visit) novelty->update_count(s);
    } else {
      s = res.next_state;
    }
  }

  rec.total_steps = opts.total_steps;
  rec.count_total = novelty ? novelty->table().total() : 0;
  return rec;
}

}  // namespace snap
