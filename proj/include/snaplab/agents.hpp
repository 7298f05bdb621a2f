#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "snaplab/nets.hpp"
#include "snaplab/novelty.hpp"
#include "snaplab/persistence.hpp"
#include "snaplab/replay.hpp"
#include "snaplab/rng.hpp"
#include "snaplab/types.hpp"

namespace snap {

struct AgentConfig {
  double gamma = 0.99;
  double lr = 1e-4;
  int batch = 256;
  // Per-persistence couplings: n-step length and update cadence equalize the
  // total number of gradient updates across kappa.
  std::map<int, int> n_step = {{1, 6}, {2, 3}, {4, 2}};
  std::map<int, int> update_every = {{1, 4}, {2, 2}, {4, 1}};
  LinearScheduleParams noise_schedule{1.0, 0.1, 500000};
  double noise_clip = 0.3;
  int seed_frames = 4000;
  int exploration_steps = 2000;
  LinearScheduleParams epsilon_schedule{1.0, 0.1, 500000};
  double entropy_alpha = 0.1;  // fixed, not auto-tuned
  double tau = 0.01;
  double q_lr = 0.1;  // tabular agent
  std::size_t replay_capacity = 1'000'000;

  void validate() const {
    if (!(gamma > 0.0) || gamma >= 1.0)
      throw std::invalid_argument("gamma must be in (0, 1)");
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    for (const auto& [k, n] : n_step)
      if (n < 1) throw std::invalid_argument("n_step must be >= 1");
    for (const auto& [k, u] : update_every)
      if (u < 1) throw std::invalid_argument("update_every must be >= 1");
    if (!(tau > 0.0) || tau > 1.0) throw std::invalid_argument("tau must be in (0, 1]");
  }

  int n_step_for(int kappa) const {
    auto it = n_step.find(kappa);
    return it == n_step.end() ? 1 : it->second;
  }
  int update_every_for(int kappa) const {
    auto it = update_every.find(kappa);
    return it == update_every.end() ? 1 : it->second;
  }
};

// --- Discrete exploration -------------------------------------------------

// Argmax with ties broken toward the lowest action id.
inline int greedy_argmax(const std::vector<double>& q) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

inline int epsilon_greedy_action(const std::vector<double>& q, double epsilon, Rng& rng) {
  if (q.empty()) throw std::invalid_argument("epsilon_greedy_action needs q-values");
  if (epsilon > 0.0 && rng.uniform() < epsilon)
    return rng.uniform_int(static_cast<int>(q.size()));
  return greedy_argmax(q);
}

// --- Tabular Q ------------------------------------------------------------

class QTable {
 public:
  explicit QTable(int n_actions) : n_actions_(n_actions) {
    if (n_actions < 1) throw std::invalid_argument("QTable needs >= 1 action");
  }

  std::vector<double>& row(const CountKey& key) {
    auto it = q_.find(key);
    if (it == q_.end()) it = q_.emplace(key, std::vector<double>(n_actions_, 0.0)).first;
    return it->second;
  }

  std::vector<double> values(const CountKey& key) const {
    auto it = q_.find(key);
    return it == q_.end() ? std::vector<double>(n_actions_, 0.0) : it->second;
  }

  int n_actions() const { return n_actions_; }
  std::size_t n_states() const { return q_.size(); }

  static CountKey key_of(const StateVec& s) {
    CountKey k;
    k.reserve(s.size());
    for (double v : s) k.push_back(std::bit_cast<std::int64_t>(v));
    return k;
  }

 private:
  int n_actions_;
  std::unordered_map<CountKey, std::vector<double>, CountKeyHash> q_;
};

inline void q_table_update(QTable& table, const StateVec& s, int a, double r,
                           const StateVec& s_next, bool terminal, double lr,
                           double gamma) {
  auto& row = table.row(QTable::key_of(s));
  double bootstrap = 0.0;
  if (!terminal) {
    auto next = table.values(QTable::key_of(s_next));
    bootstrap = next[greedy_argmax(next)];
  }
  row[a] += lr * (r + gamma * bootstrap - row[a]);
}

// --- Continuous exploration noise ------------------------------------------

// mean + eps with eps ~ N(0, sigma(t)^2) truncated to [-clip, clip]
// (rejection sampling), then clamped to the action box.
inline std::vector<double> gaussian_behavior_action(const std::vector<double>& mean,
                                                    std::int64_t t,
                                                    const LinearScheduleParams& schedule,
                                                    double clip,
                                                    const ContinuousSpec& bounds,
                                                    Rng& rng) {
  double sigma = schedule_probability(schedule, t);
  std::vector<double> a(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    double eps = 0.0;
    if (clip > 0.0 && sigma > 0.0) {
      do {
        eps = rng.normal(0.0, sigma);
      } while (eps < -clip || eps > clip);
    }
    a[i] = std::clamp(mean[i] + eps, bounds.low[i], bounds.high[i]);
  }
  return a;
}

// --- Batches for deep updates ----------------------------------------------

// Continuous-control minibatch with n-step quantities folded in: `rewards`
// holds the discounted n-step sums and `discounts` holds gamma^n * (1 -
// terminal) multiplying the bootstrap.
struct TrainBatch {
  std::vector<StateVec> states;
  std::vector<std::vector<double>> actions;
  std::vector<double> rewards;
  std::vector<double> discounts;
  std::vector<StateVec> next_states;

  std::size_t size() const { return states.size(); }
};

inline TrainBatch make_batch(const std::vector<Transition>& transitions, double gamma) {
  TrainBatch b;
  for (const auto& t : transitions) {
    b.states.push_back(t.state);
    b.actions.push_back(std::get<std::vector<double>>(t.action));
    b.rewards.push_back(t.reward);
    b.discounts.push_back(t.terminal ? 0.0 : gamma);
    b.next_states.push_back(t.next_state);
  }
  return b;
}

// --- DDPG-style losses and gradients ----------------------------------------

struct DdpgNets {
  TargetPair actor;   // tanh-bounded output
  TargetPair critic;  // scalar output on (state ++ action)
};

inline std::vector<double> concat_sa(const StateVec& s, const std::vector<double>& a) {
  std::vector<double> x(s);
  x.insert(x.end(), a.begin(), a.end());
  return x;
}

struct LossPair {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

// Critic: mean (Q(s,a) - y)^2 with y = r + disc * Q_target(s', actor_target(s')).
// Actor: -mean Q(s, actor(s)). Gradients (optional outputs) are exact
// analytic backprop; the finite-difference tests hold them to 1e-4.
inline double ddpg_critic_loss(const DdpgNets& nets, const TrainBatch& batch,
                               std::vector<double>* grad_out = nullptr) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  double loss = 0.0;
  std::vector<double> grad(grad_out ? nets.critic.online.n_params() : 0, 0.0);
  const double inv_n = 1.0 / batch.size();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto a_next = nets.actor.target.forward(batch.next_states[i]);
    double q_next = nets.critic.target.forward(concat_sa(batch.next_states[i], a_next))[0];
    double y = batch.rewards[i] + batch.discounts[i] * q_next;
    DenseNet::Trace trace;
    double q = nets.critic.online.forward(concat_sa(batch.states[i], batch.actions[i]),
                                          grad_out ? &trace : nullptr)[0];
    double diff = q - y;
    if (!std::isfinite(diff))
      throw std::runtime_error("ddpg critic produced a non-finite TD error");
    loss += diff * diff * inv_n;
    if (grad_out)
      nets.critic.online.backward(trace, {2.0 * diff * inv_n}, grad);
  }
  if (grad_out) *grad_out = std::move(grad);
  return loss;
}

inline double ddpg_actor_loss(const DdpgNets& nets, const TrainBatch& batch,
                              std::vector<double>* grad_out = nullptr) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  double loss = 0.0;
  std::vector<double> grad(grad_out ? nets.actor.online.n_params() : 0, 0.0);
  const double inv_n = 1.0 / batch.size();
  const int a_dim = nets.actor.online.out_dim();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    DenseNet::Trace atrace;
    auto a = nets.actor.online.forward(batch.states[i], grad_out ? &atrace : nullptr);
    DenseNet::Trace qtrace;
    double q = nets.critic.online.forward(concat_sa(batch.states[i], a),
                                          grad_out ? &qtrace : nullptr)[0];
    if (!std::isfinite(q)) throw std::runtime_error("ddpg actor saw a non-finite Q value");
    loss -= q * inv_n;
    if (grad_out) {
      // dQ/d(input) -> keep only the action block, feed back into the actor.
      std::vector<double> qgrad_sink(nets.critic.online.n_params(), 0.0);
      auto dinput = nets.critic.online.backward(qtrace, {1.0}, qgrad_sink);
      std::vector<double> da(dinput.end() - a_dim, dinput.end());
      for (auto& v : da) v *= -inv_n;
      nets.actor.online.backward(atrace, std::move(da), grad);
    }
  }
  if (grad_out) *grad_out = std::move(grad);
  return loss;
}

inline LossPair ddpg_losses(const DdpgNets& nets, const TrainBatch& batch) {
  return {ddpg_critic_loss(nets, batch), ddpg_actor_loss(nets, batch)};
}

inline LossPair ddpg_losses(const std::vector<Transition>& transitions,
                            const DdpgNets& nets, double gamma) {
  return ddpg_losses(nets, make_batch(transitions, gamma));
}

// --- SAC-style losses and gradients ------------------------------------------

// Squashed-Gaussian policy head: the net outputs [mean, log_std] per action
// dim; actions are tanh(mean + std * eps) with reparameterized noise.
struct SquashedGaussianActor {
  DenseNet net;  // out_dim = 2 * a_dim, linear output
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;
  static constexpr double kSquashEps = 1e-6;

  int a_dim() const { return net.out_dim() / 2; }

  // Deterministic evaluation action: tanh of the mean head.
  std::vector<double> mean_action(const StateVec& s) const {
    auto head = net.forward(s);
    std::vector<double> a(a_dim());
    for (int j = 0; j < a_dim(); ++j) a[j] = std::tanh(head[j]);
    return a;
  }

  std::vector<double> sample_action(const StateVec& s, Rng& rng) const {
    auto head = net.forward(s);
    std::vector<double> a(a_dim());
    for (int j = 0; j < a_dim(); ++j) {
      double log_std = std::clamp(head[a_dim() + j], kLogStdMin, kLogStdMax);
      a[j] = std::tanh(head[j] + std::exp(log_std) * rng.normal());
    }
    return a;
  }

  // Action and log-density for fixed noise; used by losses so gradients and
  // finite differences see the same draw.
  struct Sample {
    std::vector<double> action;
    double log_prob = 0.0;
  };

  Sample sample_with_noise(const std::vector<double>& head,
                           const std::vector<double>& eps) const {
    const int d = a_dim();
    Sample out;
    out.action.resize(d);
    for (int j = 0; j < d; ++j) {
      double log_std = std::clamp(head[d + j], kLogStdMin, kLogStdMax);
      double std = std::exp(log_std);
      double u = head[j] + std * eps[j];
      double a = std::tanh(u);
      out.action[j] = a;
      // log N(u; mean, std) with (u - mean)/std = eps, minus the tanh
      // change-of-variables term.
      out.log_prob += -0.5 * eps[j] * eps[j] - log_std - 0.5 * std::log(2.0 * M_PI) -
                      std::log(1.0 - a * a + kSquashEps);
    }
    return out;
  }
};

struct SacNets {
  SquashedGaussianActor actor;
  TargetPair critic;
};

// Critic: mean (Q(s,a) - y)^2 with
// y = r + disc * (Q_target(s', a') - alpha * log pi(a'|s')), a' drawn from the
// current actor at s' using the provided per-sample noise.
inline double sac_critic_loss(const SacNets& nets, const TrainBatch& batch,
                              double entropy_alpha,
                              const std::vector<std::vector<double>>& next_noise,
                              std::vector<double>* grad_out = nullptr) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  if (next_noise.size() != batch.size())
    throw std::invalid_argument("noise batch size mismatch");
  double loss = 0.0;
  std::vector<double> grad(grad_out ? nets.critic.online.n_params() : 0, 0.0);
  const double inv_n = 1.0 / batch.size();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto head = nets.actor.net.forward(batch.next_states[i]);
    auto s = nets.actor.sample_with_noise(head, next_noise[i]);
    double q_next =
        nets.critic.target.forward(concat_sa(batch.next_states[i], s.action))[0];
    double y = batch.rewards[i] +
               batch.discounts[i] * (q_next - entropy_alpha * s.log_prob);
    DenseNet::Trace trace;
    double q = grad_out ? nets.critic.online.forward(
                              concat_sa(batch.states[i], batch.actions[i]), &trace)[0]
                        : nets.critic.online.forward(
                              concat_sa(batch.states[i], batch.actions[i]))[0];
    double diff = q - y;
    if (!std::isfinite(diff))
      throw std::runtime_error("sac critic produced a non-finite TD error");
    loss += diff * diff * inv_n;
    if (grad_out) nets.critic.online.backward(trace, {2.0 * diff * inv_n}, grad);
  }
  if (grad_out) *grad_out = std::move(grad);
  return loss;
}

// Actor: mean[alpha * log pi(a|s) - Q(s, a)] with reparameterized a.
inline double sac_actor_loss(const SacNets& nets, const TrainBatch& batch,
                             double entropy_alpha,
                             const std::vector<std::vector<double>>& noise,
                             std::vector<double>* grad_out = nullptr) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  if (noise.size() != batch.size()) throw std::invalid_argument("noise batch size mismatch");
  const int d = nets.actor.a_dim();
  double loss = 0.0;
  std::vector<double> grad(grad_out ? nets.actor.net.n_params() : 0, 0.0);
  const double inv_n = 1.0 / batch.size();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    DenseNet::Trace atrace;
    auto head = grad_out ? nets.actor.net.forward(batch.states[i], &atrace)
                         : nets.actor.net.forward(batch.states[i]);
    auto s = nets.actor.sample_with_noise(head, noise[i]);
    DenseNet::Trace qtrace;
    double q = grad_out ? nets.critic.online.forward(concat_sa(batch.states[i], s.action),
                                                     &qtrace)[0]
                        : nets.critic.online.forward(concat_sa(batch.states[i], s.action))[0];
    loss += (entropy_alpha * s.log_prob - q) * inv_n;
    if (!std::isfinite(loss)) throw std::runtime_error("sac actor loss non-finite");
    if (!grad_out) continue;

    // dQ/da from the critic input gradient (state block dropped).
    std::vector<double> qsink(nets.critic.online.n_params(), 0.0);
    auto dinput = nets.critic.online.backward(qtrace, {1.0}, qsink);
    std::vector<double> dq_da(dinput.end() - d, dinput.end());

    // Chain everything back to the [mean, log_std] head.
    std::vector<double> dhead(2 * d, 0.0);
    for (int j = 0; j < d; ++j) {
      double raw_log_std = head[d + j];
      double log_std = std::clamp(raw_log_std, SquashedGaussianActor::kLogStdMin,
                                  SquashedGaussianActor::kLogStdMax);
      bool clamped = raw_log_std < SquashedGaussianActor::kLogStdMin ||
                     raw_log_std > SquashedGaussianActor::kLogStdMax;
      double std = std::exp(log_std);
      double a = s.action[j];
      double da_du = 1.0 - a * a;  // tanh'
      double du_dlogstd = std * noise[i][j];
      // log_prob pieces: -log_std directly, squash term via a.
      double dlp_da = 2.0 * a / (1.0 - a * a + SquashedGaussianActor::kSquashEps);
      double dlp_dmean = dlp_da * da_du;
      double dlp_dlogstd = -1.0 + dlp_da * da_du * du_dlogstd;
      double df_dmean = entropy_alpha * dlp_dmean - dq_da[j] * da_du;
      double df_dlogstd = entropy_alpha * dlp_dlogstd - dq_da[j] * da_du * du_dlogstd;
      dhead[j] += df_dmean * inv_n;
      if (!clamped) dhead[d + j] += df_dlogstd * inv_n;
    }
    nets.actor.net.backward(atrace, std::move(dhead), grad);
  }
  if (grad_out) *grad_out = std::move(grad);
  return loss;
}

inline LossPair sac_losses(const SacNets& nets, const TrainBatch& batch, double entropy_alpha,
                           const std::vector<std::vector<double>>& noise,
                           const std::vector<std::vector<double>>& next_noise) {
  return {sac_critic_loss(nets, batch, entropy_alpha, next_noise),
          sac_actor_loss(nets, batch, entropy_alpha, noise)};
}

}  // namespace snap
