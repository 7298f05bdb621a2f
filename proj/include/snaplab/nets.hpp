#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "snaplab/rng.hpp"

namespace snap {

enum class Activation { relu, tanh_bounded, linear };

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh_bounded: return std::tanh(z);
    case Activation::linear: return z;
  }
  return z;
}

// Derivative expressed through the post-activation value where convenient.
inline double activate_grad(Activation a, double pre, double post) {
  switch (a) {
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::tanh_bounded: return 1.0 - post * post;
    case Activation::linear: return 1.0;
  }
  return 1.0;
}

// Fully connected net with one flat parameter vector (weights row-major,
// then biases, per layer). Flat storage keeps Adam, soft updates and
// finite-difference probes to simple loops.
class DenseNet {
 public:
  DenseNet() = default;

  DenseNet(std::vector<int> sizes, Activation hidden, Activation output, Rng& rng)
      : sizes_(std::move(sizes)), hidden_(hidden), output_(output) {
    if (sizes_.size() < 2) throw std::invalid_argument("net needs >= 2 layer sizes");
    for (int s : sizes_)
      if (s < 1) throw std::invalid_argument("layer sizes must be positive");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(total);
      total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
    }
    params_.resize(total);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      double* w = params_.data() + offsets_[l];
      std::size_t n = static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
    }
  }

  int in_dim() const { return sizes_.front(); }
  int out_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t n_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  struct Trace {
    std::vector<std::vector<double>> inputs;  // per layer, inputs[0] = x
    std::vector<std::vector<double>> pre;     // pre-activations per layer
    std::vector<std::vector<double>> post;    // post-activations per layer
  };

  std::vector<double> forward(const std::vector<double>& x, Trace* trace = nullptr) const {
    if (static_cast<int>(x.size()) != in_dim())
      throw std::invalid_argument("net input dimension mismatch");
    std::vector<double> cur = x;
    if (trace) {
      trace->inputs.clear();
      trace->pre.clear();
      trace->post.clear();
    }
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      int in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + static_cast<std::size_t>(out) * in;
      Activation act = (l + 2 == sizes_.size()) ? output_ : hidden_;
      std::vector<double> z(out), a(out);
      for (int o = 0; o < out; ++o) {
        double s = b[o];
        const double* row = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) s += row[i] * cur[i];
        z[o] = s;
        a[o] = activate(act, s);
      }
      if (trace) {
        trace->inputs.push_back(std::move(cur));
        trace->pre.push_back(z);
        trace->post.push_back(a);
      }
      cur = std::move(a);
    }
    return cur;
  }

  // Backprop dL/d(output) through the trace. Parameter gradients accumulate
  // into `grad` (same layout as params); returns dL/d(input).
  std::vector<double> backward(const Trace& trace, std::vector<double> dout,
                               std::vector<double>& grad) const {
    if (grad.size() != params_.size()) throw std::invalid_argument("grad size mismatch");
    for (std::size_t l = sizes_.size() - 1; l-- > 0;) {
      int in = sizes_[l], out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + static_cast<std::size_t>(out) * in;
      Activation act = (l + 2 == sizes_.size()) ? output_ : hidden_;
      const auto& x = trace.inputs[l];
      const auto& pre = trace.pre[l];
      const auto& post = trace.post[l];
      std::vector<double> dz(out);
      for (int o = 0; o < out; ++o) dz[o] = dout[o] * activate_grad(act, pre[o], post[o]);
      std::vector<double> dx(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * in;
        double* grow = gw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) {
          grow[i] += dz[o] * x[i];
          dx[i] += row[i] * dz[o];
        }
        gb[o] += dz[o];
      }
      dout = std::move(dx);
    }
    return dout;
  }

  void check_finite(const std::string& label) const {
    for (double v : params_)
      if (!std::isfinite(v))
        throw std::runtime_error("non-finite parameter in " + label +
                                 " (diverged update or bad input)");
  }

 private:
  std::vector<int> sizes_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::linear;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

inline std::vector<double> dense_net_apply(const DenseNet& net,
                                           const std::vector<double>& x) {
  return net.forward(x);
}

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  }

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    if (params.size() != grads.size())
      throw std::invalid_argument("adam: param/grad size mismatch");
    if (m_.empty()) {
      m_.assign(params.size(), 0.0);
      v_.assign(params.size(), 0.0);
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
      params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
  }

  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

// One adaptive-moment step of mean-squared-error regression on (x, y) pairs.
// Returns the pre-step loss.
inline double dense_net_grad_step(
    DenseNet& net, const std::vector<std::pair<std::vector<double>, std::vector<double>>>& batch,
    AdamOptimizer& opt) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  std::vector<double> grad(net.n_params(), 0.0);
  double loss = 0.0;
  for (const auto& [x, y] : batch) {
    DenseNet::Trace trace;
    auto out = net.forward(x, &trace);
    std::vector<double> dout(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      double diff = out[i] - y[i];
      loss += diff * diff / batch.size();
      dout[i] = 2.0 * diff / batch.size();
    }
    net.backward(trace, std::move(dout), grad);
  }
  opt.step(net.params(), grad);
  net.check_finite("regression net");
  return loss;
}

// Online/target parameter pair with exponential-moving-average tracking.
struct TargetPair {
  DenseNet online;
  DenseNet target;
  double tau = 0.01;

  TargetPair() = default;
  TargetPair(DenseNet net, double tau_in) : online(std::move(net)), target(online), tau(tau_in) {
    if (!(tau > 0.0) || tau > 1.0) throw std::invalid_argument("tau must be in (0, 1]");
  }
};

inline void soft_update(TargetPair& pair) {
  auto& t = pair.target.params();
  const auto& o = pair.online.params();
  if (t.size() != o.size()) throw std::invalid_argument("target/online shape mismatch");
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = (1.0 - pair.tau) * t[i] + pair.tau * o[i];
}

}  // namespace snap
