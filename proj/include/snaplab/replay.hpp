#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "snaplab/rng.hpp"
#include "snaplab/types.hpp"

namespace snap {

// Fixed-capacity ring of transitions, oldest evicted first. Indexing is
// logical: at(0) is the oldest live record.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay capacity must be > 0");
  }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool ready(std::size_t n) const { return size() >= n; }

  const Transition& at(std::size_t logical) const {
    if (logical >= data_.size()) throw std::out_of_range("replay index out of range");
    return data_[(head_ + logical) % data_.size()];
  }

  // Uniform with replacement, so any non-empty buffer can fill a batch of
  // any size. Training loops gate updates on ready(batch) during warmup; an
  // empty buffer is the only hard error.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (data_.empty()) throw std::logic_error("replay buffer is empty");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx)
      i = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size())));
    return idx;
  }

  std::vector<Transition> sample(std::size_t n, Rng& rng) const {
    std::vector<Transition> out;
    out.reserve(n);
    for (auto i : sample_indices(n, rng)) out.push_back(at(i));
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // physical index of the oldest record once full
  std::vector<Transition> data_;
};

// n-step return target: sum gamma^i * r_i + gamma^n * bootstrap. The caller
// truncates the reward window at terminals and passes bootstrap = 0 there.
inline double nstep_target(const std::vector<double>& rewards, double gamma,
                           double bootstrap) {
  if (rewards.empty()) throw std::invalid_argument("nstep_target needs >= 1 reward");
  double value = 0.0;
  double g = 1.0;
  for (double r : rewards) {
    value += g * r;
    g *= gamma;
  }
  return value + g * bootstrap;
}

}  // namespace snap
