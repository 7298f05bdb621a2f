#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "snaplab/rng.hpp"
#include "snaplab/types.hpp"

namespace snap {

// Rows of a K x D matrix with i.i.d. standard normal entries. K is capped at
// 64 so a code always fits one machine word.
class ProjectionMatrix {
 public:
  ProjectionMatrix(int k, int d, std::uint64_t seed) : k_(k), d_(d) {
    if (k < 1 || k > 64) throw std::invalid_argument("code length K must be in [1, 64]");
    if (d < 1) throw std::invalid_argument("feature dimension must be >= 1");
    Rng rng(derive_seed(seed, "simhash_projection"));
    a_.resize(static_cast<std::size_t>(k) * d);
    for (auto& v : a_) v = rng.normal();
  }

  int k() const { return k_; }
  int d() const { return d_; }

  double row_dot(int row, const StateVec& x) const {
    double s = 0.0;
    const double* r = a_.data() + static_cast<std::size_t>(row) * d_;
    for (int j = 0; j < d_; ++j) s += r[j] * x[j];
    return s;
  }

  // Test hook: direct access for hand-built projections.
  double& at(int row, int col) { return a_[static_cast<std::size_t>(row) * d_ + col]; }

 private:
  int k_, d_;
  std::vector<double> a_;
};

struct BinaryCode {
  std::uint64_t bits = 0;  // bit i set means sign(row_i . x) == +1
  int k = 0;

  int hamming(const BinaryCode& other) const {
    return std::popcount(bits ^ other.bits);
  }
};

// sign(0) counts as +1, so the all-zero feature vector maps to all-ones.
inline BinaryCode simhash(const StateVec& features, const ProjectionMatrix& a) {
  if (static_cast<int>(features.size()) != a.d())
    throw std::invalid_argument("simhash: feature dimension mismatch");
  BinaryCode code;
  code.k = a.k();
  for (int i = 0; i < a.k(); ++i)
    if (a.row_dot(i, features) >= 0.0) code.bits |= (1ull << i);
  return code;
}

// Keys are tuples of int64 so hashed, quantized and exact-tabular states all
// share one table type.
using CountKey = std::vector<std::int64_t>;

struct CountKeyHash {
  std::size_t operator()(const CountKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
      h = splitmix64(h);
    }
    return static_cast<std::size_t>(h);
  }
};

class CountTable {
 public:
  void increment(const CountKey& key, std::uint64_t by = 1) {
    counts_[key] += by;
    total_ += by;
  }

  std::uint64_t count(const CountKey& key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

  std::uint64_t total() const { return total_; }
  std::size_t distinct() const { return counts_.size(); }

  // Two-column CSV, rows sorted by code so identical tables serialize
  // byte-identically.
  void write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "code_hex,count\n";
    for (const auto& [key, n] : counts_) {
      out << key_hex(key) << "," << n << "\n";
    }
  }

  static std::string key_hex(const CountKey& key) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(key.size() * 16);
    for (auto v : key) {
      auto u = static_cast<std::uint64_t>(v);
      for (int shift = 60; shift >= 0; shift -= 4)
        s.push_back(digits[(u >> shift) & 0xf]);
    }
    return s;
  }

 private:
  // Ordered map keeps CSV output deterministic without an extra sort.
  std::map<CountKey, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

enum class CountMode { on_minibatch, on_visit };

// State -> pseudo-count, with pluggable discretization:
//   tabular    exact bit-pattern of each coordinate
//   quantized  floor(x / bin_width) per coordinate
//   simhash    K-bit random-projection code (optionally after an encoder)
//   kmeans     nearest of k online centroids
class NoveltyEstimator {
 public:
  using Encoder = std::function<StateVec(const StateVec&)>;

  static NoveltyEstimator tabular() {
    NoveltyEstimator e;
    e.kind_ = Kind::tabular;
    return e;
  }

  static NoveltyEstimator quantized(double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    NoveltyEstimator e;
    e.kind_ = Kind::quantized;
    e.bin_width_ = bin_width;
    return e;
  }

  static NoveltyEstimator simhash_codes(int k, int d, std::uint64_t seed,
                                        Encoder encoder = nullptr) {
    NoveltyEstimator e;
    e.kind_ = Kind::simhash;
    e.encoder_ = std::move(encoder);
    e.projection_ = std::make_shared<ProjectionMatrix>(k, d, seed);
    return e;
  }

  static NoveltyEstimator kmeans(int k, double learning_rate, std::uint64_t /*seed*/) {
    if (k < 1) throw std::invalid_argument("kmeans k must be >= 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
      throw std::invalid_argument("kmeans learning_rate must be in (0, 1]");
    NoveltyEstimator e;
    e.kind_ = Kind::kmeans;
    e.kmeans_k_ = k;
    e.kmeans_lr_ = learning_rate;
    return e;
  }

  // Centroids start as the first k distinct states seen; callers may also
  // seed them explicitly from an initial batch.
  void init_centroids(const std::vector<StateVec>& states) {
    for (const auto& s : states) {
      if (static_cast<int>(centroids_.size()) >= kmeans_k_) break;
      centroids_.push_back(s);
    }
  }

  CountKey key_for(const StateVec& s) const {
    switch (kind_) {
      case Kind::tabular: {
        CountKey k;
        k.reserve(s.size());
        for (double v : s) k.push_back(std::bit_cast<std::int64_t>(v));
        return k;
      }
      case Kind::quantized: {
        CountKey k;
        k.reserve(s.size());
        for (double v : s)
          k.push_back(static_cast<std::int64_t>(std::floor(v / bin_width_)));
        return k;
      }
      case Kind::simhash: {
        auto code = encoder_ ? simhash(encoder_(s), *projection_)
                             : simhash(s, *projection_);
        return {static_cast<std::int64_t>(code.bits)};
      }
      case Kind::kmeans:
        return {nearest_centroid(s)};
    }
    throw std::logic_error("unreachable");
  }

  std::uint64_t pseudo_count(const StateVec& s) const {
    // A kmeans counter that has never been updated has no centroids yet;
    // every state is maximally novel rather than an error.
    if (kind_ == Kind::kmeans && centroids_.empty()) return 0;
    return table_.count(key_for(s));
  }

  // Count a batch of states. In kmeans mode each state also drags its
  // centroid: c += lr * (s - c), applied in batch order.
  void update_counts(const std::vector<StateVec>& batch) {
    for (const auto& s : batch) update_count(s);
  }

  void update_count(const StateVec& s) {
    if (kind_ == Kind::kmeans) {
      table_.increment({kmeans_assign_update(s)});
    } else {
      table_.increment(key_for(s));
    }
  }

  // Assign s to its nearest centroid, move that centroid toward s, return the
  // cluster id. New centroids are spawned until k exist.
  std::int64_t kmeans_assign_update(const StateVec& s) {
    if (kind_ != Kind::kmeans) throw std::logic_error("not a kmeans estimator");
    if (static_cast<int>(centroids_.size()) < kmeans_k_) {
      centroids_.push_back(s);
      return static_cast<std::int64_t>(centroids_.size()) - 1;
    }
    std::int64_t id = nearest_centroid(s);
    auto& c = centroids_[static_cast<std::size_t>(id)];
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += kmeans_lr_ * (s[j] - c[j]);
    return id;
  }

  const CountTable& table() const { return table_; }
  const std::vector<StateVec>& centroids() const { return centroids_; }
  const ProjectionMatrix* projection() const { return projection_.get(); }

 private:
  enum class Kind { tabular, quantized, simhash, kmeans };

  std::int64_t nearest_centroid(const StateVec& s) const {
    if (centroids_.empty()) throw std::logic_error("kmeans centroids not initialized");
    std::int64_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centroids_.size(); ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        double diff = s[j] - centroids_[i][j];
        d += diff * diff;
      }
      if (d < best_d) {  // strict < keeps ties on the lowest id
        best_d = d;
        best = static_cast<std::int64_t>(i);
      }
    }
    return best;
  }

  Kind kind_ = Kind::tabular;
  double bin_width_ = 1.0;
  int kmeans_k_ = 0;
  double kmeans_lr_ = 0.0;
  Encoder encoder_;
  std::shared_ptr<ProjectionMatrix> projection_;
  std::vector<StateVec> centroids_;
  CountTable table_;
};

}  // namespace snap
