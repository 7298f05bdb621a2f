#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace snap {

// SplitMix64 finalizer. Used to derive well-separated stream seeds from a
// single base seed so that e.g. evaluation never consumes training draws.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

// String-tagged variant, handy for naming streams ("eval", "noise", ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t stream = 0) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return derive_seed(derive_seed(base, h), stream);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(gen_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  std::uint64_t next_u64() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace snap
