#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace snap {

// Aggregate statistics over per-run normalized final scores:
// median, interquartile mean, mean and optimality gap.
struct MetricsSummary {
  double median = 0.0;
  double iqm = 0.0;
  double mean = 0.0;
  double optimality_gap = 0.0;
};

// median / IQM / mean / optimality gap over >= 1 scores. IQM trims
// floor(n/4) scores from each end (conventions differ; this one keeps the
// middle half for n divisible by 4 and slightly more otherwise). The
// optimality gap treats 1.0 as the target: mean of max(0, 1 - score).
inline MetricsSummary aggregate_metrics(std::vector<double> scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate_metrics needs >= 1 score");
  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();

  MetricsSummary out;
  out.median = (n % 2 == 1) ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);

  std::size_t trim = n / 4;
  double iqm_sum = 0.0;
  for (std::size_t i = trim; i < n - trim; ++i) iqm_sum += scores[i];
  out.iqm = iqm_sum / static_cast<double>(n - 2 * trim);

  double sum = 0.0, gap = 0.0;
  for (double s : scores) {
    sum += s;
    gap += std::max(0.0, 1.0 - s);
  }
  out.mean = sum / static_cast<double>(n);
  out.optimality_gap = gap / static_cast<double>(n);
  return out;
}

struct TracePoint {
  std::int64_t step = 0;  // 1-based index of the last step inside the window
  double mean_p = 0.0;
};

// Non-overlapping window means over a per-step probability trace; the final
// window may be partial. A window larger than the whole trace collapses to a
// single global mean.
inline std::vector<TracePoint> probability_trace(const std::vector<double>& probs,
                                                 std::size_t window = 1000) {
  if (window == 0) throw std::invalid_argument("window must be >= 1");
  std::vector<TracePoint> out;
  for (std::size_t start = 0; start < probs.size(); start += window) {
    std::size_t end = std::min(start + window, probs.size());
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) sum += probs[i];
    out.push_back({static_cast<std::int64_t>(end), sum / static_cast<double>(end - start)});
  }
  return out;
}

// 100 * set bits / total bits over a visited-cell bitmap.
inline double coverage_percent(const std::vector<std::uint8_t>& bitmap) {
  if (bitmap.empty()) throw std::invalid_argument("coverage bitmap must be non-empty");
  std::size_t set = 0;
  for (auto b : bitmap) set += (b != 0);
  return 100.0 * static_cast<double>(set) / static_cast<double>(bitmap.size());
}

}  // namespace snap
