#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace adanav {

// Linear-interpolation quantile (the R type-7 rule) of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];  // keeps 0 * inf out of the blend
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

inline double median(const std::vector<double>& values) {
  return quantile(values, 0.5);
}

inline double interquartile_range(const std::vector<double>& values) {
  return quantile(values, 0.75) - quantile(values, 0.25);
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Ranks with ties sharing their average rank (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// Spearman rank correlation: Pearson correlation of the average ranks.
// Returns 0 when either sequence is constant.
inline double spearman(const std::vector<double>& x,
                       const std::vector<double>& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2)
    throw std::invalid_argument("spearman: need at least two samples");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Mean of the last min(window, n) values.
inline double final_window_mean(const std::vector<double>& values, int window) {
  if (values.empty())
    throw std::invalid_argument("final_window_mean: empty sample");
  if (window < 1) throw std::invalid_argument("final_window_mean: window < 1");
  const std::size_t w =
      std::min(values.size(), static_cast<std::size_t>(window));
  double sum = 0.0;
  for (std::size_t i = values.size() - w; i < values.size(); ++i)
    sum += values[i];
  return sum / static_cast<double>(w);
}

// First cumulative-sample count at which the trailing moving average of the
// returns reaches the threshold. Only full windows count, so no value is
// reported before `window` episodes have elapsed. +inf means never.
inline double samples_to_threshold(const std::vector<double>& returns,
                                   const std::vector<long long>& cumulative,
                                   int window, double threshold) {
  if (returns.size() != cumulative.size())
    throw std::invalid_argument("samples_to_threshold: length mismatch");
  if (window < 1) throw std::invalid_argument("samples_to_threshold: window < 1");
  const std::size_t w = static_cast<std::size_t>(window);
  if (returns.size() < w) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    sum += returns[i];
    if (i >= w) sum -= returns[i - w];
    if (i + 1 >= w && sum / static_cast<double>(w) >= threshold)
      return static_cast<double>(cumulative[i]);
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace adanav
