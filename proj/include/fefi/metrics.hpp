#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fefi/core.hpp"

namespace fefi {

inline double mae(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw ShapeError("mae: need equal nonempty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    acc += std::abs(predicted[i] - truth[i]);
  return acc / static_cast<double>(predicted.size());
}

inline double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw ShapeError("rmse: need equal nonempty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - truth[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(predicted.size()));
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are discarded; ties get average ranks. Exact sign-permutation p-value for
/// n <= 20, normal approximation with tie correction beyond that. All-zero
/// differences yield the degenerate p = 1.
inline double wilcoxon_signed_rank(std::span<const double> a,
                                   std::span<const double> b) {
  if (a.size() != b.size())
    throw ShapeError("wilcoxon: samples must have equal length");
  if (a.size() < 5)
    throw ParameterError("wilcoxon: need at least 5 pairs, got " +
                         std::to_string(a.size()));

  std::vector<double> abs_diffs;
  std::vector<int> signs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d == 0.0) continue;
    abs_diffs.push_back(std::abs(d));
    signs.push_back(d > 0.0 ? 1 : -1);
  }
  const std::size_t n = abs_diffs.size();
  if (n == 0) return 1.0;

  // Average ranks, doubled so ties stay integral.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return abs_diffs[x] < abs_diffs[y]; });
  std::vector<long long> rank2(n, 0);
  double tie_correction = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t jx = i;
    while (jx + 1 < n && abs_diffs[order[jx + 1]] == abs_diffs[order[i]]) ++jx;
    const auto t = static_cast<double>(jx - i + 1);
    // ranks i+1 .. jx+1, averaged, doubled: (i+1 + jx+1)
    const long long avg2 = static_cast<long long>(i + 1 + jx + 1);
    for (std::size_t kx = i; kx <= jx; ++kx) rank2[order[kx]] = avg2;
    tie_correction += (t * t * t - t);
    i = jx + 1;
  }

  long long w2_pos = 0;
  long long w2_total = 0;
  for (std::size_t kx = 0; kx < n; ++kx) {
    w2_total += rank2[kx];
    if (signs[kx] > 0) w2_pos += rank2[kx];
  }

  if (n <= 20) {
    // Exact sign-permutation distribution of the doubled rank sum.
    std::vector<double> counts(static_cast<std::size_t>(w2_total) + 1, 0.0);
    counts[0] = 1.0;
    long long reach = 0;
    for (std::size_t kx = 0; kx < n; ++kx) {
      const long long r = rank2[kx];
      reach += r;
      for (long long w = reach; w >= r; --w)
        counts[static_cast<std::size_t>(w)] += counts[static_cast<std::size_t>(w - r)];
    }
    const double total = std::pow(2.0, static_cast<double>(n));
    double le = 0.0, ge = 0.0;
    for (long long w = 0; w <= w2_total; ++w) {
      if (w <= w2_pos) le += counts[static_cast<std::size_t>(w)];
      if (w >= w2_pos) ge += counts[static_cast<std::size_t>(w)];
    }
    return std::min(1.0, 2.0 * std::min(le, ge) / total);
  }

  const double nn = static_cast<double>(n);
  const double w = static_cast<double>(w2_pos) / 2.0;
  const double mu = nn * (nn + 1.0) / 4.0;
  const double sigma2 = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
  if (sigma2 <= 0.0) return 1.0;
  double z = w - mu;
  z -= z > 0.0 ? 0.5 : (z < 0.0 ? -0.5 : 0.0);  // continuity correction
  z /= std::sqrt(sigma2);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace fefi
