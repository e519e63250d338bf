#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/dataset.hpp"
#include "fefi/predictor.hpp"

namespace fefi {

inline constexpr double kHDenominatorTolerance = 1e-12;

/// Monte Carlo partial dependence of one feature: PD(v) is the mean
/// prediction over the first n_mc rows with feature j forced to v.
inline Vec partial_dependence_1d(const Predictor& model, const Matrix& X,
                                 std::size_t j, std::span<const double> grid,
                                 std::size_t n_mc = 0) {
  if (grid.empty()) throw ParameterError("partial_dependence: empty grid");
  if (j >= X.cols)
    throw ParameterError("partial_dependence: feature index " + std::to_string(j) +
                         " out of range");
  const std::size_t rows = n_mc == 0 ? X.rows : std::min(n_mc, X.rows);
  Matrix work(rows, X.cols);
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(X.row(i).begin(), X.row(i).end(), work.row(i).begin());
  Vec pd(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < rows; ++i) work(i, j) = grid[g];
    const Vec pred = model.predict(work);
    pd[g] = mean_of(pred);
    for (std::size_t i = 0; i < rows; ++i) work(i, j) = X(i, j);
  }
  return pd;
}

/// Two-feature partial dependence over the grid product; result is
/// grid_j.size() x grid_k.size().
inline Matrix partial_dependence_2d(const Predictor& model, const Matrix& X,
                                    std::size_t j, std::size_t k,
                                    std::span<const double> grid_j,
                                    std::span<const double> grid_k,
                                    std::size_t n_mc = 0) {
  if (grid_j.empty() || grid_k.empty())
    throw ParameterError("partial_dependence: empty grid");
  if (j >= X.cols || k >= X.cols || j == k)
    throw ParameterError("partial_dependence: indices must be distinct and in range");
  const std::size_t rows = n_mc == 0 ? X.rows : std::min(n_mc, X.rows);
  Matrix work(rows, X.cols);
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(X.row(i).begin(), X.row(i).end(), work.row(i).begin());
  Matrix pd(grid_j.size(), grid_k.size());
  for (std::size_t a = 0; a < grid_j.size(); ++a) {
    for (std::size_t i = 0; i < rows; ++i) work(i, j) = grid_j[a];
    for (std::size_t b = 0; b < grid_k.size(); ++b) {
      for (std::size_t i = 0; i < rows; ++i) work(i, k) = grid_k[b];
      pd(a, b) = mean_of(model.predict(work));
    }
    for (std::size_t i = 0; i < rows; ++i) work(i, k) = X(i, k);
  }
  return pd;
}

/// Spec'd entry point: 1 or 2 feature indices, one PD value per grid tuple.
inline Vec partial_dependence(const Predictor& model, const Matrix& X,
                              std::span<const std::size_t> indices,
                              const std::vector<Vec>& grid_tuples,
                              std::size_t n_mc = 0) {
  if (indices.empty() || indices.size() > 2)
    throw ParameterError("partial_dependence: need 1 or 2 feature indices");
  if (grid_tuples.empty()) throw ParameterError("partial_dependence: empty grid");
  for (auto j : indices)
    if (j >= X.cols)
      throw ParameterError("partial_dependence: feature index out of range");
  if (indices.size() == 2 && indices[0] == indices[1])
    throw ParameterError("partial_dependence: indices must be distinct");
  const std::size_t rows = n_mc == 0 ? X.rows : std::min(n_mc, X.rows);
  Matrix work(rows, X.cols);
  Vec out(grid_tuples.size(), 0.0);
  for (std::size_t g = 0; g < grid_tuples.size(); ++g) {
    if (grid_tuples[g].size() != indices.size())
      throw ParameterError("partial_dependence: grid tuple arity mismatch");
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(X.row(i).begin(), X.row(i).end(), work.row(i).begin());
    for (std::size_t t = 0; t < indices.size(); ++t)
      for (std::size_t i = 0; i < rows; ++i) work(i, indices[t]) = grid_tuples[g][t];
    out[g] = mean_of(model.predict(work));
  }
  return out;
}

/// Quantile-spaced evaluation grid for one feature column.
inline Vec quantile_grid(const Matrix& X, std::size_t j, std::size_t n_grid) {
  Vec col(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) col[i] = X(i, j);
  std::sort(col.begin(), col.end());
  Vec grid(n_grid);
  for (std::size_t g = 0; g < n_grid; ++g)
    grid[g] = quantile_sorted(col, static_cast<double>(g) /
                                       static_cast<double>(n_grid - 1));
  return grid;
}

/// Friedman's pairwise H statistic on a quantile grid:
/// H^2 = sum[PD_jk - PD_j - PD_k]^2 / sum[PD_jk^2] with centered PD values.
inline double friedman_h_pairwise(const Predictor& model, const Matrix& X,
                                  std::size_t j, std::size_t k,
                                  std::size_t n_grid = 20, std::size_t n_mc = 0) {
  if (n_grid < 2) throw ParameterError("friedman_h: n_grid must be >= 2");
  if (j >= X.cols || k >= X.cols || j == k)
    throw ParameterError("friedman_h: indices must be distinct and in range");
  const Vec grid_j = quantile_grid(X, j, n_grid);
  const Vec grid_k = quantile_grid(X, k, n_grid);

  Matrix pd_jk = partial_dependence_2d(model, X, j, k, grid_j, grid_k, n_mc);
  Vec pd_j = partial_dependence_1d(model, X, j, grid_j, n_mc);
  Vec pd_k = partial_dependence_1d(model, X, k, grid_k, n_mc);

  const double mean_jk = mean_of(pd_jk.data);
  for (auto& v : pd_jk.data) v -= mean_jk;
  const double mean_j = mean_of(pd_j);
  for (auto& v : pd_j) v -= mean_j;
  const double mean_k = mean_of(pd_k);
  for (auto& v : pd_k) v -= mean_k;

  double num = 0.0;
  double den = 0.0;
  for (std::size_t a = 0; a < n_grid; ++a)
    for (std::size_t b = 0; b < n_grid; ++b) {
      const double joint = pd_jk(a, b);
      const double resid = joint - pd_j[a] - pd_k[b];
      num += resid * resid;
      den += joint * joint;
    }
  if (den < kHDenominatorTolerance)
    throw IndeterminateHError("friedman_h: joint partial dependence is flat for pair (" +
                              std::to_string(j) + "," + std::to_string(k) + ")");
  return std::clamp(std::sqrt(num / den), 0.0, 1.0);
}

inline double friedman_h_pairwise(const Predictor& model,
                                  const SyntheticDataset& dataset, std::size_t j,
                                  std::size_t k, std::size_t n_grid = 20,
                                  std::size_t n_mc = 0) {
  return friedman_h_pairwise(model, dataset.features, j, k, n_grid, n_mc);
}

/// Correlation matrix plus pairwise H values, sorted by descending H.
struct InteractionReport {
  Matrix pearson;
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>> h_statistics;
};

inline InteractionReport build_interaction_report(const Predictor& model,
                                                  const SyntheticDataset& dataset,
                                                  std::size_t max_pairs = 64,
                                                  std::size_t n_grid = 20,
                                                  std::size_t n_mc = 200) {
  InteractionReport report;
  report.pearson = pearson_matrix(dataset);
  const std::size_t d = dataset.features.cols;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) pairs.emplace_back(a, b);
  if (pairs.size() > max_pairs) {
    // Keep the most correlated pairs; H is expensive.
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
      return std::abs(report.pearson(p.first, p.second)) >
             std::abs(report.pearson(q.first, q.second));
    });
    pairs.resize(max_pairs);
  }
  for (const auto& p : pairs) {
    double h = 0.0;
    try {
      h = friedman_h_pairwise(model, dataset.features, p.first, p.second, n_grid, n_mc);
    } catch (const IndeterminateHError&) {
      continue;
    }
    report.h_statistics.emplace_back(p, h);
  }
  std::stable_sort(report.h_statistics.begin(), report.h_statistics.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return report;
}

}  // namespace fefi
