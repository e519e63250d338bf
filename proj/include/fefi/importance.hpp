#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/kinds.hpp"
#include "fefi/learners.hpp"
#include "fefi/predictor.hpp"

namespace fefi {

inline constexpr std::size_t kDefaultPermutationRepeats = 5;
inline constexpr std::size_t kDefaultShapleyOrderings = 128;
inline constexpr std::size_t kShapleyEvalSubsample = 100;

/// One normalized importance vector from a (model, fold, method) cell.
struct FiVector {
  Vec values;       // max-normalized, in [0,1]
  Vec raw_values;   // pre-normalization
  FiMethod method = FiMethod::Permutation;
  LearnerKind model_kind = LearnerKind::GradientBoosting;
  std::size_t fold_id = 0;
};

/// Clamp negatives to zero, then scale so the maximum is 1. An all-zero
/// vector stays all-zero.
inline Vec normalize_importance(std::span<const double> raw) {
  if (!all_finite(raw)) throw DataError("normalize_importance: non-finite value");
  Vec out(raw.begin(), raw.end());
  for (auto& v : out) v = std::max(v, 0.0);
  const double mx = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
  if (mx > 0.0)
    for (auto& v : out) v /= mx;
  return out;
}

inline double rmse_of(std::span<const double> pred, std::span<const double> truth) {
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - truth[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(pred.size()));
}

/// Mean RMSE inflation over n_repeats column shuffles. A feature the model
/// never reads scores exactly zero; negative values are possible and are
/// clamped later by normalize_importance.
inline Vec permutation_importance(const Predictor& model, const Matrix& X,
                                  const Vec& y, std::size_t n_repeats,
                                  std::uint64_t seed) {
  if (X.rows == 0 || X.cols == 0)
    throw ShapeError("permutation_importance: empty feature matrix");
  if (X.rows != y.size())
    throw ShapeError("permutation_importance: rows (" + std::to_string(X.rows) +
                     ") != targets (" + std::to_string(y.size()) + ")");
  if (X.cols != model.n_features())
    throw ShapeError("permutation_importance: feature count mismatch");
  if (n_repeats < 1) throw ParameterError("permutation_importance: n_repeats >= 1");

  const double baseline = rmse_of(model.predict(X), y);
  Matrix work = X;
  Vec importance(X.cols, 0.0);
  std::vector<std::size_t> perm(X.rows);
  for (std::size_t j = 0; j < X.cols; ++j) {
    double acc = 0.0;
    for (std::size_t rep = 0; rep < n_repeats; ++rep) {
      Rng rng(Rng::mix(seed, Rng::mix(j, rep)));
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      for (std::size_t i = 0; i < X.rows; ++i) work(i, j) = X(perm[i], j);
      acc += rmse_of(model.predict(work), y) - baseline;
    }
    for (std::size_t i = 0; i < X.rows; ++i) work(i, j) = X(i, j);
    importance[j] = acc / static_cast<double>(n_repeats);
  }
  return importance;
}

/// Monte Carlo Shapley estimate for one instance: random feature orderings
/// with absent features replaced by a background row drawn from the data.
/// Walking the ordering feature by feature telescopes, so the per-sample
/// marginals sum exactly to f(x) - f(background).
struct ShapleyInstanceResult {
  Vec phi;             // per-feature Shapley estimate
  Vec standard_error;  // Monte Carlo SE per feature
  double efficiency_sum = 0.0;  // sum of phi, equals mean_s [f(x) - f(z_s)]
  double efficiency_se = 0.0;
};

inline ShapleyInstanceResult shapley_instance(const Predictor& model, const Matrix& X,
                                              std::size_t row, std::size_t n_samples,
                                              Rng rng) {
  const std::size_t d = X.cols;
  if (row >= X.rows) throw ParameterError("shapley_instance: row out of range");
  if (n_samples < 10)
    throw ParameterError("shapley_instance: n_samples must be >= 10, got " +
                         std::to_string(n_samples));

  // All hybrid rows for one sample are evaluated in a single batched call.
  Matrix batch(d + 1, d);
  Vec sum(d, 0.0), sumsq(d, 0.0);
  double eff_sum = 0.0, eff_sumsq = 0.0;
  std::vector<std::size_t> ordering(d);
  const auto x = X.row(row);
  Vec hybrid(d);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::size_t zi = rng.uniform_index(X.rows);
    const auto z = X.row(zi);
    std::copy(z.begin(), z.end(), hybrid.begin());
    std::iota(ordering.begin(), ordering.end(), 0);
    rng.shuffle(ordering);
    std::copy(hybrid.begin(), hybrid.end(), batch.row(0).begin());
    for (std::size_t t = 0; t < d; ++t) {
      hybrid[ordering[t]] = x[ordering[t]];
      std::copy(hybrid.begin(), hybrid.end(), batch.row(t + 1).begin());
    }
    const Vec pred = model.predict(batch);
    for (std::size_t t = 0; t < d; ++t) {
      const double marginal = pred[t + 1] - pred[t];
      sum[ordering[t]] += marginal;
      sumsq[ordering[t]] += marginal * marginal;
    }
    const double eff = pred[d] - pred[0];  // f(x) - f(z)
    eff_sum += eff;
    eff_sumsq += eff * eff;
  }

  ShapleyInstanceResult out;
  out.phi.assign(d, 0.0);
  out.standard_error.assign(d, 0.0);
  const auto S = static_cast<double>(n_samples);
  for (std::size_t j = 0; j < d; ++j) {
    out.phi[j] = sum[j] / S;
    const double var = std::max(0.0, sumsq[j] / S - out.phi[j] * out.phi[j]);
    out.standard_error[j] = std::sqrt(var / S);
  }
  out.efficiency_sum = eff_sum / S;
  const double eff_var = std::max(0.0, eff_sumsq / S - out.efficiency_sum * out.efficiency_sum);
  out.efficiency_se = std::sqrt(eff_var / S);
  return out;
}

/// Aggregate importance: mean absolute per-instance Shapley value over a
/// fixed evaluation subsample. Pass a row index instead to get that
/// instance's raw Shapley vector.
inline Vec shapley_sampling(const Predictor& model, const Matrix& X,
                            std::optional<std::size_t> row, std::size_t n_samples,
                            std::uint64_t seed,
                            std::size_t subsample = kShapleyEvalSubsample) {
  if (X.rows == 0 || X.cols == 0)
    throw ShapeError("shapley_sampling: empty feature matrix");
  if (X.cols != model.n_features())
    throw ShapeError("shapley_sampling: feature count mismatch");
  if (n_samples < 10)
    throw ParameterError("shapley_sampling: n_samples must be >= 10, got " +
                         std::to_string(n_samples));
  if (row.has_value())
    return shapley_instance(model, X, *row, n_samples, Rng(Rng::mix(seed, *row))).phi;

  std::vector<std::size_t> rows(X.rows);
  std::iota(rows.begin(), rows.end(), 0);
  Rng pick(Rng::mix(seed, hash_tag("shapley-subsample")));
  pick.shuffle(rows);
  rows.resize(std::min(subsample, rows.size()));
  std::sort(rows.begin(), rows.end());

  Vec acc(X.cols, 0.0);
  for (std::size_t r : rows) {
    const auto res = shapley_instance(model, X, r, n_samples, Rng(Rng::mix(seed, r)));
    for (std::size_t j = 0; j < X.cols; ++j) acc[j] += std::abs(res.phi[j]);
  }
  for (auto& v : acc) v /= static_cast<double>(rows.size());
  return acc;
}

/// Raw importance for one (model, method) cell on the given evaluation data.
inline Vec raw_importance(const TrainedModel& model, FiMethod method, const Matrix& X,
                          const Vec& y, std::uint64_t seed,
                          std::size_t n_repeats = kDefaultPermutationRepeats,
                          std::size_t n_shapley = kDefaultShapleyOrderings) {
  switch (method) {
    case FiMethod::Permutation:
      return permutation_importance(model, X, y, n_repeats, seed);
    case FiMethod::ShapleySampling:
      return shapley_sampling(model, X, std::nullopt, n_shapley, seed);
    case FiMethod::Impurity:
      return model.impurity_importance();
  }
  throw ParameterError("unknown FI method");
}

/// The full cell: raw estimate plus its normalized form and provenance.
inline FiVector compute_fi_vector(const TrainedModel& model, FiMethod method,
                                  const Matrix& X, const Vec& y, std::size_t fold_id,
                                  std::uint64_t seed,
                                  std::size_t n_repeats = kDefaultPermutationRepeats,
                                  std::size_t n_shapley = kDefaultShapleyOrderings) {
  FiVector out;
  out.method = method;
  out.model_kind = model.kind();
  out.fold_id = fold_id;
  out.raw_values = raw_importance(model, method, X, y, seed, n_repeats, n_shapley);
  out.values = normalize_importance(out.raw_values);
  return out;
}

}  // namespace fefi
