#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fefi/core.hpp"

namespace fefi {

enum class InteractionLevel { Low, Medium, High };

inline std::string_view to_string(InteractionLevel l) {
  switch (l) {
    case InteractionLevel::Low: return "low";
    case InteractionLevel::Medium: return "medium";
    case InteractionLevel::High: return "high";
  }
  return "?";
}

inline InteractionLevel interaction_level_from_string(std::string_view s) {
  if (s == "low") return InteractionLevel::Low;
  if (s == "medium") return InteractionLevel::Medium;
  if (s == "high") return InteractionLevel::High;
  throw ParameterError("unknown interaction level: '" + std::string(s) + "'");
}

/// Recipe for one synthetic regression dataset.
struct SyntheticSpec {
  std::size_t n_instances = 2000;
  std::size_t n_features = 10;
  double informative_fraction = 0.9;
  double noise_std = 0.5;
  InteractionLevel interaction = InteractionLevel::Low;
  std::uint64_t seed = 0;

  std::size_t n_informative() const {
    return static_cast<std::size_t>(
        std::llround(informative_fraction * static_cast<double>(n_features)));
  }

  // Interaction strength maps to the effective rank of the feature matrix:
  // full rank for Low, half for Medium, a fifth (at least 2) for High.
  std::size_t effective_rank() const {
    const auto d = static_cast<double>(n_features);
    switch (interaction) {
      case InteractionLevel::Low: return n_features;
      case InteractionLevel::Medium:
        return static_cast<std::size_t>(std::ceil(d / 2.0));
      case InteractionLevel::High:
        return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(d / 5.0)));
    }
    return n_features;
  }

  void validate() const {
    if (n_instances < 2)
      throw ParameterError("n_instances must be >= 2, got " + std::to_string(n_instances));
    if (n_features < 2)
      throw ParameterError("n_features must be >= 2, got " + std::to_string(n_features));
    if (!(informative_fraction > 0.0 && informative_fraction <= 1.0))
      throw ParameterError("informative_fraction must lie in (0,1], got " +
                           format_double(informative_fraction));
    if (n_informative() < 1)
      throw ParameterError("round(informative_fraction * n_features) must be >= 1");
    if (noise_std < 0.0)
      throw ParameterError("noise_std must be >= 0, got " + format_double(noise_std));
  }
};

struct SyntheticDataset {
  Matrix features;
  Vec targets;
  Vec coefficients;               // zero for uninformative features
  Vec ground_truth_importance;    // |coefficient| / max |coefficient|
  SyntheticSpec spec;
};

namespace detail {

// Rows of an orthonormal basis of R^d, from modified Gram-Schmidt on a
// seeded Gaussian matrix. Used as the mixing matrix so that full effective
// rank yields uncorrelated columns.
inline Matrix orthonormal_rows(std::size_t r, std::size_t d, Rng& rng) {
  Matrix basis(d, d);
  for (auto& v : basis.data) v = rng.normal();
  for (std::size_t i = 0; i < d; ++i) {
    auto row_i = basis.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const auto row_j = basis.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += row_i[k] * row_j[k];
      for (std::size_t k = 0; k < d; ++k) row_i[k] -= dot * row_j[k];
    }
    double norm = 0.0;
    for (double v : row_i) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      // A degenerate draw; replace with a unit vector and restart the row.
      for (std::size_t k = 0; k < d; ++k) row_i[k] = (k == i % d) ? 1.0 : 0.0;
      norm = 1.0;
    }
    for (std::size_t k = 0; k < d; ++k) row_i[k] /= norm;
  }
  Matrix out(r, d);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = basis(i, j);
  return out;
}

// The rank-r feature matrix before the full-rank perturbation is added.
inline Matrix low_rank_features(std::size_t n, std::size_t d, std::size_t r,
                                Rng mixing_rng, Rng factor_rng) {
  const Matrix mixing = orthonormal_rows(r, d, mixing_rng);
  Matrix factors(n, r);
  for (auto& v : factors.data) v = factor_rng.normal();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < r; ++t) {
      const double g = factors(i, t);
      for (std::size_t j = 0; j < d; ++j) out(i, j) += g * mixing(t, j);
    }
  return out;
}

inline constexpr double kPerturbationScale = 0.01;
inline constexpr double kCoefficientScale = 1.0;

}  // namespace detail

/// Deterministic synthetic regression data: a low-rank Gaussian feature
/// matrix with a small full-rank perturbation, a sparse positive coefficient
/// vector, and Gaussian target noise.
inline SyntheticDataset generate_dataset(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_instances;
  const std::size_t d = spec.n_features;
  const std::size_t r = spec.effective_rank();
  const Rng root(spec.seed);

  SyntheticDataset out;
  out.spec = spec;
  out.features = detail::low_rank_features(n, d, r, root.derive(hash_tag("mixing")),
                                           root.derive(hash_tag("factors")));
  Rng perturb = root.derive(hash_tag("perturb"));
  for (auto& v : out.features.data) v += detail::kPerturbationScale * perturb.normal();

  std::vector<std::size_t> order(d);
  for (std::size_t j = 0; j < d; ++j) order[j] = j;
  Rng pick = root.derive(hash_tag("informative"));
  pick.shuffle(order);

  out.coefficients.assign(d, 0.0);
  Rng coef_rng = root.derive(hash_tag("coefficients"));
  for (std::size_t i = 0; i < spec.n_informative(); ++i)
    out.coefficients[order[i]] = detail::kCoefficientScale * coef_rng.uniform();

  out.targets.assign(n, 0.0);
  Rng noise = root.derive(hash_tag("noise"));
  for (std::size_t i = 0; i < n; ++i) {
    double y = 0.0;
    const auto row = out.features.row(i);
    for (std::size_t j = 0; j < d; ++j) y += row[j] * out.coefficients[j];
    if (spec.noise_std > 0.0) y += noise.normal(0.0, spec.noise_std);
    out.targets[i] = y;
  }

  double max_abs = 0.0;
  for (double c : out.coefficients) max_abs = std::max(max_abs, std::abs(c));
  out.ground_truth_importance.assign(d, 0.0);
  if (max_abs > 0.0)
    for (std::size_t j = 0; j < d; ++j)
      out.ground_truth_importance[j] = std::abs(out.coefficients[j]) / max_abs;
  return out;
}

/// Pearson correlation matrix of a feature matrix; symmetric with unit
/// diagonal.
inline Matrix pearson_matrix(const Matrix& features) {
  const std::size_t n = features.rows;
  const std::size_t d = features.cols;
  if (n < 2) throw ParameterError("pearson_matrix: need at least 2 rows");
  Vec means(d, 0.0), sds(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) means[j] += features(i, j);
  for (auto& m : means) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = features(i, j) - means[j];
      sds[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    if (sds[j] <= 0.0)
      throw DegenerateFeatureError("feature column " + std::to_string(j) +
                                   " has zero variance");
    sds[j] = std::sqrt(sds[j]);
  }
  Matrix corr(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    corr(a, a) = 1.0;
    for (std::size_t b = a + 1; b < d; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        dot += (features(i, a) - means[a]) * (features(i, b) - means[b]);
      const double r = std::clamp(dot / (sds[a] * sds[b]), -1.0, 1.0);
      corr(a, b) = r;
      corr(b, a) = r;
    }
  }
  return corr;
}

inline Matrix pearson_matrix(const SyntheticDataset& dataset) {
  return pearson_matrix(dataset.features);
}

}  // namespace fefi
