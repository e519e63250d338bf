#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/dataset.hpp"
#include "fefi/fi_table.hpp"
#include "fefi/importance.hpp"
#include "fefi/learners.hpp"

namespace fefi {

inline constexpr std::size_t kDefaultFolds = 10;

/// Deterministic k-fold assignment; fold sizes differ by at most one.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // instance index -> fold id
  std::uint64_t seed = 0;

  std::vector<std::size_t> fold_rows(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> complement_rows(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }
};

inline FoldPlan make_folds(std::size_t n_instances, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n_instances)
    throw ParameterError("make_folds: k must satisfy 2 <= k <= n_instances, got k=" +
                         std::to_string(k) + ", n=" + std::to_string(n_instances));
  std::vector<std::size_t> order(n_instances);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n_instances, 0);
  const std::size_t base = n_instances / k;
  const std::size_t extra = n_instances % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) plan.assignments[order[pos++]] = f;
  }
  return plan;
}

namespace detail {

inline Matrix take_rows(const Matrix& X, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), X.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(X.row(rows[i]).begin(), X.row(rows[i]).end(), out.row(i).begin());
  return out;
}

inline Vec take(const Vec& y, std::span<const std::size_t> rows) {
  Vec out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
  return out;
}

}  // namespace detail

struct EnsembleOptions {
  std::size_t n_repeats = kDefaultPermutationRepeats;
  std::size_t n_shapley = kDefaultShapleyOrderings;
  unsigned n_threads = 0;  // 0 = hardware concurrency
  Hyperparams hyperparams = Hyperparams::defaults();
};

/// Stage 1-3: rotate the hold-out fold, train each model kind per rotation,
/// run every supported FI method on the requested data subsets, and collect
/// max-normalized coefficients. One FiTable per subset.
inline std::map<DataSubset, FiTable> run_ensemble_multi(
    const SyntheticDataset& dataset, std::size_t k,
    const std::vector<LearnerKind>& models, const std::vector<FiMethod>& methods,
    const std::vector<DataSubset>& subsets, std::uint64_t seed,
    const EnsembleOptions& options = {}) {
  if (models.empty()) throw ParameterError("run_ensemble: no models requested");
  if (methods.empty()) throw ParameterError("run_ensemble: no methods requested");
  if (subsets.empty()) throw ParameterError("run_ensemble: no subsets requested");

  // Canonical enum order regardless of request order.
  std::vector<LearnerKind> model_list;
  for (auto kind : kAllLearnerKinds)
    if (std::find(models.begin(), models.end(), kind) != models.end())
      model_list.push_back(kind);
  std::vector<FiMethod> method_list;
  for (auto m : kAllFiMethods)
    if (std::find(methods.begin(), methods.end(), m) != methods.end())
      method_list.push_back(m);

  const std::size_t d = dataset.features.cols;
  const FoldPlan folds =
      make_folds(dataset.features.rows, k, Rng::mix(seed, hash_tag("folds")));

  struct TaskOutput {
    std::map<DataSubset, std::vector<FiRecord>> records;
  };
  const std::size_t n_tasks = model_list.size() * k;
  std::vector<TaskOutput> outputs(n_tasks);

  std::vector<std::size_t> all_rows(dataset.features.rows);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  parallel_for(n_tasks, options.n_threads == 0 ? default_thread_count() : options.n_threads,
               [&](std::size_t task) {
    const LearnerKind kind = model_list[task / k];
    const std::size_t fold = task % k;
    const auto train_rows = folds.complement_rows(fold);
    const auto test_rows = folds.fold_rows(fold);
    const Matrix X_train = detail::take_rows(dataset.features, train_rows);
    const Vec y_train = detail::take(dataset.targets, train_rows);

    const std::uint64_t cell_seed =
        Rng::mix(seed, Rng::mix(static_cast<std::uint64_t>(kind) + 1, fold));
    TrainedModel model;
    try {
      model = train(kind, options.hyperparams, X_train, y_train,
                    Rng::mix(cell_seed, hash_tag("train")));
    } catch (const std::exception& e) {
      throw Error("run_ensemble(model=" + std::string(to_string(kind)) +
                  ", fold=" + std::to_string(fold) + "): " + e.what());
    }

    for (DataSubset subset : subsets) {
      const auto& rows = subset == DataSubset::Train
                             ? train_rows
                             : (subset == DataSubset::Test ? test_rows : all_rows);
      const Matrix X_eval = detail::take_rows(dataset.features, rows);
      const Vec y_eval = detail::take(dataset.targets, rows);
      for (std::size_t mi = 0; mi < method_list.size(); ++mi) {
        const FiMethod method = method_list[mi];
        if (!supports(kind, method)) continue;  // skipped, not imputed
        FiVector fi;
        try {
          fi = compute_fi_vector(model, method, X_eval, y_eval, fold,
                                 Rng::mix(cell_seed, hash_tag(to_string(method))),
                                 options.n_repeats, options.n_shapley);
        } catch (const std::exception& e) {
          throw Error("run_ensemble(model=" + std::string(to_string(kind)) +
                      ", fold=" + std::to_string(fold) +
                      ", method=" + std::string(to_string(method)) + "): " + e.what());
        }
        auto& records = outputs[task].records[subset];
        const std::size_t sample_id = fold * method_list.size() + mi;
        for (std::size_t f = 0; f < d; ++f)
          records.push_back({f, sample_id, method, kind, fi.values[f]});
      }
    }
  });

  std::map<DataSubset, FiTable> tables;
  for (DataSubset subset : subsets) {
    FiTable& table = tables[subset];
    table.subset = subset;
    table.models = model_list;
    table.methods = method_list;
    table.n_folds = k;
    for (std::size_t f = 0; f < d; ++f)
      table.ground_truth[f] = dataset.ground_truth_importance[f];
    for (std::size_t task = 0; task < n_tasks; ++task) {
      const auto it = outputs[task].records.find(subset);
      if (it == outputs[task].records.end()) continue;
      table.records.insert(table.records.end(), it->second.begin(), it->second.end());
    }
  }
  return tables;
}

inline FiTable run_ensemble(const SyntheticDataset& dataset, std::size_t k,
                            const std::vector<LearnerKind>& models,
                            const std::vector<FiMethod>& methods, DataSubset subset,
                            std::uint64_t seed, const EnsembleOptions& options = {}) {
  auto tables = run_ensemble_multi(dataset, k, models, methods, {subset}, seed, options);
  return std::move(tables.at(subset));
}

// ---------------------------------------------------------------------------
// Crisp fusion baselines.
// ---------------------------------------------------------------------------

enum class CrispStrategy { Mean, Median, MajorityVote };

inline std::string_view to_string(CrispStrategy s) {
  switch (s) {
    case CrispStrategy::Mean: return "mean";
    case CrispStrategy::Median: return "median";
    case CrispStrategy::MajorityVote: return "majority_vote";
  }
  return "?";
}

struct CrispFusionResult {
  CrispStrategy strategy = CrispStrategy::Mean;
  std::map<std::size_t, double> fused;
};

namespace detail {

inline std::map<std::size_t, Vec> per_feature_coefficients(const FiTable& table) {
  if (table.records.empty()) throw ParameterError("fusion: empty table");
  std::map<std::size_t, Vec> by_feature;
  for (const auto& [feature, truth] : table.ground_truth) {
    (void)truth;
    by_feature[feature] = {};
  }
  for (const auto& r : table.sorted_records())
    by_feature[r.feature_index].push_back(r.coefficient);
  for (const auto& [feature, values] : by_feature)
    if (values.empty())
      throw CoverageError("fusion: no coefficients for feature " +
                          std::to_string(feature));
  return by_feature;
}

}  // namespace detail

inline CrispFusionResult fuse_mean(const FiTable& table) {
  CrispFusionResult out;
  out.strategy = CrispStrategy::Mean;
  for (const auto& [feature, values] : detail::per_feature_coefficients(table))
    out.fused[feature] = mean_of(values);
  return out;
}

inline CrispFusionResult fuse_median(const FiTable& table) {
  CrispFusionResult out;
  out.strategy = CrispStrategy::Median;
  for (auto& [feature, values] : detail::per_feature_coefficients(table)) {
    Vec sorted = values;
    std::sort(sorted.begin(), sorted.end());
    out.fused[feature] = quantile_sorted(sorted, 0.5);
  }
  return out;
}

/// Tercile-bin vote over [0,1]: low [0,1/3), moderate [1/3,2/3), high [2/3,1].
/// The fused value is the mean of the winning bin's coefficients; vote ties
/// prefer the bin holding the overall mean, then the nearest tied bin.
inline CrispFusionResult fuse_majority_vote(const FiTable& table) {
  CrispFusionResult out;
  out.strategy = CrispStrategy::MajorityVote;
  auto bin_of = [](double v) -> std::size_t {
    if (v < 1.0 / 3.0) return 0;
    if (v < 2.0 / 3.0) return 1;
    return 2;
  };
  for (auto& [feature, values] : detail::per_feature_coefficients(table)) {
    std::array<std::size_t, 3> counts{0, 0, 0};
    std::array<double, 3> sums{0.0, 0.0, 0.0};
    for (double v : values) {
      const std::size_t b = bin_of(v);
      ++counts[b];
      sums[b] += v;
    }
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    const std::size_t mean_bin = bin_of(mean_of(values));
    std::size_t winner = 3;
    if (counts[mean_bin] == top) {
      winner = mean_bin;
    } else {
      std::size_t best_dist = 4;
      for (std::size_t b = 0; b < 3; ++b) {
        if (counts[b] != top) continue;
        const std::size_t dist = b > mean_bin ? b - mean_bin : mean_bin - b;
        if (dist < best_dist) {
          best_dist = dist;
          winner = b;
        }
      }
    }
    out.fused[feature] = sums[winner] / static_cast<double>(counts[winner]);
  }
  return out;
}

}  // namespace fefi
