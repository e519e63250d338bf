#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/kinds.hpp"

namespace fefi {

/// One importance coefficient from the run matrix. sample_id enumerates the
/// (fold, method) combinations, so a feature's rows form the blocks of the
/// Stage-3 record layout.
struct FiRecord {
  std::size_t feature_index = 0;
  std::size_t sample_id = 0;
  FiMethod method = FiMethod::Permutation;
  LearnerKind model = LearnerKind::GradientBoosting;
  double coefficient = 0.0;
};

/// The Stage-3 record set plus per-feature ground truth. Coefficients and
/// ground-truth values live in [0,1].
struct FiTable {
  std::vector<FiRecord> records;
  std::map<std::size_t, double> ground_truth;
  DataSubset subset = DataSubset::Whole;
  std::vector<LearnerKind> models;   // model universe of the run, in run order
  std::vector<FiMethod> methods;     // method universe of the run, in run order
  std::size_t n_folds = 0;

  std::size_t n_features() const { return ground_truth.size(); }

  /// Records sorted by (feature, sample, method, model). Consumers sort before
  /// aggregating so record order never changes any downstream output.
  std::vector<FiRecord> sorted_records() const {
    std::vector<FiRecord> out = records;
    std::sort(out.begin(), out.end(), [](const FiRecord& a, const FiRecord& b) {
      if (a.feature_index != b.feature_index) return a.feature_index < b.feature_index;
      if (a.sample_id != b.sample_id) return a.sample_id < b.sample_id;
      if (a.method != b.method) return a.method < b.method;
      return a.model < b.model;
    });
    return out;
  }

  /// All coefficients produced by one model, pooled over features and
  /// samples. Returned sorted so downstream aggregation cannot depend on
  /// record order.
  Vec model_column(LearnerKind kind) const {
    Vec out;
    for (const auto& r : records)
      if (r.model == kind) out.push_back(r.coefficient);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Coefficients for one (feature, model) cell pooled over samples; sorted
  /// for the same reason.
  Vec feature_model_values(std::size_t feature, LearnerKind kind) const {
    Vec out;
    for (const auto& r : records)
      if (r.feature_index == feature && r.model == kind) out.push_back(r.coefficient);
    std::sort(out.begin(), out.end());
    return out;
  }
};

}  // namespace fefi
