#pragma once

#include <array>
#include <string>
#include <string_view>

#include "fefi/core.hpp"

namespace fefi {

// The five model families in the run matrix.
enum class LearnerKind { GradientBoosting, RandomForest, ExtraTrees, LinearSVR, MLP };

inline constexpr std::array<LearnerKind, 5> kAllLearnerKinds = {
    LearnerKind::GradientBoosting, LearnerKind::RandomForest,
    LearnerKind::ExtraTrees, LearnerKind::LinearSVR, LearnerKind::MLP};

inline std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::GradientBoosting: return "gb";
    case LearnerKind::RandomForest: return "rf";
    case LearnerKind::ExtraTrees: return "et";
    case LearnerKind::LinearSVR: return "svr";
    case LearnerKind::MLP: return "mlp";
  }
  return "?";
}

inline LearnerKind learner_kind_from_string(std::string_view s) {
  for (auto k : kAllLearnerKinds)
    if (s == to_string(k)) return k;
  throw ParameterError("unknown learner kind: '" + std::string(s) + "'");
}

// Importance estimators. Impurity is valid only for the tree-based models.
enum class FiMethod { Permutation, ShapleySampling, Impurity };

inline constexpr std::array<FiMethod, 3> kAllFiMethods = {
    FiMethod::Permutation, FiMethod::ShapleySampling, FiMethod::Impurity};

inline std::string_view to_string(FiMethod m) {
  switch (m) {
    case FiMethod::Permutation: return "permutation";
    case FiMethod::ShapleySampling: return "shapley";
    case FiMethod::Impurity: return "impurity";
  }
  return "?";
}

inline FiMethod fi_method_from_string(std::string_view s) {
  for (auto m : kAllFiMethods)
    if (s == to_string(m)) return m;
  throw ParameterError("unknown FI method: '" + std::string(s) + "'");
}

inline bool is_tree_based(LearnerKind k) {
  return k == LearnerKind::GradientBoosting || k == LearnerKind::RandomForest ||
         k == LearnerKind::ExtraTrees;
}

inline bool supports(LearnerKind k, FiMethod m) {
  return m != FiMethod::Impurity || is_tree_based(k);
}

// Which rows feed the importance estimators: the k-1 training folds, the
// held-out fold, or their union.
enum class DataSubset { Train, Test, Whole };

inline std::string_view to_string(DataSubset s) {
  switch (s) {
    case DataSubset::Train: return "train";
    case DataSubset::Test: return "test";
    case DataSubset::Whole: return "whole";
  }
  return "?";
}

inline DataSubset data_subset_from_string(std::string_view s) {
  if (s == "train") return DataSubset::Train;
  if (s == "test") return DataSubset::Test;
  if (s == "whole") return DataSubset::Whole;
  throw ParameterError("unknown data subset: '" + std::string(s) + "'");
}

}  // namespace fefi
