#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/fi_table.hpp"
#include "fefi/fuzzy.hpp"

namespace fefi {

inline std::string_view display_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::GradientBoosting: return "GB";
    case LearnerKind::RandomForest: return "RF";
    case LearnerKind::ExtraTrees: return "ET";
    case LearnerKind::LinearSVR: return "SVR";
    case LearnerKind::MLP: return "MLP";
  }
  return "?";
}

/// A weighted IF/THEN rule over the run's model set. Antecedents are joined
/// with AND; the weight counts how many training pairs produced the rule.
struct FuzzyRule {
  std::map<LearnerKind, Label> antecedents;
  Label consequent = Label::Low;
  std::size_t weight = 1;
};

inline std::string rule_to_string(const FuzzyRule& rule) {
  std::string out = "IF ";
  bool first = true;
  for (const auto& [model, label] : rule.antecedents) {
    if (!first) out += " AND ";
    out += std::string(display_name(model)) + " is '" + std::string(to_string(label)) + "'";
    first = false;
  }
  out += " THEN Output is '" + std::string(to_string(rule.consequent)) + "' [w=" +
         std::to_string(rule.weight) + "]";
  return out;
}

/// One Wang-Mendel input-output pair: a full per-model coefficient tuple for
/// one (feature, sample, method) cell plus the feature's ground truth.
struct TrainingPair {
  std::size_t feature_index = 0;
  std::size_t sample_id = 0;
  FiMethod method = FiMethod::Permutation;
  std::map<LearnerKind, double> inputs;
  double truth = 0.0;
};

struct TrainingPairs {
  std::vector<TrainingPair> pairs;
  std::size_t dropped = 0;  // incomplete tuples (unsupported model/method cells)
};

/// Assemble the pairs from the Stage-3 table. Wang-Mendel needs fixed arity,
/// so tuples missing any model of the run (the impurity rows of non-tree
/// models) are dropped and counted rather than imputed.
inline TrainingPairs build_training_pairs(const FiTable& table) {
  TrainingPairs out;
  std::map<std::pair<std::size_t, std::size_t>, TrainingPair> groups;
  for (const auto& r : table.sorted_records()) {
    auto& pair = groups[{r.feature_index, r.sample_id}];
    pair.feature_index = r.feature_index;
    pair.sample_id = r.sample_id;
    pair.method = r.method;
    pair.inputs[r.model] = r.coefficient;
  }
  for (auto& [key, pair] : groups) {
    (void)key;
    if (pair.inputs.size() != table.models.size()) {
      ++out.dropped;
      continue;
    }
    const auto truth_it = table.ground_truth.find(pair.feature_index);
    if (truth_it == table.ground_truth.end())
      throw CoverageError("no ground truth for feature " +
                          std::to_string(pair.feature_index));
    pair.truth = truth_it->second;
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

/// Max-membership label; degree ties resolve toward the lower label.
inline Label assign_label(double value, const LinguisticPartition& partition) {
  const auto d = partition.degrees(value);
  Label best = Label::Low;
  double best_degree = d[0];
  for (std::size_t i = 1; i < 3; ++i) {
    if (d[i] > best_degree) {
      best = kAllLabels[i];
      best_degree = d[i];
    }
  }
  return best;
}

struct RuleBase {
  std::vector<FuzzyRule> rules;
  std::map<LearnerKind, LinguisticPartition> partitions;
  LinguisticPartition output_partition;
};

/// Wang-Mendel induction before conflict resolution: identical
/// (antecedents, consequent) occurrences accumulate into the weight, so the
/// weights sum to the number of training pairs.
inline std::vector<FuzzyRule> induce_raw_rules(
    const std::vector<TrainingPair>& pairs,
    const std::map<LearnerKind, LinguisticPartition>& ml_partitions,
    const LinguisticPartition& output_partition) {
  std::map<std::pair<std::vector<Label>, Label>, std::size_t> counts;
  std::vector<LearnerKind> models;
  for (const auto& [kind, part] : ml_partitions) {
    (void)part;
    models.push_back(kind);
  }
  for (const auto& pair : pairs) {
    std::vector<Label> antecedent;
    antecedent.reserve(models.size());
    for (LearnerKind kind : models) {
      const auto it = pair.inputs.find(kind);
      if (it == pair.inputs.end())
        throw CoverageError("training pair missing model " +
                            std::string(to_string(kind)));
      antecedent.push_back(assign_label(it->second, ml_partitions.at(kind)));
    }
    const Label consequent = assign_label(pair.truth, output_partition);
    ++counts[{std::move(antecedent), consequent}];
  }
  std::vector<FuzzyRule> raw;
  raw.reserve(counts.size());
  for (const auto& [key, weight] : counts) {
    FuzzyRule rule;
    for (std::size_t i = 0; i < models.size(); ++i) rule.antecedents[models[i]] = key.first[i];
    rule.consequent = key.second;
    rule.weight = weight;
    raw.push_back(std::move(rule));
  }
  return raw;
}

/// Conflict resolution: among rules sharing antecedents, the max weight
/// survives; weight ties resolve toward the lower consequent label.
inline std::vector<FuzzyRule> resolve_conflicts(std::vector<FuzzyRule> raw) {
  std::map<std::vector<Label>, FuzzyRule> winners;
  for (auto& rule : raw) {
    std::vector<Label> key;
    key.reserve(rule.antecedents.size());
    for (const auto& [model, label] : rule.antecedents) {
      (void)model;
      key.push_back(label);
    }
    const auto it = winners.find(key);
    if (it == winners.end()) {
      winners.emplace(std::move(key), std::move(rule));
    } else if (rule.weight > it->second.weight ||
               (rule.weight == it->second.weight &&
                rule.consequent < it->second.consequent)) {
      it->second = std::move(rule);
    }
  }
  std::vector<FuzzyRule> out;
  out.reserve(winners.size());
  for (auto& [key, rule] : winners) {
    (void)key;
    out.push_back(std::move(rule));
  }
  return out;
}

inline RuleBase generate_rules(
    const std::vector<TrainingPair>& pairs,
    const std::map<LearnerKind, LinguisticPartition>& ml_partitions,
    const LinguisticPartition& output_partition) {
  if (pairs.empty()) throw ParameterError("generate_rules: no training pairs");
  RuleBase base;
  base.partitions = ml_partitions;
  base.output_partition = output_partition;
  base.rules = resolve_conflicts(
      induce_raw_rules(pairs, ml_partitions, output_partition));
  return base;
}

}  // namespace fefi
