#include "doctest.h"

#include <set>

#include "fefi/rulegen.hpp"

using namespace fefi;

namespace {

// Shared symmetric partition: low <= ~0.25, moderate around 0.5, high >= ~0.75.
LinguisticPartition unit_partition() {
  return partition_from_summary({0.0, 0.25, 0.5, 0.75, 1.0});
}

std::map<LearnerKind, LinguisticPartition> three_model_partitions() {
  return {{LearnerKind::GradientBoosting, unit_partition()},
          {LearnerKind::RandomForest, unit_partition()},
          {LearnerKind::ExtraTrees, unit_partition()}};
}

TrainingPair make_pair(double v1, double v2, double v3, double truth) {
  TrainingPair pair;
  pair.inputs = {{LearnerKind::GradientBoosting, v1},
                 {LearnerKind::RandomForest, v2},
                 {LearnerKind::ExtraTrees, v3}};
  pair.truth = truth;
  return pair;
}

}  // namespace

TEST_CASE("training pairs: one full tuple per (feature, sample), drops counted") {
  FiTable table;
  table.models = {LearnerKind::GradientBoosting, LearnerKind::RandomForest,
                  LearnerKind::LinearSVR};
  table.methods = {FiMethod::Permutation, FiMethod::Impurity};
  table.ground_truth = {{0, 0.2}, {1, 0.8}};
  // sample 0 = permutation (all three models), sample 1 = impurity (trees only)
  for (std::size_t f = 0; f < 2; ++f) {
    for (auto kind : table.models)
      table.records.push_back({f, 0, FiMethod::Permutation, kind, 0.5});
    table.records.push_back({f, 1, FiMethod::Impurity,
                             LearnerKind::GradientBoosting, 0.5});
    table.records.push_back({f, 1, FiMethod::Impurity, LearnerKind::RandomForest,
                             0.5});
  }
  const auto pairs = build_training_pairs(table);
  CHECK(pairs.pairs.size() == 2);    // permutation tuples are complete
  CHECK(pairs.dropped == 2);         // impurity tuples lack the SVR cell
  CHECK(pairs.pairs[0].truth == 0.2);
  CHECK(pairs.pairs[0].inputs.size() == 3);
}

TEST_CASE("training pair counts are combinatorial when all cells exist") {
  FiTable table;
  table.models = {LearnerKind::GradientBoosting, LearnerKind::RandomForest};
  table.methods = {FiMethod::Permutation, FiMethod::ShapleySampling};
  Rng rng(2);
  for (std::size_t f = 0; f < 10; ++f) {
    table.ground_truth[f] = rng.uniform();
    for (std::size_t fold = 0; fold < 5; ++fold)
      for (std::size_t mi = 0; mi < 2; ++mi)
        for (auto kind : table.models)
          table.records.push_back({f, fold * 2 + mi,
                                   mi == 0 ? FiMethod::Permutation
                                           : FiMethod::ShapleySampling,
                                   kind, rng.uniform()});
  }
  const auto pairs = build_training_pairs(table);
  CHECK(pairs.pairs.size() == 100);  // 10 features x 5 folds x 2 methods
  CHECK(pairs.dropped == 0);
}

TEST_CASE("single-model tables yield arity-1 pairs") {
  FiTable table;
  table.models = {LearnerKind::MLP};
  table.methods = {FiMethod::Permutation};
  table.ground_truth = {{0, 1.0}};
  table.records.push_back({0, 0, FiMethod::Permutation, LearnerKind::MLP, 0.9});
  const auto pairs = build_training_pairs(table);
  REQUIRE(pairs.pairs.size() == 1);
  CHECK(pairs.pairs[0].inputs.size() == 1);
}

TEST_CASE("label assignment is max membership with ties to the lower label") {
  const auto p = unit_partition();
  CHECK(assign_label(0.0, p) == Label::Low);
  CHECK(assign_label(0.5, p) == Label::Moderate);
  CHECK(assign_label(1.0, p) == Label::High);
  // at the crossover low/moderate tie -> low
  // find x where low degree == moderate degree by construction: Z(0,0.5) at
  // 0.25 -> 0.5; Tri(0.25,0.5,0.75) at 0.375 -> 0.5; use explicit tie partition
  LinguisticPartition tie;
  tie.low = MembershipFunction::z(0.0, 1.0);
  tie.moderate = MembershipFunction::triangular(0.0, 0.5, 1.0);
  tie.high = MembershipFunction::s(0.0, 1.0);
  // at 0.5: low = 0.5, moderate = 1 -> moderate; at 0.853553: low ~ 0.042893
  // construct exact tie: low(x)=high(x) at x=0.5 (both 0.5): lower label wins
  CHECK(tie.low.degree(0.5) == doctest::Approx(tie.high.degree(0.5)));
  LinguisticPartition tie2;
  tie2.low = MembershipFunction::z(0.0, 1.0);
  tie2.moderate = MembershipFunction::triangular(0.0, 0.0, 0.1);
  tie2.high = MembershipFunction::s(0.0, 1.0);
  CHECK(assign_label(0.5, tie2) == Label::Low);
}

TEST_CASE("label assignment consistency on random values") {
  Rng rng(9);
  const auto p = unit_partition();
  for (int i = 0; i < 500; ++i) {
    const double x = rng.uniform();
    const Label l = assign_label(x, p);
    const auto d = p.degrees(x);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(d[static_cast<std::size_t>(l)] >= d[k]);
  }
}

TEST_CASE("wang-mendel: table-style conflict keeps the heavier rule") {
  // rules 2 and 5 share antecedents (high, high, high); weights 5 vs 2
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 5; ++i) pairs.push_back(make_pair(0.05, 0.06, 0.04, 0.05));
  for (int i = 0; i < 5; ++i) pairs.push_back(make_pair(0.95, 0.96, 0.9, 0.95));
  for (int i = 0; i < 4; ++i) pairs.push_back(make_pair(0.5, 0.5, 0.05, 0.06));
  for (int i = 0; i < 4; ++i) pairs.push_back(make_pair(0.5, 0.5, 0.95, 0.94));
  for (int i = 0; i < 2; ++i) pairs.push_back(make_pair(0.95, 0.96, 0.9, 0.5));

  const auto base =
      generate_rules(pairs, three_model_partitions(), unit_partition());
  REQUIRE(base.rules.size() == 4);

  bool found_high_rule = false;
  for (const auto& rule : base.rules) {
    bool all_high = true;
    for (const auto& [model, label] : rule.antecedents)
      all_high = all_high && label == Label::High;
    if (all_high) {
      found_high_rule = true;
      CHECK(rule.consequent == Label::High);  // weight 5 beats weight 2
      CHECK(rule.weight == 5);
    }
  }
  CHECK(found_high_rule);

  // weights of survivors: 5 (all-low), 5 (all-high), 4, 4
  std::multiset<std::size_t> weights;
  for (const auto& rule : base.rules) weights.insert(rule.weight);
  CHECK(weights == std::multiset<std::size_t>{4, 4, 5, 5});
}

TEST_CASE("single pair produces a single weight-1 rule") {
  const auto base = generate_rules({make_pair(0.1, 0.1, 0.1, 0.9)},
                                   three_model_partitions(), unit_partition());
  REQUIRE(base.rules.size() == 1);
  CHECK(base.rules[0].weight == 1);
  CHECK(base.rules[0].consequent == Label::High);
}

TEST_CASE("pre-resolution weights sum to the number of pairs") {
  Rng rng(31);
  const auto parts = three_model_partitions();
  const auto out = unit_partition();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TrainingPair> pairs;
    const std::size_t n = 1 + rng.uniform_index(60);
    for (std::size_t i = 0; i < n; ++i)
      pairs.push_back(
          make_pair(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()));
    const auto raw = induce_raw_rules(pairs, parts, out);
    std::size_t total = 0;
    for (const auto& rule : raw) total += rule.weight;
    CHECK(total == n);
    // post-resolution antecedents are unique
    const auto resolved = resolve_conflicts(raw);
    std::set<std::vector<Label>> seen;
    for (const auto& rule : resolved) {
      std::vector<Label> key;
      for (const auto& [model, label] : rule.antecedents) key.push_back(label);
      CHECK(seen.insert(key).second);
    }
  }
}

TEST_CASE("pair order does not change the resolved rule base") {
  Rng rng(17);
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 40; ++i)
    pairs.push_back(
        make_pair(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()));
  const auto base1 =
      generate_rules(pairs, three_model_partitions(), unit_partition());
  Rng shuffler(99);
  shuffler.shuffle(pairs);
  const auto base2 =
      generate_rules(pairs, three_model_partitions(), unit_partition());
  REQUIRE(base1.rules.size() == base2.rules.size());
  for (std::size_t i = 0; i < base1.rules.size(); ++i) {
    CHECK(base1.rules[i].antecedents == base2.rules[i].antecedents);
    CHECK(base1.rules[i].consequent == base2.rules[i].consequent);
    CHECK(base1.rules[i].weight == base2.rules[i].weight);
  }
}

TEST_CASE("conflict weight ties resolve toward the lower consequent label") {
  std::vector<FuzzyRule> raw(2);
  raw[0].antecedents = {{LearnerKind::GradientBoosting, Label::High}};
  raw[0].consequent = Label::High;
  raw[0].weight = 3;
  raw[1].antecedents = {{LearnerKind::GradientBoosting, Label::High}};
  raw[1].consequent = Label::Moderate;
  raw[1].weight = 3;
  const auto resolved = resolve_conflicts(raw);
  REQUIRE(resolved.size() == 1);
  CHECK(resolved[0].consequent == Label::Moderate);
}

TEST_CASE("rule text renders IF/THEN with weight") {
  FuzzyRule rule;
  rule.antecedents = {{LearnerKind::GradientBoosting, Label::High},
                      {LearnerKind::RandomForest, Label::High}};
  rule.consequent = Label::High;
  rule.weight = 5;
  const std::string text = rule_to_string(rule);
  CHECK(text.find("IF GB is 'high' AND RF is 'high'") != std::string::npos);
  CHECK(text.find("THEN Output is 'high'") != std::string::npos);
  CHECK(text.find("[w=5]") != std::string::npos);
}

TEST_CASE("generate_rules rejects empty input") {
  CHECK_THROWS_AS(
      generate_rules({}, three_model_partitions(), unit_partition()),
      ParameterError);
}
