#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/fuzzy.hpp"
#include "fefi/rulegen.hpp"

namespace fefi {

inline constexpr std::size_t kDefuzzGridPoints = 1001;

// Zadeh operators. FEFI rules use AND only, the others are available for
// hand-written rule bases.
inline double fuzzy_and(std::span<const double> degrees) {
  double m = 1.0;
  for (double d : degrees) m = std::min(m, d);
  return m;
}

inline double fuzzy_or(std::span<const double> degrees) {
  double m = 0.0;
  for (double d : degrees) m = std::max(m, d);
  return m;
}

inline double fuzzy_not(double degree) { return 1.0 - degree; }

/// Membership degrees of one coefficient under a partition.
inline std::array<double, 3> fuzzify(double value, const LinguisticPartition& partition) {
  return partition.degrees(value);
}

/// AND-composed rule strength: the minimum over antecedent-label degrees.
inline double rule_strength(
    const FuzzyRule& rule,
    const std::map<LearnerKind, std::array<double, 3>>& degrees) {
  double strength = 1.0;
  for (const auto& [model, label] : rule.antecedents) {
    const auto it = degrees.find(model);
    if (it == degrees.end())
      throw InferenceInputError("no degrees for model " +
                                std::string(to_string(model)));
    strength = std::min(strength, it->second[static_cast<std::size_t>(label)]);
  }
  return strength;
}

/// Per-label likelihood: the maximum strength among rules with that
/// consequent, zero when none fired.
inline std::array<double, 3> aggregate_likelihoods(
    std::span<const std::pair<Label, double>> strengths) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (const auto& [label, strength] : strengths) {
    auto& slot = out[static_cast<std::size_t>(label)];
    slot = std::max(slot, strength);
  }
  return out;
}

/// Centroid of the union (pointwise max) of output MFs clipped at their
/// label's likelihood, on a uniform grid over [0,1].
inline double defuzzify_centroid(const std::array<double, 3>& likelihoods,
                                 const LinguisticPartition& output,
                                 std::size_t grid_points = kDefuzzGridPoints) {
  if (grid_points < 2) throw ParameterError("defuzzify: grid too small");
  double mass = 0.0;
  double moment = 0.0;
  const double step = 1.0 / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = static_cast<double>(i) * step;
    const auto d = output.degrees(x);
    double mu = 0.0;
    for (std::size_t l = 0; l < 3; ++l) mu = std::max(mu, std::min(likelihoods[l], d[l]));
    mass += mu;
    moment += mu * x;
  }
  if (mass <= 0.0) {
    // The clipped region fell entirely between grid points; report the peak
    // of the most likely label instead of dividing by zero.
    std::size_t best = 0;
    for (std::size_t l = 1; l < 3; ++l)
      if (likelihoods[l] > likelihoods[best]) best = l;
    switch (best) {
      case 0: return output.low.a;
      case 1: return output.moderate.b;
      default: return output.high.b;
    }
  }
  return moment / mass;
}

/// Per-feature inference result: label likelihoods, the defuzzified crisp
/// importance, and which rules fired.
struct LikelihoodReport {
  std::size_t feature_index = 0;
  std::array<double, 3> likelihoods{0.0, 0.0, 0.0};
  double crisp = 0.5;
  bool indeterminate = false;
  std::vector<std::pair<std::size_t, double>> fired_rules;  // (rule id, strength)

  double likelihood(Label l) const { return likelihoods[static_cast<std::size_t>(l)]; }
};

/// Mamdani inference: fuzzify the per-model coefficients, fire every rule,
/// aggregate per-label maxima, defuzzify. All-silent rule bases yield an
/// indeterminate report with crisp 0.5.
inline LikelihoodReport infer(const std::map<LearnerKind, double>& values,
                              const RuleBase& rulebase,
                              std::size_t feature_index = 0) {
  std::map<LearnerKind, std::array<double, 3>> degrees;
  for (const auto& [kind, partition] : rulebase.partitions) {
    const auto it = values.find(kind);
    if (it == values.end())
      throw InferenceInputError("missing coefficient for model " +
                                std::string(to_string(kind)));
    degrees.emplace(kind, fuzzify(it->second, partition));
  }

  LikelihoodReport report;
  report.feature_index = feature_index;
  std::vector<std::pair<Label, double>> strengths;
  strengths.reserve(rulebase.rules.size());
  for (std::size_t id = 0; id < rulebase.rules.size(); ++id) {
    const double s = rule_strength(rulebase.rules[id], degrees);
    strengths.emplace_back(rulebase.rules[id].consequent, s);
    if (s > 0.0) report.fired_rules.emplace_back(id, s);
  }
  std::sort(report.fired_rules.begin(), report.fired_rules.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  report.likelihoods = aggregate_likelihoods(strengths);

  const bool silent = report.likelihoods[0] == 0.0 && report.likelihoods[1] == 0.0 &&
                      report.likelihoods[2] == 0.0;
  if (silent) {
    report.indeterminate = true;
    report.crisp = 0.5;
  } else {
    report.crisp = defuzzify_centroid(report.likelihoods, rulebase.output_partition);
  }
  return report;
}

inline int likelihood_percent(double likelihood) {
  return static_cast<int>(std::lround(likelihood * 100.0));
}

/// Human-readable rendering: likelihood percentages plus the top fired rules.
inline std::string explain(const LikelihoodReport& report, const RuleBase& rulebase) {
  std::string out = "Feature " + std::to_string(report.feature_index) + ": ";
  if (report.indeterminate) {
    out += "indeterminate (no rule fired); crisp importance defaults to " +
           format_double(report.crisp) + "\n";
    return out;
  }
  out += "crisp importance " + format_double(report.crisp) + "\n";
  for (std::size_t l = 0; l < 3; ++l) {
    out += "  " + std::to_string(likelihood_percent(report.likelihoods[l])) +
           "% likelihood of " + std::string(to_string(kAllLabels[l])) +
           " importance\n";
  }
  const std::size_t n = std::min<std::size_t>(3, report.fired_rules.size());
  if (n > 0) out += "  strongest rules:\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [id, strength] = report.fired_rules[i];
    out += "    " + rule_to_string(rulebase.rules[id]) + " (strength " +
           format_double(strength) + ")\n";
  }
  return out;
}

}  // namespace fefi
