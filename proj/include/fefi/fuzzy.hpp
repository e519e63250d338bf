#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/fi_table.hpp"

namespace fefi {

enum class Label { Low, Moderate, High };

inline constexpr std::array<Label, 3> kAllLabels = {Label::Low, Label::Moderate,
                                                    Label::High};

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::Low: return "low";
    case Label::Moderate: return "moderate";
    case Label::High: return "high";
  }
  return "?";
}

inline Label label_from_string(std::string_view s) {
  if (s == "low") return Label::Low;
  if (s == "moderate") return Label::Moderate;
  if (s == "high") return Label::High;
  throw ParameterError("unknown label: '" + std::string(s) + "'");
}

enum class MfShape { Z, Triangular, S };

inline std::string_view to_string(MfShape s) {
  switch (s) {
    case MfShape::Z: return "z";
    case MfShape::Triangular: return "triangular";
    case MfShape::S: return "s";
  }
  return "?";
}

/// A membership function over [0,1]. Z and S are the classic quadratic
/// splines; Triangular is piecewise linear. Zero-width Z/S degenerate to
/// steps and a zero-width triangular side carries degree 1 at the peak only,
/// so every function stays total on [0,1].
struct MembershipFunction {
  MfShape shape = MfShape::Triangular;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;  // used by Triangular only

  static MembershipFunction z(double a, double b) {
    check_order(a, b, "Z");
    return {MfShape::Z, a, b, b};
  }
  static MembershipFunction s(double a, double b) {
    check_order(a, b, "S");
    return {MfShape::S, a, b, b};
  }
  static MembershipFunction triangular(double a, double b, double c) {
    check_order(a, b, "triangular");
    check_order(b, c, "triangular");
    return {MfShape::Triangular, a, b, c};
  }

  double degree(double x) const {
    switch (shape) {
      case MfShape::Z: return z_degree(x);
      case MfShape::S:
        if (a == b) return x >= b ? 1.0 : 0.0;  // right-closed step
        return 1.0 - z_degree(x);
      case MfShape::Triangular: return tri_degree(x);
    }
    return 0.0;
  }

  // Support on the [0,1] domain: Z plateaus at 1 down to x = 0, S up to x = 1.
  double support_min() const { return shape == MfShape::Z ? 0.0 : a; }
  double support_max() const {
    switch (shape) {
      case MfShape::Z: return b;
      case MfShape::S: return 1.0;
      case MfShape::Triangular: return c;
    }
    return c;
  }

 private:
  static void check_order(double lo, double hi, const char* what) {
    if (!(lo <= hi))
      throw ParameterError(std::string(what) + " MF parameters out of order: " +
                           format_double(lo) + " > " + format_double(hi));
  }

  double z_degree(double x) const {
    if (x <= a) return 1.0;
    if (x >= b) return 0.0;
    const double w = b - a;  // positive here: a < x < b
    const double mid = 0.5 * (a + b);
    if (x <= mid) {
      const double t = (x - a) / w;
      return 1.0 - 2.0 * t * t;
    }
    const double t = (b - x) / w;
    return 2.0 * t * t;
  }

  double tri_degree(double x) const {
    if (x == b) return 1.0;
    if (x < b) {
      if (x <= a || b == a) return 0.0;
      return (x - a) / (b - a);
    }
    if (x >= c || c == b) return 0.0;
    return (c - x) / (c - b);
  }
};

/// Boxplot five-class summary of a coefficient distribution.
struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

inline FiveNumberSummary five_number_summary(std::span<const double> values) {
  if (values.empty()) throw ParameterError("five_number_summary: empty input");
  if (!all_finite(values)) throw DataError("five_number_summary: non-finite value");
  Vec sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0.0 || sorted.back() > 1.0)
    throw ParameterError("five_number_summary: values must lie in [0,1]");
  return {sorted.front(), quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
          quantile_sorted(sorted, 0.75), sorted.back()};
}

/// Where a partition came from; carried through exports for auditing.
struct PartitionSource {
  enum class Kind { PerModel, PerFeature, FeatureCombined, Output };
  Kind kind = Kind::Output;
  LearnerKind model = LearnerKind::GradientBoosting;
  std::size_t feature_index = 0;

  static PartitionSource per_model(LearnerKind m) {
    return {Kind::PerModel, m, 0};
  }
  static PartitionSource per_feature(std::size_t f, LearnerKind m) {
    return {Kind::PerFeature, m, f};
  }
  static PartitionSource feature_combined(std::size_t f) {
    return {Kind::FeatureCombined, LearnerKind::GradientBoosting, f};
  }
  static PartitionSource output() { return {}; }
};

/// The {low, moderate, high} triple covering [0,1]:
/// low = Z(min, median), moderate = Triangular(q1, median, q3),
/// high = S(median, max).
struct LinguisticPartition {
  MembershipFunction low;
  MembershipFunction moderate;
  MembershipFunction high;
  PartitionSource source;

  double degree(Label l, double x) const {
    switch (l) {
      case Label::Low: return low.degree(x);
      case Label::Moderate: return moderate.degree(x);
      case Label::High: return high.degree(x);
    }
    return 0.0;
  }

  std::array<double, 3> degrees(double x) const {
    return {low.degree(x), moderate.degree(x), high.degree(x)};
  }
};

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

inline LinguisticPartition partition_from_summary(const FiveNumberSummary& s,
                                                  PartitionSource source = {}) {
  if (!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max))
    throw ParameterError("five-number summary out of order");
  if (s.min < 0.0 || s.max > 1.0)
    throw ParameterError("five-number summary outside [0,1]");
  if (s.min == s.max) {
    // Point distribution: widen around the point so the partition still
    // covers a neighbourhood and inference stays defined.
    const double p = s.min;
    return {MembershipFunction::z(clamp01(p - 0.1), p),
            MembershipFunction::triangular(clamp01(p - 0.05), p, clamp01(p + 0.05)),
            MembershipFunction::s(p, clamp01(p + 0.1)), source};
  }
  return {MembershipFunction::z(s.min, s.median),
          MembershipFunction::triangular(s.q1, s.median, s.q3),
          MembershipFunction::s(s.median, s.max), source};
}

inline double membership_degree(const MembershipFunction& mf, double x) {
  return mf.degree(x);
}

// ---------------------------------------------------------------------------
// Partition builders over the Stage-3 table.
// ---------------------------------------------------------------------------

/// One partition per model, from the model's pooled coefficient column.
inline std::map<LearnerKind, LinguisticPartition> build_ml_partitions(
    const FiTable& table) {
  std::map<LearnerKind, LinguisticPartition> out;
  for (LearnerKind kind : table.models) {
    const Vec column = table.model_column(kind);
    if (column.empty())
      throw CoverageError("no coefficients for model " + std::string(to_string(kind)));
    out.emplace(kind, partition_from_summary(five_number_summary(column),
                                             PartitionSource::per_model(kind)));
  }
  return out;
}

struct FeaturePartitionSet {
  // Keyed by (feature, model): the partition of that feature's coefficients
  // under one model.
  std::map<std::pair<std::size_t, LearnerKind>, LinguisticPartition> per_model;
  // Per feature, the across-model combination: lower bounds by min, upper
  // bounds by max, triangular peak by median of peaks.
  std::map<std::size_t, LinguisticPartition> combined;
};

inline LinguisticPartition combine_partitions(
    const std::vector<LinguisticPartition>& parts, PartitionSource source) {
  if (parts.empty()) throw CoverageError("combine_partitions: no partitions");
  double low_a = 1.0, low_b = 0.0;
  double mod_a = 1.0, mod_c = 0.0;
  double high_a = 1.0, high_b = 0.0;
  Vec peaks;
  peaks.reserve(parts.size());
  for (const auto& p : parts) {
    low_a = std::min(low_a, p.low.a);
    low_b = std::max(low_b, p.low.b);
    mod_a = std::min(mod_a, p.moderate.a);
    mod_c = std::max(mod_c, p.moderate.c);
    high_a = std::min(high_a, p.high.a);
    high_b = std::max(high_b, p.high.b);
    peaks.push_back(p.moderate.b);
  }
  std::sort(peaks.begin(), peaks.end());
  const double peak = quantile_sorted(peaks, 0.5);
  return {MembershipFunction::z(low_a, low_b),
          MembershipFunction::triangular(std::min(mod_a, peak), peak,
                                         std::max(mod_c, peak)),
          MembershipFunction::s(high_a, high_b), source};
}

inline FeaturePartitionSet build_feature_partitions(
    const FiTable& table, const std::map<LearnerKind, LinguisticPartition>& ml) {
  FeaturePartitionSet out;
  for (const auto& [feature, truth] : table.ground_truth) {
    (void)truth;
    std::vector<LinguisticPartition> parts;
    for (const auto& [kind, unused] : ml) {
      (void)unused;
      const Vec values = table.feature_model_values(feature, kind);
      if (values.empty()) continue;
      auto part = partition_from_summary(five_number_summary(values),
                                         PartitionSource::per_feature(feature, kind));
      out.per_model.emplace(std::make_pair(feature, kind), part);
      parts.push_back(std::move(part));
    }
    if (parts.empty())
      throw CoverageError("no coefficients for feature " + std::to_string(feature));
    out.combined.emplace(
        feature, combine_partitions(parts, PartitionSource::feature_combined(feature)));
  }
  return out;
}

/// Output partition from the ground-truth importance vector.
inline LinguisticPartition build_output_partition(
    const std::map<std::size_t, double>& ground_truth) {
  if (ground_truth.empty())
    throw ParameterError("build_output_partition: no ground truth");
  Vec values;
  values.reserve(ground_truth.size());
  for (const auto& [f, y] : ground_truth) {
    (void)f;
    values.push_back(y);
  }
  return partition_from_summary(five_number_summary(values),
                                PartitionSource::output());
}

}  // namespace fefi
