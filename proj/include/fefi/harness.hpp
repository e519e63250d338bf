#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fefi/core.hpp"
#include "fefi/dataset.hpp"
#include "fefi/fuzzy.hpp"
#include "fefi/inference.hpp"
#include "fefi/json_io.hpp"
#include "fefi/metrics.hpp"
#include "fefi/pipeline.hpp"
#include "fefi/rulegen.hpp"

namespace fefi {

enum class EvalStrategy { Mean, MajorityVote, Fefi };

inline constexpr std::array<EvalStrategy, 3> kAllEvalStrategies = {
    EvalStrategy::Mean, EvalStrategy::MajorityVote, EvalStrategy::Fefi};

inline std::string_view to_string(EvalStrategy s) {
  switch (s) {
    case EvalStrategy::Mean: return "mean";
    case EvalStrategy::MajorityVote: return "majority_vote";
    case EvalStrategy::Fefi: return "fefi";
  }
  return "?";
}

inline EvalStrategy eval_strategy_from_string(std::string_view s) {
  if (s == "mean") return EvalStrategy::Mean;
  if (s == "majority_vote") return EvalStrategy::MajorityVote;
  if (s == "fefi") return EvalStrategy::Fefi;
  throw ParameterError("unknown strategy: '" + std::string(s) + "'");
}

/// The nine benchmark dataset rows (2000 instances each).
inline SyntheticSpec benchmark_dataset(std::size_t id) {
  SyntheticSpec spec;
  spec.n_instances = 2000;
  spec.noise_std = 0.5;
  spec.informative_fraction = 0.9;
  spec.interaction = InteractionLevel::Low;
  switch (id) {
    case 1: spec.n_features = 10; break;
    case 2: spec.n_features = 30; break;
    case 3: spec.n_features = 50; break;
    case 4: spec.n_features = 10; spec.interaction = InteractionLevel::Medium; break;
    case 5: spec.n_features = 10; spec.interaction = InteractionLevel::High; break;
    case 6: spec.n_features = 10; spec.informative_fraction = 0.2; break;
    case 7: spec.n_features = 10; spec.informative_fraction = 0.5; break;
    case 8: spec.n_features = 10; spec.noise_std = 2.0; break;
    case 9: spec.n_features = 10; spec.noise_std = 5.0; break;
    default:
      throw ParameterError("benchmark dataset id must be 1..9, got " + std::to_string(id));
  }
  return spec;
}

struct ExperimentConfig {
  std::vector<std::size_t> dataset_ids = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t k = kDefaultFolds;
  std::vector<LearnerKind> models{kAllLearnerKinds.begin(), kAllLearnerKinds.end()};
  std::vector<FiMethod> methods{kAllFiMethods.begin(), kAllFiMethods.end()};
  std::vector<DataSubset> subsets = {DataSubset::Whole, DataSubset::Train,
                                     DataSubset::Test};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "fefi_out";
  unsigned threads = 0;  // 0 = hardware concurrency
  std::size_t n_repeats = kDefaultPermutationRepeats;
  std::size_t n_shapley = kDefaultShapleyOrderings;
  bool write_artifacts = true;

  void validate() const {
    if (dataset_ids.empty()) throw ParameterError("config: no datasets");
    if (models.empty()) throw ParameterError("config: no models");
    if (methods.empty()) throw ParameterError("config: no methods");
    if (subsets.empty()) throw ParameterError("config: no subsets");
    if (seeds.empty()) throw ParameterError("config: no seeds");
    if (k < 2) throw ParameterError("config: k must be >= 2");
    for (std::size_t id : dataset_ids) benchmark_dataset(id);
  }
};

struct EvaluationRow {
  std::size_t dataset_id = 0;
  DataSubset subset = DataSubset::Whole;
  EvalStrategy strategy = EvalStrategy::Mean;
  std::uint64_t seed = 0;
  double mae_value = 0.0;
  double rmse_value = 0.0;
};

// ---------------------------------------------------------------------------
// FEFI Stage 4 end to end on one Stage-3 table.
// ---------------------------------------------------------------------------

struct FefiOutcome {
  std::map<LearnerKind, LinguisticPartition> ml_partitions;
  FeaturePartitionSet feature_partitions;
  LinguisticPartition output_partition;
  RuleBase rulebase;
  std::size_t dropped_pairs = 0;
  std::vector<LikelihoodReport> reports;        // one per feature, ascending
  std::map<std::size_t, double> fused;          // defuzzified crisp importance
};

/// Build partitions and rules from the table, then infer once per feature.
/// The inference input for a feature is its mean coefficient per model over
/// all (fold, method) samples.
inline FefiOutcome run_fefi(const FiTable& table) {
  FefiOutcome out;
  out.ml_partitions = build_ml_partitions(table);
  out.feature_partitions = build_feature_partitions(table, out.ml_partitions);
  out.output_partition = build_output_partition(table.ground_truth);
  const TrainingPairs pairs = build_training_pairs(table);
  out.dropped_pairs = pairs.dropped;
  out.rulebase = generate_rules(pairs.pairs, out.ml_partitions, out.output_partition);

  for (const auto& [feature, truth] : table.ground_truth) {
    (void)truth;
    std::map<LearnerKind, double> values;
    for (LearnerKind kind : table.models) {
      const Vec cell = table.feature_model_values(feature, kind);
      if (cell.empty())
        throw CoverageError("run_fefi: no coefficients for feature " +
                            std::to_string(feature) + ", model " +
                            std::string(to_string(kind)));
      values[kind] = mean_of(cell);
    }
    LikelihoodReport report = infer(values, out.rulebase, feature);
    out.fused[feature] = report.crisp;
    out.reports.push_back(std::move(report));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment driver.
// ---------------------------------------------------------------------------

struct ExperimentResult {
  std::vector<EvaluationRow> rows;
};

inline std::string results_to_csv(const std::vector<EvaluationRow>& rows) {
  std::string out = "dataset,subset,strategy,seed,mae,rmse\n";
  for (const auto& r : rows) {
    out += std::to_string(r.dataset_id) + ',' + std::string(to_string(r.subset)) + ',' +
           std::string(to_string(r.strategy)) + ',' + std::to_string(r.seed) + ',' +
           format_double(r.mae_value) + ',' + format_double(r.rmse_value) + '\n';
  }
  return out;
}

inline std::vector<EvaluationRow> results_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("results csv is empty");
  std::vector<EvaluationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw IoError("results csv row arity mismatch");
    EvaluationRow r;
    r.dataset_id = std::stoul(cells[0]);
    r.subset = data_subset_from_string(cells[1]);
    r.strategy = eval_strategy_from_string(cells[2]);
    r.seed = std::stoull(cells[3]);
    r.mae_value = parse_double(cells[4]);
    r.rmse_value = parse_double(cells[5]);
    rows.push_back(r);
  }
  return rows;
}

namespace detail {

inline Vec fused_vector(const std::map<std::size_t, double>& fused) {
  Vec out;
  out.reserve(fused.size());
  for (const auto& [feature, value] : fused) {
    (void)feature;
    out.push_back(value);
  }
  return out;
}

inline std::string plotdata_csv(
    const std::string& subset_name,
    const std::map<LearnerKind, LinguisticPartition>& ml,
    const LinguisticPartition& output) {
  std::string out;
  auto emit = [&](const std::string& source, const LinguisticPartition& p) {
    for (Label label : kAllLabels) {
      for (std::size_t i = 0; i < kDefuzzGridPoints; ++i) {
        const double x =
            static_cast<double>(i) / static_cast<double>(kDefuzzGridPoints - 1);
        out += subset_name + ',' + source + ',' + std::string(to_string(label)) + ',' +
               format_double(x) + ',' + format_double(p.degree(label, x)) + '\n';
      }
    }
  };
  for (const auto& [kind, partition] : ml)
    emit("ml:" + std::string(to_string(kind)), partition);
  emit("output", output);
  return out;
}

}  // namespace detail

/// Run the full comparison: per (dataset, seed, subset), build the Stage-3
/// table, fuse with mean / majority vote / FEFI, score against ground truth,
/// and write artifacts plus results.csv to the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  if (config.write_artifacts) fs::create_directories(config.output_dir);

  EnsembleOptions options;
  options.n_repeats = config.n_repeats;
  options.n_shapley = config.n_shapley;
  options.n_threads = config.threads == 0 ? default_thread_count() : config.threads;

  ExperimentResult result;
  for (std::size_t dataset_id : config.dataset_ids) {
    for (std::uint64_t seed : config.seeds) {
      SyntheticSpec spec = benchmark_dataset(dataset_id);
      spec.seed = Rng::mix(seed, dataset_id);
      const SyntheticDataset dataset = generate_dataset(spec);
      const std::uint64_t run_seed =
          Rng::mix(seed, Rng::mix(hash_tag("ensemble"), dataset_id));
      auto tables = run_ensemble_multi(dataset, config.k, config.models,
                                       config.methods, config.subsets, run_seed,
                                       options);

      json rules_json = json::object();
      json partitions_json = json::object();
      json likelihoods_json = json::object();
      json fused_json = json::object();
      std::string plotdata;
      plotdata = "subset,source,label,x,degree\n";

      for (DataSubset subset : config.subsets) {
        const FiTable& table = tables.at(subset);
        const CrispFusionResult mean_fused = fuse_mean(table);
        const CrispFusionResult mv_fused = fuse_majority_vote(table);
        const FefiOutcome fefi = run_fefi(table);

        Vec truth;
        for (const auto& [feature, y] : table.ground_truth) {
          (void)feature;
          truth.push_back(y);
        }
        const Vec mean_vec = detail::fused_vector(mean_fused.fused);
        const Vec mv_vec = detail::fused_vector(mv_fused.fused);
        const Vec fefi_vec = detail::fused_vector(fefi.fused);

        auto push_row = [&](EvalStrategy strategy, const Vec& predicted) {
          EvaluationRow row;
          row.dataset_id = dataset_id;
          row.subset = subset;
          row.strategy = strategy;
          row.seed = seed;
          row.mae_value = mae(predicted, truth);
          row.rmse_value = rmse(predicted, truth);
          result.rows.push_back(row);
        };
        push_row(EvalStrategy::Mean, mean_vec);
        push_row(EvalStrategy::MajorityVote, mv_vec);
        push_row(EvalStrategy::Fefi, fefi_vec);

        if (!config.write_artifacts) continue;
        const std::string subset_name(to_string(subset));
        json rb = rulebase_to_json(fefi.rulebase);
        rb["dropped_pairs"] = fefi.dropped_pairs;
        rules_json[subset_name] = std::move(rb);

        json parts;
        json ml = json::object();
        for (const auto& [kind, partition] : fefi.ml_partitions)
          ml[std::string(to_string(kind))] = partition_to_json(partition);
        parts["ml"] = std::move(ml);
        parts["output"] = partition_to_json(fefi.output_partition);
        json combined = json::object();
        for (const auto& [feature, partition] : fefi.feature_partitions.combined)
          combined[std::to_string(feature)] = partition_to_json(partition);
        parts["features"] = std::move(combined);
        partitions_json[subset_name] = std::move(parts);

        json reports = json::array();
        for (const auto& report : fefi.reports)
          reports.push_back(likelihood_report_to_json(report));
        likelihoods_json[subset_name] = std::move(reports);

        fused_json[subset_name] = json{{"ground_truth", truth},
                                       {"mean", mean_vec},
                                       {"majority_vote", mv_vec},
                                       {"fefi", fefi_vec}};
        plotdata += detail::plotdata_csv(subset_name, fefi.ml_partitions,
                                         fefi.output_partition);
      }

      if (config.write_artifacts) {
        const std::string tag =
            std::to_string(dataset_id) + "_" + std::to_string(seed);
        const fs::path dir(config.output_dir);
        write_text_file(dir / ("rules_" + tag + ".json"), rules_json.dump(2) + "\n");
        write_text_file(dir / ("partitions_" + tag + ".json"),
                        partitions_json.dump(2) + "\n");
        write_text_file(dir / ("likelihoods_" + tag + ".json"),
                        likelihoods_json.dump(2) + "\n");
        write_text_file(dir / ("fused_" + tag + ".json"), fused_json.dump(2) + "\n");
        write_text_file(dir / ("plotdata_" + tag + ".csv"), plotdata);
      }
    }
  }

  if (config.write_artifacts)
    write_text_file(std::filesystem::path(config.output_dir) / "results.csv",
                    results_to_csv(result.rows));
  return result;
}

// ---------------------------------------------------------------------------
// Summary rendering (CLI `run` tail and `report`).
// ---------------------------------------------------------------------------

inline std::string summarize_results(const std::vector<EvaluationRow>& rows) {
  // (dataset, subset) -> strategy -> (sum mae, sum rmse, count)
  std::map<std::pair<std::size_t, DataSubset>,
           std::map<EvalStrategy, std::array<double, 3>>>
      agg;
  for (const auto& r : rows) {
    auto& cell = agg[{r.dataset_id, r.subset}][r.strategy];
    cell[0] += r.mae_value;
    cell[1] += r.rmse_value;
    cell[2] += 1.0;
  }
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-8s %-7s %22s %22s %22s\n", "dataset", "subset",
                "mean (MAE/RMSE)", "majority (MAE/RMSE)", "fefi (MAE/RMSE)");
  out += line;
  for (const auto& [key, strategies] : agg) {
    std::array<std::string, 3> cells;
    for (std::size_t s = 0; s < 3; ++s) {
      const auto it = strategies.find(kAllEvalStrategies[s]);
      if (it == strategies.end() || it->second[2] == 0.0) {
        cells[s] = "-";
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f / %.3f", it->second[0] / it->second[2],
                    it->second[1] / it->second[2]);
      cells[s] = buf;
    }
    std::snprintf(line, sizeof(line), "%-8zu %-7s %22s %22s %22s\n", key.first,
                  std::string(to_string(key.second)).c_str(), cells[0].c_str(),
                  cells[1].c_str(), cells[2].c_str());
    out += line;
  }
  return out;
}

/// Wilcoxon signed-rank comparison of per-feature absolute errors, pooled
/// across seeds, FEFI vs each crisp strategy. Reads fused_*.json artifacts.
inline std::string significance_report(const std::filesystem::path& dir,
                                       const std::vector<EvaluationRow>& rows) {
  std::set<std::pair<std::size_t, std::uint64_t>> cells;
  std::set<DataSubset> subsets;
  for (const auto& r : rows) {
    cells.insert({r.dataset_id, r.seed});
    subsets.insert(r.subset);
  }
  std::string out;
  for (DataSubset subset : std::vector<DataSubset>{DataSubset::Whole, DataSubset::Train,
                                                   DataSubset::Test}) {
    if (!subsets.count(subset)) continue;
    std::map<std::size_t, std::array<Vec, 3>> errors;  // dataset -> [mean, mv, fefi]
    for (const auto& [dataset_id, seed] : cells) {
      const auto path = dir / ("fused_" + std::to_string(dataset_id) + "_" +
                               std::to_string(seed) + ".json");
      if (!std::filesystem::exists(path)) continue;
      const json fused = json::parse(read_text_file(path));
      const auto it = fused.find(std::string(to_string(subset)));
      if (it == fused.end()) continue;
      const Vec truth = it->at("ground_truth").get<Vec>();
      const std::array<std::string, 3> names{"mean", "majority_vote", "fefi"};
      for (std::size_t s = 0; s < 3; ++s) {
        const Vec v = it->at(names[s]).get<Vec>();
        for (std::size_t f = 0; f < truth.size(); ++f)
          errors[dataset_id][s].push_back(std::abs(v[f] - truth[f]));
      }
    }
    for (const auto& [dataset_id, errs] : errors) {
      if (errs[2].size() < 5) continue;
      const double p_mean = wilcoxon_signed_rank(errs[2], errs[0]);
      const double p_mv = wilcoxon_signed_rank(errs[2], errs[1]);
      char line[160];
      std::snprintf(line, sizeof(line),
                    "dataset %zu %-6s fefi-vs-mean p=%.4g  fefi-vs-majority p=%.4g\n",
                    dataset_id, std::string(to_string(subset)).c_str(), p_mean, p_mv);
      out += line;
    }
  }
  return out;
}

}  // namespace fefi
