#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "fefi/core.hpp"
#include "fefi/dataset.hpp"
#include "fefi/fi_table.hpp"
#include "fefi/fuzzy.hpp"
#include "fefi/inference.hpp"
#include "fefi/learners.hpp"
#include "fefi/rulegen.hpp"

namespace fefi {

using json = nlohmann::json;

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Dataset export: CSV feature matrix plus a JSON sidecar with the spec,
// coefficients, and ground-truth importances.
// ---------------------------------------------------------------------------

inline std::string dataset_to_csv(const SyntheticDataset& dataset) {
  std::string out;
  const std::size_t d = dataset.features.cols;
  for (std::size_t j = 0; j < d; ++j) out += "f" + std::to_string(j) + ",";
  out += "target\n";
  for (std::size_t i = 0; i < dataset.features.rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out += format_double(dataset.features(i, j));
      out += ',';
    }
    out += format_double(dataset.targets[i]);
    out += '\n';
  }
  return out;
}

inline json spec_to_json(const SyntheticSpec& spec) {
  return json{{"n_instances", spec.n_instances},
              {"n_features", spec.n_features},
              {"informative_fraction", spec.informative_fraction},
              {"noise_std", spec.noise_std},
              {"interaction", std::string(to_string(spec.interaction))},
              {"seed", spec.seed}};
}

inline SyntheticSpec spec_from_json(const json& j) {
  SyntheticSpec spec;
  spec.n_instances = j.at("n_instances").get<std::size_t>();
  spec.n_features = j.at("n_features").get<std::size_t>();
  spec.informative_fraction = j.at("informative_fraction").get<double>();
  spec.noise_std = j.at("noise_std").get<double>();
  spec.interaction =
      interaction_level_from_string(j.at("interaction").get<std::string>());
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

inline void save_dataset(const SyntheticDataset& dataset,
                         const std::filesystem::path& csv_path,
                         const std::filesystem::path& sidecar_path) {
  write_text_file(csv_path, dataset_to_csv(dataset));
  json sidecar{{"spec", spec_to_json(dataset.spec)},
               {"coefficients", dataset.coefficients},
               {"ground_truth_importance", dataset.ground_truth_importance}};
  write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline SyntheticDataset load_dataset(const std::filesystem::path& csv_path,
                                     const std::filesystem::path& sidecar_path) {
  const json sidecar = json::parse(read_text_file(sidecar_path));
  SyntheticDataset dataset;
  dataset.spec = spec_from_json(sidecar.at("spec"));
  dataset.coefficients = sidecar.at("coefficients").get<Vec>();
  dataset.ground_truth_importance =
      sidecar.at("ground_truth_importance").get<Vec>();

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset csv is empty: " + csv_path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "target")
    throw IoError("dataset csv header malformed: " + csv_path.string());
  const std::size_t d = header.size() - 1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != d + 1)
      throw IoError("dataset csv row arity mismatch: " + csv_path.string());
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_double(cells[j]));
    dataset.targets.push_back(parse_double(cells[d]));
  }
  dataset.features = Matrix(dataset.targets.size(), d);
  dataset.features.data = std::move(values);
  return dataset;
}

// ---------------------------------------------------------------------------
// FiTable: the Stage-3 handoff format.
// ---------------------------------------------------------------------------

inline std::string fi_table_to_csv(const FiTable& table) {
  std::string out = "feature,sample_id,method,model,coefficient\n";
  for (const auto& r : table.sorted_records()) {
    out += std::to_string(r.feature_index) + ',' + std::to_string(r.sample_id) + ',' +
           std::string(to_string(r.method)) + ',' + std::string(to_string(r.model)) +
           ',' + format_double(r.coefficient) + '\n';
  }
  return out;
}

inline void save_fi_table(const FiTable& table, const std::filesystem::path& csv_path,
                          const std::filesystem::path& sidecar_path) {
  write_text_file(csv_path, fi_table_to_csv(table));
  json truth = json::object();
  for (const auto& [feature, y] : table.ground_truth)
    truth[std::to_string(feature)] = y;
  json models = json::array();
  for (auto m : table.models) models.push_back(std::string(to_string(m)));
  json methods = json::array();
  for (auto m : table.methods) methods.push_back(std::string(to_string(m)));
  json sidecar{{"ground_truth", truth},
               {"subset", std::string(to_string(table.subset))},
               {"models", models},
               {"methods", methods},
               {"n_folds", table.n_folds}};
  write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

inline FiTable load_fi_table(const std::filesystem::path& csv_path,
                             const std::filesystem::path& sidecar_path) {
  FiTable table;
  const json sidecar = json::parse(read_text_file(sidecar_path));
  for (const auto& [key, value] : sidecar.at("ground_truth").items())
    table.ground_truth[std::stoul(key)] = value.get<double>();
  table.subset = data_subset_from_string(sidecar.at("subset").get<std::string>());
  for (const auto& m : sidecar.at("models"))
    table.models.push_back(learner_kind_from_string(m.get<std::string>()));
  for (const auto& m : sidecar.at("methods"))
    table.methods.push_back(fi_method_from_string(m.get<std::string>()));
  table.n_folds = sidecar.at("n_folds").get<std::size_t>();

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("fi table csv is empty");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5) throw IoError("fi table csv row arity mismatch");
    FiRecord r;
    r.feature_index = std::stoul(cells[0]);
    r.sample_id = std::stoul(cells[1]);
    r.method = fi_method_from_string(cells[2]);
    r.model = learner_kind_from_string(cells[3]);
    r.coefficient = parse_double(cells[4]);
    table.records.push_back(r);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Fuzzy artefacts.
// ---------------------------------------------------------------------------

inline json mf_to_json(const MembershipFunction& mf) {
  json params = json::array({mf.a, mf.b});
  if (mf.shape == MfShape::Triangular) params.push_back(mf.c);
  return json{{"shape", std::string(to_string(mf.shape))}, {"params", params}};
}

inline json partition_to_json(const LinguisticPartition& p) {
  return json{{"low", mf_to_json(p.low)},
              {"moderate", mf_to_json(p.moderate)},
              {"high", mf_to_json(p.high)}};
}

inline json rulebase_to_json(const RuleBase& base) {
  json rules = json::array();
  for (const auto& rule : base.rules) {
    json ants = json::object();
    for (const auto& [model, label] : rule.antecedents)
      ants[std::string(to_string(model))] = std::string(to_string(label));
    rules.push_back(json{{"antecedents", ants},
                         {"consequent", std::string(to_string(rule.consequent))},
                         {"weight", rule.weight},
                         {"text", rule_to_string(rule)}});
  }
  return json{{"rules", rules}};
}

inline std::string rulebase_to_text(const RuleBase& base) {
  std::string out;
  for (std::size_t i = 0; i < base.rules.size(); ++i)
    out += std::to_string(i) + ": " + rule_to_string(base.rules[i]) + "\n";
  return out;
}

inline json likelihood_report_to_json(const LikelihoodReport& report) {
  json fired = json::array();
  for (const auto& [id, strength] : report.fired_rules)
    fired.push_back(json::array({id, strength}));
  return json{{"feature", report.feature_index},
              {"low", report.likelihoods[0]},
              {"moderate", report.likelihoods[1]},
              {"high", report.likelihoods[2]},
              {"crisp", report.crisp},
              {"indeterminate", report.indeterminate},
              {"fired_rules", fired}};
}

// ---------------------------------------------------------------------------
// Debug model dump; structure follows the fitted state, no stability promise.
// ---------------------------------------------------------------------------

inline json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes())
    nodes.push_back(json{{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"value", n.value},
                         {"left", n.left},
                         {"right", n.right}});
  return json{{"nodes", nodes}};
}

inline json trained_model_to_json(const TrainedModel& model) {
  json out{{"kind", std::string(to_string(model.kind()))},
           {"train_rmse", model.train_rmse()}};
  switch (model.kind()) {
    case LearnerKind::GradientBoosting: {
      const auto& gb = model.as<GradientBoostingModel>();
      json trees = json::array();
      for (const auto& t : gb.trees()) trees.push_back(tree_to_json(t));
      out["initial_prediction"] = gb.initial_prediction();
      out["trees"] = std::move(trees);
      break;
    }
    case LearnerKind::RandomForest:
    case LearnerKind::ExtraTrees: {
      const auto& forest = model.as<ForestModel>();
      json trees = json::array();
      for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t));
      out["trees"] = std::move(trees);
      break;
    }
    case LearnerKind::LinearSVR: {
      const auto& svr = model.as<LinearSvrModel>();
      out["weights"] = svr.weights();
      out["intercept"] = svr.intercept();
      break;
    }
    case LearnerKind::MLP: {
      const auto& mlp = model.as<MlpModel>();
      const auto& net = mlp.net();
      out["w1"] = net.w1.data;
      out["b1"] = net.b1;
      out["w2"] = net.w2;
      out["b2"] = net.b2;
      out["input_means"] = mlp.input_means();
      out["input_stds"] = mlp.input_stds();
      out["target_mean"] = mlp.target_mean();
      out["target_std"] = mlp.target_std();
      break;
    }
  }
  return out;
}

}  // namespace fefi
