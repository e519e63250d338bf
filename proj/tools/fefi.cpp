// fefi: generate synthetic datasets, run the fusion comparison, and report
// results. See README.md for examples.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fefi/fefi.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      if (start < text.size()) out.push_back(text.substr(start));
      break;
    }
    if (comma > start) out.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> parse_id_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_list(text)) out.push_back(std::stoul(tok));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& tok : split_list(text)) out.push_back(std::stoull(tok));
  return out;
}

void apply_config_value(fefi::ExperimentConfig& config, const std::string& key,
                        const fefi::json& value) {
  auto as_string_list = [&]() {
    std::vector<std::string> out;
    if (value.is_array()) {
      for (const auto& v : value) out.push_back(v.get<std::string>());
    } else {
      out = split_list(value.get<std::string>());
    }
    return out;
  };
  if (key == "datasets" || key == "dataset") {
    config.dataset_ids.clear();
    if (value.is_array()) {
      for (const auto& v : value) config.dataset_ids.push_back(v.get<std::size_t>());
    } else if (value.is_number()) {
      config.dataset_ids.push_back(value.get<std::size_t>());
    } else {
      config.dataset_ids = parse_id_list(value.get<std::string>());
    }
  } else if (key == "k") {
    config.k = value.is_number() ? value.get<std::size_t>()
                                 : std::stoul(value.get<std::string>());
  } else if (key == "seeds") {
    config.seeds.clear();
    if (value.is_array()) {
      for (const auto& v : value) config.seeds.push_back(v.get<std::uint64_t>());
    } else if (value.is_number()) {
      config.seeds.push_back(value.get<std::uint64_t>());
    } else {
      config.seeds = parse_seed_list(value.get<std::string>());
    }
  } else if (key == "models") {
    config.models.clear();
    for (const auto& name : as_string_list())
      config.models.push_back(fefi::learner_kind_from_string(name));
  } else if (key == "methods") {
    config.methods.clear();
    for (const auto& name : as_string_list())
      config.methods.push_back(fefi::fi_method_from_string(name));
  } else if (key == "subsets" || key == "subset") {
    config.subsets.clear();
    for (const auto& name : as_string_list())
      config.subsets.push_back(fefi::data_subset_from_string(name));
  } else if (key == "out" || key == "output_dir") {
    config.output_dir = value.get<std::string>();
  } else if (key == "threads") {
    config.threads = value.is_number() ? value.get<unsigned>()
                                       : std::stoul(value.get<std::string>());
  } else if (key == "n_repeats") {
    config.n_repeats = value.is_number() ? value.get<std::size_t>()
                                         : std::stoul(value.get<std::string>());
  } else if (key == "n_shapley") {
    config.n_shapley = value.is_number() ? value.get<std::size_t>()
                                         : std::stoul(value.get<std::string>());
  } else {
    throw fefi::ParameterError("unknown config key: '" + key + "'");
  }
}

// JSON object or simple `key = value` lines.
void load_config_file(fefi::ExperimentConfig& config, const std::string& path) {
  const std::string text = fefi::read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const fefi::json parsed = fefi::json::parse(text);
    for (const auto& [key, value] : parsed.items())
      apply_config_value(config, key, value);
    return;
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    apply_config_value(config, key, fefi::json(value));
  }
}

int run_generate(const std::vector<std::size_t>& ids, std::uint64_t seed,
                 const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const std::size_t id : ids) {
    fefi::SyntheticSpec spec = fefi::benchmark_dataset(id);
    spec.seed = fefi::Rng::mix(seed, id);
    const fefi::SyntheticDataset dataset = fefi::generate_dataset(spec);
    const std::filesystem::path dir(out_dir);
    fefi::save_dataset(dataset, dir / ("dataset_" + std::to_string(id) + ".csv"),
                       dir / ("dataset_" + std::to_string(id) + ".json"));
    std::cout << "wrote dataset " << id << " (" << spec.n_instances << " x "
              << spec.n_features << ") to " << out_dir << "\n";
  }
  return 0;
}

int run_experiment_cmd(const fefi::ExperimentConfig& config) {
  const fefi::ExperimentResult result = fefi::run_experiment(config);
  std::cout << fefi::summarize_results(result.rows);
  std::cout << "wrote " << result.rows.size() << " evaluation rows to "
            << config.output_dir << "/results.csv\n";
  return 0;
}

int run_report(const std::string& in_dir) {
  const auto dir = std::filesystem::path(in_dir);
  const auto rows =
      fefi::results_from_csv(fefi::read_text_file(dir / "results.csv"));
  std::cout << fefi::summarize_results(rows);
  const std::string sig = fefi::significance_report(dir, rows);
  if (!sig.empty()) {
    std::cout << "\nWilcoxon signed-rank on per-feature absolute errors:\n" << sig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuzzy ensemble feature importance"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "write synthetic datasets as CSV + JSON sidecar");
  std::string gen_datasets = "1";
  std::uint64_t gen_seed = 1;
  std::string gen_out = "fefi_out";
  generate->add_option("--dataset", gen_datasets, "dataset ids 1..9, comma separated");
  generate->add_option("--seed", gen_seed, "generation seed");
  generate->add_option("--out", gen_out, "output directory");

  auto* run = app.add_subcommand("run", "run the fusion comparison experiment");
  std::string cfg_path, run_datasets, run_seeds, run_subsets, run_out;
  std::size_t run_k = 0;
  unsigned run_threads = 0;
  run->add_option("--config", cfg_path, "JSON or key=value config file");
  run->add_option("--dataset", run_datasets, "dataset ids 1..9, comma separated");
  run->add_option("--k", run_k, "fold count");
  run->add_option("--seeds", run_seeds, "replicate seeds, comma separated");
  run->add_option("--subset", run_subsets, "train|test|whole, comma separated");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--threads", run_threads, "worker threads (0 = auto)");

  auto* report = app.add_subcommand("report", "summarize a results directory");
  std::string report_in = "fefi_out";
  report->add_option("--in", report_in, "directory holding results.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed())
      return run_generate(parse_id_list(gen_datasets), gen_seed, gen_out);
    if (run->parsed()) {
      fefi::ExperimentConfig config;
      if (!cfg_path.empty()) load_config_file(config, cfg_path);
      if (!run_datasets.empty()) config.dataset_ids = parse_id_list(run_datasets);
      if (run_k != 0) config.k = run_k;
      if (!run_seeds.empty()) config.seeds = parse_seed_list(run_seeds);
      if (!run_subsets.empty()) {
        config.subsets.clear();
        for (const auto& name : split_list(run_subsets))
          config.subsets.push_back(fefi::data_subset_from_string(name));
      }
      if (!run_out.empty()) config.output_dir = run_out;
      if (run_threads != 0) config.threads = run_threads;
      config.validate();
      return run_experiment_cmd(config);
    }
    if (report->parsed()) return run_report(report_in);
  } catch (const fefi::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fefi::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const fefi::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
