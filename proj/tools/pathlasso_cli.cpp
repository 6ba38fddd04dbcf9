// Command-line front end for the penalized path-analysis pipeline.
//
// Verbs mirror the pipeline stages (prepare, balance, screen, layers,
// edges, network, paths, run) plus synthetic data generation (simulate)
// and table regeneration from a finished run (report).
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathlasso/pipeline.hpp"
#include "pathlasso/synth.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "seed override");
  cmd->add_option("--alpha", opts.alpha, "significance threshold override");
}

pathlasso::PipelineConfig load_config(const CommonOpts& opts) {
  std::ifstream in(opts.config_path);
  if (!in) throw pathlasso::DataError("cannot open config: " + opts.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw pathlasso::FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  pathlasso::PipelineConfig config = pathlasso::PipelineConfig::from_json(j);
  // Paths in the config are relative to the config file's directory.
  const auto base = std::filesystem::path(opts.config_path).parent_path();
  const auto resolve = [&](const std::string& p) {
    return std::filesystem::path(p).is_absolute() ? p : (base / p).string();
  };
  config.input_path = resolve(config.input_path);
  config.schema_path = resolve(config.schema_path);
  if (!opts.out_dir.empty()) {
    config.output_dir = opts.out_dir;
  } else {
    config.output_dir = resolve(config.output_dir);
  }
  if (opts.seed) config.seed = *opts.seed;
  if (opts.alpha) config.alpha = *opts.alpha;
  return config;
}

int run_stage(const CommonOpts& opts, pathlasso::PipelineStage last) {
  const auto config = load_config(opts);
  const auto manifest = pathlasso::run_pipeline(config, last);
  std::cout << "run complete: " << manifest.stages.size() << " stage(s), output in "
            << config.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized hierarchical path analysis of binary-outcome exposure data"};
  app.require_subcommand(1);

  CommonOpts prepare_opts, balance_opts, screen_opts, layers_opts, edges_opts,
      network_opts, paths_opts, run_opts;
  add_common(app.add_subcommand("prepare", "apply exclusion rules and encode the dataset"),
             prepare_opts);
  add_common(app.add_subcommand("balance", "compare included vs excluded samples"),
             balance_opts);
  add_common(app.add_subcommand("screen", "univariate outcome screening"), screen_opts);
  add_common(app.add_subcommand("layers", "iterative hierarchical layer extraction"),
             layers_opts);
  add_common(app.add_subcommand("edges", "inter-layer edge regressions"), edges_opts);
  add_common(app.add_subcommand("network", "assemble the directed stressor network"),
             network_opts);
  add_common(app.add_subcommand("paths", "enumerate exposure paths to the outcome"),
             paths_opts);
  add_common(app.add_subcommand("run", "full pipeline"), run_opts);

  std::string sim_spec_path, sim_out_dir = "synth_out";
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "generate layered synthetic data");
  simulate->add_option("--spec", sim_spec_path, "generator spec JSON")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out_dir, "output directory");
  simulate->add_option("--seed", sim_seed, "seed override");

  std::string report_dir, report_format = "csv";
  auto* report = app.add_subcommand("report", "regenerate tables from a run directory");
  report->add_option("--dir", report_dir, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--format", report_format, "output listing format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);

    if (app.got_subcommand("prepare")) {
      return run_stage(prepare_opts, pathlasso::PipelineStage::prepare);
    }
    if (app.got_subcommand("balance")) {
      return run_stage(balance_opts, pathlasso::PipelineStage::balance);
    }
    if (app.got_subcommand("screen")) {
      return run_stage(screen_opts, pathlasso::PipelineStage::screen);
    }
    if (app.got_subcommand("layers")) {
      return run_stage(layers_opts, pathlasso::PipelineStage::layers);
    }
    // Edge fitting, network assembly and path enumeration share one stage:
    // each artifact depends on everything before it.
    if (app.got_subcommand("edges") || app.got_subcommand("network") ||
        app.got_subcommand("paths")) {
      CommonOpts& opts = app.got_subcommand("edges")
                             ? edges_opts
                             : (app.got_subcommand("network") ? network_opts : paths_opts);
      return run_stage(opts, pathlasso::PipelineStage::network);
    }
    if (app.got_subcommand("run")) {
      return run_stage(run_opts, pathlasso::PipelineStage::network);
    }

    if (app.got_subcommand("simulate")) {
      std::ifstream in(sim_spec_path);
      if (!in) throw pathlasso::DataError("cannot open spec: " + sim_spec_path);
      nlohmann::json j;
      in >> j;
      pathlasso::SynthSpec spec = pathlasso::SynthSpec::from_json(j);
      if (sim_seed) spec.seed = *sim_seed;
      const auto [data, truth] = pathlasso::generate_layered(spec);

      std::filesystem::create_directories(sim_out_dir);
      const auto dir = std::filesystem::path(sim_out_dir);
      pathlasso::detail::atomic_write(dir / "data.csv", pathlasso::synth_to_csv(data));
      nlohmann::json schema_json = nlohmann::json::array();
      for (const auto& v : pathlasso::synth_schema(data)) {
        schema_json.push_back(pathlasso::to_json(v));
      }
      pathlasso::detail::atomic_write(dir / "schema.json", schema_json.dump(2) + "\n");
      nlohmann::json truth_json;
      truth_json["layer_members"] = truth.layer_members;
      truth_json["spec"] = spec.to_json();
      pathlasso::detail::atomic_write(dir / "truth.json", truth_json.dump(2) + "\n");
      std::cout << "wrote " << data.n() << " rows, " << data.p() << " variables to "
                << sim_out_dir << "\n";
      return 0;
    }

    if (app.got_subcommand("report")) {
      const auto written = pathlasso::report_tables(report_dir);
      if (report_format == "json") {
        std::cout << nlohmann::json(written).dump(2) << "\n";
      } else {
        for (const auto& f : written) std::cout << f << "\n";
      }
      return 0;
    }

    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const pathlasso::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const pathlasso::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const pathlasso::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
