#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathlasso/dataset.hpp"
#include "pathlasso/errors.hpp"
#include "pathlasso/export.hpp"
#include "pathlasso/layering.hpp"
#include "pathlasso/mediation.hpp"
#include "pathlasso/network.hpp"
#include "pathlasso/screen.hpp"

// End-to-end orchestration: prepare -> balance -> screen -> per-stratum
// layer extraction -> inter-layer edges -> network -> paths, with an
// integrity manifest. All artifacts are written atomically (temp file then
// rename) and two runs of the same config produce byte-identical output.

namespace pathlasso {

struct StratumConfig {
  std::string label;                 // directory-safe label; derived when empty
  std::string variable;              // empty = no stratification
  std::set<std::string> levels;
};

struct PipelineConfig {
  std::string input_path;
  std::string schema_path;
  char delimiter = ',';
  std::vector<ExclusionRule> exclusion_rules;
  double alpha = 0.05;
  double screen_alpha = 0.05;
  double gamma = 1.0;
  int folds = 10;
  CvRule cv_rule = CvRule::min;
  int grid_length = 100;
  double grid_ratio = 1e-4;
  std::uint64_t seed = 1;
  std::vector<StratumConfig> strata;  // empty = single unstratified analysis
  std::string output_dir = "out";
  bool include_timestamp = false;     // off by default so reruns are identical

  static PipelineConfig from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.input_path = j.at("input").get<std::string>();
    c.schema_path = j.at("schema").get<std::string>();
    const std::string delim = j.value("delimiter", ",");
    if (delim.size() != 1) throw UsageError("config: delimiter must be one character");
    c.delimiter = delim[0];
    if (j.contains("exclusion_rules")) {
      for (const auto& r : j.at("exclusion_rules")) {
        c.exclusion_rules.push_back(ExclusionRule::from_json(r));
      }
    }
    c.alpha = j.value("alpha", 0.05);
    c.screen_alpha = j.value("screen_alpha", c.alpha);
    c.gamma = j.value("gamma", 1.0);
    c.folds = j.value("folds", 10);
    const std::string rule = j.value("cv_rule", "min");
    if (rule == "min") {
      c.cv_rule = CvRule::min;
    } else if (rule == "1se") {
      c.cv_rule = CvRule::one_se;
    } else {
      throw UsageError("config: cv_rule must be 'min' or '1se'");
    }
    c.grid_length = j.value("grid_length", 100);
    c.grid_ratio = j.value("grid_ratio", 1e-4);
    c.seed = j.value("seed", 1u);
    if (j.contains("strata")) {
      for (const auto& s : j.at("strata")) {
        StratumConfig sc;
        sc.variable = s.value("variable", "");
        if (s.contains("levels")) {
          for (const auto& l : s.at("levels")) sc.levels.insert(l.get<std::string>());
        }
        sc.label = s.value("label", "");
        c.strata.push_back(std::move(sc));
      }
    }
    c.output_dir = j.value("output_dir", "out");
    c.include_timestamp = j.value("include_timestamp", false);
    if (c.alpha <= 0.0 || c.alpha >= 1.0) throw UsageError("config: alpha out of range");
    if (c.folds < 2) throw UsageError("config: folds must be >= 2");
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["input"] = input_path;
    j["schema"] = schema_path;
    j["delimiter"] = std::string(1, delimiter);
    j["alpha"] = alpha;
    j["screen_alpha"] = screen_alpha;
    j["gamma"] = gamma;
    j["folds"] = folds;
    j["cv_rule"] = cv_rule == CvRule::min ? "min" : "1se";
    j["grid_length"] = grid_length;
    j["grid_ratio"] = grid_ratio;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["include_timestamp"] = include_timestamp;
    return j;
  }
};

struct ManifestEntry {
  std::string path;      // relative to the run directory
  std::string checksum;  // FNV-1a 64 in hex
};

struct StageRecord {
  std::string name;
  std::string status = "ok";  // ok | failed | skipped
  std::string note;
  std::vector<ManifestEntry> files;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;  // empty unless timestamps are enabled
  std::vector<StageRecord> stages;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    j["stages"] = nlohmann::json::array();
    for (const auto& s : stages) {
      nlohmann::json sj;
      sj["name"] = s.name;
      sj["status"] = s.status;
      if (!s.note.empty()) sj["note"] = s.note;
      sj["files"] = nlohmann::json::array();
      for (const auto& f : s.files) {
        sj["files"].push_back({{"path", f.path}, {"checksum", f.checksum}});
      }
      j["stages"].push_back(std::move(sj));
    }
    return j;
  }
};

namespace detail {

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Temp-file-then-rename so readers never see a partial artifact.
inline void atomic_write(const std::filesystem::path& path, const std::string& data) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string slugify(const std::string& label) {
  std::string out;
  for (const char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "stratum" : out;
}

}  // namespace detail

class PipelineRun {
 public:
  PipelineRun(PipelineConfig config, std::filesystem::path run_dir)
      : config_(std::move(config)), dir_(std::move(run_dir)) {
    std::filesystem::create_directories(dir_);
    manifest_.config_hash =
        detail::hex64(detail::fnv1a64(config_.to_json().dump()));
    manifest_.seed = config_.seed;
    if (config_.include_timestamp) {
      const auto now = std::chrono::system_clock::now();
      const std::time_t t = std::chrono::system_clock::to_time_t(now);
      char buf[32];
      std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
      manifest_.timestamp = buf;
    }
  }

  const RunManifest& manifest() const { return manifest_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Writes an artifact and records it under the current stage.
  void emit(StageRecord& stage, const std::string& name, const std::string& data) {
    detail::atomic_write(dir_ / name, data);
    stage.files.push_back({name, detail::hex64(detail::fnv1a64(data))});
  }

  void write_manifest() {
    detail::atomic_write(dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
  }

  PipelineConfig config_;
  std::filesystem::path dir_;
  RunManifest manifest_;
};

// How far the run should go; each value includes everything before it.
enum class PipelineStage { prepare, balance, screen, layers, network };

// Runs the stages in order up to `last` and writes the manifest last. On a
// stage failure, the stage is recorded as failed, the manifest is still
// written, and the error is rethrown for the caller's exit handling.
inline RunManifest run_pipeline(const PipelineConfig& config,
                                PipelineStage last = PipelineStage::network) {
  PipelineRun run(config, config.output_dir);
  RunManifest& manifest = run.manifest_;

  const auto stage_guard = [&](const std::string& name, const auto& body) {
    StageRecord stage;
    stage.name = name;
    try {
      body(stage);
    } catch (const std::exception& e) {
      stage.status = "failed";
      stage.note = e.what();
      manifest.stages.push_back(std::move(stage));
      run.write_manifest();
      throw;
    }
    manifest.stages.push_back(std::move(stage));
  };

  Schema schema;
  RawTable raw;
  PreparedDataset prepared;

  stage_guard("prepare", [&](StageRecord& stage) {
    schema = schema_from_json(nlohmann::json::parse(detail::read_file(config.schema_path)));
    std::ifstream in(config.input_path, std::ios::binary);
    if (!in) throw DataError("cannot open input: " + config.input_path);
    raw = load_table(in, schema, config.delimiter);
    auto [d, report] = prepare_dataset(raw, schema, config.exclusion_rules);
    prepared = std::move(d);
    run.emit(stage, "exclusions.json", report.to_json().dump(2) + "\n");
  });
  if (last == PipelineStage::prepare) {
    run.write_manifest();
    return run.manifest_;
  }

  stage_guard("balance", [&](StageRecord& stage) {
    const auto [kept, report] = apply_exclusions(raw, schema, config.exclusion_rules);
    if (kept.empty() || kept.size() == raw.n_rows()) {
      stage.status = "skipped";
      stage.note = kept.empty() ? "no rows included" : "no rows excluded";
      return;
    }
    const std::set<std::size_t> included(kept.begin(), kept.end());
    RawTable in_t, ex_t;
    in_t.columns = ex_t.columns = raw.columns;
    for (std::size_t i = 0; i < raw.n_rows(); ++i) {
      (included.count(i) ? in_t : ex_t).rows.push_back(raw.rows[i]);
    }
    run.emit(stage, "balance.csv", balance_to_csv(balance_table(in_t, ex_t, schema)));
  });
  if (last == PipelineStage::balance) {
    run.write_manifest();
    return run.manifest_;
  }

  std::vector<ScreenResult> screen;
  stage_guard("screen", [&](StageRecord& stage) {
    screen = univariate_screen(prepared, config.screen_alpha);
    run.emit(stage, "screen.csv", screen_to_csv(screen));
  });
  if (last == PipelineStage::screen) {
    run.write_manifest();
    return run.manifest_;
  }

  // Candidate pool: screen-selected parents with the candidate role.
  std::vector<std::string> candidates;
  for (const auto& res : screen) {
    const ParentInfo* info = prepared.parent_info(res.parent);
    if (info != nullptr && info->role == VariableRole::candidate && res.selected) {
      candidates.push_back(res.parent);
    }
  }

  std::vector<StratumConfig> strata = config.strata;
  if (strata.empty()) strata.push_back({"all", "", {}});

  for (std::size_t si = 0; si < strata.size(); ++si) {
    StratumConfig sc = strata[si];
    if (sc.label.empty()) {
      sc.label = sc.variable.empty() ? "all" : sc.variable;
      for (const auto& l : sc.levels) sc.label += "_" + l;
    }
    const std::string slug = detail::slugify(sc.label);

    PreparedDataset stratum;
    LayerAssignment layers;
    bool have_layers = false;

    stage_guard("layers:" + slug, [&](StageRecord& stage) {
      stratum = sc.variable.empty() ? prepared
                                    : stratify(prepared, sc.variable, sc.levels);
      stratum = center_and_scale(stratum, ScaleMode::standardize);

      LassoConfig lc;
      lc.alpha = config.alpha;
      lc.gamma = config.gamma;
      lc.folds = config.folds;
      lc.rule = config.cv_rule;
      lc.grid_length = config.grid_length;
      lc.grid_ratio = config.grid_ratio;
      lc.seed = derive_seed(config.seed, 1000 + si);

      layers = extract_layers(stratum, candidates, lc);
      have_layers = true;
      run.emit(stage, "layers_" + slug + ".json",
               layers_to_json(layers, stratum).dump(2) + "\n");
      for (std::size_t k = 0; k < layers.layers.size(); ++k) {
        run.emit(stage, "wald_" + slug + "_layer" + std::to_string(k + 1) + ".csv",
                 wald_table_to_csv(layers.layers[k].wald));
      }
    });

    if (last == PipelineStage::layers) continue;

    stage_guard("network:" + slug, [&](StageRecord& stage) {
      if (!have_layers) {
        stage.status = "skipped";
        stage.note = "layer extraction unavailable";
        return;
      }
      EdgeSet edges;
      if (layers.layers.size() >= 2) {
        LassoConfig lc;
        lc.alpha = config.alpha;
        lc.gamma = config.gamma;
        lc.folds = config.folds;
        lc.rule = config.cv_rule;
        lc.grid_length = config.grid_length;
        lc.grid_ratio = config.grid_ratio;
        lc.seed = derive_seed(config.seed, 2000 + si);
        edges = fit_interlayer_edges(stratum, layers, lc);
      } else {
        edges.warnings.push_back("fewer than two layers; no inter-layer edges");
      }
      const StressorNetwork net = build_network(layers, edges);
      const auto paths = enumerate_paths(net);
      run.emit(stage, "edges_" + slug + ".json", edges_to_json(edges).dump(2) + "\n");
      run.emit(stage, "edges_" + slug + ".csv", edges_to_csv(edges));
      run.emit(stage, "network_" + slug + ".json", network_to_json(net).dump(2) + "\n");
      run.emit(stage, "network_" + slug + ".dot", network_to_dot(net));
      run.emit(stage, "paths_" + slug + ".json", paths_to_json(paths).dump(2) + "\n");
      run.emit(stage, "paths_" + slug + ".csv", paths_to_csv(paths));
    });
  }

  run.write_manifest();
  return run.manifest_;
}

// Re-derives the per-layer regression tables from a run directory's layer
// JSON artifacts; output is identical whether produced here or by the run.
inline std::vector<std::string> report_tables(const std::string& run_dir) {
  std::vector<std::string> written;
  std::vector<std::filesystem::path> layer_files;
  for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("layers_", 0) == 0 && entry.path().extension() == ".json") {
      layer_files.push_back(entry.path());
    }
  }
  std::sort(layer_files.begin(), layer_files.end());
  if (layer_files.empty()) throw DataError("report: no layer artifacts in " + run_dir);

  for (const auto& file : layer_files) {
    const std::string stem = file.stem().string();           // layers_<slug>
    const std::string slug = stem.substr(std::string("layers_").size());
    const auto j = nlohmann::json::parse(detail::read_file(file));
    for (const auto& layer : j.at("layers")) {
      const WaldTable table = wald_table_from_json(layer.at("wald"));
      const std::string out_name = "wald_" + slug + "_layer" +
                                   std::to_string(layer.at("index").get<int>() + 1) +
                                   ".csv";
      detail::atomic_write(std::filesystem::path(run_dir) / out_name,
                           wald_table_to_csv(table));
      written.push_back(out_name);
    }
  }
  return written;
}

}  // namespace pathlasso
