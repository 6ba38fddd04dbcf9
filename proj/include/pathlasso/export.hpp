#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathlasso/network.hpp"
#include "pathlasso/penalized.hpp"
#include "pathlasso/screen.hpp"

// JSON / CSV / DOT serialization of fits, layer assignments, edge sets and
// the assembled network. All numeric text is produced with fixed printf
// formats so outputs are byte-identical across runs and platforms.

namespace pathlasso {

namespace detail {

inline std::string num(double v, const char* fmt = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline nlohmann::json wald_row_to_json(const WaldRow& r) {
  nlohmann::json j;
  j["contrast"] = r.contrast;
  j["beta"] = r.beta;
  j["se"] = r.se;
  j["wald_chi2"] = r.chi2;
  j["p_value"] = r.p_value;
  j["active"] = r.active;
  if (r.flagged) j["flagged"] = true;
  return j;
}

inline WaldRow wald_row_from_json(const nlohmann::json& j) {
  WaldRow r;
  r.contrast = j.at("contrast").get<std::string>();
  r.beta = j.at("beta").get<double>();
  r.se = j.at("se").get<double>();
  r.chi2 = j.at("wald_chi2").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.active = j.at("active").get<bool>();
  r.flagged = j.value("flagged", false);
  return r;
}

inline nlohmann::json wald_table_to_json(const WaldTable& t) {
  nlohmann::json j;
  j["intercept"] = wald_row_to_json(t.intercept);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) j["rows"].push_back(wald_row_to_json(r));
  return j;
}

inline WaldTable wald_table_from_json(const nlohmann::json& j) {
  WaldTable t;
  t.intercept = wald_row_from_json(j.at("intercept"));
  for (const auto& r : j.at("rows")) t.rows.push_back(wald_row_from_json(r));
  return t;
}

// Regression-table CSV in reporting column order.
inline std::string wald_table_to_csv(const WaldTable& t) {
  std::string out = "contrast,beta,se,wald_chi2,p_value\n";
  const auto line = [&](const WaldRow& r) {
    out += detail::csv_quote(r.contrast) + "," + detail::num(r.beta) + "," +
           detail::num(r.se) + "," + detail::num(r.chi2) + "," + detail::num(r.p_value) +
           "\n";
  };
  line(t.intercept);
  for (const auto& r : t.rows) line(r);
  return out;
}

inline nlohmann::json fit_to_json(const AdaptiveLassoFit& fit,
                                  const std::vector<ColumnMeta>& meta) {
  nlohmann::json j;
  j["family"] = to_string(fit.family);
  j["lambda"] = fit.lambda;
  j["gamma"] = fit.weights.gamma;
  j["weight_source"] = fit.weights.source;
  j["objective_value"] = fit.objective_value;
  j["kkt_violation"] = fit.kkt_violation;
  j["converged"] = fit.converged;
  j["sweeps"] = fit.sweeps;

  // Coefficients converted back to the original variable scale.
  double intercept = fit.intercept;
  nlohmann::json coefs = nlohmann::json::array();
  for (Eigen::Index k = 0; k < fit.coefficients.size(); ++k) {
    const ColumnMeta& m = static_cast<std::size_t>(k) < meta.size()
                              ? meta[static_cast<std::size_t>(k)]
                              : ColumnMeta{};
    nlohmann::json c;
    c["contrast"] = m.contrast.empty() ? "col" + std::to_string(k) : m.contrast;
    c["beta"] = fit.coefficients[k] / m.scale;
    c["penalty_weight"] = std::isfinite(fit.weights.weights[k])
                              ? nlohmann::json(fit.weights.weights[k])
                              : nlohmann::json("inf");
    coefs.push_back(std::move(c));
    intercept -= fit.coefficients[k] * m.center / m.scale;
  }
  j["intercept"] = intercept;
  j["coefficients"] = std::move(coefs);

  if (!fit.cv_curve.empty()) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& pt : fit.cv_curve) {
      curve.push_back({{"lambda", pt.lambda},
                       {"mean_deviance", pt.mean_deviance},
                       {"se", pt.se}});
    }
    j["cv_curve"] = std::move(curve);
  }
  return j;
}

inline nlohmann::json layers_to_json(const LayerAssignment& a,
                                     const PreparedDataset& d) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    const Layer& layer = a.layers[k];
    nlohmann::json lj;
    lj["index"] = k;
    lj["parents"] = layer.parents;
    lj["selected_contrasts"] = layer.selected_contrasts;
    lj["fit"] = fit_to_json(layer.fit,
                            detail::select_meta(d.column_meta, layer.pool_columns));
    lj["wald"] = wald_table_to_json(layer.wald);
    j["layers"].push_back(std::move(lj));
  }
  j["residual_pool"] = a.residual_pool;
  return j;
}

inline nlohmann::json edge_to_json(const InterlayerEdge& e) {
  nlohmann::json j;
  j["source"] = e.source_contrast;
  j["source_parent"] = e.source_parent;
  j["target"] = e.target_label;
  j["target_parent"] = e.target_parent;
  j["theta"] = e.theta;
  j["se"] = e.se;
  j["p_value"] = e.p_value;
  j["family"] = to_string(e.family);
  j["source_layer"] = e.source_layer;
  return j;
}

inline nlohmann::json edges_to_json(const EdgeSet& edges) {
  nlohmann::json j;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges.edges) j["edges"].push_back(edge_to_json(e));
  j["warnings"] = edges.warnings;
  return j;
}

// Flat edge list, one row per edge.
inline std::string edges_to_csv(const EdgeSet& edges) {
  std::string out = "source,target,theta,se,p_value,family,source_layer\n";
  for (const auto& e : edges.edges) {
    out += detail::csv_quote(e.source_contrast) + "," + detail::csv_quote(e.target_label) +
           "," + detail::num(e.theta) + "," + detail::num(e.se) + "," +
           detail::num(e.p_value) + "," + to_string(e.family) + "," +
           std::to_string(e.source_layer) + "\n";
  }
  return out;
}

inline nlohmann::json network_to_json(const StressorNetwork& net) {
  nlohmann::json j;
  j["outcome"] = net.outcome_name;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : net.nodes) {
    j["nodes"].push_back({{"contrast", n.contrast},
                          {"parent", n.parent},
                          {"layer", n.layer},
                          {"outcome_beta", n.outcome_beta},
                          {"outcome_p", n.outcome_p},
                          {"role", n.distal ? "distal" : "proximal"}});
  }
  j["interlayer_edges"] = nlohmann::json::array();
  for (const auto& e : net.interlayer_edges) {
    j["interlayer_edges"].push_back(edge_to_json(e));
  }
  return j;
}

// Graphviz rendering: one rank-constrained subgraph per layer and the
// outcome as the sink; every node carries its outcome edge labeled with
// the refit coefficient, inter-layer edges are labeled with theta.
inline std::string network_to_dot(const StressorNetwork& net) {
  std::string out = "digraph stressor_network {\n  rankdir=LR;\n";
  out += "  node [shape=box];\n";
  int max_layer = -1;
  for (const auto& n : net.nodes) max_layer = std::max(max_layer, n.layer);
  for (int k = 0; k <= max_layer; ++k) {
    out += "  subgraph cluster_layer" + std::to_string(k) + " {\n";
    out += "    label=\"Layer " + std::to_string(k + 1) + "\";\n    rank=same;\n";
    for (const auto& n : net.nodes) {
      if (n.layer == k) out += "    \"" + n.contrast + "\";\n";
    }
    out += "  }\n";
  }
  out += "  \"" + net.outcome_name + "\" [shape=ellipse];\n";
  for (const auto& n : net.nodes) {
    out += "  \"" + n.contrast + "\" -> \"" + net.outcome_name + "\" [label=\"β=" +
           detail::num(n.outcome_beta, "%.4f") + "\"];\n";
  }
  for (const auto& e : net.interlayer_edges) {
    out += "  \"" + e.source_contrast + "\" -> \"" + e.target_label +
           "\" [label=\"θ=" + detail::num(e.theta, "%.4f") + "\", style=dashed];\n";
  }
  out += "}\n";
  return out;
}

inline nlohmann::json paths_to_json(const std::vector<ExposurePath>& paths) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : paths) {
    j.push_back({{"nodes", p.nodes},
                 {"thetas", p.thetas},
                 {"terminal_beta", p.terminal_beta}});
  }
  return j;
}

// One row per path; nodes joined by " -> ".
inline std::string paths_to_csv(const std::vector<ExposurePath>& paths) {
  std::string out = "path,length,terminal_beta\n";
  for (const auto& p : paths) {
    std::string chain;
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      if (i) chain += " -> ";
      chain += p.nodes[i];
    }
    out += detail::csv_quote(chain) + "," + std::to_string(p.nodes.size()) + "," +
           detail::num(p.terminal_beta) + "\n";
  }
  return out;
}

inline std::string screen_to_csv(const std::vector<ScreenResult>& results) {
  std::string out = "variable,contrast,odds_ratio,ci_low,ci_high,p_value,selected\n";
  for (const auto& r : results) {
    if (!r.screened) {
      out += detail::csv_quote(r.parent) + ",,,,,," + "error\n";
      continue;
    }
    for (const auto& c : r.contrasts) {
      out += detail::csv_quote(r.parent) + "," + detail::csv_quote(c.contrast) + "," +
             detail::num(c.odds_ratio) + "," + detail::num(c.ci_low) + "," +
             detail::num(c.ci_high) + "," + detail::num(c.p_value) + "," +
             (r.selected ? "yes" : "no") + "\n";
    }
  }
  return out;
}

inline std::string to_string(BalanceTestKind k) {
  switch (k) {
    case BalanceTestKind::welch_t: return "welch_t";
    case BalanceTestKind::rank_sum: return "rank_sum";
    case BalanceTestKind::chi_square: return "chi_square";
  }
  return "?";
}

inline std::string balance_to_csv(const std::vector<BalanceRow>& rows) {
  std::string out =
      "variable,test,statistic,p_value,group1_summary,group2_summary,note\n";
  for (const auto& r : rows) {
    std::string g1, g2;
    if (r.group1_mean_sd) {
      g1 = detail::num(r.group1_mean_sd->first, "%.4f") + " (" +
           detail::num(r.group1_mean_sd->second, "%.4f") + ")";
      g2 = detail::num(r.group2_mean_sd->first, "%.4f") + " (" +
           detail::num(r.group2_mean_sd->second, "%.4f") + ")";
    } else {
      for (const auto& [lvl, c] : r.level_counts) {
        if (!g1.empty()) g1 += "; ";
        if (!g2.empty()) g2 += "; ";
        g1 += lvl + "=" + std::to_string(c.first);
        g2 += lvl + "=" + std::to_string(c.second);
      }
    }
    out += detail::csv_quote(r.variable) + "," + to_string(r.test_kind) + "," +
           detail::num(r.statistic) + "," + detail::num(r.p_value) + "," +
           detail::csv_quote(g1) + "," + detail::csv_quote(g2) + "," +
           (r.exact_test_unavailable ? "sparse cells" : "") + "\n";
  }
  return out;
}

inline nlohmann::json exclusion_report_to_json(const ExclusionReport& r) {
  return r.to_json();
}

}  // namespace pathlasso
