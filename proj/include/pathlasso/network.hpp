#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pathlasso/dataset.hpp"
#include "pathlasso/errors.hpp"
#include "pathlasso/layering.hpp"

// Inter-layer edge regression and assembly of the directed stressor
// network: nodes are selected contrasts, edges run from upper-layer
// variables to the ones they predict one layer down, and every node keeps
// its outcome coefficient from the iteration that selected it.

namespace pathlasso {

struct InterlayerEdge {
  std::string source_parent;
  std::string source_contrast;
  std::string target_parent;
  std::string target_label;    // contrast label, or per-level contrast for categoricals
  double theta = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  Family family = Family::linear;
  int source_layer = 0;        // 0-based upper layer index
};

struct EdgeSet {
  std::vector<InterlayerEdge> edges;
  std::vector<std::string> warnings;  // skipped degenerate targets etc.
};

namespace detail {

struct EdgeTarget {
  std::string parent;
  std::string label;           // contrast label used for the node lookup
  Family family = Family::linear;
  Eigen::VectorXd values;      // target vector
  std::vector<Eigen::Index> rows;  // row subset (one-vs-reference)
};

// One regression target per lower-layer parent; categorical parents with
// more than two levels expand to one-vs-reference binary targets per level.
inline std::vector<EdgeTarget> edge_targets(const PreparedDataset& d,
                                            const std::string& parent) {
  std::vector<EdgeTarget> targets;
  const ParentInfo* info = d.parent_info(parent);
  const auto cols = d.columns_of(parent);
  if (info == nullptr || cols.empty()) return targets;

  if (info->levels.empty()) {  // continuous
    EdgeTarget t;
    t.parent = parent;
    t.label = d.column_meta[static_cast<std::size_t>(cols[0])].contrast;
    t.family = Family::linear;
    t.values = d.original_column(cols[0]);
    t.rows.resize(static_cast<std::size_t>(d.n()));
    for (Eigen::Index i = 0; i < d.n(); ++i) t.rows[static_cast<std::size_t>(i)] = i;
    targets.push_back(std::move(t));
    return targets;
  }

  const auto& levels = d.category_rows.at(parent);
  if (info->levels.size() == 2) {
    EdgeTarget t;
    t.parent = parent;
    t.label = d.column_meta[static_cast<std::size_t>(cols[0])].contrast;
    t.family = Family::logistic;
    t.values.resize(d.n());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      t.values[i] = levels[static_cast<std::size_t>(i)] == info->reference ? 0.0 : 1.0;
    }
    t.rows.resize(static_cast<std::size_t>(d.n()));
    for (Eigen::Index i = 0; i < d.n(); ++i) t.rows[static_cast<std::size_t>(i)] = i;
    targets.push_back(std::move(t));
    return targets;
  }

  for (const auto& lvl : info->levels) {
    if (lvl == info->reference) continue;
    EdgeTarget t;
    t.parent = parent;
    t.label = parent + "[" + lvl + "-" + info->reference + "]";
    t.family = Family::logistic;
    std::vector<Eigen::Index> rows;
    std::vector<double> vals;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const auto& l = levels[static_cast<std::size_t>(i)];
      if (l == lvl || l == info->reference) {
        rows.push_back(i);
        vals.push_back(l == lvl ? 1.0 : 0.0);
      }
    }
    t.rows = std::move(rows);
    t.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    targets.push_back(std::move(t));
  }
  return targets;
}

}  // namespace detail

// Adaptive-lasso regressions of each lower-layer variable on the selected
// columns of the layer above it. Edges keep a nonzero coefficient with
// refit Wald p < alpha; theta is reported from the refit.
inline EdgeSet fit_interlayer_edges(const PreparedDataset& d, const LayerAssignment& layers,
                                    const LassoConfig& config) {
  if (layers.layers.size() < 2) throw DataError("fit_interlayer_edges: need at least 2 layers");
  EdgeSet result;

  for (std::size_t k = 0; k + 1 < layers.layers.size(); ++k) {
    const Layer& upper = layers.layers[k];
    const Layer& lower = layers.layers[k + 1];

    // Source columns on the original variable scale so theta is reported
    // directly on that scale.
    const auto& src_cols = upper.selected_columns;
    Eigen::MatrixXd sources(d.n(), static_cast<Eigen::Index>(src_cols.size()));
    std::vector<ColumnMeta> src_meta;
    for (std::size_t s = 0; s < src_cols.size(); ++s) {
      sources.col(static_cast<Eigen::Index>(s)) = d.original_column(src_cols[s]);
      ColumnMeta m = d.column_meta[static_cast<std::size_t>(src_cols[s])];
      m.center = 0.0;
      m.scale = 1.0;
      src_meta.push_back(std::move(m));
    }

    std::uint64_t target_index = 0;
    for (const auto& parent : lower.parents) {
      for (const auto& target : detail::edge_targets(d, parent)) {
        ++target_index;
        // Row subset of sources and target.
        Eigen::MatrixXd xs(static_cast<Eigen::Index>(target.rows.size()), sources.cols());
        for (std::size_t i = 0; i < target.rows.size(); ++i) {
          xs.row(static_cast<Eigen::Index>(i)) = sources.row(target.rows[i]);
        }
        const Eigen::VectorXd& ys = target.values;

        const double spread = (ys.array() - ys.mean()).abs().maxCoeff();
        if (spread <= 1e-12 * std::max(1.0, std::fabs(ys.mean()))) {
          result.warnings.push_back("skipped degenerate target " + target.label);
          continue;
        }

        try {
          const PenaltyWeights w =
              compute_adaptive_weights(xs, ys, target.family, config.gamma);
          const auto grid = lambda_grid(xs, ys, target.family, w, config.grid_length,
                                        config.grid_ratio);
          const std::uint64_t seed =
              derive_seed(config.seed, 0x10000u * (k + 1) + target_index);
          const CvResult cv = cross_validate(xs, ys, target.family, w, grid,
                                             config.folds, seed, config.rule,
                                             config.gamma);
          const WaldTable wald = post_selection_wald(xs, ys, cv.fit, src_meta);
          for (std::size_t s = 0; s < src_cols.size(); ++s) {
            const WaldRow& row = wald.rows[s];
            if (row.active && !row.flagged && row.p_value < config.alpha &&
                row.beta != 0.0) {
              InterlayerEdge e;
              e.source_parent = src_meta[s].parent;
              e.source_contrast = src_meta[s].contrast;
              e.target_parent = target.parent;
              e.target_label = target.label;
              e.theta = row.beta;
              e.se = row.se;
              e.p_value = row.p_value;
              e.family = target.family;
              e.source_layer = static_cast<int>(k);
              result.edges.push_back(std::move(e));
            }
          }
        } catch (const std::exception& e) {
          result.warnings.push_back("target " + target.label + " failed: " + e.what());
        }
      }
    }
  }
  return result;
}

struct NetworkNode {
  std::string parent;
  std::string contrast;
  int layer = 0;               // 0-based
  double outcome_beta = 0.0;   // from the layer-fit snapshot (refit scale)
  double outcome_p = 1.0;
  bool distal = false;         // has at least one outgoing inter-layer edge
};

struct StressorNetwork {
  std::vector<NetworkNode> nodes;
  std::vector<InterlayerEdge> interlayer_edges;
  std::string outcome_name = "outcome";
};

// Assembles nodes, outcome edges and inter-layer edges; classification is
// distal iff the node has an outgoing inter-layer edge. Edges whose target
// was regressed but never selected as a node are dropped (the network only
// connects validated stressors); unknown sources are an integrity error.
inline StressorNetwork build_network(const LayerAssignment& layers, const EdgeSet& edges,
                                     const std::string& outcome_name = "outcome") {
  StressorNetwork net;
  net.outcome_name = outcome_name;
  std::set<std::string> node_ids;
  for (std::size_t k = 0; k < layers.layers.size(); ++k) {
    const Layer& layer = layers.layers[k];
    for (std::size_t c = 0; c < layer.selected_contrasts.size(); ++c) {
      NetworkNode node;
      node.contrast = layer.selected_contrasts[c];
      node.layer = static_cast<int>(k);
      // Outcome coefficient from the selecting iteration's Wald snapshot.
      for (std::size_t r = 0; r < layer.wald.rows.size(); ++r) {
        if (layer.wald.rows[r].contrast == node.contrast) {
          node.outcome_beta = layer.wald.rows[r].beta;
          node.outcome_p = layer.wald.rows[r].p_value;
          break;
        }
      }
      node.parent = c < layer.selected_parents.size() ? layer.selected_parents[c]
                                                      : node.contrast;
      net.nodes.push_back(node);
      node_ids.insert(node.contrast);
    }
  }
  for (const auto& e : edges.edges) {
    if (!node_ids.count(e.source_contrast)) {
      throw IntegrityError("build_network: unknown source node " + e.source_contrast);
    }
    if (!node_ids.count(e.target_label)) continue;  // regressed but not a node
    net.interlayer_edges.push_back(e);
  }
  for (auto& node : net.nodes) {
    node.distal = false;
    for (const auto& e : net.interlayer_edges) {
      if (e.source_contrast == node.contrast) {
        node.distal = true;
        break;
      }
    }
  }
  return net;
}

struct ExposurePath {
  std::vector<std::string> nodes;  // contrast labels, outcome appended last
  std::vector<double> thetas;      // edge coefficients along the path
  double terminal_beta = 0.0;      // outcome edge of the last stressor
};

// Depth-first enumeration of all directed paths from the given start nodes
// (default: all first-layer nodes) to the outcome. Every node has an
// outcome edge, so each prefix terminates once and each extension follows
// inter-layer edges; output order is lexicographic and independent of edge
// input order.
inline std::vector<ExposurePath> enumerate_paths(
    const StressorNetwork& net, const std::vector<std::string>& from = {}) {
  std::vector<std::string> starts = from;
  if (starts.empty()) {
    for (const auto& n : net.nodes) {
      if (n.layer == 0) starts.push_back(n.contrast);
    }
  }
  std::sort(starts.begin(), starts.end());

  std::map<std::string, const NetworkNode*> by_id;
  for (const auto& n : net.nodes) by_id[n.contrast] = &n;
  std::map<std::string, std::vector<const InterlayerEdge*>> out_edges;
  for (const auto& e : net.interlayer_edges) out_edges[e.source_contrast].push_back(&e);
  for (auto& [src, list] : out_edges) {
    std::sort(list.begin(), list.end(),
              [](const InterlayerEdge* a, const InterlayerEdge* b) {
                return a->target_label < b->target_label;
              });
  }

  std::vector<ExposurePath> paths;
  std::vector<std::string> stack_nodes;
  std::vector<double> stack_thetas;

  const std::function<void(const std::string&)> visit = [&](const std::string& id) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw IntegrityError("enumerate_paths: unknown node " + id);
    stack_nodes.push_back(id);
    ExposurePath p;
    p.nodes = stack_nodes;
    p.nodes.push_back(net.outcome_name);
    p.thetas = stack_thetas;
    p.terminal_beta = it->second->outcome_beta;
    paths.push_back(std::move(p));
    const auto oe = out_edges.find(id);
    if (oe != out_edges.end()) {
      for (const auto* e : oe->second) {
        stack_thetas.push_back(e->theta);
        visit(e->target_label);
        stack_thetas.pop_back();
      }
    }
    stack_nodes.pop_back();
  };

  for (const auto& s : starts) visit(s);
  return paths;
}

struct LatentScores {
  // Per layer: eta_hat[k][i] = sum over the layer's selected columns of
  // beta_j * x_ij, with coefficients from the layer's penalized snapshot.
  std::vector<Eigen::VectorXd> eta;
  std::vector<double> deviance_on_eta;  // in-sample deviance of outcome on eta_k alone
};

inline LatentScores latent_scores(const PreparedDataset& d, const LayerAssignment& layers) {
  if (layers.layers.empty()) throw DataError("latent_scores: no layers");
  LatentScores scores;
  for (const auto& layer : layers.layers) {
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(d.n());
    for (std::size_t k = 0; k < layer.pool_columns.size(); ++k) {
      const double beta = layer.fit.coefficients[static_cast<Eigen::Index>(k)];
      if (beta != 0.0) eta += beta * d.design.col(layer.pool_columns[k]);
    }
    Eigen::MatrixXd x(d.n(), 1);
    x.col(0) = eta;
    double dev;
    try {
      dev = fit_logistic_mle(x, d.outcome).deviance;
    } catch (const NumericError&) {
      dev = std::numeric_limits<double>::quiet_NaN();
    }
    scores.eta.push_back(std::move(eta));
    scores.deviance_on_eta.push_back(dev);
  }
  return scores;
}

}  // namespace pathlasso
