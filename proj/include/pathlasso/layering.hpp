#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "pathlasso/dataset.hpp"
#include "pathlasso/errors.hpp"
#include "pathlasso/penalized.hpp"

// Iterative layer extraction: cross-validated adaptive-lasso fits on a
// shrinking candidate pool. A parent variable enters the current layer when
// at least one of its contrasts has a nonzero penalized coefficient and a
// post-selection Wald p-value below alpha; all of a selected parent's
// contrasts then leave the pool together.

namespace pathlasso {

struct LassoConfig {
  double alpha = 0.05;
  double gamma = 1.0;
  int folds = 10;
  CvRule rule = CvRule::min;
  int grid_length = 100;
  double grid_ratio = 1e-4;
  std::uint64_t seed = 1;
};

struct Layer {
  std::vector<std::string> parents;             // selected parents, pool order
  std::vector<std::string> selected_contrasts;  // qualifying contrast labels
  std::vector<std::string> selected_parents;    // parent of each selected contrast
  std::vector<Eigen::Index> selected_columns;   // global column indices
  std::vector<Eigen::Index> pool_columns;       // columns of the iteration pool
  AdaptiveLassoFit fit;                         // snapshot, pool-column order
  WaldTable wald;                               // snapshot, pool-column order
};

struct LayerAssignment {
  std::vector<Layer> layers;
  std::vector<std::string> residual_pool;  // parents never selected
};

struct LayerExtractionError : NumericError {
  LayerExtractionError(const std::string& msg, LayerAssignment partial)
      : NumericError(msg), partial_assignment(std::move(partial)) {}
  LayerAssignment partial_assignment;
};

namespace detail {

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x,
                                      const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  }
  return out;
}

inline std::vector<ColumnMeta> select_meta(const std::vector<ColumnMeta>& meta,
                                           const std::vector<Eigen::Index>& cols) {
  std::vector<ColumnMeta> out;
  out.reserve(cols.size());
  for (const auto j : cols) out.push_back(meta[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace detail

inline LayerAssignment extract_layers(const PreparedDataset& d,
                                      const std::vector<std::string>& candidates,
                                      const LassoConfig& config) {
  // Pool in dataset parent order, restricted to the candidate set.
  std::vector<std::string> pool;
  {
    const std::set<std::string> wanted(candidates.begin(), candidates.end());
    for (const auto& p : d.parents) {
      if (wanted.count(p.name) && !d.columns_of(p.name).empty()) pool.push_back(p.name);
    }
  }

  LayerAssignment assignment;
  int iteration = 0;
  while (!pool.empty()) {
    std::vector<Eigen::Index> pool_columns;
    for (const auto& parent : pool) {
      for (const auto j : d.columns_of(parent)) pool_columns.push_back(j);
    }
    const Eigen::MatrixXd x = detail::select_columns(d.design, pool_columns);
    const auto meta = detail::select_meta(d.column_meta, pool_columns);

    Layer layer;
    layer.pool_columns = pool_columns;
    try {
      const PenaltyWeights w =
          compute_adaptive_weights(x, d.outcome, Family::logistic, config.gamma);
      const auto grid = lambda_grid(x, d.outcome, Family::logistic, w,
                                    config.grid_length, config.grid_ratio);
      const CvResult cv =
          cross_validate(x, d.outcome, Family::logistic, w, grid, config.folds,
                         derive_seed(config.seed, static_cast<std::uint64_t>(iteration)),
                         config.rule, config.gamma);
      layer.fit = cv.fit;
      layer.wald = post_selection_wald(x, d.outcome, cv.fit, meta);
    } catch (const std::exception& e) {
      assignment.residual_pool = pool;
      throw LayerExtractionError(
          std::string("extract_layers: iteration ") + std::to_string(iteration) +
              " failed: " + e.what(),
          assignment);
    }

    // Selection rule: nonzero penalized coefficient AND refit Wald p < alpha.
    std::set<std::string> selected_parents;
    for (std::size_t k = 0; k < pool_columns.size(); ++k) {
      const WaldRow& row = layer.wald.rows[k];
      if (row.active && !row.flagged && row.p_value < config.alpha) {
        selected_parents.insert(meta[k].parent);
        layer.selected_contrasts.push_back(meta[k].contrast);
        layer.selected_parents.push_back(meta[k].parent);
        layer.selected_columns.push_back(pool_columns[k]);
      }
    }
    if (selected_parents.empty()) break;

    for (const auto& parent : pool) {
      if (selected_parents.count(parent)) layer.parents.push_back(parent);
    }
    assignment.layers.push_back(std::move(layer));

    std::vector<std::string> remaining;
    for (const auto& parent : pool) {
      if (!selected_parents.count(parent)) remaining.push_back(parent);
    }
    pool = std::move(remaining);
    ++iteration;
  }
  assignment.residual_pool = pool;
  return assignment;
}

}  // namespace pathlasso
