#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pathlasso/dataset.hpp"
#include "pathlasso/errors.hpp"
#include "pathlasso/glm.hpp"
#include "pathlasso/layering.hpp"
#include "pathlasso/math.hpp"

// Synthetic layered-data generation with planted ground truth, plus the
// independent brute-force oracles used by the acceptance tests.

namespace pathlasso {

struct SynthSpec {
  Eigen::Index n = 0;
  std::vector<Eigen::Index> layer_sizes;
  // theta_matrices[k]: layer_sizes[k+1] x layer_sizes[k], maps layer k to k+1.
  std::vector<Eigen::MatrixXd> theta_matrices;
  double noise_sd = 1.0;
  Eigen::VectorXd outcome_beta;  // on layer-1 variables
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 1 || layer_sizes.empty()) throw DataError("SynthSpec: empty");
    if (noise_sd <= 0.0) throw DataError("SynthSpec: noise_sd must be positive");
    if (theta_matrices.size() + 1 != layer_sizes.size()) {
      throw DataError("SynthSpec: need one theta matrix per adjacent layer pair");
    }
    for (std::size_t k = 0; k < theta_matrices.size(); ++k) {
      if (theta_matrices[k].rows() != layer_sizes[k + 1] ||
          theta_matrices[k].cols() != layer_sizes[k]) {
        throw DataError("SynthSpec: theta matrix dimension mismatch");
      }
    }
    if (outcome_beta.size() != layer_sizes[0]) {
      throw DataError("SynthSpec: outcome_beta must match the first layer size");
    }
  }

  static SynthSpec from_json(const nlohmann::json& j) {
    SynthSpec s;
    s.n = j.at("n").get<Eigen::Index>();
    for (const auto& v : j.at("layer_sizes")) s.layer_sizes.push_back(v.get<Eigen::Index>());
    for (const auto& m : j.at("theta_matrices")) {
      const auto rows = m.size();
      const auto cols = m.at(0).size();
      Eigen::MatrixXd theta(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              m.at(r).at(c).get<double>();
        }
      }
      s.theta_matrices.push_back(std::move(theta));
    }
    s.noise_sd = j.value("noise_sd", 1.0);
    const auto& beta = j.at("outcome_beta");
    s.outcome_beta.resize(static_cast<Eigen::Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i) {
      s.outcome_beta[static_cast<Eigen::Index>(i)] = beta.at(i).get<double>();
    }
    s.seed = j.value("seed", 1u);
    s.validate();
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["layer_sizes"] = layer_sizes;
    j["theta_matrices"] = nlohmann::json::array();
    for (const auto& theta : theta_matrices) {
      nlohmann::json m = nlohmann::json::array();
      for (Eigen::Index r = 0; r < theta.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < theta.cols(); ++c) row.push_back(theta(r, c));
        m.push_back(std::move(row));
      }
      j["theta_matrices"].push_back(std::move(m));
    }
    j["noise_sd"] = noise_sd;
    j["outcome_beta"] = std::vector<double>(outcome_beta.data(),
                                            outcome_beta.data() + outcome_beta.size());
    j["seed"] = seed;
    return j;
  }
};

struct SynthTruth {
  std::vector<std::vector<std::string>> layer_members;  // variable names per layer
  std::vector<Eigen::MatrixXd> theta_matrices;
  Eigen::VectorXd outcome_beta;
};

// Layer-1 variables are standard normal; each later layer is a linear map
// of the previous one plus Gaussian noise; the outcome is Bernoulli with
// logit given by the layer-1 variables only, so every lower layer is
// conditionally redundant by construction.
inline std::pair<PreparedDataset, SynthTruth> generate_layered(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Eigen::Index total = 0;
  for (const auto s : spec.layer_sizes) total += s;

  PreparedDataset d;
  d.design.resize(spec.n, total);
  d.outcome.resize(spec.n);
  d.strata_label = "synthetic";

  SynthTruth truth;
  truth.theta_matrices = spec.theta_matrices;
  truth.outcome_beta = spec.outcome_beta;

  Eigen::Index offset = 0;
  int var_id = 1;
  for (std::size_t k = 0; k < spec.layer_sizes.size(); ++k) {
    std::vector<std::string> members;
    for (Eigen::Index c = 0; c < spec.layer_sizes[k]; ++c) {
      const std::string name = "V" + std::to_string(var_id++);
      members.push_back(name);
      d.column_meta.push_back({name, name, 0.0, 1.0});
      d.parents.push_back({name, VariableKind::continuous, VariableRole::candidate, {}, ""});
    }
    truth.layer_members.push_back(std::move(members));
    if (k == 0) {
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        for (Eigen::Index c = 0; c < spec.layer_sizes[0]; ++c) {
          d.design(i, offset + c) = rng.normal();
        }
      }
    } else {
      const Eigen::MatrixXd& theta = spec.theta_matrices[k - 1];
      const Eigen::Index prev_offset = offset - spec.layer_sizes[k - 1];
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        const Eigen::VectorXd prev =
            d.design.row(i).segment(prev_offset, spec.layer_sizes[k - 1]).transpose();
        const Eigen::VectorXd mean = theta * prev;
        for (Eigen::Index c = 0; c < spec.layer_sizes[k]; ++c) {
          d.design(i, offset + c) = mean[c] + spec.noise_sd * rng.normal();
        }
      }
    }
    offset += spec.layer_sizes[k];
  }

  for (Eigen::Index i = 0; i < spec.n; ++i) {
    const double eta =
        d.design.row(i).head(spec.layer_sizes[0]).dot(spec.outcome_beta.transpose());
    d.outcome[i] = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
  }
  return {std::move(d), std::move(truth)};
}

// Analytic adaptive-lasso minimizer under an orthonormal design:
// beta_j = sign(z_j) * max(|z_j| - lambda*w_j, 0); infinite weight -> 0.
inline Eigen::VectorXd orthonormal_solution(const Eigen::VectorXd& z, double lambda,
                                            const Eigen::VectorXd& w) {
  Eigen::VectorXd beta(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (!std::isfinite(w[j])) {
      beta[j] = 0.0;
      continue;
    }
    const double mag = std::fabs(z[j]) - lambda * w[j];
    beta[j] = mag > 0.0 ? (z[j] > 0.0 ? mag : -mag) : 0.0;
  }
  return beta;
}

struct SubsetFit {
  std::vector<Eigen::Index> support;
  double deviance = 0.0;
};

// Exhaustive best-subset enumeration by unpenalized fit deviance; the
// selection-consistency oracle. Refuses beyond p = 12.
inline std::vector<SubsetFit> best_subset_oracle(const Eigen::MatrixXd& x,
                                                 const Eigen::VectorXd& y, Family family,
                                                 int k_max) {
  const Eigen::Index p = x.cols();
  if (p > 12) throw UsageError("best_subset_oracle: p > 12 is not enumerable");
  if (k_max < 0) throw UsageError("best_subset_oracle: k_max must be non-negative");
  k_max = std::min<int>(k_max, static_cast<int>(p));

  std::vector<SubsetFit> best(static_cast<std::size_t>(k_max) + 1);
  for (auto& b : best) b.deviance = std::numeric_limits<double>::infinity();

  for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size > k_max) continue;
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (mask & (1u << j)) support.push_back(j);
    }
    Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
      xs.col(static_cast<Eigen::Index>(k)) = x.col(support[k]);
    }
    double deviance;
    try {
      deviance = family == Family::logistic ? fit_logistic_mle(xs, y).deviance
                                            : fit_linear_ls(xs, y).deviance;
    } catch (const NumericError&) {
      continue;
    }
    auto& slot = best[static_cast<std::size_t>(size)];
    if (deviance < slot.deviance) {
      slot.deviance = deviance;
      slot.support = support;
    }
  }
  return best;
}

struct RecoveryMetrics {
  bool exact = false;
  std::vector<double> layer_jaccard;
  double support_precision = 0.0;
  double support_recall = 0.0;
};

inline RecoveryMetrics recovery_metrics(const LayerAssignment& assignment,
                                        const SynthTruth& truth) {
  RecoveryMetrics m;
  const std::size_t layers = std::max(assignment.layers.size(), truth.layer_members.size());
  m.exact = assignment.layers.size() == truth.layer_members.size();
  for (std::size_t k = 0; k < layers; ++k) {
    std::set<std::string> got, want;
    if (k < assignment.layers.size()) {
      got.insert(assignment.layers[k].parents.begin(), assignment.layers[k].parents.end());
    }
    if (k < truth.layer_members.size()) {
      want.insert(truth.layer_members[k].begin(), truth.layer_members[k].end());
    }
    std::size_t inter = 0;
    for (const auto& v : got) inter += want.count(v);
    const std::size_t uni = got.size() + want.size() - inter;
    const double jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    if (jaccard < 1.0) m.exact = false;
    m.layer_jaccard.push_back(jaccard);
  }

  std::set<std::string> got_all, want_all;
  for (const auto& layer : assignment.layers) {
    got_all.insert(layer.parents.begin(), layer.parents.end());
  }
  for (const auto& members : truth.layer_members) {
    want_all.insert(members.begin(), members.end());
  }
  std::size_t inter = 0;
  for (const auto& v : got_all) inter += want_all.count(v);
  m.support_precision = got_all.empty() ? 1.0
                                        : static_cast<double>(inter) /
                                              static_cast<double>(got_all.size());
  m.support_recall = want_all.empty() ? 1.0
                                      : static_cast<double>(inter) /
                                            static_cast<double>(want_all.size());
  return m;
}

// Writes the generated dataset in the same CSV schema the dataset module
// reads, with an "outcome" column; round-trip tested.
inline std::string synth_to_csv(const PreparedDataset& d) {
  std::string out;
  for (const auto& meta : d.column_meta) {
    out += meta.parent;
    out += ',';
  }
  out += "outcome\n";
  char buf[64];
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,", d.design(i, j));
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%d\n", d.outcome[i] > 0.5 ? 1 : 0);
    out += buf;
  }
  return out;
}

inline Schema synth_schema(const PreparedDataset& d) {
  Schema schema;
  for (const auto& parent : d.parents) {
    VariableSpec v;
    v.name = parent.name;
    v.kind = VariableKind::continuous;
    v.role = VariableRole::candidate;
    schema.push_back(v);
  }
  VariableSpec outcome;
  outcome.name = "outcome";
  outcome.kind = VariableKind::binary;
  outcome.role = VariableRole::outcome;
  outcome.positive_level = "1";
  schema.push_back(outcome);
  return schema;
}

}  // namespace pathlasso
