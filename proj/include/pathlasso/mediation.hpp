#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pathlasso/errors.hpp"
#include "pathlasso/glm.hpp"
#include "pathlasso/layering.hpp"
#include "pathlasso/network.hpp"

// Latent mediation checks: an exact identity verifier on finite discrete
// joints, and an empirical diagnostic on fitted layer models.

namespace pathlasso {

// Finite joint distribution over (X, M, Y).
struct DiscreteJoint {
  std::size_t nx = 0, nm = 0, ny = 0;
  std::vector<double> p;  // p[(x*nm + m)*ny + y]

  double& at(std::size_t x, std::size_t m, std::size_t y) {
    return p[(x * nm + m) * ny + y];
  }
  double at(std::size_t x, std::size_t m, std::size_t y) const {
    return p[(x * nm + m) * ny + y];
  }

  void validate() const {
    if (p.size() != nx * nm * ny || p.empty()) throw DataError("DiscreteJoint: bad shape");
    double total = 0.0;
    for (const double v : p) {
      if (v < 0.0) throw DataError("DiscreteJoint: negative cell");
      total += v;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw DataError("DiscreteJoint: mass != 1");
  }

  double px(std::size_t x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
      for (std::size_t y = 0; y < ny; ++y) s += at(x, m, y);
    }
    return s;
  }
  double pxm(std::size_t x, std::size_t m) const {
    double s = 0.0;
    for (std::size_t y = 0; y < ny; ++y) s += at(x, m, y);
    return s;
  }
  double pxy(std::size_t x, std::size_t y) const {
    double s = 0.0;
    for (std::size_t m = 0; m < nm; ++m) s += at(x, m, y);
    return s;
  }
};

struct MediationVerdict {
  bool premise_no_direct_m_effect = true;   // P(Y|X) = P(Y|X,M) everywhere
  bool premise_conditional_independence = true;  // P(M,Y|X) = P(M|X)P(Y|X)
  bool conclusion_verified = false;         // derivation chain holds cell-by-cell
  double max_premise_error = 0.0;
  double max_conclusion_error = 0.0;
  std::size_t skipped_cells = 0;            // undefined conditionals
  std::string violating_cell;               // first premise violation, if any
};

// Verifies the premises and, when they hold within tolerance, the
// derivation chain down to P(X,M) = P(X)P(M|X), cell by cell.
inline MediationVerdict mediation_identity_check(const DiscreteJoint& joint,
                                                 double tolerance = 1e-10) {
  joint.validate();
  MediationVerdict v;

  for (std::size_t x = 0; x < joint.nx; ++x) {
    const double px = joint.px(x);
    if (px <= 0.0) {
      v.skipped_cells += joint.nm * joint.ny;
      continue;
    }
    for (std::size_t y = 0; y < joint.ny; ++y) {
      const double py_given_x = joint.pxy(x, y) / px;
      for (std::size_t m = 0; m < joint.nm; ++m) {
        const double pxm = joint.pxm(x, m);
        // Premise: Y independent of M given X, stated as P(Y|X) = P(Y|X,M).
        if (pxm > 0.0) {
          const double py_given_xm = joint.at(x, m, y) / pxm;
          const double err = std::fabs(py_given_x - py_given_xm);
          v.max_premise_error = std::max(v.max_premise_error, err);
          if (err > tolerance && v.premise_no_direct_m_effect) {
            v.premise_no_direct_m_effect = false;
            v.violating_cell = "x=" + std::to_string(x) + ",m=" + std::to_string(m) +
                               ",y=" + std::to_string(y);
          }
        } else {
          ++v.skipped_cells;
        }
        // Premise: P(M,Y|X) = P(M|X) P(Y|X).
        const double lhs = joint.at(x, m, y) / px;
        const double rhs = (pxm / px) * py_given_x;
        const double err2 = std::fabs(lhs - rhs);
        v.max_premise_error = std::max(v.max_premise_error, err2);
        if (err2 > tolerance && v.premise_conditional_independence) {
          v.premise_conditional_independence = false;
          if (v.violating_cell.empty()) {
            v.violating_cell = "x=" + std::to_string(x) + ",m=" + std::to_string(m) +
                               ",y=" + std::to_string(y);
          }
        }
      }
    }
  }

  if (!v.premise_no_direct_m_effect || !v.premise_conditional_independence) {
    return v;
  }

  // Derivation chain: from P(M,Y,X) = P(M,Y|X)P(X) and the premises,
  // P(X)P(M|X) = P(M,Y,X)/P(Y|X) = P(M,Y,X)/P(Y|X,M) = P(X,M).
  double worst = 0.0;
  for (std::size_t x = 0; x < joint.nx; ++x) {
    const double px = joint.px(x);
    if (px <= 0.0) continue;
    for (std::size_t m = 0; m < joint.nm; ++m) {
      const double pxm = joint.pxm(x, m);
      const double target = px * (pxm / px);  // P(X)P(M|X)
      for (std::size_t y = 0; y < joint.ny; ++y) {
        const double py_given_x = joint.pxy(x, y) / px;
        if (py_given_x <= 0.0) {
          ++v.skipped_cells;
          continue;
        }
        const double step5 = joint.at(x, m, y) / py_given_x;  // P(M,Y,X)/P(Y|X)
        worst = std::max(worst, std::fabs(step5 - target));
        if (pxm > 0.0) {
          const double py_given_xm = joint.at(x, m, y) / pxm;
          if (py_given_xm > 0.0) {
            const double step6 = joint.at(x, m, y) / py_given_xm;  // = P(X,M)
            worst = std::max(worst, std::fabs(step6 - pxm));
          }
        }
      }
    }
  }
  v.max_conclusion_error = worst;
  v.conclusion_verified = worst <= tolerance;
  return v;
}

struct MediationColumnDiagnostic {
  std::string contrast;
  double marginal_beta = 0.0;     // outcome on the lower column alone
  double conditional_beta = 0.0;  // outcome on eta_k plus the lower column
  double shrinkage_ratio = 1.0;   // |conditional| / |marginal|; 1 when marginal ~ 0
};

struct MediationReport {
  int upper_layer = 0;  // 0-based index k; lower block is layer k+1
  std::vector<MediationColumnDiagnostic> columns;
  double lr_statistic = 0.0;  // lower block given eta_k
  double lr_df = 0.0;
  double lr_p_value = 1.0;
};

// Empirical redundancy diagnostic: how much each layer-(k+1) column's
// outcome association shrinks once the upper layer's latent score is in
// the model, plus a likelihood-ratio test of the whole lower block.
inline MediationReport mediation_diagnostics(const PreparedDataset& d,
                                             const LayerAssignment& layers,
                                             std::size_t upper_layer) {
  if (upper_layer + 1 >= layers.layers.size()) {
    throw UsageError("mediation_diagnostics: no layer below the given index");
  }
  const LatentScores scores = latent_scores(d, layers);
  const Eigen::VectorXd& eta = scores.eta[upper_layer];
  const Layer& lower = layers.layers[upper_layer + 1];

  MediationReport report;
  report.upper_layer = static_cast<int>(upper_layer);

  for (std::size_t c = 0; c < lower.selected_columns.size(); ++c) {
    const Eigen::Index j = lower.selected_columns[c];
    MediationColumnDiagnostic diag;
    diag.contrast = lower.selected_contrasts[c];

    Eigen::MatrixXd x1(d.n(), 1);
    x1.col(0) = d.design.col(j);
    Eigen::MatrixXd x2(d.n(), 2);
    x2.col(0) = eta;
    x2.col(1) = d.design.col(j);
    try {
      diag.marginal_beta = fit_logistic_mle(x1, d.outcome).coefficients[1];
      diag.conditional_beta = fit_logistic_mle(x2, d.outcome).coefficients[2];
    } catch (const NumericError&) {
      diag.marginal_beta = 0.0;
      diag.conditional_beta = 0.0;
    }
    diag.shrinkage_ratio = std::fabs(diag.marginal_beta) < 1e-8
                               ? 1.0
                               : std::fabs(diag.conditional_beta) /
                                     std::fabs(diag.marginal_beta);
    report.columns.push_back(std::move(diag));
  }

  // LR test: outcome ~ eta_k versus outcome ~ eta_k + lower block.
  try {
    Eigen::MatrixXd base(d.n(), 1);
    base.col(0) = eta;
    const double dev0 = fit_logistic_mle(base, d.outcome).deviance;

    Eigen::MatrixXd full(d.n(), 1 + static_cast<Eigen::Index>(lower.selected_columns.size()));
    full.col(0) = eta;
    for (std::size_t c = 0; c < lower.selected_columns.size(); ++c) {
      full.col(1 + static_cast<Eigen::Index>(c)) = d.design.col(lower.selected_columns[c]);
    }
    const double dev1 = fit_logistic_mle(full, d.outcome).deviance;
    report.lr_statistic = std::max(0.0, dev0 - dev1);
    report.lr_df = static_cast<double>(lower.selected_columns.size());
    report.lr_p_value = chi2_sf(report.lr_statistic, report.lr_df);
  } catch (const NumericError&) {
    report.lr_p_value = 1.0;
  }
  return report;
}

}  // namespace pathlasso
