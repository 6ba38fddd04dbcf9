#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pathlasso/errors.hpp"
#include "pathlasso/math.hpp"

// Unpenalized maximum-likelihood fits. Logistic regression uses
// iteratively reweighted least squares; standard errors come from the
// inverse observed information at the optimum.

namespace pathlasso {

struct GLMFit {
  Eigen::VectorXd coefficients;    // intercept first
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd wald_chi2;       // (beta/SE)^2
  Eigen::VectorXd p_values;        // chi-square, 1 df
  double deviance = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> deviance_trajectory;
};

namespace detail {

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& design) {
  Eigen::MatrixXd x(design.rows(), design.cols() + 1);
  x.col(0).setOnes();
  if (design.cols() > 0) x.rightCols(design.cols()) = design;
  return x;
}

inline double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double m = std::min(std::max(mu[i], 1e-12), 1.0 - 1e-12);
    dev += y[i] > 0.5 ? -2.0 * std::log(m) : -2.0 * std::log1p(-m);
  }
  return dev;
}

inline void fill_wald(GLMFit& fit) {
  const Eigen::Index k = fit.coefficients.size();
  fit.wald_chi2.resize(k);
  fit.p_values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (fit.standard_errors[j] > 0.0) {
      const double z = fit.coefficients[j] / fit.standard_errors[j];
      fit.wald_chi2[j] = z * z;
      fit.p_values[j] = chi2_sf(fit.wald_chi2[j], 1.0);
    } else {
      fit.wald_chi2[j] = 0.0;
      fit.p_values[j] = 1.0;
    }
  }
}

}  // namespace detail

// Logistic MLE via IRLS. `design` has no intercept column; one is always
// added and reported first. Optional ridge penalty (on non-intercept
// coefficients) supports the ill-conditioned fallback path.
inline GLMFit fit_logistic_mle(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                               double ridge = 0.0, int max_iterations = 100,
                               double tol = 1e-10) {
  const Eigen::Index n = outcome.size();
  if (design.rows() != n) throw DataError("fit_logistic_mle: dimension mismatch");
  const double ybar = outcome.mean();
  if (ybar <= 0.0 || ybar >= 1.0) {
    throw DataError("fit_logistic_mle: outcome has a single class");
  }
  if (ridge == 0.0 && n <= design.cols() + 1) {
    throw RankError("fit_logistic_mle: n must exceed the number of coefficients");
  }

  const Eigen::MatrixXd x = detail::with_intercept(design);
  const Eigen::Index k = x.cols();

  // Column scales for the separation check (coefficient magnitude on a
  // standardized scale).
  Eigen::VectorXd col_sd(k);
  col_sd[0] = 1.0;
  for (Eigen::Index j = 1; j < k; ++j) {
    const double mean = x.col(j).mean();
    const double ss = (x.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / std::max<double>(1.0, static_cast<double>(n - 1)));
    col_sd[j] = sd > 0.0 ? sd : 1.0;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  beta[0] = std::log(ybar / (1.0 - ybar));

  GLMFit fit;
  double dev = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd info(k, k);

  for (int iter = 1; iter <= max_iterations; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = sigmoid(eta[i]);
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    const double new_dev = detail::binomial_deviance(outcome, mu);
    fit.deviance_trajectory.push_back(new_dev);
    const bool done = std::fabs(dev - new_dev) / (std::fabs(new_dev) + 0.1) < tol;
    dev = new_dev;
    fit.iterations = iter;

    info = x.transpose() * w.asDiagonal() * x;
    for (Eigen::Index j = 1; j < k; ++j) info(j, j) += ridge;
    Eigen::VectorXd penalized_beta = beta;
    penalized_beta[0] = 0.0;
    const Eigen::VectorXd score = x.transpose() * (outcome - mu) - ridge * penalized_beta;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw RankError("fit_logistic_mle: singular information matrix");
    }
    const Eigen::VectorXd step = ldlt.solve(score);
    beta += step;

    // Separation: a diverging standardized coefficient while the step is
    // not shrinking means the likelihood has no interior maximum.
    for (Eigen::Index j = 1; j < k; ++j) {
      if (std::fabs(beta[j] * col_sd[j]) > 15.0 && step.norm() > 1e-4) {
        throw SeparationError("fit_logistic_mle: complete or quasi-complete separation");
      }
    }

    if (done) {
      fit.converged = true;
      break;
    }
  }

  fit.coefficients = beta;
  fit.deviance = dev;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw RankError("fit_logistic_mle: singular information matrix at optimum");
  }
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  fit.standard_errors.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.standard_errors[j] = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : 0.0;
  }
  detail::fill_wald(fit);
  return fit;
}

// Ordinary least squares with classical standard errors; Wald chi-square
// uses the normal approximation (beta/SE)^2 to mirror the logistic tables.
inline GLMFit fit_linear_ls(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                            double ridge = 0.0) {
  const Eigen::Index n = outcome.size();
  if (design.rows() != n) throw DataError("fit_linear_ls: dimension mismatch");
  const Eigen::MatrixXd x = detail::with_intercept(design);
  const Eigen::Index k = x.cols();
  if (ridge == 0.0 && n <= k) {
    throw RankError("fit_linear_ls: n must exceed the number of coefficients");
  }

  Eigen::MatrixXd xtx = x.transpose() * x;
  for (Eigen::Index j = 1; j < k; ++j) xtx(j, j) += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw RankError("fit_linear_ls: singular design");
  }
  GLMFit fit;
  fit.coefficients = ldlt.solve(x.transpose() * outcome);
  const Eigen::VectorXd resid = outcome - x * fit.coefficients;
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / std::max<double>(1.0, static_cast<double>(n - k));
  const Eigen::MatrixXd cov = sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  fit.standard_errors.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.standard_errors[j] = cov(j, j) > 0.0 ? std::sqrt(cov(j, j)) : 0.0;
  }
  fit.deviance = rss;
  fit.converged = true;
  fit.iterations = 1;
  detail::fill_wald(fit);
  return fit;
}

// Gradient of the binomial log-likelihood at the reported coefficients;
// used by the optimality invariant checks.
inline Eigen::VectorXd logistic_score(const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd& outcome,
                                      const Eigen::VectorXd& coefficients) {
  const Eigen::MatrixXd x = detail::with_intercept(design);
  const Eigen::VectorXd eta = x * coefficients;
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = sigmoid(eta[i]);
  return x.transpose() * (outcome - mu);
}

}  // namespace pathlasso
