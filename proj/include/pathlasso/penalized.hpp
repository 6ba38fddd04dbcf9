#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pathlasso/dataset.hpp"
#include "pathlasso/errors.hpp"
#include "pathlasso/glm.hpp"
#include "pathlasso/math.hpp"

// Adaptive-lasso estimation: penalty weights from an initial estimator,
// lambda grids, cyclic coordinate descent for the linear and logistic
// families, cross-validation, KKT certification and post-selection
// inference. The intercept is never penalized.
//
// Conventions: the linear loss is (1/2)*RSS and the logistic loss is the
// negative log-likelihood, so the stationarity condition for an active
// coordinate is g_j + lambda*w_j*sign(beta_j) = 0 with g the loss gradient.

namespace pathlasso {

enum class Family { linear, logistic };

inline std::string to_string(Family f) {
  return f == Family::linear ? "linear" : "logistic";
}

struct PenaltyWeights {
  double gamma = 1.0;
  Eigen::VectorXd weights;  // +inf means the column can never enter
  std::string source;
};

struct CvPoint {
  double lambda = 0.0;
  double mean_deviance = 0.0;
  double se = 0.0;
};

struct AdaptiveLassoFit {
  Family family = Family::linear;
  double lambda = 0.0;
  PenaltyWeights weights;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  std::vector<Eigen::Index> active_set;
  double objective_value = 0.0;
  double kkt_violation = 0.0;
  std::vector<CvPoint> cv_curve;
  bool converged = false;
  int sweeps = 0;
};

struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& msg, AdaptiveLassoFit last)
      : NumericError(msg), last_iterate(std::move(last)) {}
  AdaptiveLassoFit last_iterate;
};

namespace detail {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline double penalty_term(const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0 && std::isfinite(w[j])) s += w[j] * std::fabs(beta[j]);
  }
  return s;
}

}  // namespace detail

// Loss gradient over the penalized columns at the given fit.
inline Eigen::VectorXd penalized_loss_gradient(const Eigen::MatrixXd& x,
                                               const Eigen::VectorXd& y, Family family,
                                               double intercept,
                                               const Eigen::VectorXd& beta) {
  if (family == Family::linear) {
    const Eigen::VectorXd r = y - Eigen::VectorXd::Constant(y.size(), intercept) - x * beta;
    return -(x.transpose() * r);
  }
  Eigen::VectorXd eta = x * beta;
  eta.array() += intercept;
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = sigmoid(eta[i]);
  return x.transpose() * (mu - y);
}

// Maximum stationarity violation: |g_j + lambda*w_j*sign(beta_j)| on active
// coordinates, max(0, |g_j| - lambda*w_j) on inactive ones.
inline double kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const AdaptiveLassoFit& fit) {
  const Eigen::VectorXd g =
      penalized_loss_gradient(x, y, fit.family, fit.intercept, fit.coefficients);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double w = fit.weights.weights[j];
    double v;
    if (fit.coefficients[j] != 0.0) {
      v = std::fabs(g[j] + fit.lambda * w * (fit.coefficients[j] > 0.0 ? 1.0 : -1.0));
    } else if (std::isfinite(w)) {
      v = std::max(0.0, std::fabs(g[j]) - fit.lambda * w);
    } else {
      v = 0.0;
    }
    worst = std::max(worst, v);
  }
  return worst;
}

// Penalty weights w_j = 1/|beta_init_j|^gamma from an unpenalized initial
// fit, with a ridge fallback when the information matrix is ill-conditioned.
inline PenaltyWeights compute_adaptive_weights(const Eigen::MatrixXd& x,
                                               const Eigen::VectorXd& y, Family family,
                                               double gamma = 1.0) {
  if (gamma <= 0.0) throw UsageError("compute_adaptive_weights: gamma must be positive");
  const Eigen::Index n = x.rows();

  // Condition estimate of the with-intercept moment matrix.
  Eigen::MatrixXd x1(n, x.cols() + 1);
  x1.col(0).setOnes();
  if (x.cols() > 0) x1.rightCols(x.cols()) = x;
  const Eigen::MatrixXd xtx = x1.transpose() * x1;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xtx);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();

  const double ridge = 1e-3 * static_cast<double>(n);
  Eigen::VectorXd init;
  std::string source;
  try {
    if (cond < 1e8) {
      const GLMFit fit = family == Family::logistic ? fit_logistic_mle(x, y)
                                                    : fit_linear_ls(x, y);
      init = fit.coefficients.tail(x.cols());
      source = family == Family::logistic ? "unpenalized logistic MLE"
                                          : "unpenalized least squares";
    } else {
      throw RankError("ill-conditioned information matrix");
    }
  } catch (const NumericError&) {
    try {
      const GLMFit fit = family == Family::logistic ? fit_logistic_mle(x, y, ridge)
                                                    : fit_linear_ls(x, y, ridge);
      init = fit.coefficients.tail(x.cols());
      source = "ridge fallback (penalty 1e-3*n)";
    } catch (const std::exception& e) {
      throw WeightError(std::string("compute_adaptive_weights: initial fit failed: ") +
                        e.what());
    }
  }

  PenaltyWeights pw;
  pw.gamma = gamma;
  pw.source = source;
  pw.weights.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    pw.weights[j] = init[j] == 0.0 ? std::numeric_limits<double>::infinity()
                                   : std::pow(std::fabs(init[j]), -gamma);
  }
  return pw;
}

// Descending log-spaced grid; lambda_max is the smallest lambda at which
// every penalized coefficient is zero, from the null-model gradient.
inline std::vector<double> lambda_grid(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                       Family family, const PenaltyWeights& w,
                                       int length = 100, double ratio = 1e-4) {
  (void)family;  // the null-model gradient is -X'(y - ybar) for both families
  bool any_finite = false;
  const double ybar = y.mean();
  const Eigen::VectorXd g = -(x.transpose() * (y.array() - ybar).matrix());
  double lambda_max = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (!std::isfinite(w.weights[j])) continue;
    any_finite = true;
    lambda_max = std::max(lambda_max, std::fabs(g[j]) / w.weights[j]);
  }
  if (!any_finite) throw GridError("lambda_grid: all penalty weights are infinite");
  // Nudge past the exact threshold so the fit at grid[0] is all-zero instead
  // of activating the argmax column by one ulp of rounding.
  lambda_max = std::max(lambda_max * (1.0 + 1e-10), 1e-10);

  std::vector<double> grid(static_cast<std::size_t>(std::max(length, 2)));
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * ratio);
  const auto m = static_cast<double>(grid.size() - 1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = std::exp(log_max + (log_min - log_max) * static_cast<double>(k) / m);
  }
  return grid;
}

namespace detail {

// Weighted cyclic coordinate descent on (1/2)*sum v_i (z_i - b0 - x*b)^2
// + lambda*sum w_j |b_j|. Returns sweep count; converges on max
// coefficient change.
inline int weighted_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                       const Eigen::VectorXd& v, const Eigen::VectorXd& w, double lambda,
                       double& intercept, Eigen::VectorXd& beta, double tol, int max_sweeps) {
  const Eigen::Index p = x.cols();
  const double v_total = v.sum();
  Eigen::VectorXd a(p);
  for (Eigen::Index j = 0; j < p; ++j) a[j] = (v.array() * x.col(j).array().square()).sum();

  Eigen::VectorXd r = z - Eigen::VectorXd::Constant(z.size(), intercept) - x * beta;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    const double d0 = (v.array() * r.array()).sum() / v_total;
    if (d0 != 0.0) {
      intercept += d0;
      r.array() -= d0;
      max_delta = std::fabs(d0);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(w[j]) || a[j] <= 0.0) {
        if (beta[j] != 0.0) {
          r += x.col(j) * beta[j];
          beta[j] = 0.0;
        }
        continue;
      }
      const double zj = (v.array() * x.col(j).array() * r.array()).sum() + a[j] * beta[j];
      const double bj = soft_threshold(zj, lambda * w[j]) / a[j];
      const double delta = bj - beta[j];
      if (delta != 0.0) {
        r -= x.col(j) * delta;
        beta[j] = bj;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    if (max_delta < tol) {
      ++sweep;
      break;
    }
  }
  return sweep;
}

}  // namespace detail

// Coordinate-descent solve at a fixed lambda. Coefficients are on the scale
// of the design passed in; the pipeline standardizes upstream and converts
// for reporting.
inline AdaptiveLassoFit fit_penalized(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      Family family, const PenaltyWeights& w, double lambda,
                                      const AdaptiveLassoFit* warm_start = nullptr) {
  if (lambda < 0.0) throw UsageError("fit_penalized: lambda must be non-negative");
  if (w.weights.size() != x.cols()) throw DataError("fit_penalized: weight size mismatch");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  constexpr int kMaxSweeps = 10000;

  AdaptiveLassoFit fit;
  fit.family = family;
  fit.lambda = lambda;
  fit.weights = w;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  if (warm_start != nullptr && warm_start->coefficients.size() == p) {
    fit.coefficients = warm_start->coefficients;
    fit.intercept = warm_start->intercept;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(w.weights[j])) fit.coefficients[j] = 0.0;
    }
  }

  int total_sweeps = 0;
  if (family == Family::linear) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    total_sweeps = detail::weighted_cd(x, y, ones, w.weights, lambda, fit.intercept,
                                       fit.coefficients, 1e-9, kMaxSweeps);
    const Eigen::VectorXd r =
        y - Eigen::VectorXd::Constant(n, fit.intercept) - x * fit.coefficients;
    fit.objective_value =
        0.5 * r.squaredNorm() + lambda * detail::penalty_term(w.weights, fit.coefficients);
    fit.converged = total_sweeps < kMaxSweeps;
  } else {
    const auto objective = [&](double intercept, const Eigen::VectorXd& beta) {
      Eigen::VectorXd eta = x * beta;
      eta.array() += intercept;
      Eigen::VectorXd mu(n);
      for (Eigen::Index i = 0; i < n; ++i) mu[i] = sigmoid(eta[i]);
      return 0.5 * detail::binomial_deviance(y, mu) +
             lambda * detail::penalty_term(w.weights, beta);
    };

    double prev_obj = objective(fit.intercept, fit.coefficients);
    bool outer_converged = false;
    for (int outer = 0; outer < 500 && total_sweeps < kMaxSweeps; ++outer) {
      Eigen::VectorXd eta = x * fit.coefficients;
      eta.array() += fit.intercept;
      Eigen::VectorXd mu(n), v(n), z(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        mu[i] = sigmoid(eta[i]);
        v[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-5);
        z[i] = eta[i] + (y[i] - mu[i]) / v[i];
      }
      const double base_intercept = fit.intercept;
      const Eigen::VectorXd base_beta = fit.coefficients;
      total_sweeps += detail::weighted_cd(x, z, v, w.weights, lambda, fit.intercept,
                                          fit.coefficients, 1e-10,
                                          std::min(1000, kMaxSweeps - total_sweeps));

      // The quadratic approximation can overshoot far from the optimum;
      // backtrack toward the previous iterate until the true penalized
      // objective stops increasing.
      double obj = objective(fit.intercept, fit.coefficients);
      for (int halving = 0; obj > prev_obj + 1e-12 && halving < 50; ++halving) {
        fit.intercept = 0.5 * (fit.intercept + base_intercept);
        fit.coefficients = 0.5 * (fit.coefficients + base_beta);
        obj = objective(fit.intercept, fit.coefficients);
      }
      fit.objective_value = obj;
      const bool small_change = std::fabs(prev_obj - obj) / (std::fabs(obj) + 0.1) < 1e-8;
      prev_obj = obj;
      if (small_change) {
        // Keep iterating until the true-gradient stationarity certificate
        // is met, not just the quadratic approximation's.
        fit.kkt_violation = kkt_residual(x, y, fit);
        if (fit.kkt_violation <= 1e-7 || outer >= 498) {
          outer_converged = true;
          break;
        }
      }
    }
    fit.converged = outer_converged && total_sweeps < kMaxSweeps;
  }
  fit.sweeps = total_sweeps;
  fit.kkt_violation = kkt_residual(x, y, fit);
  fit.active_set.clear();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (fit.coefficients[j] != 0.0) fit.active_set.push_back(j);
  }
  if (!fit.converged) {
    throw ConvergenceError("fit_penalized: no convergence after " +
                               std::to_string(total_sweeps) + " sweeps",
                           fit);
  }
  return fit;
}

enum class CvRule { min, one_se };

struct CvResult {
  double lambda_star = 0.0;
  std::vector<CvPoint> curve;
  AdaptiveLassoFit fit;  // full-data fit at lambda_star, cv_curve attached
};

namespace detail {

inline double validation_deviance(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  Family family, const AdaptiveLassoFit& fit) {
  Eigen::VectorXd eta = x * fit.coefficients;
  eta.array() += fit.intercept;
  if (family == Family::linear) {
    return (y - eta).squaredNorm();
  }
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double m = std::min(std::max(sigmoid(eta[i]), 1e-12), 1.0 - 1e-12);
    dev += y[i] > 0.5 ? -2.0 * std::log(m) : -2.0 * std::log1p(-m);
  }
  return dev;
}

// Deterministic fold assignment; logistic folds are stratified by class.
inline std::vector<int> fold_assignment(const Eigen::VectorXd& y, Family family, int folds,
                                        std::uint64_t seed) {
  const Eigen::Index n = y.size();
  std::vector<int> fold(static_cast<std::size_t>(n), 0);
  Rng rng(seed);
  if (family == Family::logistic) {
    std::vector<Eigen::Index> class0, class1;
    for (Eigen::Index i = 0; i < n; ++i) (y[i] > 0.5 ? class1 : class0).push_back(i);
    if (static_cast<int>(std::min(class0.size(), class1.size())) < 2) {
      throw DataError("cross_validate: a class is too small to stratify");
    }
    rng.shuffle(class0);
    rng.shuffle(class1);
    int next = 0;
    for (const auto i : class0) fold[static_cast<std::size_t>(i)] = next++ % folds;
    for (const auto i : class1) fold[static_cast<std::size_t>(i)] = next++ % folds;
  } else {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      fold[static_cast<std::size_t>(idx[k])] = static_cast<int>(k) % folds;
    }
  }
  return fold;
}

}  // namespace detail

// K-fold cross-validation over a descending lambda grid with warm starts.
// Selection rule "min" picks the deviance-minimizing lambda (largest such
// lambda on ties); "one_se" the largest lambda within one standard error.
// With fold_gamma > 0 the adaptive weights are recomputed on each training
// fold (held-out rows then never inform the penalty they are scored under);
// columns excluded by the full-data weights stay excluded in every fold.
inline CvResult cross_validate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               Family family, const PenaltyWeights& w,
                               const std::vector<double>& grid, int folds,
                               std::uint64_t seed, CvRule rule = CvRule::min,
                               double fold_gamma = 0.0) {
  if (folds < 2) throw UsageError("cross_validate: folds must be >= 2");
  if (y.size() < folds) throw DataError("cross_validate: fewer rows than folds");
  const auto fold = detail::fold_assignment(y, family, folds, seed);
  const Eigen::Index n = y.size();

  // fold_mean[f][k]: per-observation validation deviance of fold f at grid k.
  std::vector<std::vector<double>> fold_mean(
      static_cast<std::size_t>(folds), std::vector<double>(grid.size(), 0.0));

  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, val;
    for (Eigen::Index i = 0; i < n; ++i) {
      (fold[static_cast<std::size_t>(i)] == f ? val : train).push_back(i);
    }
    if (val.empty()) continue;
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), x.cols());
    Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      xt.row(static_cast<Eigen::Index>(i)) = x.row(train[i]);
      yt[static_cast<Eigen::Index>(i)] = y[train[i]];
    }
    Eigen::MatrixXd xv(static_cast<Eigen::Index>(val.size()), x.cols());
    Eigen::VectorXd yv(static_cast<Eigen::Index>(val.size()));
    for (std::size_t i = 0; i < val.size(); ++i) {
      xv.row(static_cast<Eigen::Index>(i)) = x.row(val[i]);
      yv[static_cast<Eigen::Index>(i)] = y[val[i]];
    }
    if (family == Family::logistic) {
      const double m = yt.mean();
      if (m <= 0.0 || m >= 1.0) {
        throw DataError("cross_validate: a training fold lost an outcome class");
      }
    }
    PenaltyWeights wf = w;
    if (fold_gamma > 0.0) {
      wf = compute_adaptive_weights(xt, yt, family, fold_gamma);
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (!std::isfinite(w.weights[j])) {
          wf.weights[j] = std::numeric_limits<double>::infinity();
        }
      }
    }
    AdaptiveLassoFit warm;
    bool have_warm = false;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const AdaptiveLassoFit fit =
          fit_penalized(xt, yt, family, wf, grid[k], have_warm ? &warm : nullptr);
      fold_mean[static_cast<std::size_t>(f)][k] =
          detail::validation_deviance(xv, yv, family, fit) /
          static_cast<double>(val.size());
      warm = fit;
      have_warm = true;
    }
  }

  CvResult result;
  result.curve.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double mean = 0.0;
    for (int f = 0; f < folds; ++f) mean += fold_mean[static_cast<std::size_t>(f)][k];
    mean /= static_cast<double>(folds);
    double ss = 0.0;
    for (int f = 0; f < folds; ++f) {
      const double d = fold_mean[static_cast<std::size_t>(f)][k] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(folds - 1));
    result.curve[k] = {grid[k], mean, sd / std::sqrt(static_cast<double>(folds))};
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (result.curve[k].mean_deviance < result.curve[best].mean_deviance) best = k;
  }
  if (rule == CvRule::one_se) {
    const double limit = result.curve[best].mean_deviance + result.curve[best].se;
    for (std::size_t k = 0; k <= best; ++k) {
      if (result.curve[k].mean_deviance <= limit) {
        best = k;
        break;
      }
    }
  }
  result.lambda_star = grid[best];

  // Full-data path down to lambda_star, warm-started for determinism.
  AdaptiveLassoFit warm;
  bool have_warm = false;
  for (std::size_t k = 0; k <= best; ++k) {
    warm = fit_penalized(x, y, family, w, grid[k], have_warm ? &warm : nullptr);
    have_warm = true;
  }
  result.fit = warm;
  result.fit.cv_curve = result.curve;
  return result;
}

struct WaldRow {
  std::string contrast;
  double beta = 0.0;
  double se = 0.0;
  double chi2 = 0.0;
  double p_value = 1.0;
  bool active = false;
  bool flagged = false;  // refit failed; layering treats as non-significant
};

struct WaldTable {
  WaldRow intercept;
  std::vector<WaldRow> rows;  // one per design column, in column order
};

// Unpenalized refit restricted to the active set; inactive columns are
// reported as (0, 0, 0, 1). Coefficients are converted back to the
// original variable scale via the column metadata.
inline WaldTable post_selection_wald(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const AdaptiveLassoFit& fit,
                                     const std::vector<ColumnMeta>& meta) {
  WaldTable table;
  table.intercept.contrast = "Intercept";
  table.rows.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    table.rows[static_cast<std::size_t>(j)].contrast =
        j < static_cast<Eigen::Index>(meta.size()) ? meta[static_cast<std::size_t>(j)].contrast
                                                   : "col" + std::to_string(j);
  }
  const auto& active = fit.active_set;
  if (active.empty()) {
    const double m = std::min(std::max(y.mean(), 1e-12), 1.0 - 1e-12);
    if (fit.family == Family::logistic) {
      table.intercept.beta = std::log(m / (1.0 - m));
    } else {
      table.intercept.beta = y.mean();
    }
    table.intercept.active = true;
    return table;
  }

  Eigen::MatrixXd xa(x.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    xa.col(static_cast<Eigen::Index>(k)) = x.col(active[k]);
  }
  try {
    const GLMFit refit = fit.family == Family::logistic ? fit_logistic_mle(xa, y)
                                                        : fit_linear_ls(xa, y);
    double intercept_shift = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Eigen::Index c = static_cast<Eigen::Index>(k) + 1;
      const Eigen::Index j = active[k];
      const ColumnMeta& m = j < static_cast<Eigen::Index>(meta.size())
                                ? meta[static_cast<std::size_t>(j)]
                                : ColumnMeta{};
      WaldRow& row = table.rows[static_cast<std::size_t>(j)];
      row.beta = refit.coefficients[c] / m.scale;
      row.se = refit.standard_errors[c] / m.scale;
      row.chi2 = refit.wald_chi2[c];
      row.p_value = refit.p_values[c];
      row.active = true;
      intercept_shift += refit.coefficients[c] * m.center / m.scale;
    }
    table.intercept.beta = refit.coefficients[0] - intercept_shift;
    table.intercept.se = refit.standard_errors[0];
    table.intercept.chi2 = refit.wald_chi2[0];
    table.intercept.p_value = refit.p_values[0];
    table.intercept.active = true;
  } catch (const NumericError&) {
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Eigen::Index j = active[k];
      const ColumnMeta& m = j < static_cast<Eigen::Index>(meta.size())
                                ? meta[static_cast<std::size_t>(j)]
                                : ColumnMeta{};
      WaldRow& row = table.rows[static_cast<std::size_t>(j)];
      row.beta = fit.coefficients[j] / m.scale;
      row.se = 0.0;
      row.chi2 = 0.0;
      row.p_value = 1.0;
      row.active = true;
      row.flagged = true;
    }
    table.intercept.beta = fit.intercept;
    table.intercept.flagged = true;
  }
  return table;
}

}  // namespace pathlasso
