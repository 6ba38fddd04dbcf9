#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "pathlasso/dataset.hpp"
#include "pathlasso/glm.hpp"
#include "pathlasso/math.hpp"
#include "pathlasso/table.hpp"

// Univariate outcome screening and balance testing between included and
// excluded samples.

namespace pathlasso {

struct ScreenContrast {
  std::string contrast;
  double odds_ratio = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  double p_value = 1.0;
};

struct ScreenResult {
  std::string parent;
  std::vector<ScreenContrast> contrasts;
  bool selected = false;
  bool screened = true;   // false when the per-variable fit failed
  std::string error;
};

// One logistic fit per parent variable (all of its contrasts together).
// A parent is selected when any contrast has p < alpha. Fit failures mark
// the variable unscreened instead of aborting the batch.
inline std::vector<ScreenResult> univariate_screen(const PreparedDataset& d,
                                                   double alpha = 0.05) {
  if (alpha <= 0.0 || alpha >= 1.0) throw UsageError("univariate_screen: alpha out of range");
  std::vector<ScreenResult> results;
  for (const auto& parent : d.parents) {
    ScreenResult res;
    res.parent = parent.name;
    const auto cols = d.columns_of(parent.name);
    if (cols.empty()) continue;  // all contrasts dropped (e.g. zero variance)
    Eigen::MatrixXd x(d.n(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = d.design.col(cols[k]);
    try {
      const GLMFit fit = fit_logistic_mle(x, d.outcome);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const Eigen::Index c = static_cast<Eigen::Index>(k) + 1;  // skip intercept
        const auto& meta = d.column_meta[cols[k]];
        // Report on the original variable scale.
        const double beta = fit.coefficients[c] / meta.scale;
        const double se = fit.standard_errors[c] / meta.scale;
        ScreenContrast sc;
        sc.contrast = meta.contrast;
        sc.odds_ratio = std::exp(beta);
        sc.ci_low = std::exp(beta - 1.959963984540054 * se);
        sc.ci_high = std::exp(beta + 1.959963984540054 * se);
        sc.p_value = fit.p_values[c];
        if (sc.p_value < alpha) res.selected = true;
        res.contrasts.push_back(sc);
      }
    } catch (const std::exception& e) {
      res.screened = false;
      res.error = e.what();
    }
    results.push_back(std::move(res));
  }
  return results;
}

enum class BalanceTestKind { welch_t, rank_sum, chi_square };

struct BalanceRow {
  std::string variable;
  BalanceTestKind test_kind = BalanceTestKind::welch_t;
  double statistic = 0.0;
  double p_value = 1.0;
  bool exact_test_unavailable = false;  // expected cell count < 1
  // Group summaries: continuous -> mean/SD, categorical -> per-level counts.
  std::optional<std::pair<double, double>> group1_mean_sd;
  std::optional<std::pair<double, double>> group2_mean_sd;
  std::map<std::string, std::pair<std::size_t, std::size_t>> level_counts;
};

namespace detail {

struct TwoSample {
  std::vector<double> a;
  std::vector<double> b;
};

inline TwoSample numeric_groups(const RawTable& g1, const RawTable& g2,
                                const std::string& variable) {
  TwoSample s;
  const std::size_t c1 = g1.column_index(variable);
  const std::size_t c2 = g2.column_index(variable);
  for (const auto& row : g1.rows) {
    if (!cell_missing(row[c1])) s.a.push_back(cell_number(row[c1]));
  }
  for (const auto& row : g2.rows) {
    if (!cell_missing(row[c2])) s.b.push_back(cell_number(row[c2]));
  }
  return s;
}

inline std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return {mean, n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace detail

inline BalanceRow welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  BalanceRow row;
  row.test_kind = BalanceTestKind::welch_t;
  const auto [m1, s1] = detail::mean_sd(a);
  const auto [m2, s2] = detail::mean_sd(b);
  row.group1_mean_sd = {m1, s1};
  row.group2_mean_sd = {m2, s2};
  const double v1 = s1 * s1 / static_cast<double>(a.size());
  const double v2 = s2 * s2 / static_cast<double>(b.size());
  if (v1 + v2 <= 0.0) {
    row.statistic = 0.0;
    row.p_value = 1.0;
    return row;
  }
  const double t = (m1 - m2) / std::sqrt(v1 + v2);
  const double df = (v1 + v2) * (v1 + v2) /
                    (v1 * v1 / std::max<double>(1.0, static_cast<double>(a.size() - 1)) +
                     v2 * v2 / std::max<double>(1.0, static_cast<double>(b.size() - 1)));
  row.statistic = t;
  row.p_value = student_t_two_sided(t, df);
  return row;
}

// Wilcoxon rank-sum with normal approximation and tie correction.
inline BalanceRow rank_sum_test(const std::vector<double>& a, const std::vector<double>& b) {
  BalanceRow row;
  row.test_kind = BalanceTestKind::rank_sum;
  const auto [m1, s1] = detail::mean_sd(a);
  const auto [m2, s2] = detail::mean_sd(b);
  row.group1_mean_sd = {m1, s1};
  row.group2_mean_sd = {m2, s2};

  const std::size_t n1 = a.size(), n2 = b.size();
  std::vector<std::pair<double, int>> pooled;  // value, group
  pooled.reserve(n1 + n2);
  for (const double x : a) pooled.emplace_back(x, 0);
  for (const double x : b) pooled.emplace_back(x, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_a += avg_rank;
    }
    i = j;
  }
  const double n = static_cast<double>(n1 + n2);
  const double mean_r = static_cast<double>(n1) * (n + 1.0) / 2.0;
  const double var_r = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var_r <= 0.0) {
    row.statistic = 0.0;
    row.p_value = 1.0;
    return row;
  }
  const double z = (rank_sum_a - mean_r) / std::sqrt(var_r);
  row.statistic = z;
  row.p_value = 2.0 * normal_sf(std::fabs(z));
  return row;
}

// Pearson chi-square on the level-by-group contingency table. Levels absent
// from both groups are dropped; an expected cell count below 1 flags the row
// as exact-test-unavailable instead of reporting an invalid statistic.
inline BalanceRow chi_square_test(
    const std::map<std::string, std::pair<std::size_t, std::size_t>>& counts) {
  BalanceRow row;
  row.test_kind = BalanceTestKind::chi_square;
  std::size_t total = 0, tot1 = 0, tot2 = 0, levels = 0;
  for (const auto& [lvl, c] : counts) {
    if (c.first + c.second == 0) continue;
    row.level_counts[lvl] = c;
    tot1 += c.first;
    tot2 += c.second;
    total += c.first + c.second;
    ++levels;
  }
  if (levels < 2 || tot1 == 0 || tot2 == 0) {
    row.statistic = 0.0;
    row.p_value = 1.0;
    return row;
  }
  double chi2 = 0.0;
  for (const auto& [lvl, c] : row.level_counts) {
    const double rowsum = static_cast<double>(c.first + c.second);
    const double e1 = rowsum * static_cast<double>(tot1) / static_cast<double>(total);
    const double e2 = rowsum * static_cast<double>(tot2) / static_cast<double>(total);
    if (e1 < 1.0 || e2 < 1.0) {
      row.exact_test_unavailable = true;
      row.statistic = 0.0;
      row.p_value = 1.0;
      return row;
    }
    const double d1 = static_cast<double>(c.first) - e1;
    const double d2 = static_cast<double>(c.second) - e2;
    chi2 += d1 * d1 / e1 + d2 * d2 / e2;
  }
  row.statistic = chi2;
  row.p_value = chi2_sf(chi2, static_cast<double>(levels - 1));
  return row;
}

// Balance table between included and excluded samples; the per-variable
// test choice follows the schema (Welch t by default for continuous,
// rank-sum when flagged, chi-square for level-valued variables).
inline std::vector<BalanceRow> balance_table(const RawTable& included,
                                             const RawTable& excluded,
                                             const Schema& schema) {
  if (included.n_rows() == 0 || excluded.n_rows() == 0) {
    throw DataError("balance_table: both groups must be non-empty");
  }
  std::vector<BalanceRow> rows;
  for (const auto& spec : schema) {
    if (spec.role == VariableRole::id || spec.role == VariableRole::weight) continue;
    BalanceRow row;
    if (spec.kind == VariableKind::continuous) {
      const auto s = detail::numeric_groups(included, excluded, spec.name);
      if (s.a.empty() || s.b.empty()) continue;
      row = spec.rank_sum ? rank_sum_test(s.a, s.b) : welch_t_test(s.a, s.b);
    } else {
      std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
      const std::size_t c1 = included.column_index(spec.name);
      const std::size_t c2 = excluded.column_index(spec.name);
      for (const auto& r : included.rows) {
        if (!cell_missing(r[c1])) {
          const std::string lvl = std::holds_alternative<double>(*r[c1])
                                      ? std::to_string(static_cast<long long>(cell_number(r[c1])))
                                      : cell_label(r[c1]);
          ++counts[lvl].first;
        }
      }
      for (const auto& r : excluded.rows) {
        if (!cell_missing(r[c2])) {
          const std::string lvl = std::holds_alternative<double>(*r[c2])
                                      ? std::to_string(static_cast<long long>(cell_number(r[c2])))
                                      : cell_label(r[c2]);
          ++counts[lvl].second;
        }
      }
      row = chi_square_test(counts);
    }
    row.variable = spec.name;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pathlasso
