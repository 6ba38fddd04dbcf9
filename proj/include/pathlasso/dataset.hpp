#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathlasso/errors.hpp"
#include "pathlasso/schema.hpp"
#include "pathlasso/table.hpp"

namespace pathlasso {

struct ColumnMeta {
  std::string parent;    // parent variable name
  std::string contrast;  // e.g. "Race[Non-Hispanic White-Other/multiracial]"
  double center = 0.0;   // stored = (original - center) / scale
  double scale = 1.0;
};

struct DroppedColumn {
  std::string parent;
  std::string contrast;
  std::string reason;
};

struct ParentInfo {
  std::string name;
  VariableKind kind = VariableKind::continuous;
  VariableRole role = VariableRole::candidate;
  std::vector<std::string> levels;  // categorical/binary, observed order
  std::string reference;
};

struct PreparedDataset {
  Eigen::MatrixXd design;  // n x p, no missing entries
  Eigen::VectorXd outcome; // 0/1
  std::vector<ColumnMeta> column_meta;
  std::vector<DroppedColumn> dropped;
  std::vector<ParentInfo> parents;
  // Row-aligned raw levels for categorical and binary parents; used by
  // stratification and by inter-layer edge targets.
  std::map<std::string, std::vector<std::string>> category_rows;
  std::optional<Eigen::VectorXd> weights;
  std::string strata_label;

  Eigen::Index n() const { return design.rows(); }
  Eigen::Index p() const { return design.cols(); }

  std::vector<Eigen::Index> columns_of(const std::string& parent) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(column_meta.size()); ++j) {
      if (column_meta[j].parent == parent) out.push_back(j);
    }
    return out;
  }

  const ParentInfo* parent_info(const std::string& name) const {
    for (const auto& p : parents) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  // Column values on the pre-centering (transformed) scale.
  Eigen::VectorXd original_column(Eigen::Index j) const {
    const auto& m = column_meta[j];
    return (design.col(j).array() * m.scale + m.center).matrix();
  }
};

struct ExclusionReport {
  std::size_t initial_n = 0;
  std::vector<std::pair<std::string, std::size_t>> excluded_per_rule;
  std::size_t final_n = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["initial_n"] = initial_n;
    j["excluded_per_rule"] = nlohmann::json::array();
    for (const auto& [rule, count] : excluded_per_rule) {
      j["excluded_per_rule"].push_back({{"rule", rule}, {"removed", count}});
    }
    j["final_n"] = final_n;
    return j;
  }
};

struct ExclusionRule {
  enum class Kind { min_value, max_value, require_present, keep_levels };
  Kind kind = Kind::require_present;
  std::string description;
  std::string variable;                 // min/max/keep_levels
  double threshold = 0.0;               // min/max
  std::vector<std::string> variables;   // require_present
  std::set<std::string> levels;         // keep_levels

  // Missing cells fail value and level predicates.
  bool keeps(const RawTable& raw, std::size_t row) const {
    switch (kind) {
      case Kind::min_value: {
        const auto& c = raw.at(row, variable);
        return !cell_missing(c) && cell_number(c) >= threshold;
      }
      case Kind::max_value: {
        const auto& c = raw.at(row, variable);
        return !cell_missing(c) && cell_number(c) <= threshold;
      }
      case Kind::require_present: {
        for (const auto& v : variables) {
          if (cell_missing(raw.at(row, v))) return false;
        }
        return true;
      }
      case Kind::keep_levels: {
        const auto& c = raw.at(row, variable);
        return !cell_missing(c) && levels.count(cell_label(c)) > 0;
      }
    }
    return true;
  }

  static ExclusionRule from_json(const nlohmann::json& j) {
    ExclusionRule r;
    const std::string kind = j.at("kind").get<std::string>();
    r.description = j.value("description", kind);
    if (kind == "min_value") {
      r.kind = Kind::min_value;
      r.variable = j.at("variable").get<std::string>();
      r.threshold = j.at("threshold").get<double>();
    } else if (kind == "max_value") {
      r.kind = Kind::max_value;
      r.variable = j.at("variable").get<std::string>();
      r.threshold = j.at("threshold").get<double>();
    } else if (kind == "require_present") {
      r.kind = Kind::require_present;
      for (const auto& v : j.at("variables")) r.variables.push_back(v.get<std::string>());
    } else if (kind == "keep_levels") {
      r.kind = Kind::keep_levels;
      r.variable = j.at("variable").get<std::string>();
      for (const auto& v : j.at("levels")) r.levels.insert(v.get<std::string>());
    } else {
      throw SchemaError("unknown exclusion rule kind: " + kind);
    }
    return r;
  }
};

// Empirical quartile labels. Cut points use the linear-interpolation
// percentile definition (h = (n-1)p on the sorted sample); ties at a cut
// point go to the lower bin.
inline std::vector<std::string> quartile_bin(const std::vector<double>& values) {
  if (values.size() < 4) throw DataError("quartile_bin: need at least 4 values");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw DegenerateBinError("quartile_bin: constant input");
  }
  const auto percentile = [&](double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double q25 = percentile(0.25);
  const double q50 = percentile(0.50);
  const double q75 = percentile(0.75);
  std::vector<std::string> labels;
  labels.reserve(values.size());
  for (const double v : values) {
    if (v <= q25) {
      labels.emplace_back("Q1");
    } else if (v <= q50) {
      labels.emplace_back("Q2");
    } else if (v <= q75) {
      labels.emplace_back("Q3");
    } else {
      labels.emplace_back("Q4");
    }
  }
  return labels;
}

namespace detail {

inline double binary_cell_value(const Cell& c, const VariableSpec& spec,
                                const std::string& positive) {
  if (std::holds_alternative<double>(*c)) {
    return cell_number(c) != 0.0 ? 1.0 : 0.0;
  }
  (void)spec;
  return cell_label(c) == positive ? 1.0 : 0.0;
}

inline std::string binary_level_of(const Cell& c) {
  if (std::holds_alternative<double>(*c)) {
    return cell_number(c) != 0.0 ? "1" : "0";
  }
  return cell_label(c);
}

}  // namespace detail

// Row indices surviving the exclusion rules (in order) plus the implicit
// complete-case rule over every modeled variable, with per-rule counts.
inline std::pair<std::vector<std::size_t>, ExclusionReport> apply_exclusions(
    const RawTable& raw, const Schema& schema, const std::vector<ExclusionRule>& rules) {
  ExclusionReport report;
  report.initial_n = raw.n_rows();

  std::vector<std::size_t> kept(raw.n_rows());
  for (std::size_t i = 0; i < raw.n_rows(); ++i) kept[i] = i;

  for (const auto& rule : rules) {
    std::vector<std::size_t> next;
    next.reserve(kept.size());
    for (const std::size_t i : kept) {
      if (rule.keeps(raw, i)) next.push_back(i);
    }
    report.excluded_per_rule.emplace_back(rule.description, kept.size() - next.size());
    kept = std::move(next);
  }

  std::vector<std::size_t> modeled_cols;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].role == VariableRole::id) continue;
    modeled_cols.push_back(raw.column_index(schema[j].name));
  }
  {
    std::vector<std::size_t> next;
    next.reserve(kept.size());
    for (const std::size_t i : kept) {
      bool complete = true;
      for (const std::size_t j : modeled_cols) {
        if (cell_missing(raw.rows[i][j])) {
          complete = false;
          break;
        }
      }
      if (complete) next.push_back(i);
    }
    const std::size_t removed = kept.size() - next.size();
    if (removed > 0) report.excluded_per_rule.emplace_back("incomplete record", removed);
    kept = std::move(next);
  }
  report.final_n = kept.size();
  return {std::move(kept), std::move(report)};
}

// Applies exclusion rules in order, logs counts, then enforces complete
// cases on every modeled variable, applies transforms and dummy-encodes.
inline std::pair<PreparedDataset, ExclusionReport> prepare_dataset(
    const RawTable& raw, const Schema& schema, const std::vector<ExclusionRule>& rules,
    const std::string& strata_label = "all") {
  auto [kept, report] = apply_exclusions(raw, schema, rules);
  if (kept.empty()) throw EmptyDatasetError("no rows survive the exclusion rules");

  const std::size_t n = kept.size();
  PreparedDataset d;
  d.strata_label = strata_label;

  std::vector<Eigen::VectorXd> design_cols;

  for (const auto& spec : schema) {
    const std::size_t col = raw.column_index(spec.name);
    if (spec.role == VariableRole::id) continue;

    if (spec.role == VariableRole::weight) {
      Eigen::VectorXd w(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double v = cell_number(raw.rows[kept[i]][col]);
        if (v <= 0.0) throw DataError("non-positive weight for variable " + spec.name);
        w[static_cast<Eigen::Index>(i)] = v;
      }
      d.weights = w;
      continue;
    }

    if (spec.role == VariableRole::outcome) {
      const std::string positive = spec.positive_level.empty() ? "1" : spec.positive_level;
      d.outcome.resize(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        d.outcome[static_cast<Eigen::Index>(i)] =
            detail::binary_cell_value(raw.rows[kept[i]][col], spec, positive);
      }
      continue;
    }

    // Candidate or stratifier.
    if (spec.kind == VariableKind::continuous && spec.transform != Transform::quartile_bin) {
      Eigen::VectorXd x(n);
      for (std::size_t i = 0; i < n; ++i) {
        double v = cell_number(raw.rows[kept[i]][col]);
        if (spec.transform == Transform::natural_log) {
          if (v <= 0.0) {
            throw TransformError("natural_log requires positive values: variable " +
                                 spec.name + ", row " + std::to_string(kept[i]));
          }
          v = std::log(v);
        }
        x[static_cast<Eigen::Index>(i)] = v;
      }
      const std::string label = spec.transform == Transform::natural_log
                                    ? "Ln (" + spec.name + ")"
                                    : spec.name;
      design_cols.push_back(std::move(x));
      d.column_meta.push_back({spec.name, label, 0.0, 1.0});
      d.parents.push_back({spec.name, spec.kind, spec.role, {}, ""});
      continue;
    }

    // Level-valued: binary, categorical, or quartile-binned continuous.
    std::vector<std::string> row_levels(n);
    std::string reference;
    if (spec.kind == VariableKind::continuous) {  // quartile_bin
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) values[i] = cell_number(raw.rows[kept[i]][col]);
      row_levels = quartile_bin(values);
      reference = "Q1";
    } else if (spec.kind == VariableKind::binary) {
      for (std::size_t i = 0; i < n; ++i) {
        row_levels[i] = detail::binary_level_of(raw.rows[kept[i]][col]);
      }
      reference = spec.reference_level;
    } else {
      for (std::size_t i = 0; i < n; ++i) row_levels[i] = cell_label(raw.rows[kept[i]][col]);
      reference = spec.reference_level;
    }

    std::vector<std::string> levels;  // order of first appearance
    for (const auto& lvl : row_levels) {
      if (std::find(levels.begin(), levels.end(), lvl) == levels.end()) levels.push_back(lvl);
    }
    if (spec.kind == VariableKind::binary && reference.empty()) {
      // Positive level explicit or "1"; reference is the other level.
      const std::string positive = spec.positive_level.empty() ? "1" : spec.positive_level;
      for (const auto& lvl : levels) {
        if (lvl != positive) {
          reference = lvl;
          break;
        }
      }
      if (reference.empty()) reference = "0";
    }
    if (std::find(levels.begin(), levels.end(), reference) == levels.end()) {
      throw SchemaError("reference level '" + reference + "' not observed for variable " +
                        spec.name);
    }

    ParentInfo info{spec.name, spec.kind == VariableKind::continuous
                                   ? VariableKind::categorical
                                   : spec.kind,
                    spec.role, levels, reference};
    d.parents.push_back(info);
    d.category_rows[spec.name] = row_levels;

    for (const auto& lvl : levels) {
      if (lvl == reference) continue;
      Eigen::VectorXd x(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[static_cast<Eigen::Index>(i)] = row_levels[i] == lvl ? 1.0 : 0.0;
      }
      design_cols.push_back(std::move(x));
      d.column_meta.push_back(
          {spec.name, spec.name + "[" + lvl + "-" + reference + "]", 0.0, 1.0});
    }
  }

  d.design.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(design_cols.size()));
  for (std::size_t j = 0; j < design_cols.size(); ++j) {
    d.design.col(static_cast<Eigen::Index>(j)) = design_cols[j];
  }
  if (d.outcome.size() == 0) throw SchemaError("schema has no outcome variable");
  return {std::move(d), std::move(report)};
}

enum class ScaleMode { center_only, standardize };

// Centers every design column; under standardize also scales to unit
// sample standard deviation. Zero-variance columns are dropped and recorded.
inline PreparedDataset center_and_scale(const PreparedDataset& input, ScaleMode mode) {
  if (input.n() < 2) throw DataError("center_and_scale: need at least 2 rows");
  PreparedDataset d = input;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    const double mean = d.design.col(j).mean();
    const double ss = (d.design.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(d.n() - 1));
    if (mode == ScaleMode::standardize && sd == 0.0) {
      d.dropped.push_back({d.column_meta[j].parent, d.column_meta[j].contrast,
                           "zero variance"});
      continue;
    }
    keep.push_back(j);
  }

  Eigen::MatrixXd design(d.n(), static_cast<Eigen::Index>(keep.size()));
  std::vector<ColumnMeta> meta;
  meta.reserve(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Eigen::Index j = keep[k];
    ColumnMeta m = d.column_meta[j];
    const double mean = d.design.col(j).mean();
    double scale = 1.0;
    if (mode == ScaleMode::standardize) {
      const double ss = (d.design.col(j).array() - mean).square().sum();
      scale = std::sqrt(ss / static_cast<double>(d.n() - 1));
    }
    design.col(static_cast<Eigen::Index>(k)) =
        ((d.design.col(j).array() - mean) / scale).matrix();
    // Compose with any transform already applied to this column.
    m.center = m.center + m.scale * mean;
    m.scale = m.scale * scale;
    meta.push_back(std::move(m));
  }
  d.design = std::move(design);
  d.column_meta = std::move(meta);
  return d;
}

// Restricts to rows whose stratifier level is in keep_levels and re-encodes
// the stratifier over the kept levels only.
inline PreparedDataset stratify(const PreparedDataset& input, const std::string& variable,
                                const std::set<std::string>& keep_levels) {
  const ParentInfo* info = input.parent_info(variable);
  if (info == nullptr || info->levels.empty()) {
    throw DataError("stratify: variable is not categorical: " + variable);
  }
  if (keep_levels.empty()) throw DataError("stratify: keep_levels is empty");
  for (const auto& lvl : keep_levels) {
    if (std::find(info->levels.begin(), info->levels.end(), lvl) == info->levels.end()) {
      throw DataError("stratify: level not observed: " + lvl);
    }
  }
  const auto& rows = input.category_rows.at(variable);
  std::vector<Eigen::Index> keep_rows;
  std::map<std::string, std::size_t> level_counts;
  for (Eigen::Index i = 0; i < input.n(); ++i) {
    if (keep_levels.count(rows[static_cast<std::size_t>(i)])) {
      keep_rows.push_back(i);
      ++level_counts[rows[static_cast<std::size_t>(i)]];
    }
  }
  for (const auto& lvl : keep_levels) {
    if (level_counts[lvl] == 0) throw EmptyStratumError("stratify: empty level " + lvl);
  }

  // Kept levels in the parent's observed order; reference retained if kept.
  std::vector<std::string> kept_levels;
  for (const auto& lvl : info->levels) {
    if (keep_levels.count(lvl)) kept_levels.push_back(lvl);
  }
  std::string reference = info->reference;
  if (!keep_levels.count(reference)) reference = kept_levels.front();

  PreparedDataset d;
  d.weights = std::nullopt;
  d.parents.reserve(input.parents.size());

  // Row subset for all retained design columns except the stratifier's.
  std::vector<Eigen::Index> keep_cols;
  for (Eigen::Index j = 0; j < input.p(); ++j) {
    if (input.column_meta[j].parent != variable) keep_cols.push_back(j);
  }

  const auto nk = static_cast<Eigen::Index>(keep_rows.size());
  std::vector<Eigen::VectorXd> cols;
  for (const Eigen::Index j : keep_cols) {
    Eigen::VectorXd x(nk);
    for (Eigen::Index i = 0; i < nk; ++i) x[i] = input.design(keep_rows[i], j);
    cols.push_back(std::move(x));
    d.column_meta.push_back(input.column_meta[j]);
  }
  // Re-encoded stratifier contrasts appended after the untouched columns.
  std::vector<std::string> contrast_names;
  for (const auto& lvl : kept_levels) {
    if (lvl == reference) continue;
    Eigen::VectorXd x(nk);
    for (Eigen::Index i = 0; i < nk; ++i) {
      x[i] = rows[static_cast<std::size_t>(keep_rows[i])] == lvl ? 1.0 : 0.0;
    }
    cols.push_back(std::move(x));
    const std::string contrast = variable + "[" + lvl + "-" + reference + "]";
    d.column_meta.push_back({variable, contrast, 0.0, 1.0});
    contrast_names.push_back(lvl + "-" + reference);
  }

  d.design.resize(nk, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    d.design.col(static_cast<Eigen::Index>(j)) = cols[j];
  }

  d.outcome.resize(nk);
  for (Eigen::Index i = 0; i < nk; ++i) d.outcome[i] = input.outcome[keep_rows[i]];
  if (input.weights) {
    Eigen::VectorXd w(nk);
    for (Eigen::Index i = 0; i < nk; ++i) w[i] = (*input.weights)[keep_rows[i]];
    d.weights = w;
  }

  for (const auto& p : input.parents) {
    if (p.name == variable) {
      d.parents.push_back({p.name, p.kind, p.role, kept_levels, reference});
    } else {
      d.parents.push_back(p);
    }
  }
  for (const auto& [name, lv] : input.category_rows) {
    std::vector<std::string> sub(static_cast<std::size_t>(nk));
    for (Eigen::Index i = 0; i < nk; ++i) {
      sub[static_cast<std::size_t>(i)] = lv[static_cast<std::size_t>(keep_rows[i])];
    }
    d.category_rows[name] = std::move(sub);
  }

  std::string label = variable + "{";
  for (std::size_t k = 0; k < kept_levels.size(); ++k) {
    if (k) label += " vs ";
    label += kept_levels[k];
  }
  label += "}";
  d.strata_label = label;
  d.dropped = input.dropped;
  return d;
}

}  // namespace pathlasso
