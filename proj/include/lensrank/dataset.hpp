#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lensrank/common.hpp"
#include "lensrank/expr.hpp"

namespace lensrank {

struct LabeledDataset {
  std::vector<std::string> feature_names;
  std::string label_name;
  std::vector<double> values;  // row-major, n_rows x n_features
  std::vector<int> labels;     // dense 0..k-1, first-appearance order
  std::vector<std::string> class_names;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  std::size_t n_classes() const { return class_names.size(); }

  double at(std::size_t row, std::size_t col) const {
    return values[row * feature_names.size() + col];
  }
};

enum class missing_policy { reject, drop_rows };

inline bool cell_is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "nan" ||
         cell == "NaN" || cell == "?";
}

inline LabeledDataset load_csv(const std::string& path,
                               const std::string& label_column,
                               missing_policy policy = missing_policy::reject) {
  std::ifstream in(path);
  if (!in) throw error("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw error("dataset '" + path + "' is empty");
  LabeledDataset ds;
  std::size_t label_idx = static_cast<std::size_t>(-1);
  {
    auto cells = split(trim(line), ',');
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::string name(trim(cells[i]));
      if (name == label_column) {
        if (label_idx != static_cast<std::size_t>(-1))
          throw error("duplicate label column '" + label_column + "'");
        label_idx = i;
        ds.label_name = name;
      } else {
        ds.feature_names.push_back(name);
      }
    }
    if (label_idx == static_cast<std::size_t>(-1))
      throw error("label column '" + label_column + "' not found in '" + path +
                  "'");
  }
  std::size_t n_cols = ds.feature_names.size() + 1;
  std::map<std::string, int> class_ids;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) continue;
    auto cells = split(row, ',');
    if (cells.size() != n_cols)
      throw error("row " + std::to_string(line_no) + " in '" + path + "' has " +
                  std::to_string(cells.size()) + " cells, expected " +
                  std::to_string(n_cols));
    bool missing = false;
    std::vector<double> feats;
    feats.reserve(ds.feature_names.size());
    std::string label_text;
    std::size_t feat_col = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::string_view cell = trim(cells[i]);
      if (i == label_idx) {
        label_text = std::string(cell);
        continue;
      }
      ++feat_col;
      if (cell_is_missing(cell)) {
        if (policy == missing_policy::drop_rows) {
          missing = true;
          continue;
        }
        throw error("non-numeric cell in '" + path + "' at row " +
                    std::to_string(line_no) + ", column '" +
                    ds.feature_names[feat_col - 1] + "'");
      }
      double v = 0.0;
      try {
        v = parse_double(cell, "dataset cell");
      } catch (const error&) {
        if (policy == missing_policy::drop_rows) {
          missing = true;
          continue;
        }
        throw error("non-numeric cell in '" + path + "' at row " +
                    std::to_string(line_no) + ", column '" +
                    ds.feature_names[feat_col - 1] + "'");
      }
      feats.push_back(v);
    }
    if (missing) continue;
    if (label_text.empty())
      throw error("empty label in '" + path + "' at row " +
                  std::to_string(line_no));
    auto [it, inserted] =
        class_ids.emplace(label_text, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(label_text);
    ds.labels.push_back(it->second);
    ds.values.insert(ds.values.end(), feats.begin(), feats.end());
  }
  if (ds.labels.empty()) throw error("dataset '" + path + "' has no data rows");
  return ds;
}

inline void save_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error("cannot write dataset file '" + path + "'");
  for (std::size_t c = 0; c < ds.n_features(); ++c) out << ds.feature_names[c] << ',';
  out << (ds.label_name.empty() ? std::string("label") : ds.label_name) << '\n';
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t c = 0; c < ds.n_features(); ++c)
      out << format_double(ds.at(r, c)) << ',';
    out << ds.class_names[static_cast<std::size_t>(ds.labels[r])] << '\n';
  }
  if (!out) throw error("failed writing dataset file '" + path + "'");
}

struct AxisPair {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const AxisPair&, const AxisPair&) = default;
};

struct ExprPair {
  Expr x;
  Expr y;
};

using Provenance = std::variant<AxisPair, ExprPair>;

inline std::vector<AxisPair> enumerate_pairs(std::size_t n_features) {
  if (n_features < 2) throw error("need at least 2 features to enumerate pairs");
  std::vector<AxisPair> out;
  out.reserve(n_features * (n_features - 1) / 2);
  for (std::size_t i = 0; i + 1 < n_features; ++i)
    for (std::size_t j = i + 1; j < n_features; ++j) out.push_back({i, j});
  return out;
}

inline std::vector<AxisPair> enumerate_pairs(const LabeledDataset& ds) {
  return enumerate_pairs(ds.n_features());
}

struct View2D {
  std::vector<std::array<double, 2>> points;
  std::vector<int> labels;
  Provenance provenance;
  std::vector<std::string> class_names;
  std::array<std::string, 2> axis_labels;
  bool degenerate = false;
  std::string degenerate_reason;
  bool eps_shifted = false;  // log/division inputs were mapped onto [eps, 1]

  std::size_t n_points() const { return points.size(); }
  std::size_t n_classes() const { return class_names.size(); }
};

inline std::string provenance_label(const Provenance& prov) {
  if (const auto* ap = std::get_if<AxisPair>(&prov))
    return std::to_string(ap->i) + ":" + std::to_string(ap->j);
  const auto& ep = std::get<ExprPair>(prov);
  return render_linearized(ep.x) + "|" + render_linearized(ep.y);
}

// Min-max normalizes both axes onto [0,1] in place. A constant axis maps to
// all zeros and flags the view degenerate instead of dividing by zero.
inline void normalize_view(View2D& view) {
  for (std::size_t axis = 0; axis < 2; ++axis) {
    double lo = view.points.empty() ? 0.0 : view.points[0][axis];
    double hi = lo;
    for (const auto& p : view.points) {
      lo = std::min(lo, p[axis]);
      hi = std::max(hi, p[axis]);
    }
    double range = hi - lo;
    if (range <= 0.0) {
      for (auto& p : view.points) p[axis] = 0.0;
      if (!view.degenerate) {
        view.degenerate = true;
        view.degenerate_reason =
            "axis " + std::to_string(axis) + " (" + view.axis_labels[axis] +
            ") is constant";
      }
      continue;
    }
    for (auto& p : view.points) p[axis] = (p[axis] - lo) / range;
  }
}

namespace detail {

// Per-column min-max onto [0,1]; constant columns map to 0.
inline std::vector<double> normalized_columns(const LabeledDataset& ds) {
  std::vector<double> out(ds.values.size());
  for (std::size_t c = 0; c < ds.n_features(); ++c) {
    double lo = ds.at(0, c), hi = ds.at(0, c);
    for (std::size_t r = 1; r < ds.n_rows(); ++r) {
      lo = std::min(lo, ds.at(r, c));
      hi = std::max(hi, ds.at(r, c));
    }
    double range = hi - lo;
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
      out[r * ds.n_features() + c] =
          range > 0.0 ? (ds.at(r, c) - lo) / range : 0.0;
  }
  return out;
}

}  // namespace detail

// Default binding: every feature name maps to its own column; the short names
// t,u,x,y,z additionally alias columns 0..4 (in that order) when the dataset
// does not already use them as feature names.
inline std::map<std::string, std::size_t> default_binding(
    const LabeledDataset& ds) {
  std::map<std::string, std::size_t> bind;
  for (std::size_t c = 0; c < ds.n_features(); ++c)
    bind[ds.feature_names[c]] = c;
  static const std::array<const char*, 5> shorts = {"t", "u", "x", "y", "z"};
  for (std::size_t i = 0; i < shorts.size() && i < ds.n_features(); ++i)
    bind.emplace(shorts[i], i);
  return bind;
}

inline View2D make_view(const LabeledDataset& ds, const AxisPair& pair) {
  if (pair.i >= ds.n_features() || pair.j >= ds.n_features())
    throw error("axis pair (" + std::to_string(pair.i) + "," +
                std::to_string(pair.j) + ") out of range for " +
                std::to_string(ds.n_features()) + " features");
  if (ds.n_rows() < 2) throw error("a view needs at least 2 points");
  View2D v;
  v.provenance = pair;
  v.labels = ds.labels;
  v.class_names = ds.class_names;
  v.axis_labels = {ds.feature_names[pair.i], ds.feature_names[pair.j]};
  v.points.reserve(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r)
    v.points.push_back({ds.at(r, pair.i), ds.at(r, pair.j)});
  normalize_view(v);
  return v;
}

inline View2D make_view(const LabeledDataset& ds, const ExprPair& pair,
                        const std::map<std::string, std::size_t>& binding) {
  if (ds.n_rows() < 2) throw error("a view needs at least 2 points");
  std::array<const Expr*, 2> exprs = {&pair.x, &pair.y};
  for (const Expr* e : exprs)
    for (const std::string& var : expression_variables(*e)) {
      auto it = binding.find(var);
      if (it == binding.end())
        throw error("unbound expression variable '" + var + "' in '" +
                    render_linearized(*e) + "'");
      if (it->second >= ds.n_features())
        throw error("variable '" + var + "' bound to missing column " +
                    std::to_string(it->second));
    }
  bool shift = uses_log_or_division(pair.x) || uses_log_or_division(pair.y);
  std::vector<double> cols = detail::normalized_columns(ds);
  constexpr double eps = 1e-9;
  if (shift)
    for (double& v : cols) v = eps + v * (1.0 - eps);

  View2D v;
  v.provenance = pair;
  v.labels = ds.labels;
  v.class_names = ds.class_names;
  v.axis_labels = {render_linearized(pair.x), render_linearized(pair.y)};
  v.eps_shifted = shift;
  v.points.reserve(ds.n_rows());
  std::map<std::string, double> vars;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    vars.clear();
    for (const auto& [name, col] : binding)
      if (col < ds.n_features()) vars[name] = cols[r * ds.n_features() + col];
    std::array<double, 2> pt{};
    for (std::size_t axis = 0; axis < 2; ++axis) {
      double val = evaluate_expression(*exprs[axis], vars);
      if (!std::isfinite(val))
        throw error("expression '" + render_linearized(*exprs[axis]) +
                    "' produced a non-finite value at data row " +
                    std::to_string(r));
      pt[axis] = val;
    }
    v.points.push_back(pt);
  }
  normalize_view(v);
  return v;
}

inline View2D make_view(const LabeledDataset& ds, const ExprPair& pair) {
  return make_view(ds, pair, default_binding(ds));
}

inline View2D make_view(const LabeledDataset& ds, const Provenance& prov) {
  if (const auto* ap = std::get_if<AxisPair>(&prov)) return make_view(ds, *ap);
  return make_view(ds, std::get<ExprPair>(prov));
}

// Projection files hold one expression per line ('#' starts a comment, blank
// lines are skipped); consecutive expressions pair up as the x and y axes.
inline std::vector<ExprPair> load_projection_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open projection file '" + path + "'");
  std::vector<Expr> exprs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    auto hash = s.find('#');
    if (hash != std::string_view::npos) s = trim(s.substr(0, hash));
    if (s.empty()) continue;
    try {
      exprs.push_back(parse_expression(s));
    } catch (const parse_error& e) {
      throw error("projection file '" + path + "' line " +
                  std::to_string(line_no) + ": " + e.what());
    }
  }
  if (exprs.empty())
    throw error("projection file '" + path + "' contains no expressions");
  if (exprs.size() % 2 != 0)
    throw error("projection file '" + path + "' has " +
                std::to_string(exprs.size()) +
                " expressions; they must pair up as x,y axes");
  std::vector<ExprPair> pairs;
  for (std::size_t i = 0; i < exprs.size(); i += 2)
    pairs.push_back(ExprPair{exprs[i], exprs[i + 1]});
  return pairs;
}

}  // namespace lensrank
