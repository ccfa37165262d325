#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lensrank/common.hpp"

namespace lensrank {

struct RegressionDiagnostics {
  double sse = 0.0;
  double r2 = 0.0;
  std::optional<double> adj_r2;  // undefined when n <= p + 1
  double rmse = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;  // residual degrees of freedom, n - p - 1
};

struct LinearModel {
  std::vector<std::pair<std::string, double>> terms;
  double intercept = 0.0;
  RegressionDiagnostics diagnostics;
  double loocv_sse = 0.0;

  double predict(const std::map<std::string, double>& row) const {
    double v = intercept;
    for (const auto& [name, coef] : terms) {
      auto it = row.find(name);
      if (it == row.end())
        throw error("model term '" + name + "' missing from input row");
      v += coef * it->second;
    }
    return v;
  }
};

// Regularized incomplete beta function, continued-fraction evaluation.
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto contfrac = [](double aa, double bb, double xx) {
    const int max_iter = 300;
    const double tiny = 1e-300;
    double qab = aa + bb, qap = aa + 1.0, qam = aa - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * xx / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
      double m2 = 2.0 * m;
      double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      d = 1.0 + num * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      d = 1.0 + num * d;
      if (std::fabs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::fabs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < 1e-14) break;
    }
    return h;
  };
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * contfrac(a, b, x) / a;
  return 1.0 - front * contfrac(b, a, 1.0 - x) / b;
}

// Upper tail of the F(d1, d2) distribution.
inline double f_test_p_value(double f_stat, std::size_t d1, std::size_t d2) {
  if (d1 == 0 || d2 == 0) return 1.0;
  if (!(f_stat > 0.0)) return 1.0;
  if (std::isinf(f_stat)) return 0.0;
  double x = static_cast<double>(d2) /
             (static_cast<double>(d2) + static_cast<double>(d1) * f_stat);
  return regularized_incomplete_beta(static_cast<double>(d2) / 2.0,
                                     static_cast<double>(d1) / 2.0, x);
}

namespace detail {

// Gauss-Jordan inverse with partial pivoting; reports singularity instead of
// dividing by a vanishing pivot.
inline bool invert_matrix(std::vector<double>& a, std::size_t m) {
  std::vector<double> inv(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale <= 0.0) return false;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::fabs(a[r * m + col]) > std::fabs(a[pivot * m + col])) pivot = r;
    if (std::fabs(a[pivot * m + col]) < 1e-12 * scale) return false;
    if (pivot != col)
      for (std::size_t c = 0; c < m; ++c) {
        std::swap(a[pivot * m + c], a[col * m + c]);
        std::swap(inv[pivot * m + c], inv[col * m + c]);
      }
    double p = a[col * m + col];
    for (std::size_t c = 0; c < m; ++c) {
      a[col * m + c] /= p;
      inv[col * m + c] /= p;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      double f = a[r * m + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < m; ++c) {
        a[r * m + c] -= f * a[col * m + c];
        inv[r * m + c] -= f * inv[col * m + c];
      }
    }
  }
  a = std::move(inv);
  return true;
}

struct ols_fit {
  std::vector<double> beta;      // intercept first
  std::vector<double> xtx_inv;   // (p+1) x (p+1)
  double sse = 0.0;
  double loocv_sse = 0.0;
};

// Ordinary least squares through the normal equations; singular systems get a
// 1e-10 ridge on the diagonal before giving up. LOOCV residuals come from the
// hat-matrix identity e_i / (1 - h_ii).
inline ols_fit fit_ols(const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& y,
                       const std::vector<std::size_t>& cols) {
  const std::size_t n = rows.size();
  const std::size_t m = cols.size() + 1;
  std::vector<double> xtx(m * m, 0.0), xty(m, 0.0);
  auto design = [&](std::size_t r, std::size_t j) -> double {
    return j == 0 ? 1.0 : rows[r][cols[j - 1]];
  };
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < m; ++i) {
      double xi = design(r, i);
      xty[i] += xi * y[r];
      for (std::size_t j = 0; j < m; ++j) xtx[i * m + j] += xi * design(r, j);
    }
  std::vector<double> work = xtx;
  if (!invert_matrix(work, m)) {
    work = xtx;
    for (std::size_t i = 0; i < m; ++i) work[i * m + i] += 1e-10;
    if (!invert_matrix(work, m))
      throw error("normal equations are singular even with ridge jitter");
  }
  ols_fit fit;
  fit.xtx_inv = std::move(work);
  fit.beta.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      fit.beta[i] += fit.xtx_inv[i * m + j] * xty[j];
  for (std::size_t r = 0; r < n; ++r) {
    double pred = 0.0;
    for (std::size_t i = 0; i < m; ++i) pred += fit.beta[i] * design(r, i);
    double e = y[r] - pred;
    fit.sse += e * e;
    double h = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        h += design(r, i) * fit.xtx_inv[i * m + j] * design(r, j);
    double denom = std::max(1.0 - h, 1e-10);
    double loo = e / denom;
    fit.loocv_sse += loo * loo;
  }
  return fit;
}

inline RegressionDiagnostics diagnostics_from(double sse, double sstot,
                                              std::size_t n, std::size_t p) {
  RegressionDiagnostics d;
  d.sse = sse;
  d.r2 = sstot > 0.0 ? 1.0 - sse / sstot : 0.0;
  d.rmse = std::sqrt(sse / static_cast<double>(n));
  if (n > p + 1) {
    d.dof = n - p - 1;
    d.adj_r2 = 1.0 - (1.0 - d.r2) * static_cast<double>(n - 1) /
                         static_cast<double>(n - p - 1);
  } else {
    d.dof = 0;
  }
  if (p == 0) {
    d.p_value = 1.0;
  } else if (d.r2 >= 1.0) {
    d.p_value = 0.0;
  } else if (n > p + 1) {
    double f = (d.r2 / static_cast<double>(p)) /
               ((1.0 - d.r2) / static_cast<double>(n - p - 1));
    d.p_value = f_test_p_value(f, p, n - p - 1);
  }
  return d;
}

}  // namespace detail

enum class subset_strategy { all, greedy_backward };

inline double loocv_sse(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& y) {
  std::vector<std::size_t> cols(names.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  return detail::fit_ols(rows, y, cols).loocv_sse;
}

inline LinearModel fit_linear_loocv(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
    subset_strategy strategy = subset_strategy::all) {
  const std::size_t n = rows.size();
  if (n < 3) throw error("regression needs at least 3 rows");
  if (y.size() != n) throw error("target length does not match row count");
  for (const auto& r : rows)
    if (r.size() != names.size())
      throw error("attribute row width does not match names");
  if (n < names.size() + 2)
    throw error("underdetermined system: " + std::to_string(n) + " rows for " +
                std::to_string(names.size()) + " attributes");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double sstot = 0.0;
  for (double v : y) sstot += (v - mean) * (v - mean);
  if (sstot <= 0.0) throw error("target is constant");

  std::vector<std::size_t> cols(names.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  detail::ols_fit fit = detail::fit_ols(rows, y, cols);

  if (strategy == subset_strategy::greedy_backward) {
    // A removal whose LOOCV SSE ties the current one still counts as an
    // improvement: noiseless targets otherwise pin irrelevant attributes at
    // floating-point noise level.
    double current = fit.loocv_sse;
    while (!cols.empty()) {
      std::size_t drop = cols.size();
      double best = current;
      bool found = false;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        std::vector<std::size_t> trial = cols;
        trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
        double sse = detail::fit_ols(rows, y, trial).loocv_sse;
        bool helps = sse <= current * (1.0 + 1e-9) + 1e-12;
        if (helps && (!found || sse < best)) {
          best = sse;
          drop = i;
          found = true;
        }
      }
      if (!found) break;
      cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(drop));
      fit = detail::fit_ols(rows, y, cols);
      current = fit.loocv_sse;
    }
  }

  LinearModel model;
  for (std::size_t i = 0; i < cols.size(); ++i)
    model.terms.emplace_back(names[cols[i]], fit.beta[i + 1]);
  model.intercept = fit.beta[0];
  model.loocv_sse = fit.loocv_sse;
  model.diagnostics = detail::diagnostics_from(fit.sse, sstot, n, cols.size());
  return model;
}

inline RegressionDiagnostics regression_report(
    const LinearModel& model, const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& rows,
    const std::vector<double>& y) {
  const std::size_t n = rows.size();
  if (n == 0) throw error("regression report needs data rows");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  std::vector<std::size_t> cols;
  for (const auto& [name, coef] : model.terms) {
    auto it = index.find(name);
    if (it == index.end())
      throw error("model term '" + name + "' missing from attribute names");
    cols.push_back(it->second);
  }
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double sstot = 0.0, sse = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double pred = model.intercept;
    for (std::size_t i = 0; i < cols.size(); ++i)
      pred += model.terms[i].second * rows[r][cols[i]];
    double e = y[r] - pred;
    sse += e * e;
    sstot += (y[r] - mean) * (y[r] - mean);
  }
  return detail::diagnostics_from(sse, sstot, n, model.terms.size());
}

inline double pearson_r(const std::vector<double>& a,
                        const std::vector<double>& b) {
  if (a.size() != b.size()) throw error("pearson_r: length mismatch");
  if (a.size() < 2) throw error("pearson_r: needs at least 2 samples");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw error("pearson_r: a sample is constant");
  return sab / std::sqrt(saa * sbb);
}

inline void save_model(const LinearModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw error("cannot write model file '" + path + "'");
  for (const auto& [name, coef] : model.terms)
    out << name << '=' << format_double(coef) << '\n';
  out << "intercept=" << format_double(model.intercept) << '\n';
  if (!out) throw error("failed writing model file '" + path + "'");
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open model file '" + path + "'");
  LinearModel model;
  bool saw_intercept = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw error("model file '" + path + "' line " + std::to_string(line_no) +
                  ": expected name=value");
    std::string name(trim(s.substr(0, eq)));
    double value = parse_double(trim(s.substr(eq + 1)),
                                "model file '" + path + "' line " +
                                    std::to_string(line_no));
    if (name == "intercept") {
      if (saw_intercept)
        throw error("model file '" + path + "' has two intercept lines");
      model.intercept = value;
      saw_intercept = true;
    } else {
      model.terms.emplace_back(name, value);
    }
  }
  if (!saw_intercept)
    throw error("model file '" + path + "' is missing the intercept line");
  return model;
}

}  // namespace lensrank
