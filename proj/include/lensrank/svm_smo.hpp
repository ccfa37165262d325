#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lensrank/common.hpp"

namespace lensrank {

// Linear-kernel soft-margin SVM trained with sequential minimal optimization.
// Decision function: u(x) = w.x - b; targets are +1/-1.
struct SmoModel {
  std::vector<double> alpha;
  std::array<double, 2> w{0.0, 0.0};
  double b = 0.0;
  double C = 1.0;
  bool converged = true;
  std::size_t sweeps = 0;

  double decision(const std::array<double, 2>& x) const {
    return w[0] * x[0] + w[1] * x[1] - b;
  }
};

namespace detail {

class smo_trainer {
 public:
  smo_trainer(const std::vector<std::array<double, 2>>& x,
              const std::vector<int>& y, double C, double tol,
              std::size_t max_sweeps)
      : x_(x), y_(y), C_(C), tol_(tol), max_sweeps_(max_sweeps) {
    if (x_.size() != y_.size() || x_.empty())
      throw internal_error("smo_trainer: bad problem shape");
    model_.alpha.assign(x_.size(), 0.0);
    model_.C = C;
  }

  SmoModel run() {
    const std::size_t n = x_.size();
    bool examine_all = true;
    std::size_t changed = 0;
    model_.converged = false;
    for (;;) {
      if (model_.sweeps >= max_sweeps_) break;
      ++model_.sweeps;
      changed = 0;
      if (examine_all) {
        for (std::size_t i = 0; i < n; ++i) changed += examine(i);
        if (changed == 0) {
          model_.converged = true;
          break;
        }
        examine_all = false;
      } else {
        for (std::size_t i = 0; i < n; ++i)
          if (is_unbound(i)) changed += examine(i);
        if (changed == 0) examine_all = true;
      }
    }
    recenter_threshold();
    return model_;
  }

 private:
  bool is_unbound(std::size_t i) const {
    return model_.alpha[i] > 0.0 && model_.alpha[i] < C_;
  }

  // The incrementally tracked threshold is only a guess once every multiplier
  // sits at a bound; the dual then admits a whole interval of thresholds, and
  // pairwise steps cannot correct a bad pick because it cancels out of their
  // error differences. Recenter b inside the interval the final multipliers
  // allow.
  void recenter_threshold() {
    const double eps = 1e-8 * std::max(C_, 1.0);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x_.size(); ++i) {
      double cand = model_.w[0] * x_[i][0] + model_.w[1] * x_[i][1] -
                    static_cast<double>(y_[i]);
      bool at_zero = model_.alpha[i] <= eps;
      bool at_c = model_.alpha[i] >= C_ - eps;
      bool interior = !at_zero && !at_c;
      if (interior || (at_zero && y_[i] > 0) || (at_c && y_[i] < 0))
        hi = std::min(hi, cand);
      if (interior || (at_c && y_[i] > 0) || (at_zero && y_[i] < 0))
        lo = std::max(lo, cand);
    }
    if (std::isinf(lo) && std::isinf(hi)) return;
    if (std::isinf(lo)) {
      model_.b = hi;
      return;
    }
    if (std::isinf(hi)) {
      model_.b = lo;
      return;
    }
    model_.b = 0.5 * (lo + hi);
  }

  double kernel(std::size_t i, std::size_t j) const {
    return x_[i][0] * x_[j][0] + x_[i][1] * x_[j][1];
  }

  double u_of(std::size_t i) const { return model_.decision(x_[i]); }

  std::size_t examine(std::size_t i2) {
    double y2 = y_[i2];
    double alph2 = model_.alpha[i2];
    double e2 = u_of(i2) - y2;
    double r2 = e2 * y2;
    bool violates = (r2 < -tol_ && alph2 < C_) || (r2 > tol_ && alph2 > 0.0);
    if (!violates) return 0;

    // Second-choice heuristic: the unbound point with the largest |E1 - E2|,
    // ties to the lowest index; then deterministic sweeps from index 0.
    std::size_t best = x_.size();
    double best_gap = -1.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (i == i2 || !is_unbound(i)) continue;
      double gap = std::fabs((u_of(i) - y_[i]) - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < x_.size() && take_step(best, i2, e2)) return 1;
    for (std::size_t i = 0; i < x_.size(); ++i)
      if (i != i2 && is_unbound(i) && take_step(i, i2, e2)) return 1;
    for (std::size_t i = 0; i < x_.size(); ++i)
      if (i != i2 && take_step(i, i2, e2)) return 1;
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2, double e2) {
    double alph1 = model_.alpha[i1];
    double alph2 = model_.alpha[i2];
    double y1 = y_[i1], y2 = y_[i2];
    double e1 = u_of(i1) - y1;
    double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, alph2 - alph1);
      hi = std::min(C_, C_ + alph2 - alph1);
    } else {
      lo = std::max(0.0, alph1 + alph2 - C_);
      hi = std::min(C_, alph1 + alph2);
    }
    if (lo >= hi) return false;
    double k11 = kernel(i1, i1), k12 = kernel(i1, i2), k22 = kernel(i2, i2);
    double eta = k11 + k22 - 2.0 * k12;
    double a2;
    if (eta > 0.0) {
      a2 = alph2 + y2 * (e1 - e2) / eta;
      a2 = std::min(hi, std::max(lo, a2));
    } else {
      double f1 = y1 * (e1 + model_.b) - alph1 * k11 - s * alph2 * k12;
      double f2 = y2 * (e2 + model_.b) - s * alph1 * k12 - alph2 * k22;
      double l1 = alph1 + s * (alph2 - lo);
      double h1 = alph1 + s * (alph2 - hi);
      double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                      0.5 * lo * lo * k22 + s * lo * l1 * k12;
      double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                      0.5 * hi * hi * k22 + s * hi * h1 * k12;
      if (obj_lo < obj_hi - 1e-12)
        a2 = lo;
      else if (obj_lo > obj_hi + 1e-12)
        a2 = hi;
      else
        a2 = alph2;
    }
    if (std::fabs(a2 - alph2) < 1e-8 * (a2 + alph2 + 1e-8)) return false;
    double a1 = alph1 + s * (alph2 - a2);

    double d1 = y1 * (a1 - alph1);
    double d2 = y2 * (a2 - alph2);
    double b1 = e1 + d1 * k11 + d2 * k12 + model_.b;
    double b2 = e2 + d1 * k12 + d2 * k22 + model_.b;
    if (a1 > 0.0 && a1 < C_)
      model_.b = b1;
    else if (a2 > 0.0 && a2 < C_)
      model_.b = b2;
    else
      model_.b = 0.5 * (b1 + b2);

    model_.w[0] += d1 * x_[i1][0] + d2 * x_[i2][0];
    model_.w[1] += d1 * x_[i1][1] + d2 * x_[i2][1];
    model_.alpha[i1] = a1;
    model_.alpha[i2] = a2;
    return true;
  }

  const std::vector<std::array<double, 2>>& x_;
  const std::vector<int>& y_;
  double C_;
  double tol_;
  std::size_t max_sweeps_;
  SmoModel model_;
};

}  // namespace detail

inline SmoModel train_linear_smo(const std::vector<std::array<double, 2>>& x,
                                 const std::vector<int>& y, double C = 1.0,
                                 double tol = 1e-3,
                                 std::size_t max_sweeps_override = 0) {
  std::size_t budget =
      max_sweeps_override ? max_sweeps_override : 10 * std::max<std::size_t>(x.size(), 1);
  return detail::smo_trainer(x, y, C, tol, budget).run();
}

inline double smo_dual_objective(const std::vector<std::array<double, 2>>& x,
                                 const std::vector<int>& y,
                                 const std::vector<double>& alpha) {
  double sum = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    sum += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      double k = x[i][0] * x[j][0] + x[i][1] * x[j][1];
      quad += alpha[i] * alpha[j] * y[i] * y[j] * k;
    }
  }
  return sum - 0.5 * quad;
}

}  // namespace lensrank
