#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"
#include "lensrank/folds.hpp"
#include "lensrank/svm_smo.hpp"

namespace lensrank {

enum class classifier_kind { knn, j48, nb, smo };

struct WrapperScore {
  classifier_kind kind;
  double error_rate = 0.0;
  bool converged = true;  // only SMO can report non-convergence
};

namespace detail {

struct training_set {
  std::vector<std::array<double, 2>> points;  // canonical (x, y, label) order
  std::vector<int> labels;
  int n_classes = 0;
};

// Cross-validation loop shared by all four wrapper scores. fit() receives the
// fold's training set and returns a predictor (x, y) -> class index.
template <typename FitFn>
double cv_error_rate(const View2D& view, const FoldPlan& plan, FitFn&& fit) {
  if (view.degenerate)
    throw error("cannot score degenerate view (" + view.degenerate_reason + ")");
  if (plan.assignments.size() != view.n_points())
    throw internal_error("fold plan does not match view size");

  std::vector<std::size_t> order = canonical_order(view);
  int n_classes = static_cast<int>(view.n_classes());
  for (int l : view.labels) n_classes = std::max(n_classes, l + 1);

  std::size_t wrong = 0;
  for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
    training_set train;
    std::vector<std::size_t> test_rows;
    for (std::size_t idx : order) {
      if (plan.assignments[idx] == fold) {
        test_rows.push_back(idx);
      } else {
        train.points.push_back(view.points[idx]);
        train.labels.push_back(view.labels[idx]);
      }
    }
    if (test_rows.empty()) continue;
    if (train.points.empty())
      throw error("fold " + std::to_string(fold) + " leaves no training data");
    train.n_classes = n_classes;
    auto predictor = fit(train);
    for (std::size_t idx : test_rows) {
      int predicted = predictor(view.points[idx][0], view.points[idx][1]);
      if (predicted != view.labels[idx]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(view.n_points());
}

class knn_predictor {
 public:
  explicit knn_predictor(training_set train) : train_(std::move(train)) {
    k_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::floor(std::sqrt(static_cast<double>(train_.points.size())))));
  }

  int operator()(double x, double y) const {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train_.points.size());
    for (std::size_t i = 0; i < train_.points.size(); ++i) {
      double dx = train_.points[i][0] - x;
      double dy = train_.points[i][1] - y;
      dist.emplace_back(std::sqrt(dx * dx + dy * dy), i);
    }
    std::size_t k = std::min(k_, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    std::vector<double> weight(static_cast<std::size_t>(train_.n_classes), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      const auto& [d, idx] = dist[r];
      weight[static_cast<std::size_t>(train_.labels[idx])] += 1.0 / (d + 1e-12);
    }
    return static_cast<int>(
        std::max_element(weight.begin(), weight.end()) - weight.begin());
  }

 private:
  training_set train_;
  std::size_t k_;
};

class decision_tree {
 public:
  explicit decision_tree(const training_set& train) : train_(&train) {
    std::vector<std::size_t> all(train.points.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    root_ = build(all);
    train_ = nullptr;
  }

  int operator()(double x, double y) const {
    std::size_t at = root_;
    for (;;) {
      const node& n = nodes_[at];
      if (n.leaf) return n.cls;
      double v = n.axis == 0 ? x : y;
      at = v < n.threshold ? n.left : n.right;
    }
  }

 private:
  struct node {
    bool leaf = true;
    int cls = 0;
    int axis = 0;
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
  };

  static double entropy(const std::vector<std::size_t>& counts, std::size_t n) {
    double h = 0.0;
    for (std::size_t c : counts) {
      if (c == 0) continue;
      double p = static_cast<double>(c) / static_cast<double>(n);
      h -= p * std::log2(p);
    }
    return h;
  }

  int majority(const std::vector<std::size_t>& counts) const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
      if (counts[c] > counts[best]) best = c;
    return static_cast<int>(best);
  }

  std::size_t build(const std::vector<std::size_t>& rows) {
    const training_set& t = *train_;
    std::vector<std::size_t> counts(static_cast<std::size_t>(t.n_classes), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(t.labels[r])];
    std::size_t present = 0;
    for (std::size_t c : counts)
      if (c > 0) ++present;

    if (present <= 1 || rows.size() < 2) {
      nodes_.push_back({true, majority(counts), 0, 0.0, 0, 0});
      return nodes_.size() - 1;
    }

    double base_entropy = entropy(counts, rows.size());
    int best_axis = -1;
    double best_threshold = 0.0;
    double best_ratio = -1.0;
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<std::size_t> sorted = rows;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) {
                         return t.points[a][axis] < t.points[b][axis];
                       });
      std::vector<std::size_t> left_counts(counts.size(), 0);
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left_counts[static_cast<std::size_t>(t.labels[sorted[i]])];
        double v = t.points[sorted[i]][axis];
        double next = t.points[sorted[i + 1]][axis];
        if (next <= v) continue;
        std::size_t nl = i + 1;
        std::size_t nr = sorted.size() - nl;
        std::vector<std::size_t> right_counts(counts.size());
        for (std::size_t c = 0; c < counts.size(); ++c)
          right_counts[c] = counts[c] - left_counts[c];
        double pl = static_cast<double>(nl) / static_cast<double>(sorted.size());
        double pr = 1.0 - pl;
        double gain = base_entropy - pl * entropy(left_counts, nl) -
                      pr * entropy(right_counts, nr);
        double split_info = -pl * std::log2(pl) - pr * std::log2(pr);
        double ratio = gain / split_info;
        if (ratio > best_ratio + 1e-12) {
          best_ratio = ratio;
          best_axis = axis;
          best_threshold = 0.5 * (v + next);
        }
      }
    }

    if (best_axis < 0) {
      nodes_.push_back({true, majority(counts), 0, 0.0, 0, 0});
      return nodes_.size() - 1;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (t.points[r][best_axis] < best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    std::size_t self = nodes_.size();
    nodes_.push_back({false, 0, best_axis, best_threshold, 0, 0});
    std::size_t left = build(left_rows);
    std::size_t right = build(right_rows);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  const training_set* train_;
  std::vector<node> nodes_;
  std::size_t root_ = 0;
};

class naive_bayes {
 public:
  explicit naive_bayes(const training_set& train)
      : n_classes_(static_cast<std::size_t>(train.n_classes)) {
    count_.assign(n_classes_, 0);
    mean_.assign(n_classes_, {0.0, 0.0});
    var_.assign(n_classes_, {0.0, 0.0});
    for (std::size_t i = 0; i < train.points.size(); ++i) {
      auto c = static_cast<std::size_t>(train.labels[i]);
      ++count_[c];
      mean_[c][0] += train.points[i][0];
      mean_[c][1] += train.points[i][1];
    }
    for (std::size_t c = 0; c < n_classes_; ++c)
      if (count_[c] > 0) {
        mean_[c][0] /= static_cast<double>(count_[c]);
        mean_[c][1] /= static_cast<double>(count_[c]);
      }
    for (std::size_t i = 0; i < train.points.size(); ++i) {
      auto c = static_cast<std::size_t>(train.labels[i]);
      for (int a = 0; a < 2; ++a) {
        double d = train.points[i][a] - mean_[c][a];
        var_[c][a] += d * d;
      }
    }
    for (std::size_t c = 0; c < n_classes_; ++c)
      for (int a = 0; a < 2; ++a) {
        if (count_[c] > 0) var_[c][a] /= static_cast<double>(count_[c]);
        var_[c][a] = std::max(var_[c][a], 1e-9);
      }
    total_ = train.points.size();
  }

  int operator()(double x, double y) const {
    int best = 0;
    double best_score = 0.0;
    bool have = false;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      if (count_[c] == 0) continue;
      double score = std::log(static_cast<double>(count_[c]) /
                              static_cast<double>(total_));
      score += log_pdf(x, mean_[c][0], var_[c][0]);
      score += log_pdf(y, mean_[c][1], var_[c][1]);
      if (!have || score > best_score) {
        have = true;
        best_score = score;
        best = static_cast<int>(c);
      }
    }
    return best;
  }

 private:
  static double log_pdf(double v, double mean, double var) {
    double d = v - mean;
    return -0.5 * std::log(2.0 * 3.141592653589793 * var) -
           d * d / (2.0 * var);
  }

  std::size_t n_classes_;
  std::size_t total_ = 0;
  std::vector<std::size_t> count_;
  std::vector<std::array<double, 2>> mean_;
  std::vector<std::array<double, 2>> var_;
};

class one_vs_one_svm {
 public:
  one_vs_one_svm(const training_set& train, bool* converged)
      : n_classes_(train.n_classes) {
    for (int a = 0; a < n_classes_; ++a)
      for (int b = a + 1; b < n_classes_; ++b) {
        std::vector<std::array<double, 2>> x;
        std::vector<int> y;
        for (std::size_t i = 0; i < train.points.size(); ++i) {
          if (train.labels[i] == a) {
            x.push_back(train.points[i]);
            y.push_back(+1);
          } else if (train.labels[i] == b) {
            x.push_back(train.points[i]);
            y.push_back(-1);
          }
        }
        bool has_pos = false, has_neg = false;
        for (int t : y) (t > 0 ? has_pos : has_neg) = true;
        if (!has_pos || !has_neg) continue;
        SmoModel m = train_linear_smo(x, y);
        if (converged && !m.converged) *converged = false;
        pairs_.push_back({a, b, std::move(m)});
      }
  }

  int operator()(double x, double y) const {
    std::vector<int> votes(static_cast<std::size_t>(std::max(n_classes_, 1)), 0);
    for (const auto& p : pairs_) {
      double u = p.model.decision({x, y});
      ++votes[static_cast<std::size_t>(u >= 0.0 ? p.a : p.b)];
    }
    return static_cast<int>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
  }

 private:
  struct pair_model {
    int a, b;
    SmoModel model;
  };
  int n_classes_;
  std::vector<pair_model> pairs_;
};

}  // namespace detail

inline WrapperScore knn_score(const View2D& view, const FoldPlan& plan) {
  double err = detail::cv_error_rate(view, plan, [](detail::training_set t) {
    return detail::knn_predictor(std::move(t));
  });
  return {classifier_kind::knn, err, true};
}

inline WrapperScore j48_score(const View2D& view, const FoldPlan& plan) {
  double err = detail::cv_error_rate(view, plan, [](const detail::training_set& t) {
    return detail::decision_tree(t);
  });
  return {classifier_kind::j48, err, true};
}

inline WrapperScore nb_score(const View2D& view, const FoldPlan& plan) {
  double err = detail::cv_error_rate(view, plan, [](const detail::training_set& t) {
    return detail::naive_bayes(t);
  });
  return {classifier_kind::nb, err, true};
}

inline WrapperScore smo_score(const View2D& view, const FoldPlan& plan) {
  bool converged = true;
  double err = detail::cv_error_rate(view, plan, [&](const detail::training_set& t) {
    return detail::one_vs_one_svm(t, &converged);
  });
  return {classifier_kind::smo, err, converged};
}

}  // namespace lensrank
