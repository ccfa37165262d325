#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"

namespace lensrank {

struct IndexScore {
  double value = 0.0;
  bool degenerate = false;
  std::string reason;
};

struct PairwiseDistances {
  std::vector<double> dist;       // condensed upper triangle, (i,j) with i<j
  std::vector<char> same_class;   // parallel to dist
};

inline PairwiseDistances pairwise_distances(const View2D& view) {
  const std::size_t n = view.n_points();
  PairwiseDistances out;
  out.dist.reserve(n * (n - 1) / 2);
  out.same_class.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = view.points[i][0] - view.points[j][0];
      double dy = view.points[i][1] - view.points[j][1];
      out.dist.push_back(std::sqrt(dx * dx + dy * dy));
      out.same_class.push_back(view.labels[i] == view.labels[j] ? 1 : 0);
    }
  return out;
}

// C index: where the within-class distance sum sits between the best and the
// worst achievable sums of the same number of pairwise distances.
inline IndexScore c_index(const View2D& view) {
  if (view.n_points() < 2) return {0.0, true, "fewer than 2 points"};
  PairwiseDistances pd = pairwise_distances(view);
  std::size_t p = 0;
  double sd = 0.0;
  for (std::size_t i = 0; i < pd.dist.size(); ++i)
    if (pd.same_class[i]) {
      ++p;
      sd += pd.dist[i];
    }
  if (p == 0) return {0.0, true, "no same-class pair"};
  // With every pair same-class the three sums coincide mathematically; they
  // are accumulated in different orders, so the ratio below would divide one
  // rounding residue by another.
  if (p == pd.dist.size())
    return {0.0, true, "every pair is same-class"};
  std::vector<double> sorted = pd.dist;
  std::sort(sorted.begin(), sorted.end());
  double sd_min = 0.0, sd_max = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    sd_min += sorted[i];
    sd_max += sorted[sorted.size() - 1 - i];
  }
  if (sd_max - sd_min <= 0.0) return {0.0, true, "all pairwise distances equal"};
  double v = (sd - sd_min) / (sd_max - sd_min);
  return {std::min(1.0, std::max(0.0, v)), false, {}};
}

namespace detail {

struct class_geometry {
  std::vector<std::array<double, 2>> centroid;
  std::vector<double> mean_scatter;  // mean distance to own centroid
  std::vector<double> diameter;      // max within-class pairwise distance
  std::vector<std::size_t> size;
  std::size_t n_classes = 0;
};

inline class_geometry class_geometry_of(const View2D& view) {
  class_geometry g;
  int k = 0;
  for (int l : view.labels) k = std::max(k, l + 1);
  g.n_classes = static_cast<std::size_t>(k);
  g.centroid.assign(g.n_classes, {0.0, 0.0});
  g.mean_scatter.assign(g.n_classes, 0.0);
  g.diameter.assign(g.n_classes, 0.0);
  g.size.assign(g.n_classes, 0);
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto c = static_cast<std::size_t>(view.labels[i]);
    ++g.size[c];
    g.centroid[c][0] += view.points[i][0];
    g.centroid[c][1] += view.points[i][1];
  }
  for (std::size_t c = 0; c < g.n_classes; ++c)
    if (g.size[c] > 0) {
      g.centroid[c][0] /= static_cast<double>(g.size[c]);
      g.centroid[c][1] /= static_cast<double>(g.size[c]);
    }
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto c = static_cast<std::size_t>(view.labels[i]);
    double dx = view.points[i][0] - g.centroid[c][0];
    double dy = view.points[i][1] - g.centroid[c][1];
    g.mean_scatter[c] += std::sqrt(dx * dx + dy * dy);
  }
  for (std::size_t c = 0; c < g.n_classes; ++c)
    if (g.size[c] > 0) g.mean_scatter[c] /= static_cast<double>(g.size[c]);
  for (std::size_t i = 0; i < view.n_points(); ++i)
    for (std::size_t j = i + 1; j < view.n_points(); ++j) {
      if (view.labels[i] != view.labels[j]) continue;
      auto c = static_cast<std::size_t>(view.labels[i]);
      double dx = view.points[i][0] - view.points[j][0];
      double dy = view.points[i][1] - view.points[j][1];
      g.diameter[c] = std::max(g.diameter[c], std::sqrt(dx * dx + dy * dy));
    }
  return g;
}

inline double centroid_distance(const class_geometry& g, std::size_t a,
                                std::size_t b) {
  double dx = g.centroid[a][0] - g.centroid[b][0];
  double dy = g.centroid[a][1] - g.centroid[b][1];
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace detail

// Raw value of the printed index: mean over classes of the smallest
// centroid-separation to scatter-sum ratio. Larger raw values mean better
// separated classes; collection normalization turns this into badness.
inline IndexScore davies_bouldin_raw(const View2D& view) {
  detail::class_geometry g = detail::class_geometry_of(view);
  std::size_t populated = 0;
  for (std::size_t s : g.size)
    if (s > 0) ++populated;
  if (populated < 2) return {0.0, true, "fewer than 2 classes"};
  double total = 0.0;
  bool infinite = false;
  for (std::size_t a = 0; a < g.n_classes; ++a) {
    if (g.size[a] == 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < g.n_classes; ++b) {
      if (b == a || g.size[b] == 0) continue;
      double delta = detail::centroid_distance(g, a, b);
      double spread = g.mean_scatter[a] + g.mean_scatter[b];
      double ratio;
      if (delta <= 0.0)
        ratio = 0.0;
      else if (spread <= 0.0)
        ratio = std::numeric_limits<double>::infinity();
      else
        ratio = delta / spread;
      best = std::min(best, ratio);
    }
    if (std::isinf(best)) infinite = true;
    total += best;
  }
  if (infinite)
    return {std::numeric_limits<double>::infinity(), true,
            "point-mass classes give an infinite separation ratio"};
  return {total / static_cast<double>(populated), false, {}};
}

// Raw Dunn: single-linkage inter-class distance over the largest class
// diameter. Larger is better; collection normalization inverts it.
inline IndexScore dunn_raw(const View2D& view) {
  detail::class_geometry g = detail::class_geometry_of(view);
  std::size_t populated = 0;
  for (std::size_t s : g.size)
    if (s > 0) ++populated;
  if (populated < 2) return {0.0, true, "fewer than 2 classes"};

  double min_between = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < view.n_points(); ++i)
    for (std::size_t j = i + 1; j < view.n_points(); ++j) {
      if (view.labels[i] == view.labels[j]) continue;
      double dx = view.points[i][0] - view.points[j][0];
      double dy = view.points[i][1] - view.points[j][1];
      min_between = std::min(min_between, std::sqrt(dx * dx + dy * dy));
    }
  double max_diameter = 0.0;
  for (std::size_t c = 0; c < g.n_classes; ++c)
    max_diameter = std::max(max_diameter, g.diameter[c]);

  if (min_between <= 0.0 && max_diameter <= 0.0)
    return {0.0, true, "all points coincident"};
  if (max_diameter <= 0.0)
    return {std::numeric_limits<double>::infinity(), false, {}};
  if (min_between <= 0.0) return {0.0, false, {}};
  return {min_between / max_diameter, false, {}};
}

// Turns larger-is-better raw index values into [0,1] badness by min-max over
// the collection and inversion. Infinite raws (perfect separation) become 0;
// a spread-less collection scores 0 everywhere.
inline std::vector<double> normalized_badness(const std::vector<double>& raws) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double r : raws) {
    if (!std::isfinite(r)) continue;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  std::vector<double> out(raws.size(), 0.0);
  bool flat = !(hi > lo);
  for (std::size_t i = 0; i < raws.size(); ++i) {
    if (!std::isfinite(raws[i]) || flat) {
      out[i] = 0.0;
    } else {
      double norm = (raws[i] - lo) / (hi - lo);
      out[i] = std::min(1.0, std::max(0.0, 1.0 - norm));
    }
  }
  return out;
}

}  // namespace lensrank
