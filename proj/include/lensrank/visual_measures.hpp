#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lensrank/cluster_indices.hpp"
#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"

namespace lensrank {

struct ScatterMatrices {
  std::array<std::array<double, 2>, 2> w{{{0.0, 0.0}, {0.0, 0.0}}};
  std::array<std::array<double, 2>, 2> b{{{0.0, 0.0}, {0.0, 0.0}}};
  std::array<double, 2> grand_centroid{0.0, 0.0};
  std::vector<std::array<double, 2>> class_centroids;
  std::vector<std::size_t> class_sizes;
};

inline ScatterMatrices scatter_matrices(const View2D& view) {
  ScatterMatrices s;
  int k = 0;
  for (int l : view.labels) k = std::max(k, l + 1);
  s.class_centroids.assign(static_cast<std::size_t>(k), {0.0, 0.0});
  s.class_sizes.assign(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto c = static_cast<std::size_t>(view.labels[i]);
    ++s.class_sizes[c];
    s.class_centroids[c][0] += view.points[i][0];
    s.class_centroids[c][1] += view.points[i][1];
    s.grand_centroid[0] += view.points[i][0];
    s.grand_centroid[1] += view.points[i][1];
  }
  double n = static_cast<double>(view.n_points());
  s.grand_centroid[0] /= n;
  s.grand_centroid[1] /= n;
  for (std::size_t c = 0; c < s.class_centroids.size(); ++c)
    if (s.class_sizes[c] > 0) {
      s.class_centroids[c][0] /= static_cast<double>(s.class_sizes[c]);
      s.class_centroids[c][1] /= static_cast<double>(s.class_sizes[c]);
    }
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto c = static_cast<std::size_t>(view.labels[i]);
    double dx = view.points[i][0] - s.class_centroids[c][0];
    double dy = view.points[i][1] - s.class_centroids[c][1];
    s.w[0][0] += dx * dx;
    s.w[0][1] += dx * dy;
    s.w[1][0] += dy * dx;
    s.w[1][1] += dy * dy;
  }
  for (std::size_t c = 0; c < s.class_centroids.size(); ++c) {
    if (s.class_sizes[c] == 0) continue;
    double dx = s.class_centroids[c][0] - s.grand_centroid[0];
    double dy = s.class_centroids[c][1] - s.grand_centroid[1];
    double nc = static_cast<double>(s.class_sizes[c]);
    s.b[0][0] += nc * dx * dx;
    s.b[0][1] += nc * dx * dy;
    s.b[1][0] += nc * dy * dx;
    s.b[1][1] += nc * dy * dy;
  }
  return s;
}

inline double det2(const std::array<std::array<double, 2>, 2>& m) {
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

// Wilks-lambda style ratio det(W)/det(W+B); 0 = classes fully explained.
inline IndexScore lda_index(const View2D& view) {
  std::size_t classes_present = 0;
  {
    std::vector<char> seen;
    for (int l : view.labels) {
      if (static_cast<std::size_t>(l) >= seen.size())
        seen.resize(static_cast<std::size_t>(l) + 1, 0);
      seen[static_cast<std::size_t>(l)] = 1;
    }
    for (char c : seen) classes_present += c;
  }
  if (classes_present < 2) return {1.0, true, "fewer than 2 classes"};
  ScatterMatrices s = scatter_matrices(view);
  std::array<std::array<double, 2>, 2> total = s.w;
  total[0][0] += s.b[0][0];
  total[0][1] += s.b[0][1];
  total[1][0] += s.b[1][0];
  total[1][1] += s.b[1][1];
  double denom = det2(total);
  if (denom <= 1e-15) return {1.0, true, "total scatter is singular"};
  double v = det2(s.w) / denom;
  return {std::min(1.0, std::max(0.0, v)), false, {}};
}

// Fraction of points strictly closer to some other class centroid than to
// their own (equidistant counts as inconsistent).
inline IndexScore ccm(const View2D& view) {
  ScatterMatrices s = scatter_matrices(view);
  std::size_t populated = 0;
  for (std::size_t n : s.class_sizes)
    if (n > 0) ++populated;
  if (populated < 2) return {0.0, true, "fewer than 2 classes"};
  std::size_t consistent = 0;
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto own = static_cast<std::size_t>(view.labels[i]);
    double dxo = view.points[i][0] - s.class_centroids[own][0];
    double dyo = view.points[i][1] - s.class_centroids[own][1];
    double d_own = dxo * dxo + dyo * dyo;
    bool ok = true;
    for (std::size_t c = 0; c < s.class_centroids.size(); ++c) {
      if (c == own || s.class_sizes[c] == 0) continue;
      double dx = view.points[i][0] - s.class_centroids[c][0];
      double dy = view.points[i][1] - s.class_centroids[c][1];
      if (d_own >= dx * dx + dy * dy) {
        ok = false;
        break;
      }
    }
    if (ok) ++consistent;
  }
  double v = 1.0 - static_cast<double>(consistent) /
                       static_cast<double>(view.n_points());
  return {std::min(1.0, std::max(0.0, v)), false, {}};
}

struct HistogramGrid {
  std::size_t bins = 0;
  std::size_t n_classes = 0;
  std::vector<std::uint32_t> raw;         // bins x bins x n_classes
  std::vector<std::uint32_t> aggregated;  // 3x3 neighborhood sums, same shape
  std::size_t total_points = 0;

  std::uint32_t raw_at(std::size_t bx, std::size_t by, std::size_t c) const {
    return raw[(by * bins + bx) * n_classes + c];
  }
  std::uint32_t agg_at(std::size_t bx, std::size_t by, std::size_t c) const {
    return aggregated[(by * bins + bx) * n_classes + c];
  }
};

inline HistogramGrid build_histogram(const View2D& view, std::size_t bins) {
  if (bins == 0) throw error("histogram needs at least 1 bin per axis");
  HistogramGrid g;
  g.bins = bins;
  int k = 0;
  for (int l : view.labels) k = std::max(k, l + 1);
  g.n_classes = static_cast<std::size_t>(std::max(k, 1));
  g.raw.assign(bins * bins * g.n_classes, 0);
  g.aggregated.assign(bins * bins * g.n_classes, 0);
  g.total_points = view.n_points();
  for (std::size_t i = 0; i < view.n_points(); ++i) {
    auto bx = static_cast<std::size_t>(view.points[i][0] * static_cast<double>(bins));
    auto by = static_cast<std::size_t>(view.points[i][1] * static_cast<double>(bins));
    bx = std::min(bx, bins - 1);
    by = std::min(by, bins - 1);
    ++g.raw[(by * bins + bx) * g.n_classes +
            static_cast<std::size_t>(view.labels[i])];
  }
  for (std::size_t by = 0; by < bins; ++by)
    for (std::size_t bx = 0; bx < bins; ++bx)
      for (std::size_t ny = (by == 0 ? 0 : by - 1);
           ny < std::min(bins, by + 2); ++ny)
        for (std::size_t nx = (bx == 0 ? 0 : bx - 1);
             nx < std::min(bins, bx + 2); ++nx)
          for (std::size_t c = 0; c < g.n_classes; ++c)
            g.aggregated[(by * bins + bx) * g.n_classes + c] +=
                g.raw[(ny * bins + nx) * g.n_classes + c];
  return g;
}

// Entropy of class mixing inside each bin's 3x3 neighborhood, weighted by
// neighborhood mass and normalized by log2 of the point count.
inline IndexScore hdm2d(const View2D& view, std::size_t bins = 100) {
  if (view.n_points() <= 1)
    return {0.0, true, "needs at least 2 points for the log2(M) normalizer"};
  HistogramGrid g = build_histogram(view, bins);
  double weighted_entropy = 0.0;
  double total_mass = 0.0;
  std::vector<double> counts(g.n_classes, 0.0);
  for (std::size_t by = 0; by < g.bins; ++by)
    for (std::size_t bx = 0; bx < g.bins; ++bx) {
      double mass = 0.0;
      for (std::size_t c = 0; c < g.n_classes; ++c) {
        counts[c] = g.agg_at(bx, by, c);
        mass += counts[c];
      }
      if (mass <= 0.0) continue;
      double h = 0.0;
      for (std::size_t c = 0; c < g.n_classes; ++c) {
        if (counts[c] <= 0.0) continue;
        double p = counts[c] / mass;
        h -= p * std::log2(p);
      }
      weighted_entropy += mass * h;
      total_mass += mass;
    }
  double log2m = std::log2(static_cast<double>(view.n_points()));
  if (total_mass <= 0.0 || log2m <= 0.0)
    return {0.0, true, "empty histogram"};
  double v = weighted_entropy / (log2m * total_mass);
  return {std::min(1.0, std::max(0.0, v)), false, {}};
}

}  // namespace lensrank
