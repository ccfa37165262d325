#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"

namespace lensrank {

struct FoldPlan {
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignments;  // per view row
};

// Rows sorted by (x, y, label): the same point multiset always yields the
// same ordering, which makes every downstream score independent of the
// dataset's row order.
inline std::vector<std::size_t> canonical_order(const View2D& view) {
  std::vector<std::size_t> order(view.n_points());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto& pa = view.points[a];
                     const auto& pb = view.points[b];
                     if (pa[0] != pb[0]) return pa[0] < pb[0];
                     if (pa[1] != pb[1]) return pa[1] < pb[1];
                     return view.labels[a] < view.labels[b];
                   });
  return order;
}

inline FoldPlan make_stratified_folds(const View2D& view, std::size_t n_folds,
                                      std::uint64_t seed) {
  if (n_folds < 2) throw error("fold plan needs at least 2 folds");
  if (view.n_points() < n_folds)
    throw error("view has fewer points (" + std::to_string(view.n_points()) +
                ") than folds (" + std::to_string(n_folds) + ")");
  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.assignments.assign(view.n_points(), 0);

  std::vector<std::size_t> order = canonical_order(view);
  int n_classes = 0;
  for (int l : view.labels) n_classes = std::max(n_classes, l + 1);

  rng64 rng(seed);
  std::size_t cursor = 0;
  for (int cls = 0; cls < n_classes; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t idx : order)
      if (view.labels[idx] == cls) members.push_back(idx);
    deterministic_shuffle(members, rng);
    for (std::size_t idx : members)
      plan.assignments[idx] = cursor++ % n_folds;
  }
  return plan;
}

}  // namespace lensrank
