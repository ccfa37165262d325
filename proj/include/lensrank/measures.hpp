#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lensrank/classifiers.hpp"
#include "lensrank/cluster_indices.hpp"
#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"
#include "lensrank/folds.hpp"
#include "lensrank/regression.hpp"
#include "lensrank/visual_measures.hpp"

namespace lensrank {

inline constexpr std::size_t n_measures = 10;

inline const std::array<std::string_view, n_measures>& measure_names() {
  static const std::array<std::string_view, n_measures> names = {
      "knn",  "j48",  "nb",        "smo", "c_index",
      "davies_bouldin", "dunn", "lda_index", "ccm", "hdm2d"};
  return names;
}

inline std::optional<std::size_t> measure_index(std::string_view name) {
  const auto& names = measure_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

struct MeasureVector {
  std::array<double, n_measures> values{};
  std::array<bool, n_measures> degenerate{};
  std::array<bool, n_measures> needs_collection{};
  std::array<std::string, n_measures> reasons{};
  double raw_db = 0.0;
  double raw_dunn = 0.0;
  bool smo_converged = true;

  bool available(std::size_t i) const {
    return !degenerate[i] && !needs_collection[i];
  }
};

namespace measure_slot {
inline constexpr std::size_t knn = 0;
inline constexpr std::size_t j48 = 1;
inline constexpr std::size_t nb = 2;
inline constexpr std::size_t smo = 3;
inline constexpr std::size_t c_index = 4;
inline constexpr std::size_t davies_bouldin = 5;
inline constexpr std::size_t dunn = 6;
inline constexpr std::size_t lda_index = 7;
inline constexpr std::size_t ccm = 8;
inline constexpr std::size_t hdm2d = 9;
}  // namespace measure_slot

// Scores one view on its own. Davies-Bouldin and Dunn stay as raw values with
// needs_collection markers until a normalization pass supplies the min-max
// context of a view collection.
inline MeasureVector measure_view_isolated(const View2D& view,
                                           std::uint64_t seed,
                                           std::size_t hdm_bins = 100) {
  if (view.degenerate)
    throw error("cannot score degenerate view (" + view.degenerate_reason +
                ")");
  MeasureVector mv;
  const std::size_t n = view.n_points();
  if (n < 2) {
    for (std::size_t s : {measure_slot::knn, measure_slot::j48,
                          measure_slot::nb, measure_slot::smo}) {
      mv.degenerate[s] = true;
      mv.reasons[s] = "cross-validation needs at least 2 points";
    }
  } else {
    FoldPlan plan =
        make_stratified_folds(view, std::min<std::size_t>(10, n), seed);
    mv.values[measure_slot::knn] = knn_score(view, plan).error_rate;
    mv.values[measure_slot::j48] = j48_score(view, plan).error_rate;
    mv.values[measure_slot::nb] = nb_score(view, plan).error_rate;
    WrapperScore smo = smo_score(view, plan);
    mv.values[measure_slot::smo] = smo.error_rate;
    mv.smo_converged = smo.converged;
  }

  auto put = [&mv](std::size_t slot, const IndexScore& score) {
    mv.degenerate[slot] = score.degenerate;
    mv.reasons[slot] = score.reason;
    mv.values[slot] = score.degenerate && !std::isfinite(score.value)
                          ? 0.0
                          : score.value;
  };
  put(measure_slot::c_index, c_index(view));

  IndexScore db = davies_bouldin_raw(view);
  if (db.degenerate) {
    put(measure_slot::davies_bouldin, db);
  } else {
    mv.raw_db = db.value;
    mv.values[measure_slot::davies_bouldin] = db.value;
    mv.needs_collection[measure_slot::davies_bouldin] = true;
    mv.reasons[measure_slot::davies_bouldin] =
        "raw value awaiting collection normalization";
  }
  IndexScore du = dunn_raw(view);
  if (du.degenerate) {
    put(measure_slot::dunn, du);
  } else {
    mv.raw_dunn = du.value;
    mv.values[measure_slot::dunn] = du.value;
    mv.needs_collection[measure_slot::dunn] = true;
    mv.reasons[measure_slot::dunn] =
        "raw value awaiting collection normalization";
  }

  put(measure_slot::lda_index, lda_index(view));
  put(measure_slot::ccm, ccm(view));
  put(measure_slot::hdm2d, hdm2d(view, hdm_bins));
  return mv;
}

// Replaces the raw Davies-Bouldin and Dunn values with min-max-normalized
// badness over the whole collection (larger raw = better structure, so the
// normalized value is inverted to keep every slot smaller-is-better).
inline void normalize_collection(std::vector<MeasureVector>& collection) {
  auto pass = [&collection](std::size_t slot, double MeasureVector::* raw) {
    std::vector<double> raws;
    std::vector<std::size_t> owners;
    for (std::size_t i = 0; i < collection.size(); ++i) {
      if (collection[i].degenerate[slot]) continue;
      raws.push_back(collection[i].*raw);
      owners.push_back(i);
    }
    std::vector<double> badness = normalized_badness(raws);
    for (std::size_t k = 0; k < owners.size(); ++k) {
      MeasureVector& mv = collection[owners[k]];
      mv.values[slot] = badness[k];
      mv.needs_collection[slot] = false;
      mv.reasons[slot].clear();
    }
  };
  pass(measure_slot::davies_bouldin, &MeasureVector::raw_db);
  pass(measure_slot::dunn, &MeasureVector::raw_dunn);
}

// Scores every view in the collection and normalizes Davies-Bouldin/Dunn over
// that collection. All views must be non-degenerate.
inline std::vector<MeasureVector> measure_collection(
    const std::vector<View2D>& views, std::uint64_t seed,
    std::size_t hdm_bins = 100) {
  std::vector<MeasureVector> out(views.size());
  parallel_for(views.size(), [&](std::size_t i) {
    out[i] = measure_view_isolated(views[i], seed, hdm_bins);
  });
  normalize_collection(out);
  return out;
}

// Scores one view; Davies-Bouldin/Dunn are normalized against the raw values
// of the given collection pool plus the view itself. An empty collection
// leaves the needs_collection markers in place.
inline MeasureVector measure_all(const View2D& view,
                                 const std::vector<View2D>& collection,
                                 std::uint64_t seed,
                                 std::size_t hdm_bins = 100) {
  MeasureVector mv = measure_view_isolated(view, seed, hdm_bins);
  if (collection.empty()) return mv;
  std::vector<double> db_raws, dunn_raws;
  if (!mv.degenerate[measure_slot::davies_bouldin])
    db_raws.push_back(mv.raw_db);
  if (!mv.degenerate[measure_slot::dunn]) dunn_raws.push_back(mv.raw_dunn);
  for (const View2D& other : collection) {
    if (other.degenerate) continue;
    IndexScore db = davies_bouldin_raw(other);
    if (!db.degenerate) db_raws.push_back(db.value);
    IndexScore du = dunn_raw(other);
    if (!du.degenerate) dunn_raws.push_back(du.value);
  }
  if (!mv.degenerate[measure_slot::davies_bouldin]) {
    mv.values[measure_slot::davies_bouldin] = normalized_badness(db_raws)[0];
    mv.needs_collection[measure_slot::davies_bouldin] = false;
    mv.reasons[measure_slot::davies_bouldin].clear();
  }
  if (!mv.degenerate[measure_slot::dunn]) {
    mv.values[measure_slot::dunn] = normalized_badness(dunn_raws)[0];
    mv.needs_collection[measure_slot::dunn] = false;
    mv.reasons[measure_slot::dunn].clear();
  }
  return mv;
}

// Published composite model over six of the ten measures.
inline LinearModel published_visual_model() {
  LinearModel model;
  model.terms = {{"j48", -0.7772}, {"smo", 0.8155},
                 {"c_index", -0.4305}, {"davies_bouldin", -0.4588},
                 {"ccm", 0.6586},   {"hdm2d", 0.3285}};
  model.intercept = 0.3606;
  return model;
}

struct PhrScore {
  double value = 0.0;
  bool available = false;
  std::string reason;
};

inline PhrScore apply_model(const LinearModel& model, const MeasureVector& mv) {
  PhrScore out;
  double v = model.intercept;
  for (const auto& [name, coef] : model.terms) {
    auto idx = measure_index(name);
    if (!idx) throw error("model term '" + name + "' is not a measure name");
    if (mv.degenerate[*idx]) {
      out.reason = "measure '" + name + "' is degenerate" +
                   (mv.reasons[*idx].empty() ? "" : ": " + mv.reasons[*idx]);
      return out;
    }
    if (mv.needs_collection[*idx]) {
      out.reason =
          "measure '" + name + "' needs collection normalization first";
      return out;
    }
    v += coef * mv.values[*idx];
  }
  out.value = v;
  out.available = true;
  return out;
}

inline double phr_visual(const MeasureVector& mv) {
  PhrScore score = apply_model(published_visual_model(), mv);
  if (!score.available) throw error(score.reason);
  return score.value;
}

// Picks per_bin views per equi-width bin over [0,1], favoring views whose
// measure values concentrate in that bin. Earlier bins claim views first and
// a claimed view never reappears.
inline std::vector<std::size_t> select_diverse_views(
    const std::vector<MeasureVector>& scored, std::size_t bins = 5,
    std::size_t per_bin = 2) {
  if (bins == 0) throw error("select needs at least 1 bin");
  if (per_bin == 0) throw error("select needs per-bin of at least 1");
  if (scored.size() < bins * per_bin)
    throw error("insufficient views: " + std::to_string(scored.size()) +
                " scored, need at least " + std::to_string(bins * per_bin));
  std::vector<bool> claimed(scored.size(), false);
  std::vector<std::size_t> picked;
  for (std::size_t b = 0; b < bins; ++b) {
    std::vector<std::size_t> counts(scored.size(), 0);
    for (std::size_t i = 0; i < scored.size(); ++i) {
      for (std::size_t s = 0; s < n_measures; ++s) {
        if (!scored[i].available(s)) continue;
        double v = scored[i].values[s];
        if (v < 0.0 || v > 1.0) continue;
        auto bin = static_cast<std::size_t>(
            std::min(static_cast<double>(bins - 1),
                     std::floor(v * static_cast<double>(bins))));
        if (bin == b) ++counts[i];
      }
    }
    for (std::size_t k = 0; k < per_bin; ++k) {
      std::size_t best = scored.size();
      for (std::size_t i = 0; i < scored.size(); ++i) {
        if (claimed[i]) continue;
        if (best == scored.size() || counts[i] > counts[best]) best = i;
      }
      if (best == scored.size()) return picked;
      claimed[best] = true;
      picked.push_back(best);
    }
  }
  return picked;
}

struct RankedView {
  AxisPair pair;
  double phr = 0.0;
};

// Scores every axis pair and orders ascending by composite PHR (smaller =
// better view). Pairs whose view is degenerate or whose model inputs are
// degenerate are skipped.
inline std::vector<RankedView> rank_views(const LabeledDataset& ds,
                                          const LinearModel& model,
                                          std::size_t top,
                                          std::uint64_t seed = 42,
                                          std::size_t hdm_bins = 100) {
  std::vector<AxisPair> pairs = enumerate_pairs(ds);
  std::vector<View2D> views;
  std::vector<AxisPair> kept;
  for (const AxisPair& p : pairs) {
    View2D v = make_view(ds, p);
    if (v.degenerate) continue;
    views.push_back(std::move(v));
    kept.push_back(p);
  }
  std::vector<MeasureVector> scored = measure_collection(views, seed, hdm_bins);
  std::vector<RankedView> ranked;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    PhrScore phr = apply_model(model, scored[i]);
    if (!phr.available) continue;
    ranked.push_back({kept[i], phr.value});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedView& a, const RankedView& b) {
              if (a.phr != b.phr) return a.phr < b.phr;
              if (a.pair.i != b.pair.i) return a.pair.i < b.pair.i;
              return a.pair.j < b.pair.j;
            });
  if (top > 0 && ranked.size() > top) ranked.resize(top);
  return ranked;
}

// ---------------------------------------------------------------------------
// Scores CSV

struct ScoreRow {
  std::string view;
  std::array<std::optional<double>, n_measures> values{};
  std::optional<double> phr;
  std::string flags;
};

inline ScoreRow make_score_row(const std::string& label,
                               const MeasureVector& mv, const PhrScore& phr) {
  ScoreRow row;
  row.view = label;
  std::string flags;
  auto add_flag = [&flags](const std::string& token) {
    if (!flags.empty()) flags += ';';
    flags += token;
  };
  for (std::size_t i = 0; i < n_measures; ++i) {
    if (mv.degenerate[i]) {
      add_flag(std::string(measure_names()[i]) + "=degenerate");
    } else if (mv.needs_collection[i]) {
      add_flag(std::string(measure_names()[i]) + "=needs_collection");
    } else {
      row.values[i] = mv.values[i];
    }
  }
  if (!mv.smo_converged) add_flag("smo=unconverged");
  if (phr.available) row.phr = phr.value;
  row.flags = flags;
  return row;
}

inline ScoreRow make_degenerate_row(const std::string& label,
                                    const std::string& reason) {
  ScoreRow row;
  row.view = label;
  row.flags = "degenerate=true";
  if (!reason.empty()) row.flags += ";reason=" + reason;
  return row;
}

inline std::string scores_csv_header() {
  std::string h = "view";
  for (auto name : measure_names()) {
    h += ',';
    h += name;
  }
  h += ",phr,flags";
  return h;
}

inline void write_scores_csv(std::ostream& out,
                             const std::vector<ScoreRow>& rows) {
  out << scores_csv_header() << '\n';
  for (const ScoreRow& row : rows) {
    out << row.view;
    for (const auto& v : row.values) {
      out << ',';
      if (v) out << format_double(*v);
    }
    out << ',';
    if (row.phr) out << format_double(*row.phr);
    out << ',' << row.flags << '\n';
  }
}

inline void write_scores_csv(const std::string& path,
                             const std::vector<ScoreRow>& rows) {
  std::ofstream out(path);
  if (!out) throw error("cannot write scores file '" + path + "'");
  write_scores_csv(out, rows);
  if (!out) throw error("failed writing scores file '" + path + "'");
}

inline std::vector<ScoreRow> read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open scores file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw error("scores file '" + path + "' is empty");
  if (trim(line) != scores_csv_header())
    throw error("scores file '" + path + "' has an unexpected header");
  std::vector<ScoreRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells = split(line, ',');
    if (cells.size() != n_measures + 3)
      throw error("scores file '" + path + "' line " +
                  std::to_string(line_no) + ": expected " +
                  std::to_string(n_measures + 3) + " columns, found " +
                  std::to_string(cells.size()));
    ScoreRow row;
    row.view = std::string(cells[0]);
    auto cell_context = [&](std::size_t col) {
      return "scores file '" + path + "' line " + std::to_string(line_no) +
             " column " + std::to_string(col + 1);
    };
    for (std::size_t i = 0; i < n_measures; ++i) {
      std::string_view cell = trim(cells[i + 1]);
      if (!cell.empty())
        row.values[i] = parse_double(cell, cell_context(i + 1));
    }
    std::string_view phr_cell = trim(cells[n_measures + 1]);
    if (!phr_cell.empty())
      row.phr = parse_double(phr_cell, cell_context(n_measures + 1));
    row.flags = std::string(cells[n_measures + 2]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lensrank
