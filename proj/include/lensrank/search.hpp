#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lensrank/common.hpp"
#include "lensrank/dataset.hpp"
#include "lensrank/expr.hpp"
#include "lensrank/measures.hpp"

namespace lensrank {

struct SearchConfig {
  double alpha = 0.5;              // weight on the visual score
  std::size_t beam_width = 8;
  std::size_t max_total_size = 7;  // per axis expression
  std::map<std::string, std::size_t> binding;  // empty: derive from dataset
  std::uint64_t seed = 42;
  std::size_t hdm_bins = 100;
};

struct SearchEntry {
  ExprPair pair;
  double visual = 0.0;
  double semantic = 0.0;
  double combined = 0.0;
};

struct SearchResult {
  std::vector<SearchEntry> entries;  // ascending by combined score
  std::string note;                  // reason when entries is empty
};

namespace detail {

struct search_candidate {
  Expr x, y;
  std::string key_x, key_y;  // rendered, key_x <= key_y

  std::string key() const { return key_x + "|" + key_y; }
};

inline search_candidate make_candidate(Expr a, Expr b) {
  search_candidate c;
  std::string ka = render_linearized(a);
  std::string kb = render_linearized(b);
  if (kb < ka) {
    std::swap(a, b);
    std::swap(ka, kb);
  }
  c.x = std::move(a);
  c.y = std::move(b);
  c.key_x = std::move(ka);
  c.key_y = std::move(kb);
  return c;
}

// One name per bound column: shortest wins, then lexicographically smallest,
// so the t,u,x,y,z aliases are preferred over long feature names when both
// resolve to the same column.
inline std::vector<std::string> growth_variables(
    const std::map<std::string, std::size_t>& binding) {
  std::map<std::size_t, std::string> per_column;
  for (const auto& [name, col] : binding) {
    auto it = per_column.find(col);
    if (it == per_column.end() || name.size() < it->second.size() ||
        (name.size() == it->second.size() && name < it->second))
      per_column[col] = name;
  }
  std::vector<std::string> out;
  for (const auto& [col, name] : per_column) out.push_back(name);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Expr> grow_expression(
    const Expr& base, const std::vector<std::string>& variables,
    std::size_t max_total_size) {
  std::string r = render_linearized(base);
  std::vector<std::string> texts;
  texts.push_back("log(" + r + ")");
  texts.push_back("sqrt(" + r + ")");
  for (const std::string& v : variables) {
    texts.push_back("(" + r + ") + " + v);
    texts.push_back("(" + r + ") - " + v);
    texts.push_back(v + " - (" + r + ")");
    texts.push_back("(" + r + ") * " + v);
    texts.push_back("(" + r + ") / " + v);
    texts.push_back(v + " / (" + r + ")");
  }
  std::vector<Expr> out;
  for (const std::string& t : texts) {
    Expr e = parse_expression(t);
    if (compute_metrics(e).total_size <= max_total_size)
      out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

inline SearchResult search_projections(const LabeledDataset& ds,
                                       const SearchConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw error("search alpha must lie in [0,1]");
  if (cfg.beam_width == 0) throw error("search beam width must be at least 1");
  if (cfg.max_total_size < 2)
    throw error("search max total size must be at least 2");

  std::map<std::string, std::size_t> binding =
      cfg.binding.empty() ? default_binding(ds) : cfg.binding;
  for (const auto& [name, col] : binding)
    if (col >= ds.n_features())
      throw error("variable '" + name + "' bound to missing column " +
                  std::to_string(col));

  SearchResult result;
  std::vector<std::string> variables = detail::growth_variables(binding);
  if (variables.size() < 2) {
    result.note = "search needs at least 2 distinct bound columns";
    return result;
  }

  std::vector<detail::search_candidate> current;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < variables.size(); ++i)
    for (std::size_t j = i + 1; j < variables.size(); ++j) {
      auto c = detail::make_candidate(
          parse_expression(variables[i]), parse_expression(variables[j]));
      if (seen.insert(c.key()).second) current.push_back(std::move(c));
    }

  struct stored {
    detail::search_candidate cand;
    MeasureVector mv;
    double semantic = 0.0;
  };
  std::vector<stored> all;

  const std::size_t max_generations = 64;
  for (std::size_t gen = 0; gen < max_generations && !current.empty(); ++gen) {
    std::vector<View2D> views(current.size());
    std::vector<char> valid(current.size(), 0);
    parallel_for(current.size(), [&](std::size_t i) {
      try {
        View2D v = make_view(ds, ExprPair{current[i].x, current[i].y}, binding);
        if (!v.degenerate) {
          views[i] = std::move(v);
          valid[i] = 1;
        }
      } catch (const error&) {
        // non-finite evaluation on this dataset: candidate is unusable
      }
    });
    std::vector<View2D> pool;
    std::vector<std::size_t> pool_owner;
    for (std::size_t i = 0; i < current.size(); ++i)
      if (valid[i]) {
        pool.push_back(std::move(views[i]));
        pool_owner.push_back(i);
      }
    std::vector<MeasureVector> scored =
        measure_collection(pool, cfg.seed, cfg.hdm_bins);

    struct gen_entry {
      std::size_t cand_idx;
      double combined;
    };
    std::vector<gen_entry> survivors;
    for (std::size_t k = 0; k < scored.size(); ++k) {
      PhrScore phr = apply_model(published_visual_model(), scored[k]);
      if (!phr.available) continue;
      std::size_t i = pool_owner[k];
      double semantic =
          0.5 * (phr_semantic(compute_metrics(current[i].x)) +
                 phr_semantic(compute_metrics(current[i].y)));
      double combined =
          cfg.alpha * phr.value + (1.0 - cfg.alpha) * semantic;
      survivors.push_back({i, combined});
      all.push_back({current[i], scored[k], semantic});
    }
    std::sort(survivors.begin(), survivors.end(),
              [&](const gen_entry& a, const gen_entry& b) {
                if (a.combined != b.combined) return a.combined < b.combined;
                const auto& ca = current[a.cand_idx];
                const auto& cb = current[b.cand_idx];
                if (ca.key_x != cb.key_x) return ca.key_x < cb.key_x;
                return ca.key_y < cb.key_y;
              });
    if (survivors.size() > cfg.beam_width) survivors.resize(cfg.beam_width);

    std::vector<detail::search_candidate> next;
    for (const gen_entry& g : survivors) {
      const detail::search_candidate& seed_cand = current[g.cand_idx];
      for (int side = 0; side < 2; ++side) {
        const Expr& base = side == 0 ? seed_cand.x : seed_cand.y;
        const Expr& other = side == 0 ? seed_cand.y : seed_cand.x;
        for (Expr& grown :
             detail::grow_expression(base, variables, cfg.max_total_size)) {
          auto c = detail::make_candidate(std::move(grown), other);
          if (c.key_x == c.key_y) continue;
          if (seen.insert(c.key()).second) next.push_back(std::move(c));
        }
      }
    }
    current = std::move(next);
  }

  if (all.empty()) {
    result.note = "no candidate produced a valid non-degenerate view";
    return result;
  }

  // Final scores use one Davies-Bouldin/Dunn normalization over every view
  // the whole search evaluated, so reported numbers are mutually comparable.
  std::vector<MeasureVector> final_mvs;
  final_mvs.reserve(all.size());
  for (const stored& s : all) final_mvs.push_back(s.mv);
  normalize_collection(final_mvs);
  for (std::size_t i = 0; i < all.size(); ++i) {
    PhrScore phr = apply_model(published_visual_model(), final_mvs[i]);
    if (!phr.available) continue;
    SearchEntry e;
    e.pair = ExprPair{all[i].cand.x, all[i].cand.y};
    e.visual = phr.value;
    e.semantic = all[i].semantic;
    e.combined = cfg.alpha * e.visual + (1.0 - cfg.alpha) * e.semantic;
    result.entries.push_back(std::move(e));
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const SearchEntry& a, const SearchEntry& b) {
              if (a.combined != b.combined) return a.combined < b.combined;
              std::string ax = render_linearized(a.pair.x);
              std::string bx = render_linearized(b.pair.x);
              if (ax != bx) return ax < bx;
              return render_linearized(a.pair.y) < render_linearized(b.pair.y);
            });
  if (result.entries.empty())
    result.note = "no candidate produced a valid non-degenerate view";
  return result;
}

inline void write_search_csv(std::ostream& out,
                             const std::vector<SearchEntry>& entries) {
  out << "rank,expr_x,expr_y,visual,semantic,combined\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const SearchEntry& e = entries[i];
    out << (i + 1) << ',' << render_linearized(e.pair.x) << ','
        << render_linearized(e.pair.y) << ',' << format_double(e.visual)
        << ',' << format_double(e.semantic) << ','
        << format_double(e.combined) << '\n';
  }
}

inline void write_search_csv(const std::string& path,
                             const std::vector<SearchEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw error("cannot write search results file '" + path + "'");
  write_search_csv(out, entries);
  if (!out) throw error("failed writing search results file '" + path + "'");
}

struct SearchCsvRow {
  std::size_t rank = 0;
  std::string expr_x, expr_y;
  double visual = 0.0, semantic = 0.0, combined = 0.0;
};

inline std::vector<SearchCsvRow> read_search_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open search results file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw error("search results file '" + path + "' is empty");
  if (trim(line) != "rank,expr_x,expr_y,visual,semantic,combined")
    throw error("search results file '" + path +
                "' has an unexpected header");
  std::vector<SearchCsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells = split(line, ',');
    if (cells.size() != 6)
      throw error("search results file '" + path + "' line " +
                  std::to_string(line_no) + ": expected 6 columns");
    auto ctx = [&](const char* what) {
      return "search results file '" + path + "' line " +
             std::to_string(line_no) + " " + what;
    };
    SearchCsvRow row;
    row.rank = static_cast<std::size_t>(
        parse_double(trim(cells[0]), ctx("rank")));
    row.expr_x = std::string(cells[1]);
    row.expr_y = std::string(cells[2]);
    row.visual = parse_double(trim(cells[3]), ctx("visual"));
    row.semantic = parse_double(trim(cells[4]), ctx("semantic"));
    row.combined = parse_double(trim(cells[5]), ctx("combined"));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lensrank
