#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lensrank/lensrank.hpp"

namespace {

using lensrank::error;

std::vector<lensrank::AxisPair> parse_pair_list(const std::string& text) {
  std::vector<lensrank::AxisPair> pairs;
  for (std::string_view token : lensrank::split(text, ',')) {
    std::string_view t = lensrank::trim(token);
    auto colon = t.find(':');
    if (colon == std::string_view::npos)
      throw error("pair '" + std::string(t) + "' must look like i:j");
    auto parse_index = [&](std::string_view part) {
      part = lensrank::trim(part);
      if (part.empty() ||
          part.find_first_not_of("0123456789") != std::string_view::npos)
        throw error("pair '" + std::string(t) +
                    "' must use non-negative column indices");
      return static_cast<std::size_t>(std::stoull(std::string(part)));
    };
    pairs.push_back(
        {parse_index(t.substr(0, colon)), parse_index(t.substr(colon + 1))});
  }
  if (pairs.empty()) throw error("empty pair list");
  return pairs;
}

template <class Fn>
void with_output(const std::string& out_path, Fn&& fn) {
  if (out_path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw error("cannot write output file '" + out_path + "'");
  fn(f);
  if (!f) throw error("failed writing output file '" + out_path + "'");
}

std::vector<lensrank::Provenance> requested_views(
    const lensrank::LabeledDataset& ds, const std::string& pairs_text,
    const std::string& expr_file) {
  std::vector<lensrank::Provenance> views;
  if (!pairs_text.empty() && !expr_file.empty())
    throw error("--pairs and --expr-file are mutually exclusive");
  if (!pairs_text.empty()) {
    for (const lensrank::AxisPair& p : parse_pair_list(pairs_text)) {
      if (p.i >= ds.n_features() || p.j >= ds.n_features())
        throw error("pair " + std::to_string(p.i) + ":" + std::to_string(p.j) +
                    " is out of range for " + std::to_string(ds.n_features()) +
                    " feature columns");
      views.emplace_back(p);
    }
  } else if (!expr_file.empty()) {
    for (lensrank::ExprPair& p : lensrank::load_projection_pairs(expr_file))
      views.emplace_back(std::move(p));
  } else {
    for (const lensrank::AxisPair& p : lensrank::enumerate_pairs(ds))
      views.emplace_back(p);
  }
  return views;
}

struct MeasuresOpts {
  std::string data, label_col, pairs, expr_file, out;
  std::uint64_t seed = 42;
  std::size_t bins = 100;
};

int run_measures(const MeasuresOpts& opt) {
  lensrank::LabeledDataset ds = lensrank::load_csv(opt.data, opt.label_col);
  std::vector<lensrank::Provenance> requested =
      requested_views(ds, opt.pairs, opt.expr_file);

  std::vector<lensrank::ScoreRow> rows(requested.size());
  std::vector<lensrank::View2D> pool;
  std::vector<std::size_t> pool_owner;
  for (std::size_t i = 0; i < requested.size(); ++i) {
    lensrank::View2D v = lensrank::make_view(ds, requested[i]);
    std::string label = lensrank::provenance_label(requested[i]);
    if (v.degenerate) {
      rows[i] = lensrank::make_degenerate_row(label, v.degenerate_reason);
    } else {
      pool.push_back(std::move(v));
      pool_owner.push_back(i);
    }
  }
  std::vector<lensrank::MeasureVector> scored =
      lensrank::measure_collection(pool, opt.seed, opt.bins);
  lensrank::LinearModel model = lensrank::published_visual_model();
  for (std::size_t k = 0; k < scored.size(); ++k) {
    std::size_t i = pool_owner[k];
    rows[i] = lensrank::make_score_row(
        lensrank::provenance_label(requested[i]), scored[k],
        lensrank::apply_model(model, scored[k]));
  }
  with_output(opt.out,
              [&](std::ostream& out) { lensrank::write_scores_csv(out, rows); });
  return 0;
}

struct RankOpts {
  std::string data, label_col, model_file, out;
  std::size_t top = 10;
  std::uint64_t seed = 42;
  std::size_t bins = 100;
};

int run_rank(const RankOpts& opt) {
  lensrank::LabeledDataset ds = lensrank::load_csv(opt.data, opt.label_col);
  lensrank::LinearModel model = opt.model_file.empty()
                                    ? lensrank::published_visual_model()
                                    : lensrank::load_model(opt.model_file);
  std::vector<lensrank::RankedView> ranked =
      lensrank::rank_views(ds, model, opt.top, opt.seed, opt.bins);
  with_output(opt.out, [&](std::ostream& out) {
    out << "rank,view,phr\n";
    for (std::size_t i = 0; i < ranked.size(); ++i)
      out << (i + 1) << ',' << ranked[i].pair.i << ':' << ranked[i].pair.j
          << ',' << lensrank::format_double(ranked[i].phr) << '\n';
  });
  return 0;
}

struct SelectOpts {
  std::string data, label_col, out;
  std::size_t bins = 5;
  std::size_t per_bin = 2;
  std::uint64_t seed = 42;
};

int run_select(const SelectOpts& opt) {
  lensrank::LabeledDataset ds = lensrank::load_csv(opt.data, opt.label_col);
  std::vector<lensrank::AxisPair> pairs = lensrank::enumerate_pairs(ds);
  std::vector<lensrank::View2D> views;
  std::vector<lensrank::AxisPair> kept;
  for (const lensrank::AxisPair& p : pairs) {
    lensrank::View2D v = lensrank::make_view(ds, p);
    if (v.degenerate) continue;
    views.push_back(std::move(v));
    kept.push_back(p);
  }
  std::vector<lensrank::MeasureVector> scored =
      lensrank::measure_collection(views, opt.seed);
  std::vector<std::size_t> picked =
      lensrank::select_diverse_views(scored, opt.bins, opt.per_bin);
  with_output(opt.out, [&](std::ostream& out) {
    out << "bin,view\n";
    for (std::size_t k = 0; k < picked.size(); ++k)
      out << (k / opt.per_bin) << ',' << kept[picked[k]].i << ':'
          << kept[picked[k]].j << '\n';
  });
  return 0;
}

struct ExprScoreOpts {
  std::vector<std::string> expressions;
  std::string expr_file, out;
};

int run_expr_score(const ExprScoreOpts& opt) {
  std::vector<lensrank::Expr> exprs;
  for (const std::string& text : opt.expressions)
    exprs.push_back(lensrank::parse_expression(text));
  if (!opt.expr_file.empty()) {
    std::ifstream in(opt.expr_file);
    if (!in)
      throw error("cannot open expression file '" + opt.expr_file + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view s = lensrank::trim(line);
      auto hash = s.find('#');
      if (hash != std::string_view::npos) s = lensrank::trim(s.substr(0, hash));
      if (s.empty()) continue;
      try {
        exprs.push_back(lensrank::parse_expression(s));
      } catch (const lensrank::parse_error& e) {
        throw error("expression file '" + opt.expr_file + "' line " +
                    std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (exprs.empty())
    throw error("no expressions given (pass them as arguments or --expr-file)");
  with_output(opt.out, [&](std::ostream& out) {
    out << "expression,n_operands,n_operators,tree_depth,n_blocks,"
           "avg_block_size,total_size,phr\n";
    for (const lensrank::Expr& e : exprs) {
      lensrank::ExprMetrics m = lensrank::compute_metrics(e);
      out << lensrank::render_linearized(e) << ',' << m.n_operands << ','
          << m.n_operators << ',' << m.tree_depth << ',' << m.n_blocks << ','
          << lensrank::format_fixed(m.avg_block_size, 2) << ',' << m.total_size
          << ',' << lensrank::format_fixed(lensrank::phr_semantic(m), 4)
          << '\n';
    }
  });
  return 0;
}

struct RenderOpts {
  std::string data, label_col, pairs, expr_file, out;
};

int run_render(const RenderOpts& opt) {
  lensrank::LabeledDataset ds = lensrank::load_csv(opt.data, opt.label_col);
  if (opt.pairs.empty() && opt.expr_file.empty())
    throw error("render needs --pairs i:j or --expr-file with one x,y pair");
  std::vector<lensrank::Provenance> views =
      requested_views(ds, opt.pairs, opt.expr_file);
  if (views.size() != 1)
    throw error("render draws exactly one view; got " +
                std::to_string(views.size()));
  lensrank::View2D view = lensrank::make_view(ds, views[0]);
  lensrank::save_svg(view, opt.out);
  return 0;
}

struct SearchOpts {
  std::string data, label_col, out;
  double alpha = 0.5;
  std::size_t beam = 8;
  std::size_t max_size = 7;
  std::uint64_t seed = 42;
  std::size_t bins = 100;
};

int run_search(const SearchOpts& opt) {
  lensrank::LabeledDataset ds = lensrank::load_csv(opt.data, opt.label_col);
  lensrank::SearchConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.beam_width = opt.beam;
  cfg.max_total_size = opt.max_size;
  cfg.seed = opt.seed;
  cfg.hdm_bins = opt.bins;
  lensrank::SearchResult result = lensrank::search_projections(ds, cfg);
  if (!result.note.empty()) std::cerr << "note: " << result.note << '\n';
  with_output(opt.out, [&](std::ostream& out) {
    lensrank::write_search_csv(out, result.entries);
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lensrank: scores, ranks, and renders 2D views of labeled data"};
  app.require_subcommand(1);

  MeasuresOpts measures;
  CLI::App* cmd_measures =
      app.add_subcommand("measures", "score views on the ten measures");
  cmd_measures->add_option("data", measures.data, "labeled CSV file")
      ->required();
  cmd_measures->add_option("--label-col", measures.label_col,
                           "name of the label column")
      ->required();
  cmd_measures->add_option("--pairs", measures.pairs,
                           "axis pairs i:j,k:l (default: all pairs)");
  cmd_measures->add_option("--expr-file", measures.expr_file,
                           "projection expressions, two lines per view");
  cmd_measures->add_option("--seed", measures.seed, "fold-plan seed");
  cmd_measures->add_option("--bins", measures.bins, "histogram grid size");
  cmd_measures->add_option("--out", measures.out, "output CSV path");

  RankOpts rank;
  CLI::App* cmd_rank =
      app.add_subcommand("rank", "rank axis pairs by composite PHR");
  cmd_rank->add_option("data", rank.data, "labeled CSV file")->required();
  cmd_rank->add_option("--label-col", rank.label_col,
                       "name of the label column")
      ->required();
  cmd_rank->add_option("--model", rank.model_file,
                       "model file (default: built-in coefficients)");
  cmd_rank->add_option("--top", rank.top, "views to keep (0 = all)");
  cmd_rank->add_option("--seed", rank.seed, "fold-plan seed");
  cmd_rank->add_option("--bins", rank.bins, "histogram grid size");
  cmd_rank->add_option("--out", rank.out, "output CSV path");

  SelectOpts select;
  CLI::App* cmd_select =
      app.add_subcommand("select", "pick diverse views across score bins");
  cmd_select->add_option("data", select.data, "labeled CSV file")->required();
  cmd_select->add_option("--label-col", select.label_col,
                         "name of the label column")
      ->required();
  cmd_select->add_option("--bins", select.bins, "equi-width score bins");
  cmd_select->add_option("--per-bin", select.per_bin, "views picked per bin");
  cmd_select->add_option("--seed", select.seed, "fold-plan seed");
  cmd_select->add_option("--out", select.out, "output CSV path");

  ExprScoreOpts expr_score;
  CLI::App* cmd_expr =
      app.add_subcommand("expr-score", "structural metrics and semantic PHR");
  cmd_expr->add_option("expressions", expr_score.expressions,
                       "expression text");
  cmd_expr->add_option("--expr-file", expr_score.expr_file,
                       "file with one expression per line");
  cmd_expr->add_option("--out", expr_score.out, "output CSV path");

  RenderOpts render;
  CLI::App* cmd_render =
      app.add_subcommand("render", "draw one view as an SVG scatterplot");
  cmd_render->add_option("data", render.data, "labeled CSV file")->required();
  cmd_render->add_option("--label-col", render.label_col,
                         "name of the label column")
      ->required();
  cmd_render->add_option("--pairs", render.pairs, "one axis pair i:j");
  cmd_render->add_option("--expr-file", render.expr_file,
                         "projection expressions, exactly one x,y pair");
  cmd_render->add_option("--out", render.out, "output SVG path")->required();

  SearchOpts search;
  CLI::App* cmd_search = app.add_subcommand(
      "search", "beam-search projection pairs for interpretability");
  cmd_search->add_option("data", search.data, "labeled CSV file")->required();
  cmd_search->add_option("--label-col", search.label_col,
                         "name of the label column")
      ->required();
  cmd_search->add_option("--alpha", search.alpha,
                         "weight on the visual score, in [0,1]");
  cmd_search->add_option("--beam", search.beam, "beam width");
  cmd_search->add_option("--max-size", search.max_size,
                         "max expression total size per axis");
  cmd_search->add_option("--seed", search.seed, "fold-plan seed");
  cmd_search->add_option("--bins", search.bins, "histogram grid size");
  cmd_search->add_option("--out", search.out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_measures->parsed()) return run_measures(measures);
    if (cmd_rank->parsed()) return run_rank(rank);
    if (cmd_select->parsed()) return run_select(select);
    if (cmd_expr->parsed()) return run_expr_score(expr_score);
    if (cmd_render->parsed()) return run_render(render);
    if (cmd_search->parsed()) return run_search(search);
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const lensrank::internal_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const lensrank::parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const lensrank::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
