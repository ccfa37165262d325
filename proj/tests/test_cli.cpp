#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "lensrank/lensrank.hpp"
#include "support.hpp"

using testsupport::CliResult;
using testsupport::run_cli;
using testsupport::sample_path;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

TEST_CASE("expr-score prints the documented columns for log(x)") {
  CliResult r = run_cli({"expr-score", "log(x)"});
  CHECK(r.exit_code == 0);
  CHECK(r.err.empty());
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] ==
        "expression,n_operands,n_operators,tree_depth,n_blocks,"
        "avg_block_size,total_size,phr");
  CHECK(lines[1] == "log(x),1,1,2,1,2.00,2,0.1061");
}

TEST_CASE("expr-score accepts multiple arguments and files with comments") {
  std::string dir = testsupport::make_temp_dir();
  std::string file = dir + "/exprs.txt";
  testsupport::write_file(file, "# comment only\nx * y + z * u\n\nsqrt(t)\n");
  CliResult r = run_cli({"expr-score", "x + y", "--expr-file", file});
  CHECK(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1].rfind("x + y,", 0) == 0);
  CHECK(lines[2].rfind("x * y + z * u,", 0) == 0);
  CHECK(lines[3].rfind("sqrt(t),", 0) == 0);
}

TEST_CASE("expr-score propagates parse failures with file context") {
  std::string dir = testsupport::make_temp_dir();
  std::string file = dir + "/bad.txt";
  testsupport::write_file(file, "x + y\nx ^ 2.5\n");
  CliResult r = run_cli({"expr-score", "--expr-file", file});
  CHECK(r.exit_code == 1);
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("line 2"));

  CliResult none = run_cli({"expr-score"});
  CHECK(none.exit_code == 1);
  CHECK_THAT(none.err, Catch::Matchers::ContainsSubstring("no expressions"));

  CliResult bad = run_cli({"expr-score", "x +"});
  CHECK(bad.exit_code == 1);
  CHECK_THAT(bad.err, Catch::Matchers::ContainsSubstring("at position"));
}

TEST_CASE("measures scores a named axis pair") {
  std::string dir = testsupport::make_temp_dir();
  std::string out = dir + "/scores.csv";
  CliResult r = run_cli({"measures", sample_path("blobs.csv"), "--label-col",
                         "class", "--pairs", "0:1", "--out", out});
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(testsupport::slurp(out));
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == lensrank::scores_csv_header());
  CHECK(lines[1].rfind("0:1,", 0) == 0);
  // knn 0, then the tree's 0.05: three points at class extremes land on the
  // wrong side of thresholds learned without them in their folds.
  CHECK(lines[1].rfind("0:1,0,0.05,0,0,", 0) == 0);
}

TEST_CASE("measures scores expression views from a projection file") {
  std::string dir = testsupport::make_temp_dir();
  std::string out = dir + "/scores.csv";
  CliResult r =
      run_cli({"measures", sample_path("blobs.csv"), "--label-col", "class",
               "--expr-file", sample_path("projections.txt"), "--out", out});
  REQUIRE(r.exit_code == 0);
  std::string text = testsupport::slurp(out);
  auto lines = lines_of(text);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].rfind("x + y|u,", 0) == 0);
  CHECK(lines[2].rfind("log(x * y)|sqrt(t) + u,", 0) == 0);
}

TEST_CASE("measures validates its view arguments") {
  CliResult both = run_cli({"measures", sample_path("blobs.csv"), "--label-col",
                            "class", "--pairs", "0:1", "--expr-file",
                            sample_path("projections.txt")});
  CHECK(both.exit_code == 1);
  CHECK_THAT(both.err, Catch::Matchers::ContainsSubstring("mutually exclusive"));

  CliResult malformed = run_cli({"measures", sample_path("blobs.csv"),
                                 "--label-col", "class", "--pairs", "0-1"});
  CHECK(malformed.exit_code == 1);
  CHECK_THAT(malformed.err, Catch::Matchers::ContainsSubstring("i:j"));

  CliResult range = run_cli({"measures", sample_path("blobs.csv"),
                             "--label-col", "class", "--pairs", "0:9"});
  CHECK(range.exit_code == 1);
  CHECK_THAT(range.err, Catch::Matchers::ContainsSubstring("out of range"));

  CliResult nofile = run_cli({"measures", "/tmp/definitely_not_here.csv",
                              "--label-col", "class"});
  CHECK(nofile.exit_code == 1);
  CHECK_THAT(nofile.err, Catch::Matchers::ContainsSubstring("error:"));
}

TEST_CASE("rank orders axis pairs under a custom error-rate model") {
  std::string dir = testsupport::make_temp_dir();
  std::string model = dir + "/model.txt";
  testsupport::write_file(model, "knn = 1\nccm = 1\nintercept = 0\n");
  std::string out = dir + "/rank.csv";
  CliResult r = run_cli({"rank", sample_path("blobs.csv"), "--label-col",
                         "class", "--model", model, "--top", "3", "--out", out});
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(testsupport::slurp(out));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "rank,view,phr");
  CHECK(lines[1].rfind("1,0:1,", 0) == 0);
  auto cells = lensrank::split(lines[1], ',');
  REQUIRE(cells.size() == 3);
  CHECK(std::stod(std::string(cells[2])) == 0.0);
  CHECK(lines[2].rfind("2,", 0) == 0);
  CHECK(lines[3].rfind("3,", 0) == 0);
}

TEST_CASE("rank with the built-in model emits one row per pair") {
  CliResult r = run_cli({"rank", sample_path("blobs.csv"), "--label-col",
                         "class", "--top", "0"});
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "rank,view,phr");
  double prev = -1e300;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = lensrank::split(lines[i], ',');
    REQUIRE(cells.size() == 3);
    double phr = std::stod(std::string(cells[2]));
    CHECK(phr >= prev);
    prev = phr;
  }
}

TEST_CASE("select spreads picks across score bins") {
  std::string dir = testsupport::make_temp_dir();
  std::string out = dir + "/select.csv";
  CliResult r = run_cli({"select", sample_path("blobs.csv"), "--label-col",
                         "class", "--bins", "3", "--per-bin", "2", "--out",
                         out});
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(testsupport::slurp(out));
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "bin,view");
  const std::vector<std::string> bins = {"0", "0", "1", "1", "2", "2"};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = lensrank::split(lines[i], ',');
    REQUIRE(cells.size() == 2);
    CHECK(std::string(cells[0]) == bins[i - 1]);
  }

  CliResult tight = run_cli({"select", sample_path("blobs.csv"), "--label-col",
                             "class"});
  CHECK(tight.exit_code == 1);
  CHECK_THAT(tight.err,
             Catch::Matchers::ContainsSubstring("insufficient views"));
}

TEST_CASE("render writes an svg scatterplot for one view") {
  std::string dir = testsupport::make_temp_dir();
  std::string out = dir + "/plot.svg";
  CliResult r = run_cli({"render", sample_path("blobs.csv"), "--label-col",
                         "class", "--pairs", "0:1", "--out", out});
  REQUIRE(r.exit_code == 0);
  std::string svg = testsupport::slurp(out);
  CHECK(svg.rfind("<svg ", 0) == 0);
  CHECK(testsupport::count_occurrences(svg, "<circle ") == 60);
  CHECK(testsupport::count_occurrences(svg, "class=\"legend\"") == 3);
}

TEST_CASE("render insists on exactly one non-degenerate view") {
  std::string dir = testsupport::make_temp_dir();

  CliResult none = run_cli({"render", sample_path("blobs.csv"), "--label-col",
                            "class", "--out", dir + "/x.svg"});
  CHECK(none.exit_code == 1);
  CHECK_THAT(none.err, Catch::Matchers::ContainsSubstring("render needs"));

  CliResult two = run_cli({"render", sample_path("blobs.csv"), "--label-col",
                           "class", "--pairs", "0:1,2:3", "--out",
                           dir + "/x.svg"});
  CHECK(two.exit_code == 1);
  CHECK_THAT(two.err, Catch::Matchers::ContainsSubstring("exactly one view"));

  std::string proj = dir + "/proj.txt";
  testsupport::write_file(proj, "t - t\nu\n");
  CliResult degen = run_cli({"render", sample_path("blobs.csv"), "--label-col",
                             "class", "--expr-file", proj, "--out",
                             dir + "/x.svg"});
  CHECK(degen.exit_code == 1);
  CHECK_THAT(degen.err, Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("search emits ranked expression pairs over the short names") {
  std::string dir = testsupport::make_temp_dir();
  std::string out = dir + "/search.csv";
  CliResult r = run_cli({"search", sample_path("blobs.csv"), "--label-col",
                         "class", "--alpha", "0", "--beam", "3", "--max-size",
                         "3", "--out", out});
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(testsupport::slurp(out));
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "rank,expr_x,expr_y,visual,semantic,combined");
  CHECK(lines[1].rfind("1,a,b,", 0) == 0);

  CliResult bad = run_cli({"search", sample_path("blobs.csv"), "--label-col",
                           "class", "--alpha", "2"});
  CHECK(bad.exit_code == 1);
  CHECK_THAT(bad.err, Catch::Matchers::ContainsSubstring("alpha"));
}

TEST_CASE("same-seed reruns are byte-identical") {
  CliResult a = run_cli({"measures", sample_path("xor.csv"), "--label-col",
                         "parity", "--seed", "7"});
  CliResult b = run_cli({"measures", sample_path("xor.csv"), "--label-col",
                         "parity", "--seed", "7"});
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);

  CliResult s1 = run_cli({"search", sample_path("xor.csv"), "--label-col",
                          "parity", "--beam", "2", "--max-size", "3"});
  CliResult s2 = run_cli({"search", sample_path("xor.csv"), "--label-col",
                          "parity", "--beam", "2", "--max-size", "3"});
  REQUIRE(s1.exit_code == 0);
  CHECK(s1.out == s2.out);
}

TEST_CASE("top-level argument handling") {
  CliResult help = run_cli({"--help"});
  CHECK(help.exit_code == 0);
  CHECK_THAT(help.out, Catch::Matchers::ContainsSubstring("lensrank"));

  CliResult nothing = run_cli({});
  CHECK(nothing.exit_code == 1);

  CliResult unknown = run_cli({"frobnicate"});
  CHECK(unknown.exit_code == 1);

  CliResult missing = run_cli({"rank", sample_path("blobs.csv")});
  CHECK(missing.exit_code == 1);
  CHECK_THAT(missing.err, Catch::Matchers::ContainsSubstring("--label-col"));
}
