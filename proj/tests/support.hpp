#pragma once

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lensrank/lensrank.hpp"

#ifndef LENSRANK_FIXTURE_DIR
#error "LENSRANK_FIXTURE_DIR must be defined by the build"
#endif
#ifndef LENSRANK_SAMPLE_DIR
#error "LENSRANK_SAMPLE_DIR must be defined by the build"
#endif
#ifndef LENSRANK_CLI_PATH
#define LENSRANK_CLI_PATH ""
#endif

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(LENSRANK_FIXTURE_DIR) + "/" + name;
}

inline std::string sample_path(const std::string& name) {
  return std::string(LENSRANK_SAMPLE_DIR) + "/" + name;
}

// ---------------------------------------------------------------------------
// Bundled expression tables

struct ExprFixtureRow {
  std::string set;
  int id = 0;
  std::string expression;
  std::size_t n_operands = 0;
  std::size_t n_operators = 0;
  std::size_t tree_depth = 0;
  std::size_t n_blocks = 0;
  std::optional<double> avg_block_size;
  std::size_t total_size = 0;
  std::optional<double> median_rating;
  std::optional<double> median_time_s;
  std::optional<int> n_correct;
};

inline std::vector<ExprFixtureRow> load_expression_fixture() {
  std::string path = fixture_path("expressions_tables.csv");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<ExprFixtureRow> rows;
  while (std::getline(in, line)) {
    if (lensrank::trim(line).empty()) continue;
    std::vector<std::string_view> c = lensrank::split(line, ',');
    if (c.size() != 12)
      throw std::runtime_error("bad fixture row in " + path + ": " + line);
    ExprFixtureRow r;
    r.set = std::string(c[0]);
    r.id = std::stoi(std::string(c[1]));
    r.expression = std::string(c[2]);
    r.n_operands = std::stoul(std::string(c[3]));
    r.n_operators = std::stoul(std::string(c[4]));
    r.tree_depth = std::stoul(std::string(c[5]));
    r.n_blocks = std::stoul(std::string(c[6]));
    if (!c[7].empty()) r.avg_block_size = std::stod(std::string(c[7]));
    r.total_size = std::stoul(std::string(c[8]));
    if (!c[9].empty()) r.median_rating = std::stod(std::string(c[9]));
    if (!c[10].empty()) r.median_time_s = std::stod(std::string(c[10]));
    if (!c[11].empty()) r.n_correct = std::stoi(std::string(c[11]));
    rows.push_back(std::move(r));
  }
  return rows;
}

struct DivergenceRow {
  std::string set;
  int id = 0;
  std::string attribute;
  double reported = 0.0;
  double computed = 0.0;
};

inline std::vector<DivergenceRow> load_divergence_fixture() {
  std::string path = fixture_path("expression_metric_divergences.csv");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing fixture " + path);
  std::string line;
  std::getline(in, line);
  std::vector<DivergenceRow> rows;
  while (std::getline(in, line)) {
    if (lensrank::trim(line).empty()) continue;
    std::vector<std::string_view> c = lensrank::split(line, ',');
    if (c.size() != 5)
      throw std::runtime_error("bad divergence row in " + path + ": " + line);
    rows.push_back({std::string(c[0]), std::stoi(std::string(c[1])),
                    std::string(c[2]), std::stod(std::string(c[3])),
                    std::stod(std::string(c[4]))});
  }
  return rows;
}

inline const DivergenceRow* find_divergence(
    const std::vector<DivergenceRow>& divs, const std::string& set, int id,
    const std::string& attribute) {
  for (const DivergenceRow& d : divs)
    if (d.set == set && d.id == id && d.attribute == attribute) return &d;
  return nullptr;
}

// ---------------------------------------------------------------------------
// View construction

inline lensrank::View2D view_from(
    std::vector<std::array<double, 2>> points, std::vector<int> labels,
    bool renormalize = false) {
  lensrank::View2D v;
  v.points = std::move(points);
  v.labels = std::move(labels);
  int max_label = -1;
  for (int l : v.labels) max_label = std::max(max_label, l);
  for (int c = 0; c <= max_label; ++c)
    v.class_names.push_back("c" + std::to_string(c));
  v.axis_labels = {"x", "y"};
  v.provenance = lensrank::AxisPair{0, 1};
  if (renormalize) lensrank::normalize_view(v);
  return v;
}

inline double gaussian(lensrank::rng64& rng) {
  double u1 = rng.uniform01();
  double u2 = rng.uniform01();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline lensrank::View2D random_view(std::uint64_t seed, std::size_t n_points,
                                    std::size_t n_classes) {
  lensrank::rng64 rng(seed);
  std::vector<std::array<double, 2>> pts(n_points);
  std::vector<int> labels(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    pts[i] = {rng.uniform01(), rng.uniform01()};
    labels[i] = static_cast<int>(i % n_classes);
  }
  lensrank::deterministic_shuffle(labels, rng);
  return view_from(std::move(pts), std::move(labels), true);
}

// Two tight blobs, one per class, far apart.
inline lensrank::View2D separated_blobs(std::uint64_t seed,
                                        std::size_t per_class,
                                        std::size_t n_classes = 2,
                                        double jitter = 0.02) {
  lensrank::rng64 rng(seed);
  std::vector<std::array<double, 2>> pts;
  std::vector<int> labels;
  for (std::size_t c = 0; c < n_classes; ++c) {
    double cx = (static_cast<double>(c) + 0.5) / static_cast<double>(n_classes);
    double cy = (c % 2 == 0) ? 0.2 : 0.8;
    for (std::size_t i = 0; i < per_class; ++i) {
      pts.push_back({cx + jitter * gaussian(rng), cy + jitter * gaussian(rng)});
      labels.push_back(static_cast<int>(c));
    }
  }
  return view_from(std::move(pts), std::move(labels), true);
}

// ---------------------------------------------------------------------------
// Filesystem and CLI helpers

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string make_temp_dir() {
  std::string tmpl = "/tmp/lensrank_test_XXXXXX";
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
  return std::string(buf.data());
}

inline std::string shell_quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  static const std::string cli = LENSRANK_CLI_PATH;
  if (cli.empty()) throw std::runtime_error("CLI path not configured");
  std::string dir = make_temp_dir();
  std::string out_path = dir + "/stdout";
  std::string err_path = dir + "/stderr";
  std::string cmd = shell_quote(cli);
  for (const std::string& a : args) cmd += " " + shell_quote(a);
  cmd += " >" + shell_quote(out_path) + " 2>" + shell_quote(err_path);
  int rc = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  std::remove(dir.c_str());
  return result;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline std::size_t count_occurrences(const std::string& text,
                                     const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

inline std::size_t count_lines(const std::string& text) {
  std::size_t count = 0;
  for (char c : text)
    if (c == '\n') ++count;
  return count;
}

}  // namespace testsupport
