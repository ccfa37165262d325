#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lensrank/common.hpp"

namespace lensrank {

class parse_error : public error {
 public:
  parse_error(const std::string& message, std::size_t position)
      : error(message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

enum class expr_kind { variable, literal, binary, unary, power };
enum class unary_op { log_op, sqrt_op, exp_op };

struct expr_node;
using expr_ptr = std::shared_ptr<const expr_node>;

// Nodes are immutable after construction so expressions can be shared freely
// across threads.
struct expr_node {
  expr_kind kind;
  char op = 0;                // binary: '+', '-', '*', '/'
  unary_op fn = unary_op::log_op;
  double value = 0.0;         // literal
  std::string name;           // variable
  int exponent = 0;           // power
  expr_ptr left;              // unary and power store their child here
  expr_ptr right;
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(expr_ptr root) : root_(std::move(root)) {}

  bool valid() const { return root_ != nullptr; }

  const expr_node& root() const {
    if (!root_) throw internal_error("Expr: empty expression");
    return *root_;
  }

  expr_ptr node() const { return root_; }

 private:
  expr_ptr root_;
};

namespace detail {

inline expr_ptr make_variable(std::string name) {
  auto n = std::make_shared<expr_node>();
  n->kind = expr_kind::variable;
  n->name = std::move(name);
  return n;
}

inline expr_ptr make_literal(double value) {
  auto n = std::make_shared<expr_node>();
  n->kind = expr_kind::literal;
  n->value = value;
  return n;
}

inline expr_ptr make_binary(char op, expr_ptr left, expr_ptr right) {
  auto n = std::make_shared<expr_node>();
  n->kind = expr_kind::binary;
  n->op = op;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

inline expr_ptr make_unary(unary_op fn, expr_ptr child) {
  auto n = std::make_shared<expr_node>();
  n->kind = expr_kind::unary;
  n->fn = fn;
  n->left = std::move(child);
  return n;
}

inline expr_ptr make_power(expr_ptr base, int exponent) {
  auto n = std::make_shared<expr_node>();
  n->kind = expr_kind::power;
  n->exponent = exponent;
  n->left = std::move(base);
  return n;
}

struct expr_token {
  enum class type { number, ident, symbol, end };
  type kind = type::end;
  char sym = 0;
  double num = 0.0;
  std::string text;
  std::size_t pos = 0;
};

inline std::vector<expr_token> lex_expression(std::string_view s) {
  std::vector<expr_token> out;
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '(' ||
        c == ')' || c == '^') {
      out.push_back({expr_token::type::symbol, c, 0.0, std::string(1, c), i});
      ++i;
      continue;
    }
    if (is_digit(c) || c == '.') {
      std::size_t start = i;
      while (i < s.size() && is_digit(s[i])) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i;
      }
      std::string text(s.substr(start, i - start));
      if (text == ".") throw parse_error("malformed number", start);
      double value = parse_double(text, "expression literal");
      out.push_back({expr_token::type::number, 0, value, text, start});
      continue;
    }
    if (is_alpha(c)) {
      std::size_t start = i;
      while (i < s.size() && (is_alpha(s[i]) || is_digit(s[i]))) ++i;
      out.push_back({expr_token::type::ident, 0, 0.0,
                     std::string(s.substr(start, i - start)), start});
      continue;
    }
    // UTF-8 radical sign, accepted as an alias for sqrt.
    if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < s.size() &&
        static_cast<unsigned char>(s[i + 1]) == 0x88 &&
        static_cast<unsigned char>(s[i + 2]) == 0x9A) {
      out.push_back({expr_token::type::ident, 0, 0.0, "sqrt", i});
      i += 3;
      continue;
    }
    throw parse_error("unknown symbol '" + std::string(1, c) + "'", i);
  }
  out.push_back({expr_token::type::end, 0, 0.0, "", s.size()});
  return out;
}

class expr_parser {
 public:
  explicit expr_parser(std::string_view text) : toks_(lex_expression(text)) {}

  expr_ptr run() {
    expr_ptr e = additive();
    if (peek().kind != expr_token::type::end)
      throw parse_error("unexpected trailing '" + peek().text + "'",
                        peek().pos);
    return e;
  }

 private:
  const expr_token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }

  const expr_token& take() { return toks_[pos_++]; }

  bool at_symbol(char c) const {
    return peek().kind == expr_token::type::symbol && peek().sym == c;
  }

  void expect_symbol(char c, const char* what) {
    if (!at_symbol(c)) throw parse_error(std::string("expected ") + what, peek().pos);
    take();
  }

  expr_ptr additive() {
    expr_ptr e = multiplicative();
    while (at_symbol('+') || at_symbol('-')) {
      char op = take().sym;
      e = make_binary(op, e, multiplicative());
    }
    return e;
  }

  expr_ptr multiplicative() {
    expr_ptr e = unary();
    while (at_symbol('*') || at_symbol('/')) {
      char op = take().sym;
      e = make_binary(op, e, unary());
    }
    return e;
  }

  expr_ptr unary() {
    const expr_token& t = peek();
    if (t.kind == expr_token::type::ident &&
        (t.text == "log" || t.text == "sqrt")) {
      unary_op fn = t.text == "log" ? unary_op::log_op : unary_op::sqrt_op;
      take();
      expect_symbol('(', "'(' after function name");
      expr_ptr arg = additive();
      expect_symbol(')', "')'");
      return power_suffix(make_unary(fn, arg));
    }
    if (t.kind == expr_token::type::ident && t.text == "e" &&
        peek(1).kind == expr_token::type::symbol && peek(1).sym == '^') {
      take();
      take();
      expr_ptr arg;
      if (at_symbol('(')) {
        take();
        arg = additive();
        expect_symbol(')', "')'");
      } else {
        arg = unary();
      }
      return make_unary(unary_op::exp_op, arg);
    }
    return power();
  }

  expr_ptr power() { return power_suffix(primary()); }

  expr_ptr power_suffix(expr_ptr base) {
    while (at_symbol('^')) {
      std::size_t caret = peek().pos;
      take();
      const expr_token& t = peek();
      if (t.kind != expr_token::type::number)
        throw parse_error("power exponent must be a positive integer literal",
                          caret);
      double v = t.num;
      bool integral = t.text.find('.') == std::string::npos;
      if (!integral || v < 1.0)
        throw parse_error("power exponent must be a positive integer literal",
                          t.pos);
      take();
      base = make_power(std::move(base), static_cast<int>(v));
    }
    return base;
  }

  expr_ptr primary() {
    const expr_token& t = peek();
    switch (t.kind) {
      case expr_token::type::symbol:
        if (t.sym == '(') {
          take();
          expr_ptr e = additive();
          expect_symbol(')', "')'");
          return e;
        }
        if (t.sym == '-') {
          std::size_t at = t.pos;
          take();
          const expr_token& num = peek();
          if (num.kind != expr_token::type::number)
            throw parse_error("'-' may only negate a number literal here", at);
          take();
          return make_literal(-num.num);
        }
        throw parse_error("unexpected '" + t.text + "'", t.pos);
      case expr_token::type::number:
        take();
        return make_literal(t.num);
      case expr_token::type::ident: {
        if (t.text == "log" || t.text == "sqrt")
          throw parse_error("function '" + t.text + "' needs '(...)'", t.pos);
        take();
        return make_variable(t.text);
      }
      case expr_token::type::end:
        throw parse_error("unexpected end of expression", t.pos);
    }
    throw internal_error("expr_parser: unreachable token kind");
  }

  std::vector<expr_token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expression(std::string_view text) {
  if (trim(text).empty()) throw parse_error("empty expression", 0);
  return Expr(detail::expr_parser(text).run());
}

namespace detail {

inline int precedence(const expr_node& n) {
  if (n.kind == expr_kind::binary) return (n.op == '+' || n.op == '-') ? 1 : 2;
  return 3;
}

inline bool is_atom(const expr_node& n) {
  return n.kind == expr_kind::variable || n.kind == expr_kind::literal;
}

inline void render_node(const expr_node& n, std::string& out) {
  switch (n.kind) {
    case expr_kind::variable:
      out += n.name;
      return;
    case expr_kind::literal:
      out += format_double(n.value);
      return;
    case expr_kind::binary: {
      bool lp = precedence(*n.left) < precedence(n);
      bool rp = precedence(*n.right) <= precedence(n);
      if (lp) out += '(';
      render_node(*n.left, out);
      if (lp) out += ')';
      out += ' ';
      out += n.op;
      out += ' ';
      if (rp) out += '(';
      render_node(*n.right, out);
      if (rp) out += ')';
      return;
    }
    case expr_kind::unary: {
      if (n.fn == unary_op::exp_op) {
        out += "e^";
        if (is_atom(*n.left)) {
          render_node(*n.left, out);
        } else {
          out += '(';
          render_node(*n.left, out);
          out += ')';
        }
        return;
      }
      out += n.fn == unary_op::log_op ? "log(" : "sqrt(";
      render_node(*n.left, out);
      out += ')';
      return;
    }
    case expr_kind::power: {
      const expr_node& base = *n.left;
      bool bare = is_atom(base) ||
                  (base.kind == expr_kind::unary && base.fn != unary_op::exp_op);
      if (!bare) out += '(';
      render_node(base, out);
      if (!bare) out += ')';
      out += '^';
      out += std::to_string(n.exponent);
      return;
    }
  }
}

}  // namespace detail

// Canonical single-line form; re-parsing it reproduces the tree exactly.
inline std::string render_linearized(const Expr& e) {
  std::string out;
  detail::render_node(e.root(), out);
  return out;
}

struct ExprMetrics {
  std::size_t n_operands = 0;
  std::size_t n_operators = 0;
  std::size_t tree_depth = 0;
  std::size_t n_blocks = 0;
  double avg_block_size = 0.0;
  std::size_t total_size = 0;
  std::vector<std::size_t> block_sizes;
};

namespace detail {

inline std::size_t count_operands(const expr_node& n) {
  switch (n.kind) {
    case expr_kind::variable:
    case expr_kind::literal:
      return 1;
    case expr_kind::unary:
    case expr_kind::power:
      return count_operands(*n.left);
    case expr_kind::binary:
      return count_operands(*n.left) + count_operands(*n.right);
  }
  return 0;
}

inline std::size_t count_operators(const expr_node& n) {
  switch (n.kind) {
    case expr_kind::variable:
    case expr_kind::literal:
      return 0;
    case expr_kind::unary:
    case expr_kind::power:
      return 1 + count_operators(*n.left);
    case expr_kind::binary:
      return 1 + count_operators(*n.left) + count_operators(*n.right);
  }
  return 0;
}

inline std::size_t node_depth(const expr_node& n) {
  switch (n.kind) {
    case expr_kind::variable:
    case expr_kind::literal:
      return 1;
    case expr_kind::unary:
    case expr_kind::power:
      return 1 + node_depth(*n.left);
    case expr_kind::binary:
      return 1 + std::max(node_depth(*n.left), node_depth(*n.right));
  }
  return 0;
}

inline std::size_t subtree_size(const expr_node& n) {
  return count_operands(n) + count_operators(n);
}

inline bool additive_class(char op) { return op == '+' || op == '-'; }

inline void flatten_chain(const expr_node& n, bool additive,
                          std::vector<const expr_node*>& out) {
  if (n.kind == expr_kind::binary && additive_class(n.op) == additive) {
    flatten_chain(*n.left, additive, out);
    flatten_chain(*n.right, additive, out);
    return;
  }
  out.push_back(&n);
}

// Block segmentation: strip wrapper operators off the root, then split the
// root chain of equal-precedence binary operators into its operands. A chain
// of '*'/'/' over bare variables and literals stays one block, as does any
// expression whose stripped core is not a binary node.
inline std::vector<std::size_t> block_sizes_of(const expr_node& root) {
  const expr_node* core = &root;
  while (core->kind == expr_kind::unary || core->kind == expr_kind::power)
    core = core->left.get();
  if (core->kind != expr_kind::binary) return {subtree_size(root)};
  bool additive = additive_class(core->op);
  std::vector<const expr_node*> operands;
  flatten_chain(*core, additive, operands);
  if (!additive) {
    bool all_atomic = true;
    for (const expr_node* o : operands)
      if (!is_atom(*o)) all_atomic = false;
    if (all_atomic) return {subtree_size(*core)};
  }
  std::vector<std::size_t> sizes;
  sizes.reserve(operands.size());
  for (const expr_node* o : operands) sizes.push_back(subtree_size(*o));
  return sizes;
}

}  // namespace detail

inline ExprMetrics compute_metrics(const Expr& e) {
  const expr_node& root = e.root();
  ExprMetrics m;
  m.n_operands = detail::count_operands(root);
  m.n_operators = detail::count_operators(root);
  m.tree_depth = detail::node_depth(root);
  m.total_size = m.n_operands + m.n_operators;
  m.block_sizes = detail::block_sizes_of(root);
  m.n_blocks = m.block_sizes.size();
  std::size_t sum = 0;
  for (std::size_t s : m.block_sizes) sum += s;
  m.avg_block_size = static_cast<double>(sum) / static_cast<double>(m.n_blocks);
  return m;
}

inline double phr_semantic(const ExprMetrics& m) {
  return 0.0854 * static_cast<double>(m.tree_depth) -
         0.2568 * static_cast<double>(m.n_blocks) -
         0.1014 * m.avg_block_size +
         0.0899 * static_cast<double>(m.total_size) + 0.2151;
}

namespace detail {

inline void collect_variables(const expr_node& n, std::set<std::string>& out) {
  switch (n.kind) {
    case expr_kind::variable:
      out.insert(n.name);
      return;
    case expr_kind::literal:
      return;
    case expr_kind::unary:
    case expr_kind::power:
      collect_variables(*n.left, out);
      return;
    case expr_kind::binary:
      collect_variables(*n.left, out);
      collect_variables(*n.right, out);
      return;
  }
}

inline bool contains_log_or_division(const expr_node& n) {
  switch (n.kind) {
    case expr_kind::variable:
    case expr_kind::literal:
      return false;
    case expr_kind::unary:
      return n.fn == unary_op::log_op || contains_log_or_division(*n.left);
    case expr_kind::power:
      return contains_log_or_division(*n.left);
    case expr_kind::binary:
      return n.op == '/' || contains_log_or_division(*n.left) ||
             contains_log_or_division(*n.right);
  }
  return false;
}

inline double eval_node(const expr_node& n,
                        const std::map<std::string, double>& vars) {
  switch (n.kind) {
    case expr_kind::variable: {
      auto it = vars.find(n.name);
      if (it == vars.end())
        throw error("unbound expression variable '" + n.name + "'");
      return it->second;
    }
    case expr_kind::literal:
      return n.value;
    case expr_kind::binary: {
      double a = eval_node(*n.left, vars);
      double b = eval_node(*n.right, vars);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
      }
      throw internal_error("eval_node: unknown binary operator");
    }
    case expr_kind::unary: {
      double a = eval_node(*n.left, vars);
      switch (n.fn) {
        case unary_op::log_op: return std::log(a);
        case unary_op::sqrt_op: return std::sqrt(a);
        case unary_op::exp_op: return std::exp(a);
      }
      throw internal_error("eval_node: unknown unary function");
    }
    case expr_kind::power:
      return std::pow(eval_node(*n.left, vars),
                      static_cast<double>(n.exponent));
  }
  throw internal_error("eval_node: unreachable node kind");
}

}  // namespace detail

inline std::set<std::string> expression_variables(const Expr& e) {
  std::set<std::string> out;
  detail::collect_variables(e.root(), out);
  return out;
}

inline bool uses_log_or_division(const Expr& e) {
  return detail::contains_log_or_division(e.root());
}

// May return non-finite values; callers decide whether that is an error.
inline double evaluate_expression(const Expr& e,
                                  const std::map<std::string, double>& vars) {
  return detail::eval_node(e.root(), vars);
}

}  // namespace lensrank
