// leafcycle: a small arithmetic expression language for run configuration.
// Part of the leafcycle library. MIT license; see LICENSE.

#include "leafcycle/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <utility>

#include "leafcycle/errors.hpp"

namespace leafcycle {

namespace detail {

enum class node_kind { number, pi_const, variable, add, sub, mul, div, neg, pow, sqrt_fn };

struct expr_node {
  node_kind kind;
  double value = 0.0;       // number
  int var_index = -1;       // variable
  std::string var_name;     // variable
  int exponent = 0;         // pow
  std::shared_ptr<const expr_node> lhs;
  std::shared_ptr<const expr_node> rhs;
};

using node_ptr = std::shared_ptr<const expr_node>;

namespace {

constexpr double pi_value = 3.14159265358979323846;

// Exact integer power by binary squaring (0^0 = 1 by convention).
double ipow(double base, int e) {
  if (e < 0) return 1.0 / ipow(base, -e);
  double result = 1.0, acc = base;
  for (int k = e; k > 0; k >>= 1) {
    if (k & 1) result *= acc;
    acc *= acc;
  }
  return result;
}

double eval_node(const expr_node& node, const vecn& values) {
  switch (node.kind) {
    case node_kind::number:
      return node.value;
    case node_kind::pi_const:
      return pi_value;
    case node_kind::variable:
      return values[node.var_index];
    case node_kind::add:
      return eval_node(*node.lhs, values) + eval_node(*node.rhs, values);
    case node_kind::sub:
      return eval_node(*node.lhs, values) - eval_node(*node.rhs, values);
    case node_kind::mul:
      return eval_node(*node.lhs, values) * eval_node(*node.rhs, values);
    case node_kind::div:
      return eval_node(*node.lhs, values) / eval_node(*node.rhs, values);
    case node_kind::neg:
      return -eval_node(*node.lhs, values);
    case node_kind::pow:
      return ipow(eval_node(*node.lhs, values), node.exponent);
    case node_kind::sqrt_fn:
      return std::sqrt(eval_node(*node.lhs, values));
  }
  return 0.0;  // unreachable
}

// Constant value of a variable-free subtree, when it has one.
std::optional<double> fold_constant(const expr_node& node) {
  switch (node.kind) {
    case node_kind::number:
      return node.value;
    case node_kind::pi_const:
      return pi_value;
    case node_kind::variable:
      return std::nullopt;
    case node_kind::neg: {
      const auto v = fold_constant(*node.lhs);
      return v ? std::optional<double>(-*v) : std::nullopt;
    }
    case node_kind::sqrt_fn: {
      const auto v = fold_constant(*node.lhs);
      return v ? std::optional<double>(std::sqrt(*v)) : std::nullopt;
    }
    case node_kind::pow: {
      const auto v = fold_constant(*node.lhs);
      return v ? std::optional<double>(ipow(*v, node.exponent)) : std::nullopt;
    }
    default: {
      const auto a = fold_constant(*node.lhs);
      const auto b = fold_constant(*node.rhs);
      if (!a || !b) return std::nullopt;
      switch (node.kind) {
        case node_kind::add:
          return *a + *b;
        case node_kind::sub:
          return *a - *b;
        case node_kind::mul:
          return *a * *b;
        case node_kind::div:
          return *a / *b;
        default:
          return std::nullopt;
      }
    }
  }
}

std::string render(const expr_node& node) {
  char buf[40];
  switch (node.kind) {
    case node_kind::number:
      std::snprintf(buf, sizeof buf, "%.17g", node.value);
      return buf;
    case node_kind::pi_const:
      return "pi";
    case node_kind::variable:
      return node.var_name;
    case node_kind::add:
      return "(" + render(*node.lhs) + " + " + render(*node.rhs) + ")";
    case node_kind::sub:
      return "(" + render(*node.lhs) + " - " + render(*node.rhs) + ")";
    case node_kind::mul:
      return "(" + render(*node.lhs) + " * " + render(*node.rhs) + ")";
    case node_kind::div:
      return "(" + render(*node.lhs) + " / " + render(*node.rhs) + ")";
    case node_kind::neg:
      return "(-" + render(*node.lhs) + ")";
    case node_kind::pow:
      std::snprintf(buf, sizeof buf, "%d", node.exponent);
      return "(" + render(*node.lhs) + " ^ " + buf + ")";
    case node_kind::sqrt_fn:
      return "sqrt(" + render(*node.lhs) + ")";
  }
  return "";  // unreachable
}

struct token {
  enum class kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };
  kind k;
  double value = 0.0;
  std::string text;
  std::size_t offset = 0;
};

std::vector<token> tokenize(const std::string& src) {
  std::vector<token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    token tok;
    tok.offset = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < n && src[j] == '.') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < n && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t e = j + 1;
        if (e < n && (src[e] == '+' || src[e] == '-')) ++e;
        if (e < n && std::isdigit(static_cast<unsigned char>(src[e]))) {
          j = e;
          while (j < n && std::isdigit(static_cast<unsigned char>(src[j])))
            ++j;
        }
      }
      double value = 0.0;
      const auto res = std::from_chars(src.data() + i, src.data() + j, value);
      if (res.ec != std::errc() || res.ptr != src.data() + j)
        throw syntax_error("malformed number literal", i);
      tok.k = token::kind::number;
      tok.value = value;
      tok.text = src.substr(i, j - i);
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                       src[j] == '_'))
        ++j;
      tok.k = token::kind::ident;
      tok.text = src.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '+': tok.k = token::kind::plus; break;
        case '-': tok.k = token::kind::minus; break;
        case '*': tok.k = token::kind::star; break;
        case '/': tok.k = token::kind::slash; break;
        case '^': tok.k = token::kind::caret; break;
        case '(': tok.k = token::kind::lparen; break;
        case ')': tok.k = token::kind::rparen; break;
        default:
          throw syntax_error(std::string("unexpected character '") + c + "'",
                             i);
      }
      tok.text = std::string(1, c);
      ++i;
    }
    out.push_back(std::move(tok));
  }
  token end_tok;
  end_tok.k = token::kind::end;
  end_tok.offset = n;
  end_tok.text = "<end>";
  out.push_back(std::move(end_tok));
  return out;
}

class parser {
 public:
  parser(std::vector<token> tokens, const variable_context& vars)
      : tokens_(std::move(tokens)), vars_(vars) {}

  node_ptr run() {
    node_ptr root = parse_sum();
    if (peek().k != token::kind::end)
      throw syntax_error("unexpected trailing input '" + peek().text + "'",
                         peek().offset);
    return root;
  }

 private:
  const token& peek() const { return tokens_[pos_]; }
  const token& take() { return tokens_[pos_++]; }
  bool accept(token::kind k) {
    if (peek().k == k) {
      ++pos_;
      return true;
    }
    return false;
  }

  static node_ptr make(expr_node node) {
    return std::make_shared<const expr_node>(std::move(node));
  }

  node_ptr parse_sum() {
    node_ptr lhs = parse_product();
    for (;;) {
      if (accept(token::kind::plus)) {
        expr_node node{node_kind::add};
        node.lhs = lhs;
        node.rhs = parse_product();
        lhs = make(std::move(node));
      } else if (accept(token::kind::minus)) {
        expr_node node{node_kind::sub};
        node.lhs = lhs;
        node.rhs = parse_product();
        lhs = make(std::move(node));
      } else {
        return lhs;
      }
    }
  }

  node_ptr parse_product() {
    node_ptr lhs = parse_unary();
    for (;;) {
      if (accept(token::kind::star)) {
        expr_node node{node_kind::mul};
        node.lhs = lhs;
        node.rhs = parse_unary();
        lhs = make(std::move(node));
      } else if (accept(token::kind::slash)) {
        expr_node node{node_kind::div};
        node.lhs = lhs;
        node.rhs = parse_unary();
        lhs = make(std::move(node));
      } else {
        return lhs;
      }
    }
  }

  node_ptr parse_unary() {
    if (accept(token::kind::minus)) {
      expr_node node{node_kind::neg};
      node.lhs = parse_unary();
      return make(std::move(node));
    }
    return parse_power();
  }

  // Exponent operand: optional unary minus over an atom. Deliberately does
  // not recurse into parse_power, so a ^ b ^ c folds left-to-right.
  node_ptr parse_exponent() {
    if (peek().k == token::kind::minus) {
      take();
      expr_node node{node_kind::neg};
      node.lhs = parse_exponent();
      return make(std::move(node));
    }
    return parse_atom();
  }

  node_ptr parse_power() {
    node_ptr base = parse_atom();
    while (peek().k == token::kind::caret) {
      take();
      const std::size_t exp_offset = peek().offset;
      // The exponent is parsed as (-)* atom (so -2 and (1+2) work) and
      // must fold to an integer constant.
      const node_ptr exp_tree = parse_exponent();
      const auto folded = fold_constant(*exp_tree);
      if (!folded)
        throw syntax_error("exponent must be an integer constant",
                           exp_offset);
      const double v = *folded;
      if (!(std::abs(v) <= 1e9) || v != std::floor(v))
        throw syntax_error("exponent must be an integer constant",
                           exp_offset);
      expr_node node{node_kind::pow};
      node.lhs = base;
      node.exponent = static_cast<int>(v);
      base = make(std::move(node));
    }
    return base;
  }

  node_ptr parse_atom() {
    const token& tok = peek();
    switch (tok.k) {
      case token::kind::number: {
        take();
        expr_node node{node_kind::number};
        node.value = tok.value;
        return make(std::move(node));
      }
      case token::kind::lparen: {
        take();
        node_ptr inner = parse_sum();
        if (!accept(token::kind::rparen))
          throw syntax_error("expected ')'", peek().offset);
        return inner;
      }
      case token::kind::ident: {
        take();
        if (tok.text == "pi") {
          expr_node node{node_kind::pi_const};
          return make(std::move(node));
        }
        if (tok.text == "sqrt") {
          if (!accept(token::kind::lparen))
            throw syntax_error("expected '(' after sqrt", peek().offset);
          node_ptr arg = parse_sum();
          if (!accept(token::kind::rparen))
            throw syntax_error("expected ')'", peek().offset);
          expr_node node{node_kind::sqrt_fn};
          node.lhs = arg;
          return make(std::move(node));
        }
        const int index = vars_.index_of(tok.text);
        if (index < 0) throw unknown_variable_error(tok.text, tok.offset);
        expr_node node{node_kind::variable};
        node.var_index = index;
        node.var_name = tok.text;
        return make(std::move(node));
      }
      case token::kind::end:
        throw syntax_error("unexpected end of input", tok.offset);
      default:
        throw syntax_error("unexpected token '" + tok.text + "'", tok.offset);
    }
  }

  std::vector<token> tokens_;
  const variable_context& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

}  // namespace detail

int variable_context::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

variable_context chart_variables(int n) {
  variable_context vars;
  for (int i = 1; i <= n; ++i) vars.names.push_back("y" + std::to_string(i));
  for (int i = 1; i <= n - 2; ++i)
    vars.names.push_back("c" + std::to_string(i));
  for (int i = 1; i <= n - 2; ++i)
    vars.names.push_back("k" + std::to_string(i));
  return vars;
}

variable_context coefficient_variables() { return variable_context{{"c", "k"}}; }

variable_context ambient_variables(int n) {
  variable_context vars;
  for (int i = 1; i <= n; ++i) vars.names.push_back("x" + std::to_string(i));
  return vars;
}

double expression::eval(const vecn& values) const {
  if (!root_) throw error("expression: evaluating an empty expression");
  if (values.size() != names_.size())
    throw error("expression: value count does not match the variable context");
  return detail::eval_node(*root_, values);
}

std::string expression::to_string() const {
  if (!root_) return "";
  return detail::render(*root_);
}

expression parse_expression(const std::string& source,
                            const variable_context& vars) {
  detail::parser p(detail::tokenize(source), vars);
  expression e;
  e.root_ = p.run();
  e.names_ = vars.names;
  return e;
}

scalar_field field_from_expression(const expression& e, int arity) {
  if (static_cast<int>(e.variables().size()) != arity)
    throw error("field_from_expression: arity does not match the context");
  scalar_field f;
  f.arity = arity;
  f.eval = [e](const vecn& x) { return e.eval(x); };
  f.grad = {};  // central differences via gradient()
  return f;
}

}  // namespace leafcycle
