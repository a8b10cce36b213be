#include "vofc/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

namespace vofc::expr {

enum class Op { number, variable, add, sub, mul, div, pow, neg, call };
enum class Fn { sin, cos, exp, ln, sqrt, abs, gamma };

struct Node {
  Op op = Op::number;
  double number = 0.0;
  std::size_t slot = 0;
  Fn fn = Fn::sin;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

struct FunctionInfo {
  std::string_view name;
  Fn fn;
  std::size_t arity;
};

constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"sin", Fn::sin, 1},
    {"cos", Fn::cos, 1},
    {"exp", Fn::exp, 1},
    {"ln", Fn::ln, 1},
    {"sqrt", Fn::sqrt, 1},
    {"abs", Fn::abs, 1},
    {"gamma", Fn::gamma, 1},
}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

std::string_view function_name(Fn fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f.name;
  return "?";
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::number;
  n->number = v;
  return n;
}

NodePtr make_op(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(ErrorKind::SyntaxError, pos_, "empty expression");
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) syntax("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void syntax(const std::string& expected) const {
    std::string found = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw ParseError(ErrorKind::SyntaxError, pos_, "expected " + expected + ", found " + found);
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_op(Op::add, {lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make_op(Op::sub, {lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_op(Op::mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make_op(Op::div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_op(Op::neg, {parse_unary()});
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_op(Op::pow, {base, parse_unary()});
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) syntax("number, name or '('");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) syntax("')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    syntax("number, name or '('");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      syntax("a well-formed number");
    }
    return make_number(v);
  }

  NodePtr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    skip_ws();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (call) {
      const FunctionInfo* info = find_function(name);
      if (!info) throw ParseError(ErrorKind::UnknownIdentifier, start, "unknown function '" + std::string(name) + "'");
      ++pos_;
      std::vector<NodePtr> args;
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
      if (!accept(')')) syntax("',' or ')'");
      if (args.size() != info->arity)
        throw ParseError(ErrorKind::ArityError, start,
                         "function '" + std::string(name) + "' takes " + std::to_string(info->arity) +
                             " argument(s), got " + std::to_string(args.size()));
      auto n = std::make_shared<Node>();
      n->op = Op::call;
      n->fn = info->fn;
      n->args = std::move(args);
      return n;
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = std::make_shared<Node>();
        n->op = Op::variable;
        n->slot = i;
        return n;
      }
    }
    if (find_function(name)) {
      pos_ = start + name.size();
      syntax("'(' after function name");
    }
    throw ParseError(ErrorKind::UnknownIdentifier, start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

void render(const Node& n, const std::vector<std::string>& slots, std::string& out) {
  switch (n.op) {
    case Op::number:
      out += format_number(n.number);
      return;
    case Op::variable:
      out += slots[n.slot];
      return;
    case Op::neg:
      out += "(-";
      render(*n.args[0], slots, out);
      out += ")";
      return;
    case Op::call:
      out += function_name(n.fn);
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        render(*n.args[i], slots, out);
      }
      out += ")";
      return;
    default: {
      const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? " * " : n.op == Op::div ? " / " : " ^ ";
      out += "(";
      render(*n.args[0], slots, out);
      out += sym;
      render(*n.args[1], slots, out);
      out += ")";
      return;
    }
  }
}

[[noreturn]] void eval_error(const Node& n, const std::vector<std::string>& slots, const std::string& what) {
  std::string sub;
  render(n, slots, sub);
  fail(ErrorKind::EvaluationError, what + " in '" + sub + "'");
}

double eval(const Node& n, std::span<const double> v, const std::vector<std::string>& slots) {
  double r = 0.0;
  switch (n.op) {
    case Op::number:
      return n.number;
    case Op::variable:
      return v[n.slot];
    case Op::neg:
      return -eval(*n.args[0], v, slots);
    case Op::add:
      r = eval(*n.args[0], v, slots) + eval(*n.args[1], v, slots);
      break;
    case Op::sub:
      r = eval(*n.args[0], v, slots) - eval(*n.args[1], v, slots);
      break;
    case Op::mul:
      r = eval(*n.args[0], v, slots) * eval(*n.args[1], v, slots);
      break;
    case Op::div: {
      const double num = eval(*n.args[0], v, slots);
      const double den = eval(*n.args[1], v, slots);
      if (den == 0.0) eval_error(n, slots, "division by zero");
      r = num / den;
      break;
    }
    case Op::pow:
      r = std::pow(eval(*n.args[0], v, slots), eval(*n.args[1], v, slots));
      break;
    case Op::call: {
      const double x = eval(*n.args[0], v, slots);
      switch (n.fn) {
        case Fn::sin: r = std::sin(x); break;
        case Fn::cos: r = std::cos(x); break;
        case Fn::exp: r = std::exp(x); break;
        case Fn::ln:
          if (!(x > 0.0)) eval_error(n, slots, "logarithm of a non-positive number");
          r = std::log(x);
          break;
        case Fn::sqrt:
          if (x < 0.0) eval_error(n, slots, "square root of a negative number");
          r = std::sqrt(x);
          break;
        case Fn::abs: r = std::abs(x); break;
        case Fn::gamma:
          if (x <= 0.0 && x == std::floor(x)) eval_error(n, slots, "gamma pole at a non-positive integer");
          r = std::tgamma(x);
          break;
      }
      break;
    }
  }
  if (!std::isfinite(r)) eval_error(n, slots, "non-finite result");
  return r;
}

void collect(const Node& n, const std::vector<std::string>& slots, std::set<std::string>& out) {
  if (n.op == Op::variable) out.insert(slots[n.slot]);
  for (const auto& a : n.args) collect(*a, slots, out);
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, std::vector<std::string> slots)
    : root_(std::move(root)), slots_(std::move(slots)) {}

double Expr::evaluate(std::span<const double> values) const {
  if (values.size() != slots_.size())
    fail(ErrorKind::UnboundVariable, "expected " + std::to_string(slots_.size()) + " variable values");
  return eval(*root_, values, slots_);
}

double Expr::evaluate(const EvalContext& ctx) const {
  std::vector<double> values(slots_.size(), 0.0);
  const auto used = free_variables();
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto it = ctx.find(slots_[i]);
    if (it == ctx.end()) {
      if (used.count(slots_[i])) fail(ErrorKind::UnboundVariable, "variable '" + slots_[i] + "' is not bound");
      continue;
    }
    if (!std::isfinite(it->second)) fail(ErrorKind::EvaluationError, "variable '" + slots_[i] + "' is not finite");
    values[i] = it->second;
  }
  return eval(*root_, values, slots_);
}

std::set<std::string> Expr::free_variables() const {
  std::set<std::string> out;
  collect(*root_, slots_, out);
  return out;
}

std::string Expr::to_string() const {
  std::string out;
  render(*root_, slots_, out);
  return out;
}

bool Expr::is_constant() const { return free_variables().empty(); }

Expr parse(std::string_view source, std::vector<std::string> allowed_vars) {
  Parser p(source, allowed_vars);
  NodePtr root = p.parse_all();
  return Expr(std::move(root), std::move(allowed_vars));
}

double evaluate(const Expr& e, const EvalContext& ctx) { return e.evaluate(ctx); }

double differentiate_numeric(const Expr& e, const std::string& var, const EvalContext& ctx, double step) {
  if (!(step > 0.0)) fail(ErrorKind::EvaluationError, "differentiation step must be positive");
  const auto it = ctx.find(var);
  if (it == ctx.end()) fail(ErrorKind::UnboundVariable, "variable '" + var + "' is not bound");
  EvalContext plus = ctx, minus = ctx;
  plus[var] = it->second + step;
  minus[var] = it->second - step;
  return (e.evaluate(plus) - e.evaluate(minus)) / (2.0 * step);
}

}  // namespace vofc::expr
