#include "lorentzlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "lorentzlab/error.hpp"

namespace lorentzlab {

struct FieldExpr::Node {
  ExprOp op = ExprOp::Const;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  std::vector<FieldExpr> args;
};

namespace {

const char* function_name(ExprOp op) {
  switch (op) {
    case ExprOp::Sin: return "sin";
    case ExprOp::Cos: return "cos";
    case ExprOp::Tan: return "tan";
    case ExprOp::Exp: return "exp";
    case ExprOp::Log: return "log";
    case ExprOp::Sqrt: return "sqrt";
    default: return "?";
  }
}

bool lookup_function(std::string_view name, ExprOp& op) {
  static const std::pair<std::string_view, ExprOp> table[] = {
      {"sin", ExprOp::Sin}, {"cos", ExprOp::Cos}, {"tan", ExprOp::Tan},
      {"exp", ExprOp::Exp}, {"log", ExprOp::Log}, {"sqrt", ExprOp::Sqrt},
  };
  for (const auto& [n, o] : table) {
    if (n == name) {
      op = o;
      return true;
    }
  }
  return false;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0 || s.find_first_of("ni") != std::string::npos) return "(" + s + ")";
  return s;
}

}  // namespace

FieldExpr::FieldExpr() : FieldExpr(constant(0.0)) {}

FieldExpr FieldExpr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = ExprOp::Const;
  n->value = value;
  return FieldExpr(std::move(n));
}

FieldExpr FieldExpr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = ExprOp::Var;
  n->name = std::move(name);
  return FieldExpr(std::move(n));
}

FieldExpr FieldExpr::unary(ExprOp op, FieldExpr arg) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args.push_back(std::move(arg));
  return FieldExpr(std::move(n));
}

FieldExpr FieldExpr::binary(ExprOp op, FieldExpr lhs, FieldExpr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args.push_back(std::move(lhs));
  n->args.push_back(std::move(rhs));
  return FieldExpr(std::move(n));
}

FieldExpr FieldExpr::power(FieldExpr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = ExprOp::Pow;
  n->exponent = exponent;
  n->args.push_back(std::move(base));
  return FieldExpr(std::move(n));
}

ExprOp FieldExpr::op() const noexcept { return node_->op; }
double FieldExpr::constant_value() const noexcept { return node_->value; }
const std::string& FieldExpr::name() const noexcept { return node_->name; }
int FieldExpr::exponent() const noexcept { return node_->exponent; }
const FieldExpr& FieldExpr::arg(std::size_t i) const { return node_->args.at(i); }

bool FieldExpr::is_constant(double value) const noexcept {
  return node_->op == ExprOp::Const && node_->value == value;
}

std::set<std::string> FieldExpr::free_variables() const {
  std::set<std::string> out;
  std::vector<const Node*> stack{node_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->op == ExprOp::Var) out.insert(n->name);
    for (const auto& a : n->args) stack.push_back(a.node_.get());
  }
  return out;
}

std::size_t FieldExpr::node_count() const {
  std::size_t count = 1;
  for (const auto& a : node_->args) count += a.node_count();
  return count;
}

std::string FieldExpr::to_string() const {
  const Node& n = *node_;
  switch (n.op) {
    case ExprOp::Const: return format_number(n.value);
    case ExprOp::Var: return n.name;
    case ExprOp::Neg: return "(-" + n.args[0].to_string() + ")";
    case ExprOp::Add: return "(" + n.args[0].to_string() + " + " + n.args[1].to_string() + ")";
    case ExprOp::Sub: return "(" + n.args[0].to_string() + " - " + n.args[1].to_string() + ")";
    case ExprOp::Mul: return "(" + n.args[0].to_string() + " * " + n.args[1].to_string() + ")";
    case ExprOp::Div: return "(" + n.args[0].to_string() + " / " + n.args[1].to_string() + ")";
    case ExprOp::Pow: {
      std::string e = n.exponent < 0 ? "(" + std::to_string(n.exponent) + ")" : std::to_string(n.exponent);
      return "(" + n.args[0].to_string() + "^" + e + ")";
    }
    default: return std::string(function_name(n.op)) + "(" + n.args[0].to_string() + ")";
  }
}

// ---------------------------------------------------------------------------
// Folding constructors

FieldExpr operator+(const FieldExpr& a, const FieldExpr& b) {
  if (a.is_constant() && b.is_constant()) return FieldExpr::constant(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return FieldExpr::binary(ExprOp::Add, a, b);
}

FieldExpr operator-(const FieldExpr& a, const FieldExpr& b) {
  if (a.is_constant() && b.is_constant()) return FieldExpr::constant(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return FieldExpr::binary(ExprOp::Sub, a, b);
}

FieldExpr operator*(const FieldExpr& a, const FieldExpr& b) {
  if (a.is_constant() && b.is_constant()) return FieldExpr::constant(a.constant_value() * b.constant_value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return FieldExpr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return FieldExpr::binary(ExprOp::Mul, a, b);
}

FieldExpr operator/(const FieldExpr& a, const FieldExpr& b) {
  if (a.is_constant(0.0) && !(b.is_constant(0.0))) return FieldExpr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  return FieldExpr::binary(ExprOp::Div, a, b);
}

FieldExpr operator-(const FieldExpr& a) {
  if (a.is_constant()) return FieldExpr::constant(-a.constant_value());
  if (a.op() == ExprOp::Neg) return a.arg(0);
  return FieldExpr::unary(ExprOp::Neg, a);
}

FieldExpr operator*(double a, const FieldExpr& b) { return FieldExpr::constant(a) * b; }

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  FieldExpr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    FieldExpr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return e;
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  FieldExpr parse_sum() {
    FieldExpr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = FieldExpr::binary(ExprOp::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = FieldExpr::binary(ExprOp::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  FieldExpr parse_product() {
    FieldExpr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = FieldExpr::binary(ExprOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = FieldExpr::binary(ExprOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  FieldExpr parse_unary() {
    if (accept('-')) return FieldExpr::unary(ExprOp::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  FieldExpr parse_power() {
    FieldExpr base = parse_primary();
    if (!accept('^')) return base;
    skip_ws();
    bool paren = accept('(');
    skip_ws();
    bool negative = false;
    if (accept('-')) {
      negative = true;
    } else {
      accept('+');
    }
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("exponent must be an integer literal", start);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ParseError("non-integer exponent; write fractional powers via exp/log or sqrt", start);
    int value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc()) throw ParseError("exponent out of range", start);
    if (paren && !accept(')')) throw ParseError("expected ')'", pos_);
    return FieldExpr::power(base, negative ? -value : value);
  }

  FieldExpr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      FieldExpr inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        ExprOp op;
        if (!lookup_function(name, op)) throw ParseError("unknown function '" + name + "'", start);
        ++pos_;
        FieldExpr arg = parse_sum();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return FieldExpr::unary(op, arg);
      }
      if (name == "pi") return FieldExpr::constant(std::numbers::pi);
      return FieldExpr::variable(name);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  FieldExpr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) throw ParseError("malformed number", start);
    return FieldExpr::constant(value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

FieldExpr parse_expr(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Differentiation

FieldExpr differentiate(const FieldExpr& e, std::string_view var) {
  switch (e.op()) {
    case ExprOp::Const:
      return FieldExpr::constant(0.0);
    case ExprOp::Var:
      return FieldExpr::constant(e.name() == var ? 1.0 : 0.0);
    case ExprOp::Neg:
      return -differentiate(e.arg(0), var);
    case ExprOp::Add:
      return differentiate(e.arg(0), var) + differentiate(e.arg(1), var);
    case ExprOp::Sub:
      return differentiate(e.arg(0), var) - differentiate(e.arg(1), var);
    case ExprOp::Mul: {
      const FieldExpr& a = e.arg(0);
      const FieldExpr& b = e.arg(1);
      return differentiate(a, var) * b + a * differentiate(b, var);
    }
    case ExprOp::Div: {
      const FieldExpr& a = e.arg(0);
      const FieldExpr& b = e.arg(1);
      FieldExpr da = differentiate(a, var);
      FieldExpr db = differentiate(b, var);
      if (db.is_constant(0.0)) return da / b;
      return (da * b - a * db) / FieldExpr::power(b, 2);
    }
    case ExprOp::Pow: {
      const FieldExpr& a = e.arg(0);
      int n = e.exponent();
      if (n == 0) return FieldExpr::constant(0.0);
      FieldExpr da = differentiate(a, var);
      if (da.is_constant(0.0)) return FieldExpr::constant(0.0);
      FieldExpr lower = n - 1 == 1 ? a : (n - 1 == 0 ? FieldExpr::constant(1.0) : FieldExpr::power(a, n - 1));
      return FieldExpr::constant(static_cast<double>(n)) * lower * da;
    }
    case ExprOp::Sin:
      return FieldExpr::unary(ExprOp::Cos, e.arg(0)) * differentiate(e.arg(0), var);
    case ExprOp::Cos:
      return -(FieldExpr::unary(ExprOp::Sin, e.arg(0)) * differentiate(e.arg(0), var));
    case ExprOp::Tan: {
      FieldExpr c = FieldExpr::unary(ExprOp::Cos, e.arg(0));
      return differentiate(e.arg(0), var) / FieldExpr::power(c, 2);
    }
    case ExprOp::Exp:
      return e * differentiate(e.arg(0), var);
    case ExprOp::Log:
      return differentiate(e.arg(0), var) / e.arg(0);
    case ExprOp::Sqrt:
      return differentiate(e.arg(0), var) / (FieldExpr::constant(2.0) * e);
  }
  return FieldExpr::constant(0.0);
}

// ---------------------------------------------------------------------------
// Compiled evaluation

namespace {

void emit(const FieldExpr& e, std::span<const std::string> vars, auto& code, std::size_t depth,
          std::size_t& max_depth) {
  using Instr = std::remove_reference_t<decltype(code[0])>;
  max_depth = std::max(max_depth, depth + 1);
  switch (e.op()) {
    case ExprOp::Const:
      code.push_back(Instr{ExprOp::Const, 0, e.constant_value()});
      return;
    case ExprOp::Var: {
      for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i] == e.name()) {
          code.push_back(Instr{ExprOp::Var, static_cast<int>(i), 0.0});
          return;
        }
      }
      throw UnboundVariableError(e.name());
    }
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
      emit(e.arg(0), vars, code, depth, max_depth);
      emit(e.arg(1), vars, code, depth + 1, max_depth);
      code.push_back(Instr{e.op(), 0, 0.0});
      return;
    case ExprOp::Pow:
      emit(e.arg(0), vars, code, depth, max_depth);
      code.push_back(Instr{ExprOp::Pow, e.exponent(), 0.0});
      return;
    default:
      emit(e.arg(0), vars, code, depth, max_depth);
      code.push_back(Instr{e.op(), 0, 0.0});
      return;
  }
}

double int_power(double x, int n) {
  bool invert = n < 0;
  unsigned k = static_cast<unsigned>(invert ? -static_cast<long>(n) : n);
  double result = 1.0;
  double base = x;
  while (k) {
    if (k & 1u) result *= base;
    base *= base;
    k >>= 1u;
  }
  return invert ? 1.0 / result : result;
}

}  // namespace

CompiledExpr::CompiledExpr(const FieldExpr& expr, std::span<const std::string> vars)
    : vars_(vars.begin(), vars.end()) {
  emit(expr, vars, code_, 0, max_depth_);
}

void CompiledExpr::domain_error(const char* what, std::span<const double> values) const {
  std::ostringstream os;
  os << what << " with";
  for (std::size_t i = 0; i < vars_.size() && i < values.size(); ++i) os << ' ' << vars_[i] << '=' << values[i];
  throw DomainError(os.str());
}

double CompiledExpr::operator()(std::span<const double> values) const {
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* st = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    st = heap.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case ExprOp::Const: st[sp++] = in.value; break;
      case ExprOp::Var: st[sp++] = values[static_cast<std::size_t>(in.index)]; break;
      case ExprOp::Neg: st[sp - 1] = -st[sp - 1]; break;
      case ExprOp::Add: --sp; st[sp - 1] = st[sp - 1] + st[sp]; break;
      case ExprOp::Sub: --sp; st[sp - 1] = st[sp - 1] - st[sp]; break;
      case ExprOp::Mul: --sp; st[sp - 1] = st[sp - 1] * st[sp]; break;
      case ExprOp::Div:
        --sp;
        if (st[sp] == 0.0) domain_error("division by zero", values);
        st[sp - 1] = st[sp - 1] / st[sp];
        break;
      case ExprOp::Pow:
        if (in.index < 0 && st[sp - 1] == 0.0) domain_error("negative power of zero", values);
        st[sp - 1] = int_power(st[sp - 1], in.index);
        break;
      case ExprOp::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
      case ExprOp::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
      case ExprOp::Tan: st[sp - 1] = std::tan(st[sp - 1]); break;
      case ExprOp::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
      case ExprOp::Log:
        if (!(st[sp - 1] > 0.0)) domain_error("log of nonpositive value", values);
        st[sp - 1] = std::log(st[sp - 1]);
        break;
      case ExprOp::Sqrt:
        if (st[sp - 1] < 0.0) domain_error("sqrt of negative value", values);
        st[sp - 1] = std::sqrt(st[sp - 1]);
        break;
    }
  }
  return st[0];
}

double eval(const FieldExpr& expr, const EvalContext& ctx) {
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& name : expr.free_variables()) {
    auto it = ctx.find(name);
    if (it == ctx.end()) throw UnboundVariableError(name);
    names.push_back(name);
    values.push_back(it->second);
  }
  return CompiledExpr(expr, names)(values);
}

CompiledField::CompiledField(const std::vector<FieldExpr>& exprs, std::span<const std::string> vars) {
  exprs_.reserve(exprs.size());
  for (const auto& e : exprs) exprs_.emplace_back(e, vars);
}

void CompiledField::eval(std::span<const double> point, std::span<double> out) const {
  for (std::size_t i = 0; i < exprs_.size(); ++i) out[i] = exprs_[i](point);
}

std::vector<double> CompiledField::eval(std::span<const double> point) const {
  std::vector<double> out(exprs_.size());
  eval(point, out);
  return out;
}

}  // namespace lorentzlab
