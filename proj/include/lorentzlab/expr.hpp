#pragma once

// Analytic scalar expressions over named variables: parsing, evaluation and
// exact symbolic differentiation. Metric components, warping functions and
// vector-field components are all FieldExpr values.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lorentzlab {

enum class ExprOp : std::uint8_t {
  Const,
  Var,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent only
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
};

/// Immutable expression tree. Copies share structure; safe to use from many
/// threads at once.
class FieldExpr {
public:
  struct Node;

  /// The zero constant.
  FieldExpr();

  static FieldExpr constant(double value);
  static FieldExpr variable(std::string name);
  static FieldExpr unary(ExprOp op, FieldExpr arg);
  static FieldExpr binary(ExprOp op, FieldExpr lhs, FieldExpr rhs);
  static FieldExpr power(FieldExpr base, int exponent);

  ExprOp op() const noexcept;
  double constant_value() const noexcept;  // Const only
  const std::string& name() const noexcept;  // Var only
  int exponent() const noexcept;  // Pow only
  const FieldExpr& arg(std::size_t i) const;  // operands, 0 or 1

  /// True if the tree is the literal constant `value`.
  bool is_constant(double value) const noexcept;
  bool is_constant() const noexcept { return op() == ExprOp::Const; }

  std::set<std::string> free_variables() const;
  std::size_t node_count() const;

  /// Fully parenthesized infix text; parse_expr(to_string()) evaluates
  /// identically.
  std::string to_string() const;

private:
  explicit FieldExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Arithmetic with light constant folding (0*x -> 0, x+0 -> x, ...).
FieldExpr operator+(const FieldExpr& a, const FieldExpr& b);
FieldExpr operator-(const FieldExpr& a, const FieldExpr& b);
FieldExpr operator*(const FieldExpr& a, const FieldExpr& b);
FieldExpr operator/(const FieldExpr& a, const FieldExpr& b);
FieldExpr operator-(const FieldExpr& a);
FieldExpr operator*(double a, const FieldExpr& b);

/// Parse standard infix text. Supported: numbers, identifiers, + - * /,
/// ^ with an integer literal exponent, sin cos tan exp log sqrt, and the
/// reserved constant `pi`. Throws ParseError with the byte offset.
FieldExpr parse_expr(std::string_view text);

/// Name -> value bindings.
using EvalContext = std::map<std::string, double, std::less<>>;

/// Evaluate with every free variable bound. Throws UnboundVariableError or
/// DomainError (the message lists the bindings).
double eval(const FieldExpr& expr, const EvalContext& ctx);

/// Exact derivative with respect to `var`. No canonical simplification.
FieldExpr differentiate(const FieldExpr& expr, std::string_view var);

/// Flattened postfix program with variables resolved to slots of a fixed
/// name list. This is the fast path used on meshes.
class CompiledExpr {
public:
  CompiledExpr() = default;
  /// Throws UnboundVariableError if `expr` uses a name not in `vars`.
  CompiledExpr(const FieldExpr& expr, std::span<const std::string> vars);

  double operator()(std::span<const double> values) const;

  bool is_constant() const noexcept { return code_.size() == 1 && code_[0].op == ExprOp::Const; }

private:
  struct Instr {
    ExprOp op;
    int index;  // variable slot or exponent
    double value;
  };
  [[noreturn]] void domain_error(const char* what, std::span<const double> values) const;

  std::vector<Instr> code_;
  std::vector<std::string> vars_;
  std::size_t max_depth_ = 0;
};

/// Several expressions sharing one variable list.
class CompiledField {
public:
  CompiledField() = default;
  CompiledField(const std::vector<FieldExpr>& exprs, std::span<const std::string> vars);

  std::size_t size() const noexcept { return exprs_.size(); }
  void eval(std::span<const double> point, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> point) const;
  const CompiledExpr& operator[](std::size_t i) const { return exprs_[i]; }

private:
  std::vector<CompiledExpr> exprs_;
};

}  // namespace lorentzlab
