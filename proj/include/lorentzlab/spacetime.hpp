#pragma once

// Analytic metrics (Lorentzian spacetimes and Riemannian manifolds), their
// connection and curvature, Lie derivatives of the metric and the causal
// character of vectors with respect to an explicit time orientation.
//
// Signature (-,+,...,+). Curvature conventions are listed in curvature.hpp;
// sectional curvature K(u,v) = g(R(u,v)v,u) / (g(u,u)g(v,v) - g(u,v)^2).

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lorentzlab/curvature.hpp"
#include "lorentzlab/expr.hpp"

namespace lorentzlab {

enum class ModelKind { minkowski, standard_static, orthogonal_splitted, custom, riemannian };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Components of a vector field over the model coordinates.
using VectorFieldSpec = std::vector<FieldExpr>;

inline constexpr std::string_view kSignConvention =
    "signature (-,+,...,+); R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb; "
    "K(u,v) = g(R(u,v)v,u)/(g(u,u)g(v,v)-g(u,v)^2)";

/// Immutable metric model. Component expressions are compiled once together
/// with their first and second symbolic derivatives.
class MetricModel {
public:
  /// -dt^2 + dx1^2 + ... in m dimensions. Coordinates default to t, x1, ...
  static MetricModel minkowski(std::size_t m, std::vector<std::string> coords = {});
  /// -h dt^2 + g0 with h and g0 independent of t. `coords` starts with t.
  static MetricModel standard_static(const FieldExpr& h, const std::vector<std::vector<FieldExpr>>& g0,
                                     std::vector<std::string> coords);
  /// -beta dt^2 + g_t.
  static MetricModel orthogonal_splitted(const FieldExpr& beta, const std::vector<std::vector<FieldExpr>>& gt,
                                         std::vector<std::string> coords);
  /// Arbitrary Lorentzian components; `future` defaults to the first
  /// coordinate field.
  static MetricModel custom(const std::vector<std::vector<FieldExpr>>& components, std::vector<std::string> coords,
                            std::optional<VectorFieldSpec> future = std::nullopt);
  /// Positive definite metric (initial data, slices of static spacetimes).
  static MetricModel riemannian(const std::vector<std::vector<FieldExpr>>& components,
                                std::vector<std::string> coords);

  std::size_t dim() const;
  const std::vector<std::string>& coords() const;
  ModelKind kind() const;
  bool lorentzian() const { return kind() != ModelKind::riemannian; }
  const FieldExpr& component(std::size_t a, std::size_t b) const;
  const VectorFieldSpec& future_field() const;
  /// -g_tt for static/splitted models (h or beta).
  const FieldExpr& lapse_squared() const;

  /// Declared to admit a parallel lightlike field (pp-wave).
  bool parallel_lightlike() const;
  MetricModel with_parallel_lightlike(bool flag) const;

  /// Components at a point, no signature check.
  void metric(std::span<const double> point, std::span<double> out) const;
  std::vector<double> metric(std::span<const double> point) const;
  /// order 1: g and dg; order 2 adds ddg.
  MetricJet jet(std::span<const double> point, int order) const;
  /// Future field components at a point.
  std::vector<double> future(std::span<const double> point) const;

private:
  struct Impl;
  explicit MetricModel(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  static MetricModel build(ModelKind kind, const std::vector<std::vector<FieldExpr>>& components,
                           std::vector<std::string> coords, VectorFieldSpec future, FieldExpr lapse);
  std::shared_ptr<const Impl> impl_;
};

/// Compiled vector field with its coordinate Jacobian.
class VectorField {
public:
  VectorField() = default;
  VectorField(const VectorFieldSpec& spec, std::span<const std::string> coords);
  std::size_t dim() const { return values_.size(); }
  void value(std::span<const double> point, std::span<double> out) const { values_.eval(point, out); }
  std::vector<double> value(std::span<const double> point) const { return values_.eval(point); }
  /// [a][b] = d_b X^a
  std::vector<double> jacobian(std::span<const double> point) const { return jacobian_.eval(point); }

private:
  CompiledField values_;
  CompiledField jacobian_;
};

/// Symmetric matrix with Lorentzian signature check (one negative eigenvalue)
/// or positive definiteness for Riemannian models. Throws SignatureError.
std::vector<double> metric_at(const MetricModel& model, std::span<const double> point);

Connection christoffel_at(const MetricModel& model, std::span<const double> point);

/// R^a_bcd at a point, flat [a][b][c][d].
std::vector<double> riemann_at(const MetricModel& model, std::span<const double> point);

/// g(R(u,v)v,u) / (g(u,u)g(v,v) - g(u,v)^2). Throws HypothesisError on a
/// degenerate plane.
double sectional_curvature(const MetricModel& model, std::span<const double> point, std::span<const double> u,
                           std::span<const double> v);

struct TimelikePlane {
  std::vector<double> timelike;
  std::vector<double> spacelike;
};

struct SectionalRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t samples = 0;
  std::string convention{kSignConvention};
  std::string certification;  // always "sampled, not certified"
};

/// Sectional curvature of every plane at every point. Throws HypothesisError
/// if a plane is degenerate or not timelike.
SectionalRange timelike_sectional_range(const MetricModel& model, const std::vector<std::vector<double>>& points,
                                        const std::vector<TimelikePlane>& planes);

/// Random timelike planes at `point`: the future field plus a random spatial
/// tilt, paired with a random vector orthogonal to it.
std::vector<TimelikePlane> random_timelike_planes(const MetricModel& model, std::span<const double> point,
                                                  std::size_t count, std::mt19937_64& rng);

/// (L_X g)_ab = X^c d_c g_ab + g_cb d_a X^c + g_ac d_b X^c, flat [a][b].
std::vector<double> lie_derivative_metric(const MetricModel& model, const VectorField& x,
                                          std::span<const double> point);
std::vector<double> lie_derivative_metric(const MetricModel& model, const VectorFieldSpec& x,
                                          std::span<const double> point);

/// Symbolic L_X g (with constant folding), flat [a][b].
std::vector<FieldExpr> lie_derivative_metric_expr(const MetricModel& model, const VectorFieldSpec& x);

enum class CausalClass { future_timelike, past_timelike, future_lightlike, past_lightlike, zero, spacelike };

std::string_view to_string(CausalClass c);

inline bool is_future_causal(CausalClass c) {
  return c == CausalClass::future_timelike || c == CausalClass::future_lightlike || c == CausalClass::zero;
}
inline bool is_past_causal(CausalClass c) {
  return c == CausalClass::past_timelike || c == CausalClass::past_lightlike || c == CausalClass::zero;
}
inline bool is_timelike(CausalClass c) {
  return c == CausalClass::future_timelike || c == CausalClass::past_timelike;
}

inline constexpr double kCausalTolerance = 1e-8;

/// Classification with eps = tol * max|g_ab|: zero when |v|_inf < eps,
/// timelike when g(v,v) < -eps |v|_inf^2, spacelike when g(v,v) > eps |v|_inf^2,
/// lightlike otherwise. Future means g(v, future_field) < 0.
CausalClass classify_vector(std::span<const double> g, std::span<const double> future, std::span<const double> v,
                            double tol = kCausalTolerance);

CausalClass causal_character(const MetricModel& model, std::span<const double> point, std::span<const double> v,
                             double tol = kCausalTolerance);

/// g(u, v) for flat row-major g.
double inner(std::span<const double> g, std::span<const double> u, std::span<const double> v);

}  // namespace lorentzlab
