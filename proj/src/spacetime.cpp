#include "lorentzlab/spacetime.hpp"

#include <algorithm>
#include <cmath>

#include "lorentzlab/error.hpp"

namespace lorentzlab {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::minkowski: return "minkowski";
    case ModelKind::standard_static: return "standard_static";
    case ModelKind::orthogonal_splitted: return "orthogonal_splitted";
    case ModelKind::custom: return "custom";
    case ModelKind::riemannian: return "riemannian";
  }
  return "custom";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto k : {ModelKind::minkowski, ModelKind::standard_static, ModelKind::orthogonal_splitted, ModelKind::custom,
                 ModelKind::riemannian})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(CausalClass c) {
  switch (c) {
    case CausalClass::future_timelike: return "future_timelike";
    case CausalClass::past_timelike: return "past_timelike";
    case CausalClass::future_lightlike: return "future_lightlike";
    case CausalClass::past_lightlike: return "past_lightlike";
    case CausalClass::zero: return "zero";
    case CausalClass::spacelike: return "spacelike";
  }
  return "zero";
}

struct MetricModel::Impl {
  ModelKind kind = ModelKind::custom;
  std::size_t m = 0;
  std::vector<std::string> coords;
  std::vector<FieldExpr> g;    // [a][b]
  std::vector<FieldExpr> dg;   // [c][a][b]
  std::vector<FieldExpr> ddg;  // [c][d][a][b]
  VectorFieldSpec future;
  FieldExpr lapse;
  bool parallel_lightlike = false;

  CompiledField g_c, dg_c, ddg_c, future_c;
};

MetricModel MetricModel::build(ModelKind kind, const std::vector<std::vector<FieldExpr>>& components,
                               std::vector<std::string> coords, VectorFieldSpec future, FieldExpr lapse) {
  const std::size_t m = coords.size();
  if (m < 2) throw ConfigError("metric dimension must be at least 2");
  if (components.size() != m) throw ConfigError("metric component matrix must be " + std::to_string(m) + "x" + std::to_string(m));
  for (const auto& row : components)
    if (row.size() != m) throw ConfigError("metric component matrix must be square");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (components[i][j].to_string() != components[j][i].to_string())
        throw ConfigError("metric components must be symmetric (entry " + std::to_string(i) + "," + std::to_string(j) + ")");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (coords[i] == coords[j]) throw ConfigError("duplicate coordinate name '" + coords[i] + "'");
  if (future.size() != m) throw ConfigError("future field must have " + std::to_string(m) + " components");

  auto impl = std::make_shared<Impl>();
  impl->kind = kind;
  impl->m = m;
  impl->coords = std::move(coords);
  impl->future = std::move(future);
  impl->lapse = std::move(lapse);
  impl->g.resize(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) impl->g[a * m + b] = components[std::min(a, b)][std::max(a, b)];

  impl->dg.resize(m * m * m);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        FieldExpr d = differentiate(impl->g[a * m + b], impl->coords[c]);
        impl->dg[(c * m + a) * m + b] = d;
        impl->dg[(c * m + b) * m + a] = d;
      }
  impl->ddg.resize(m * m * m * m);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t d = c; d < m; ++d)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
          FieldExpr dd = differentiate(impl->dg[(d * m + a) * m + b], impl->coords[c]);
          for (auto [x, y] : {std::pair{c, d}, std::pair{d, c}}) {
            impl->ddg[((x * m + y) * m + a) * m + b] = dd;
            impl->ddg[((x * m + y) * m + b) * m + a] = dd;
          }
        }
  impl->g_c = CompiledField(impl->g, impl->coords);
  impl->dg_c = CompiledField(impl->dg, impl->coords);
  impl->ddg_c = CompiledField(impl->ddg, impl->coords);
  impl->future_c = CompiledField(impl->future, impl->coords);
  return MetricModel(std::move(impl));
}

namespace {

std::vector<std::string> default_coords(std::size_t m) {
  std::vector<std::string> c{"t"};
  for (std::size_t i = 1; i < m; ++i) c.push_back("x" + std::to_string(i));
  return c;
}

VectorFieldSpec time_field(std::size_t m) {
  VectorFieldSpec f(m, FieldExpr::constant(0.0));
  f[0] = FieldExpr::constant(1.0);
  return f;
}

void require_time_independent(const FieldExpr& e, const std::string& t, const char* what) {
  if (e.free_variables().count(t)) throw ConfigError(std::string(what) + " of a standard static model must not depend on " + t);
}

}  // namespace

MetricModel MetricModel::minkowski(std::size_t m, std::vector<std::string> coords) {
  if (coords.empty()) coords = default_coords(m);
  if (coords.size() != m) throw ConfigError("minkowski: coordinate count must equal dimension");
  std::vector<std::vector<FieldExpr>> comp(m, std::vector<FieldExpr>(m, FieldExpr::constant(0.0)));
  comp[0][0] = FieldExpr::constant(-1.0);
  for (std::size_t i = 1; i < m; ++i) comp[i][i] = FieldExpr::constant(1.0);
  return build(ModelKind::minkowski, comp, std::move(coords), time_field(m), FieldExpr::constant(1.0));
}

MetricModel MetricModel::standard_static(const FieldExpr& h, const std::vector<std::vector<FieldExpr>>& g0,
                                         std::vector<std::string> coords) {
  const std::size_t m = g0.size() + 1;
  if (coords.empty()) coords = default_coords(m);
  if (coords.size() != m) throw ConfigError("standard_static: need " + std::to_string(m) + " coordinates");
  require_time_independent(h, coords[0], "h");
  std::vector<std::vector<FieldExpr>> comp(m, std::vector<FieldExpr>(m, FieldExpr::constant(0.0)));
  comp[0][0] = -h;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (g0[i].size() + 1 != m) throw ConfigError("standard_static: g0 must be square");
    for (std::size_t j = 0; j + 1 < m; ++j) {
      require_time_independent(g0[i][j], coords[0], "g0");
      comp[i + 1][j + 1] = g0[i][j];
    }
  }
  return build(ModelKind::standard_static, comp, std::move(coords), time_field(m), h);
}

MetricModel MetricModel::orthogonal_splitted(const FieldExpr& beta, const std::vector<std::vector<FieldExpr>>& gt,
                                             std::vector<std::string> coords) {
  const std::size_t m = gt.size() + 1;
  if (coords.empty()) coords = default_coords(m);
  if (coords.size() != m) throw ConfigError("orthogonal_splitted: need " + std::to_string(m) + " coordinates");
  std::vector<std::vector<FieldExpr>> comp(m, std::vector<FieldExpr>(m, FieldExpr::constant(0.0)));
  comp[0][0] = -beta;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (gt[i].size() + 1 != m) throw ConfigError("orthogonal_splitted: g_t must be square");
    for (std::size_t j = 0; j + 1 < m; ++j) comp[i + 1][j + 1] = gt[i][j];
  }
  return build(ModelKind::orthogonal_splitted, comp, std::move(coords), time_field(m), beta);
}

MetricModel MetricModel::custom(const std::vector<std::vector<FieldExpr>>& components, std::vector<std::string> coords,
                                std::optional<VectorFieldSpec> future) {
  const std::size_t m = components.size();
  if (coords.empty()) coords = default_coords(m);
  FieldExpr lapse = components.empty() || components[0].empty() ? FieldExpr::constant(1.0) : -components[0][0];
  return build(ModelKind::custom, components, std::move(coords), future ? *future : time_field(m), lapse);
}

MetricModel MetricModel::riemannian(const std::vector<std::vector<FieldExpr>>& components,
                                    std::vector<std::string> coords) {
  const std::size_t m = components.size();
  if (coords.empty())
    for (std::size_t i = 0; i < m; ++i) coords.push_back("x" + std::to_string(i + 1));
  VectorFieldSpec none(m, FieldExpr::constant(0.0));
  return build(ModelKind::riemannian, components, std::move(coords), none, FieldExpr::constant(0.0));
}

std::size_t MetricModel::dim() const { return impl_->m; }
const std::vector<std::string>& MetricModel::coords() const { return impl_->coords; }
ModelKind MetricModel::kind() const { return impl_->kind; }
const FieldExpr& MetricModel::component(std::size_t a, std::size_t b) const { return impl_->g.at(a * impl_->m + b); }
const VectorFieldSpec& MetricModel::future_field() const { return impl_->future; }
const FieldExpr& MetricModel::lapse_squared() const { return impl_->lapse; }
bool MetricModel::parallel_lightlike() const { return impl_->parallel_lightlike; }

MetricModel MetricModel::with_parallel_lightlike(bool flag) const {
  auto copy = std::make_shared<Impl>(*impl_);
  copy->parallel_lightlike = flag;
  return MetricModel(std::move(copy));
}

void MetricModel::metric(std::span<const double> point, std::span<double> out) const { impl_->g_c.eval(point, out); }

std::vector<double> MetricModel::metric(std::span<const double> point) const { return impl_->g_c.eval(point); }

MetricJet MetricModel::jet(std::span<const double> point, int order) const {
  MetricJet j;
  j.m = impl_->m;
  j.g = impl_->g_c.eval(point);
  if (order >= 1) j.dg = impl_->dg_c.eval(point);
  if (order >= 2) j.ddg = impl_->ddg_c.eval(point);
  return j;
}

std::vector<double> MetricModel::future(std::span<const double> point) const { return impl_->future_c.eval(point); }

VectorField::VectorField(const VectorFieldSpec& spec, std::span<const std::string> coords) {
  values_ = CompiledField(spec, coords);
  std::vector<FieldExpr> jac;
  jac.reserve(spec.size() * coords.size());
  for (const auto& comp : spec)
    for (const auto& c : coords) jac.push_back(differentiate(comp, c));
  jacobian_ = CompiledField(jac, coords);
}

double inner(std::span<const double> g, std::span<const double> u, std::span<const double> v) {
  const std::size_t m = u.size();
  double s = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < m; ++b) row += g[a * m + b] * v[b];
    s += u[a] * row;
  }
  return s;
}

std::vector<double> metric_at(const MetricModel& model, std::span<const double> point) {
  const std::size_t m = model.dim();
  auto g = model.metric(point);
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  auto ev = symmetric_eigenvalues(g, m);
  const double eps = 1e-12 * std::max(scale, 1e-300);
  std::size_t negative = 0;
  for (double l : ev) {
    if (std::abs(l) <= eps) throw SignatureError("degenerate metric at point");
    if (l < 0) ++negative;
  }
  std::size_t expected = model.lorentzian() ? 1 : 0;
  if (negative != expected) {
    std::string msg = "metric signature violation: " + std::to_string(negative) + " negative eigenvalues (expected " +
                      std::to_string(expected) + ") at point (";
    for (std::size_t i = 0; i < point.size(); ++i) msg += (i ? ", " : "") + std::to_string(point[i]);
    throw SignatureError(msg + ")");
  }
  return g;
}

Connection christoffel_at(const MetricModel& model, std::span<const double> point) {
  return connection_from_jet(model.jet(point, 1), false);
}

std::vector<double> riemann_at(const MetricModel& model, std::span<const double> point) {
  return riemann_from_connection(connection_from_jet(model.jet(point, 2), true));
}

double sectional_curvature(const MetricModel& model, std::span<const double> point, std::span<const double> u,
                           std::span<const double> v) {
  const std::size_t m = model.dim();
  auto g = model.metric(point);
  double uu = inner(g, u, u), vv = inner(g, v, v), uv = inner(g, u, v);
  double area = uu * vv - uv * uv;
  if (std::abs(area) <= 1e-12 * (std::abs(uu * vv) + uv * uv) || area == 0.0)
    throw HypothesisError("degenerate plane (zero area element)");
  auto r = riemann_at(model, point);
  std::vector<double> w(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t d = 0; d < m; ++d) w[a] += r[((a * m + b) * m + c) * m + d] * v[b] * u[c] * v[d];
  return inner(g, w, u) / area;
}

SectionalRange timelike_sectional_range(const MetricModel& model, const std::vector<std::vector<double>>& points,
                                        const std::vector<TimelikePlane>& planes) {
  if (points.empty()) throw HypothesisError("timelike_sectional_range needs at least one sample point");
  SectionalRange out;
  out.certification = "sampled, not certified";
  bool first = true;
  for (const auto& p : points) {
    auto g = model.metric(p);
    for (const auto& plane : planes) {
      double uu = inner(g, plane.timelike, plane.timelike), vv = inner(g, plane.spacelike, plane.spacelike);
      double uv = inner(g, plane.timelike, plane.spacelike);
      if (uu * vv - uv * uv >= 0.0) throw HypothesisError("sampled plane is not timelike");
      double k = sectional_curvature(model, p, plane.timelike, plane.spacelike);
      if (first) {
        out.min = out.max = k;
        first = false;
      } else {
        out.min = std::min(out.min, k);
        out.max = std::max(out.max, k);
      }
      ++out.samples;
    }
  }
  return out;
}

std::vector<TimelikePlane> random_timelike_planes(const MetricModel& model, std::span<const double> point,
                                                  std::size_t count, std::mt19937_64& rng) {
  const std::size_t m = model.dim();
  auto g = model.metric(point);
  auto f = model.future(point);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<TimelikePlane> planes;
  planes.reserve(count);
  while (planes.size() < count) {
    std::vector<double> tilt(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) tilt[i] = uni(rng);
    std::vector<double> u = f;
    double amount = 0.5;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t a = 0; a < m; ++a) u[a] = f[a] + amount * tilt[a];
      if (inner(g, u, u) < 0.0) break;
      amount *= 0.5;
    }
    if (!(inner(g, u, u) < 0.0)) continue;
    std::vector<double> v(m);
    for (auto& x : v) x = uni(rng);
    double k = inner(g, v, u) / inner(g, u, u);
    for (std::size_t a = 0; a < m; ++a) v[a] -= k * u[a];
    double vv = inner(g, v, v);
    if (!(vv > 1e-10)) continue;
    planes.push_back({u, v});
  }
  return planes;
}

std::vector<double> lie_derivative_metric(const MetricModel& model, const VectorField& x,
                                          std::span<const double> point) {
  const std::size_t m = model.dim();
  auto jet = model.jet(point, 1);
  auto xv = x.value(point);
  auto dx = x.jacobian(point);  // [c][a] = d_a X^c
  std::vector<double> out(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      double v = 0.0;
      for (std::size_t c = 0; c < m; ++c)
        v += xv[c] * jet.d(c, a, b) + jet.metric(c, b) * dx[c * m + a] + jet.metric(a, c) * dx[c * m + b];
      out[a * m + b] = v;
      out[b * m + a] = v;
    }
  return out;
}

std::vector<double> lie_derivative_metric(const MetricModel& model, const VectorFieldSpec& x,
                                          std::span<const double> point) {
  return lie_derivative_metric(model, VectorField(x, model.coords()), point);
}

std::vector<FieldExpr> lie_derivative_metric_expr(const MetricModel& model, const VectorFieldSpec& x) {
  const std::size_t m = model.dim();
  const auto& coords = model.coords();
  std::vector<FieldExpr> out(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      FieldExpr v = FieldExpr::constant(0.0);
      for (std::size_t c = 0; c < m; ++c) {
        v = v + x[c] * differentiate(model.component(a, b), coords[c]);
        v = v + model.component(c, b) * differentiate(x[c], coords[a]);
        v = v + model.component(a, c) * differentiate(x[c], coords[b]);
      }
      out[a * m + b] = v;
      out[b * m + a] = v;
    }
  return out;
}

CausalClass classify_vector(std::span<const double> g, std::span<const double> future, std::span<const double> v,
                            double tol) {
  const std::size_t m = v.size();
  double scale = 0.0;
  for (double x : g) scale = std::max(scale, std::abs(x));
  const double eps = tol * scale;
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (vmax < eps) return CausalClass::zero;
  double q = inner(g, v, v);
  if (q > eps * vmax * vmax) return CausalClass::spacelike;
  bool timelike = q < -eps * vmax * vmax;
  double d = inner(g, v, future);
  double fmax = 0.0;
  for (double x : future) fmax = std::max(fmax, std::abs(x));
  bool is_future;
  if (std::abs(d) > eps * vmax * fmax) {
    is_future = d < 0.0;
  } else {
    // v parallel to a lightlike future field
    double dot = 0.0;
    for (std::size_t a = 0; a < m; ++a) dot += v[a] * future[a];
    is_future = dot > 0.0;
  }
  if (timelike) return is_future ? CausalClass::future_timelike : CausalClass::past_timelike;
  return is_future ? CausalClass::future_lightlike : CausalClass::past_lightlike;
}

CausalClass causal_character(const MetricModel& model, std::span<const double> point, std::span<const double> v,
                             double tol) {
  return classify_vector(model.metric(point), model.future(point), v, tol);
}

}  // namespace lorentzlab
