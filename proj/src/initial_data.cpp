#include "lorentzlab/initial_data.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lorentzlab/curvature.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab {

InitialDataSet::InitialDataSet(ParamMesh mesh, std::vector<std::string> coords, std::vector<ComponentSource> g,
                               std::vector<ComponentSource> a, ComponentSource phi, std::vector<ComponentSource> x)
    : mesh_(std::move(mesh)), coords_(std::move(coords)), g_src_(std::move(g)), a_src_(std::move(a)) {
  n_ = coords_.size();
  if (n_ != mesh_.dim()) throw ConfigError("initial data: coordinate count must match the mesh dimension");
  if (g_src_.size() != n_ * n_) throw ConfigError("initial data: g needs n*n components");
  if (a_src_.size() != n_ * n_) throw ConfigError("initial data: A needs n*n components");
  if (x.size() != n_) throw ConfigError("initial data: X needs n components");
  auto check = [&](const ComponentSource& s) {
    if (!s.expr) {
      symbolic_ = false;
      if (s.grid.size() != mesh_.node_count()) throw ConfigError("initial data: gridded field does not match the mesh");
    }
  };
  for (const auto& s : g_src_) check(s);
  for (const auto& s : a_src_) check(s);
  for (const auto& s : x) check(s);
  check(phi);

  for (const auto& s : g_src_) g_.push_back(sample(s, true));
  for (const auto& s : a_src_) a_.push_back(sample(s, false));
  for (const auto& s : x) x_.push_back(sample(s, false));
  phi_ = sample(phi, false);

  for (std::size_t p = 0; p < mesh_.node_count(); ++p) {
    std::vector<double> gm(n_ * n_), am = shape(p);
    for (std::size_t i = 0; i < n_ * n_; ++i) gm[i] = g_[i].value[p];
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(gm[i * n_ + j] - gm[j * n_ + i]) > 1e-12 * (std::abs(gm[i * n_ + j]) + 1.0))
          throw HypothesisError("initial data: g is not symmetric at node " + std::to_string(p));
    auto ev = symmetric_eigenvalues(gm, n_);
    if (!(ev.front() > 0.0)) throw HypothesisError("initial data: g is not positive definite at node " + std::to_string(p));
    std::vector<double> ga(n_ * n_, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        for (std::size_t k = 0; k < n_; ++k) ga[i * n_ + j] += gm[i * n_ + k] * am[k * n_ + j];
        scale = std::max(scale, std::abs(ga[i * n_ + j]));
      }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(ga[i * n_ + j] - ga[j * n_ + i]) > 1e-10 * std::max(scale, 1.0))
          throw HypothesisError("initial data: A is not self-adjoint with respect to g at node " + std::to_string(p));
  }
}

InitialDataSet::Sampled InitialDataSet::sample(const ComponentSource& src, bool second) const {
  const std::size_t count = mesh_.node_count();
  Sampled s;
  if (src.expr) {
    std::vector<FieldExpr> exprs{*src.expr};
    std::vector<FieldExpr> d1;
    for (const auto& c : coords_) d1.push_back(differentiate(*src.expr, c));
    exprs.insert(exprs.end(), d1.begin(), d1.end());
    if (second)
      for (std::size_t k = 0; k < n_; ++k)
        for (const auto& c : coords_) exprs.push_back(differentiate(d1[k], c));
    for (const auto& e : exprs)
      for (const auto& v : e.free_variables())
        if (std::find(coords_.begin(), coords_.end(), v) == coords_.end()) throw UnboundVariableError(v);
    CompiledField f(exprs, coords_);
    std::vector<double> vals(count * exprs.size());
    parallel_for(count, [&](std::size_t p) {
      auto pt = mesh_.coordinates(p);
      f.eval(pt, std::span<double>(vals.data() + p * exprs.size(), exprs.size()));
    });
    auto column = [&](std::size_t c) {
      NodeField out(count);
      for (std::size_t p = 0; p < count; ++p) out[p] = vals[p * exprs.size() + c];
      return out;
    };
    s.value = column(0);
    for (std::size_t k = 0; k < n_; ++k) s.d.push_back(column(1 + k));
    if (second)
      for (std::size_t i = 0; i < n_ * n_; ++i) s.dd.push_back(column(1 + n_ + i));
    return s;
  }
  s.value = src.grid;
  for (std::size_t k = 0; k < n_; ++k) s.d.push_back(fd_partial(src.grid, mesh_, k));
  if (second)
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t l = 0; l < n_; ++l)
        s.dd.push_back(k == l ? fd_second(src.grid, mesh_, k) : fd_partial(s.d[k], mesh_, l));
  return s;
}

MetricModel InitialDataSet::riemannian_model() const {
  std::vector<std::vector<FieldExpr>> comp(n_, std::vector<FieldExpr>(n_, FieldExpr::constant(0.0)));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      if (!g_src_[i * n_ + j].expr) throw ConfigError("initial data: this operation needs g as expressions");
      comp[i][j] = *g_src_[i * n_ + j].expr;
    }
  return MetricModel::riemannian(comp, coords_);
}

std::vector<double> InitialDataSet::shape_at(std::span<const double> point) const {
  std::vector<FieldExpr> exprs;
  for (const auto& s : a_src_) {
    if (!s.expr) throw ConfigError("initial data: this operation needs A as expressions");
    exprs.push_back(*s.expr);
  }
  return CompiledField(exprs, coords_).eval(point);
}

MetricJet InitialDataSet::jet(std::size_t p) const {
  MetricJet j;
  j.m = n_;
  j.g.resize(n_ * n_);
  j.dg.resize(n_ * n_ * n_);
  j.ddg.resize(n_ * n_ * n_ * n_);
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b) {
      const auto& s = g_[a * n_ + b];
      j.g[a * n_ + b] = s.value[p];
      for (std::size_t c = 0; c < n_; ++c) {
        j.dg[(c * n_ + a) * n_ + b] = s.d[c][p];
        for (std::size_t d = 0; d < n_; ++d) j.ddg[((c * n_ + d) * n_ + a) * n_ + b] = s.dd[c * n_ + d][p];
      }
    }
  return j;
}

std::vector<double> InitialDataSet::shape(std::size_t p) const {
  std::vector<double> a(n_ * n_);
  for (std::size_t i = 0; i < n_ * n_; ++i) a[i] = a_[i].value[p];
  return a;
}

std::vector<double> InitialDataSet::shape_derivative(std::size_t p) const {
  std::vector<double> d(n_ * n_ * n_);
  for (std::size_t k = 0; k < n_; ++k)
    for (std::size_t i = 0; i < n_ * n_; ++i) d[k * n_ * n_ + i] = a_[i].d[k][p];
  return d;
}

std::vector<double> InitialDataSet::momentum(std::size_t p) const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = x_[i].value[p];
  return x;
}

ConstraintResiduals constraint_residuals(const InitialDataSet& data) {
  const std::size_t n = data.n(), count = data.mesh().node_count();
  ConstraintResiduals r;
  r.res1.assign(count, 0.0);
  r.res2.assign(n, NodeField(count, 0.0));
  parallel_for(count, [&](std::size_t p) {
    auto conn = connection_from_jet(data.jet(p), true);
    double scalar = scalar_curvature(riemann_from_connection(conn), conn);
    auto a = data.shape(p);
    auto da = data.shape_derivative(p);
    double tr = 0.0, tr2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tr += a[i * n + i];
      for (std::size_t j = 0; j < n; ++j) tr2 += a[i * n + j] * a[j * n + i];
    }
    r.res1[p] = scalar - tr2 + tr * tr - data.phi(p);

    std::vector<double> cov(n);
    for (std::size_t j = 0; j < n; ++j) {
      double div = 0.0, dtr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        div += da[(i * n + i) * n + j];
        dtr += da[(j * n + i) * n + i];
        for (std::size_t k = 0; k < n; ++k)
          div += conn(i, i, k) * a[k * n + j] - conn(k, i, j) * a[i * n + k];
      }
      cov[j] = div - dtr;
    }
    auto x = data.momentum(p);
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += conn.inverse(j, k) * cov[k];
      r.res2[j][p] = v - x[j];
    }
  });
  for (std::size_t p = 0; p < count; ++p) {
    if (std::abs(r.res1[p]) > r.max_res1) {
      r.max_res1 = std::abs(r.res1[p]);
      r.worst_node_res1 = p;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(r.res2[j][p]) > r.max_res2) {
        r.max_res2 = std::abs(r.res2[j][p]);
        r.worst_node_res2 = p;
      }
  }
  return r;
}

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::negative_definite: return "negative_definite";
    case Definiteness::negative_semidefinite: return "negative_semidefinite";
    case Definiteness::positive_definite: return "positive_definite";
    case Definiteness::positive_semidefinite: return "positive_semidefinite";
    case Definiteness::indefinite: return "indefinite";
    case Definiteness::zero: return "zero";
  }
  return "indefinite";
}

Definiteness classify_eigenvalues(const std::vector<double>& ev, double eps) {
  bool neg = false, pos = false, zero = false;
  for (double l : ev) {
    if (l < -eps)
      neg = true;
    else if (l > eps)
      pos = true;
    else
      zero = true;
  }
  if (neg && pos) return Definiteness::indefinite;
  if (neg) return zero ? Definiteness::negative_semidefinite : Definiteness::negative_definite;
  if (pos) return zero ? Definiteness::positive_semidefinite : Definiteness::positive_definite;
  return Definiteness::zero;
}

namespace {

// Eigenvalues of a g-self-adjoint (1,1) tensor a (a[i*n+j] = a^i_j).
std::vector<double> self_adjoint_eigenvalues(const std::vector<double>& g, const std::vector<double>& a, std::size_t n) {
  Eigen::MatrixXd gm(n, n), s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      gm(i, j) = g[i * n + j];
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += g[i * n + k] * a[k * n + j];
      s(i, j) = v;
    }
  Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, 0.5 * (gm + gm.transpose()), Eigen::EigenvaluesOnly);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
  return out;
}

Definiteness combine(Definiteness a, Definiteness b) {
  if (a == b) return a;
  auto negative = [](Definiteness d) {
    return d == Definiteness::negative_definite || d == Definiteness::negative_semidefinite || d == Definiteness::zero;
  };
  auto positive = [](Definiteness d) {
    return d == Definiteness::positive_definite || d == Definiteness::positive_semidefinite || d == Definiteness::zero;
  };
  if (negative(a) && negative(b)) return Definiteness::negative_semidefinite;
  if (positive(a) && positive(b)) return Definiteness::positive_semidefinite;
  return Definiteness::indefinite;
}

}  // namespace

DefinitenessReport definiteness_report(const InitialDataSet& data) {
  const std::size_t n = data.n(), count = data.mesh().node_count();
  DefinitenessReport r;
  std::vector<std::vector<double>> evs(count);
  parallel_for(count, [&](std::size_t p) { evs[p] = self_adjoint_eigenvalues(data.jet(p).g, data.shape(p), n); });
  double scale = 0.0;
  for (const auto& ev : evs)
    for (double l : ev) scale = std::max(scale, std::abs(l));
  const double eps = 1e-9 * scale;
  r.per_node.resize(count);
  r.min_eigenvalue.resize(count);
  r.max_eigenvalue.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    r.per_node[p] = classify_eigenvalues(evs[p], eps);
    r.min_eigenvalue[p] = evs[p].front();
    r.max_eigenvalue[p] = evs[p].back();
    r.global = p == 0 ? r.per_node[p] : combine(r.global, r.per_node[p]);
  }
  return r;
}

std::string_view to_string(ObstructionConclusion c) {
  return c == ObstructionConclusion::excludes_stationary_development ? "excludes_stationary_development"
                                                                      : "no_conclusion";
}

std::vector<double> hypersurface_normal(std::span<const double> g, std::span<const double> future,
                                        const std::vector<std::vector<double>>& tangents) {
  const std::size_t n = tangents.size(), m = future.size();
  std::vector<double> gram(n * n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] = inner(g, future, tangents[i]);
    for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = inner(g, tangents[i], tangents[j]);
  }
  auto gi = invert_matrix(gram, n);
  std::vector<double> v(future.begin(), future.end());
  for (std::size_t i = 0; i < n; ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j) c += gi[i * n + j] * rhs[j];
    for (std::size_t a = 0; a < m; ++a) v[a] -= c * tangents[i][a];
  }
  double q = inner(g, v, v);
  if (!(q < 0.0)) throw HypothesisError("hypersurface is not spacelike (normal is not timelike)");
  double s = 1.0 / std::sqrt(-q);
  for (auto& x : v) x *= s;
  return v;
}

ObstructionReport stationarity_obstruction(const InitialDataSet& data, const ImmersedSubmanifold& p,
                                           const std::optional<SliceEmbedding>& slice) {
  const std::size_t n = data.n(), k = p.n(), count = p.node_count();
  if (p.m() != n) throw ConfigError("submanifold P must be immersed in S (dimension " + std::to_string(n) + ")");
  if (p.ambient().lorentzian()) throw ConfigError("submanifold P must be immersed in the Riemannian data metric");
  auto h = mean_curvature_vector(p);
  ObstructionReport r;
  r.h_norm.resize(count);
  r.trace.resize(count);
  r.inequality.resize(count);
  parallel_for(count, [&](std::size_t q) {
    auto g = p.ambient_metric(q);
    auto a = data.shape_at(p.point(q));
    // Gram-Schmidt frame of P
    std::vector<std::vector<double>> e;
    for (std::size_t i = 0; i < k; ++i) {
      auto t = p.tangent(q, i);
      std::vector<double> v(t.begin(), t.end());
      for (const auto& prev : e) {
        double c = inner(g, v, prev);
        for (std::size_t x = 0; x < n; ++x) v[x] -= c * prev[x];
      }
      double nv = std::sqrt(inner(g, v, v));
      for (auto& x : v) x /= nv;
      e.push_back(v);
    }
    double tr = 0.0;
    for (const auto& ei : e) {
      std::vector<double> ae(n, 0.0);
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) ae[x] += a[x * n + y] * ei[y];
      tr += inner(g, ae, ei);
    }
    r.trace[q] = tr;
    r.h_norm[q] = std::sqrt(std::max(0.0, inner(g, h.at(q), h.at(q))));
    r.inequality[q] = r.h_norm[q] < std::abs(tr);
  });
  r.inequality_everywhere = std::all_of(r.inequality.begin(), r.inequality.end(), [](bool b) { return b; });
  r.non_minimal = *std::max_element(r.h_norm.begin(), r.h_norm.end()) > kMinimalTolerance;
  r.conclusion = r.inequality_everywhere && r.non_minimal ? ObstructionConclusion::excludes_stationary_development
                                                          : ObstructionConclusion::no_conclusion;
  if (!slice) return r;

  const auto& dev = slice->development;
  const std::size_t m = dev.dim();
  if (m != n + 1 || slice->map.size() != m) throw ConfigError("slice map must send S into a development of dimension n+1");
  std::vector<FieldExpr> jac;
  for (const auto& comp : slice->map)
    for (const auto& c : data.coords()) jac.push_back(differentiate(comp, c));
  CompiledField xmap(slice->map, data.coords()), jmap(jac, data.coords());
  r.has_development = true;
  r.mean_curvature.assign(count * m, 0.0);
  r.classes.assign(count, CausalClass::zero);
  std::vector<NodeField> composite(m, NodeField(count));
  parallel_for(count, [&](std::size_t q) {
    auto s = p.point(q);
    auto y = xmap.eval(s);
    auto j = jmap.eval(s);  // [a][i]
    auto g = metric_at(dev, y);
    auto f = dev.future(y);
    std::vector<std::vector<double>> t(n, std::vector<double>(m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a) t[i][a] = j[a * n + i];
    auto nn = hypersurface_normal(g, f, t);
    auto hv = h.at(q);
    std::span<double> out(r.mean_curvature.data() + q * m, m);
    for (std::size_t a = 0; a < m; ++a) {
      double v = r.trace[q] * nn[a];
      for (std::size_t i = 0; i < n; ++i) v += j[a * n + i] * hv[i];
      out[a] = v;
      composite[a][q] = y[a];
    }
    r.classes[q] = classify_vector(g, f, out);
  });
  r.classification = classify_classes(r.classes);

  // direct computation on x o P
  if (p.analytic_map()) {
    const auto& pm = p.mesh();
    CompiledField pmap(*p.analytic_map(), p.param_names());
    std::vector<double> winding(k * m, 0.0);
    for (std::size_t ax = 0; ax < k; ++ax) {
      if (!pm.axis(ax).periodic) continue;
      auto s0 = pm.coordinates(0);
      auto y0 = xmap.eval(pmap.eval(s0));
      s0[ax] += pm.axis(ax).length;
      auto y1 = xmap.eval(pmap.eval(s0));
      for (std::size_t a = 0; a < m; ++a) winding[ax * m + a] = y1[a] - y0[a];
    }
    auto direct = ImmersedSubmanifold::from_nodes(pm, dev, composite, winding);
    auto hd = mean_curvature_vector(direct);
    for (std::size_t i = 0; i < count * m; ++i)
      r.decomposition_discrepancy = std::max(r.decomposition_discrepancy, std::abs(hd.h[i] - r.mean_curvature[i]));
  }
  return r;
}

namespace {

struct FlowState {
  std::vector<double> x, nvec, b;  // b[a*m+c] = B^a_c
};

FlowState flow_rhs(const MetricModel& model, const FlowState& s) {
  const std::size_t m = s.x.size();
  auto conn = connection_from_jet(model.jet(s.x, 2), true);
  auto riem = riemann_from_connection(conn);
  FlowState d{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m * m)};
  for (std::size_t a = 0; a < m; ++a) {
    d.x[a] = s.nvec[a];
    double v = 0.0;
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c) v -= conn(a, b, c) * s.nvec[b] * s.nvec[c];
    d.nvec[a] = v;
  }
  // gn[a][e] = Gamma^a_ce N^c
  std::vector<double> gn(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t e = 0; e < m; ++e)
      for (std::size_t c = 0; c < m; ++c) gn[a * m + e] += conn(a, c, e) * s.nvec[c];
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      double v = 0.0;
      for (std::size_t e = 0; e < m; ++e) {
        v -= s.b[a * m + e] * s.b[e * m + b];
        v -= gn[a * m + e] * s.b[e * m + b];
        v += s.b[a * m + e] * gn[e * m + b];
        for (std::size_t c = 0; c < m; ++c) v += riem[((a * m + e) * m + c) * m + b] * s.nvec[e] * s.nvec[c];
      }
      d.b[a * m + b] = v;
    }
  return d;
}

FlowState axpy(const FlowState& s, const FlowState& d, double h) {
  FlowState o = s;
  for (std::size_t i = 0; i < o.x.size(); ++i) o.x[i] += h * d.x[i];
  for (std::size_t i = 0; i < o.nvec.size(); ++i) o.nvec[i] += h * d.nvec[i];
  for (std::size_t i = 0; i < o.b.size(); ++i) o.b[i] += h * d.b[i];
  return o;
}

FlowState rk4_step(const MetricModel& model, const FlowState& s, double h) {
  auto k1 = flow_rhs(model, s);
  auto k2 = flow_rhs(model, axpy(s, k1, 0.5 * h));
  auto k3 = flow_rhs(model, axpy(s, k2, 0.5 * h));
  auto k4 = flow_rhs(model, axpy(s, k3, h));
  FlowState o = s;
  auto combine = [h](std::vector<double>& out, const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& c, const std::vector<double>& d) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
  };
  combine(o.x, k1.x, k2.x, k3.x, k4.x);
  combine(o.nvec, k1.nvec, k2.nvec, k3.nvec, k4.nvec);
  combine(o.b, k1.b, k2.b, k3.b, k4.b);
  return o;
}

// Eigenvalues of g(-B X, Y) on the g-orthogonal complement of N.
std::vector<double> extended_shape_eigenvalues(const MetricModel& model, const FlowState& s) {
  const std::size_t m = s.x.size();
  auto g = metric_at(model, s.x);
  std::vector<std::vector<double>> basis;
  for (std::size_t c = 0; c < m && basis.size() + 1 < m; ++c) {
    std::vector<double> v(m, 0.0);
    v[c] = 1.0;
    double k = inner(g, v, s.nvec) / -inner(g, s.nvec, s.nvec);
    for (std::size_t a = 0; a < m; ++a) v[a] += k * s.nvec[a];
    for (const auto& e : basis) {
      double c2 = inner(g, v, e);
      for (std::size_t a = 0; a < m; ++a) v[a] -= c2 * e[a];
    }
    double q = inner(g, v, v);
    if (q < 1e-10) continue;
    for (auto& x : v) x /= std::sqrt(q);
    basis.push_back(v);
  }
  const std::size_t n = basis.size();
  std::vector<double> sform(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> ab(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) ab[a] -= s.b[a * m + b] * basis[i][b];
    for (std::size_t j = 0; j < n; ++j) sform[i * n + j] = inner(g, ab, basis[j]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) sform[i * n + j] = sform[j * n + i] = 0.5 * (sform[i * n + j] + sform[j * n + i]);
  return symmetric_eigenvalues(sform, n);
}

struct Margin {
  double sigma = 0.0;
  bool capped = false;
  bool left = false;
};

Margin integrate_margin(const MetricModel& model, FlowState s, double sign, double t_range, std::size_t steps,
                        double direction) {
  const double h = direction * t_range / static_cast<double>(steps);
  auto q_of = [&](const FlowState& st) {
    auto ev = extended_shape_eigenvalues(model, st);
    double q = sign * ev.front();
    for (double l : ev) q = std::min(q, sign * l);
    return q;
  };
  double q = q_of(s);
  for (std::size_t i = 0; i < steps; ++i) {
    double qn;
    try {
      s = rk4_step(model, s, h);
      qn = q_of(s);
    } catch (const Error&) {
      return {static_cast<double>(i) * std::abs(h), false, true};
    }
    if (!(qn > 0.0)) return {(static_cast<double>(i) + q / (q - qn)) * std::abs(h), false, false};
    q = qn;
  }
  return {t_range, true, false};
}

}  // namespace

NormalFlowResult normal_flow_margin(const InitialDataSet& data, const MetricModel& development,
                                    const ImmersedSubmanifold& slice, const NormalFlowOptions& options) {
  const std::size_t n = data.n(), m = development.dim(), count = slice.node_count();
  if (m != n + 1 || slice.n() != n) throw ConfigError("normal flow needs a hypersurface slice of the development");
  if (count != data.mesh().node_count()) throw ConfigError("slice mesh must match the data mesh");
  if (!(options.t_range > 0.0) || options.steps == 0 || options.stride == 0)
    throw ConfigError("normal flow needs t_range > 0, steps > 0 and stride > 0");

  // normals at every node, then D_T N by differences for the consistency check
  std::vector<double> normals(count * m);
  parallel_for(count, [&](std::size_t p) {
    std::vector<std::vector<double>> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i].assign(slice.tangent(p, i).begin(), slice.tangent(p, i).end());
    auto nn = hypersurface_normal(slice.ambient_metric(p), development.future(slice.point(p)), t);
    std::copy(nn.begin(), nn.end(), normals.begin() + static_cast<std::ptrdiff_t>(p * m));
  });
  std::vector<std::vector<NodeField>> dn(n, std::vector<NodeField>(m));
  for (std::size_t a = 0; a < m; ++a) {
    NodeField comp(count);
    for (std::size_t p = 0; p < count; ++p) comp[p] = normals[p * m + a];
    for (std::size_t i = 0; i < n; ++i) dn[i][a] = fd_partial(comp, slice.mesh(), i);
  }

  std::vector<std::size_t> samples;
  for (std::size_t p = 0; p < count; p += options.stride) samples.push_back(p);
  struct Sample {
    Margin back, fwd;
    Definiteness sign = Definiteness::zero;
    double mismatch = 0.0;
  };
  std::vector<Sample> out(samples.size());
  parallel_for(samples.size(), [&](std::size_t si) {
    const std::size_t p = samples[si];
    auto a = data.shape(p);
    auto ev = self_adjoint_eigenvalues(data.jet(p).g, a, n);
    double scale = std::max(std::abs(ev.front()), std::abs(ev.back()));
    Sample& res = out[si];
    res.sign = classify_eigenvalues(ev, 1e-9 * scale);

    std::span<const double> nn(normals.data() + p * m, m);
    auto conn = christoffel_at(development, slice.point(p));
    for (std::size_t j = 0; j < n; ++j) {
      auto tj = slice.tangent(p, j);
      for (std::size_t c = 0; c < m; ++c) {
        double v = dn[j][c][p];
        for (std::size_t b = 0; b < m; ++b)
          for (std::size_t e = 0; e < m; ++e) v += conn(c, b, e) * tj[b] * nn[e];
        for (std::size_t i = 0; i < n; ++i) v += a[i * n + j] * slice.tangent(p, i)[c];
        res.mismatch = std::max(res.mismatch, std::abs(v));
      }
    }
    if (res.sign != Definiteness::positive_definite && res.sign != Definiteness::negative_definite) return;
    const double sign = res.sign == Definiteness::positive_definite ? 1.0 : -1.0;

    // B(0) = E diag(-A, 0) E^-1 with E = [T_1 .. T_n N]
    Eigen::MatrixXd e(m, m), d = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < m; ++c) e(c, i) = slice.tangent(p, i)[c];
    for (std::size_t c = 0; c < m; ++c) e(c, n) = nn[c];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = -a[i * n + j];
    Eigen::MatrixXd b0 = e * d * e.inverse();
    FlowState s;
    auto pt = slice.point(p);
    s.x.assign(pt.begin(), pt.end());
    s.nvec.assign(nn.begin(), nn.end());
    s.b.resize(m * m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) s.b[r * m + c] = b0(r, c);
    res.fwd = integrate_margin(development, s, sign, options.t_range, options.steps, 1.0);
    res.back = integrate_margin(development, s, sign, options.t_range, options.steps, -1.0);
  });

  NormalFlowResult r;
  r.samples = samples.size();
  r.sigma1 = r.sigma2 = options.t_range;
  r.capped1 = r.capped2 = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& s = out[i];
    r.shape_mismatch = std::max(r.shape_mismatch, s.mismatch);
    r.initial_sign = i == 0 ? s.sign : (r.initial_sign == s.sign ? s.sign : Definiteness::indefinite);
    if (s.sign != Definiteness::positive_definite && s.sign != Definiteness::negative_definite) {
      r.degenerate = true;
      continue;
    }
    r.left_domain = r.left_domain || s.fwd.left || s.back.left;
    if (s.back.sigma < r.sigma1) {
      r.sigma1 = s.back.sigma;
      r.capped1 = s.back.capped;
    }
    if (s.fwd.sigma < r.sigma2) {
      r.sigma2 = s.fwd.sigma;
      r.capped2 = s.fwd.capped;
    }
  }
  if (r.degenerate || r.initial_sign == Definiteness::indefinite) {
    r.degenerate = true;
    r.sigma1 = r.sigma2 = 0.0;
    r.capped1 = r.capped2 = false;
  }
  return r;
}

}  // namespace lorentzlab
