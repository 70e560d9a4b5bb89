#include "lorentzlab/static_graphs.hpp"

#include <algorithm>
#include <cmath>

#include "lorentzlab/curvature.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab {

StaticModel::StaticModel(FieldExpr h, std::vector<std::vector<FieldExpr>> g0, std::vector<std::string> base_coords,
                         ParamMesh mesh, std::string time_coord)
    : h_(std::move(h)), g0_(std::move(g0)), base_(std::move(base_coords)), mesh_(std::move(mesh)) {
  n_ = base_.size();
  if (n_ != mesh_.dim()) throw ConfigError("static model: base coordinate count must match the mesh dimension");
  if (g0_.size() != n_) throw ConfigError("static model: g0 must be " + std::to_string(n_) + "x" + std::to_string(n_));
  std::vector<std::string> coords{time_coord};
  coords.insert(coords.end(), base_.begin(), base_.end());
  for (const auto& v : h_.free_variables())
    if (std::find(base_.begin(), base_.end(), v) == base_.end())
      throw ConfigError("h depends on '" + v + "', which is not a base coordinate");
  ambient_ = MetricModel::standard_static(h_, g0_, coords);

  const std::size_t count = mesh_.node_count();
  std::vector<std::vector<double>> pts(count);
  for (std::size_t p = 0; p < count; ++p) pts[p] = mesh_.coordinates(p);
  node_ = sample(pts);
  face_.resize(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    auto fp = pts;
    for (auto& s : fp) s[k] += 0.5 * mesh_.spacing(k);
    face_[k] = sample(fp);
  }
  std::vector<FieldExpr> dh;
  for (const auto& c : base_) dh.push_back(differentiate(h_, c));
  CompiledField dhc(dh, base_);
  dlogh_.resize(count * n_);
  for (std::size_t p = 0; p < count; ++p) {
    auto d = dhc.eval(pts[p]);
    for (std::size_t k = 0; k < n_; ++k) dlogh_[p * n_ + k] = d[k] / node_.h[p];
  }
}

StaticModel::Samples StaticModel::sample(const std::vector<std::vector<double>>& points) const {
  std::vector<FieldExpr> exprs{h_};
  for (const auto& row : g0_) {
    if (row.size() != n_) throw ConfigError("static model: g0 must be square");
    exprs.insert(exprs.end(), row.begin(), row.end());
  }
  CompiledField f(exprs, base_);
  Samples s;
  const std::size_t count = points.size();
  s.h.resize(count);
  s.sqrt_g0.resize(count);
  s.g0inv.resize(count * n_ * n_);
  parallel_for(count, [&](std::size_t p) {
    auto v = f.eval(points[p]);
    if (!(v[0] > 0.0)) throw HypothesisError("static model: h is not positive at node " + std::to_string(p));
    s.h[p] = v[0];
    std::vector<double> g(v.begin() + 1, v.end());
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j) g[i * n_ + j] = g[j * n_ + i] = 0.5 * (g[i * n_ + j] + g[j * n_ + i]);
    auto ev = symmetric_eigenvalues(g, n_);
    if (!(ev.front() > 0.0)) throw HypothesisError("static model: g0 is not positive definite at node " + std::to_string(p));
    double det = 1.0;
    for (double l : ev) det *= l;
    s.sqrt_g0[p] = std::sqrt(det);
    auto gi = invert_matrix(g, n_);
    std::copy(gi.begin(), gi.end(), s.g0inv.begin() + static_cast<std::ptrdiff_t>(p * n_ * n_));
  });
  return s;
}

bool StaticModel::has_face(std::size_t p, std::size_t k) const {
  return mesh_.axis(k).periodic || mesh_.index_along(p, k) + 1 < mesh_.axis(k).nodes;
}

std::vector<NodeField> graph_gradient(const StaticModel& model, const NodeField& u) {
  if (u.size() != model.mesh().node_count()) throw ConfigError("graph function does not match the mesh");
  std::vector<NodeField> d(model.n());
  for (std::size_t k = 0; k < model.n(); ++k) d[k] = fd_partial(u, model.mesh(), k);
  return d;
}

namespace {

double grad_norm2(std::span<const double> ginv, const std::vector<double>& du) {
  const std::size_t n = du.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += ginv[i * n + j] * du[i] * du[j];
  return s;
}

std::vector<double> node_gradient(const std::vector<NodeField>& grad, std::size_t p) {
  std::vector<double> du(grad.size());
  for (std::size_t k = 0; k < grad.size(); ++k) du[k] = grad[k][p];
  return du;
}

}  // namespace

NodeField spacelike_margin(const StaticModel& model, const NodeField& u) {
  auto grad = graph_gradient(model, u);
  NodeField margin(u.size());
  for (std::size_t p = 0; p < u.size(); ++p)
    margin[p] = 1.0 - model.h(p) * grad_norm2(model.g0_inverse(p), node_gradient(grad, p));
  return margin;
}

SpacelikeCheck spacelike_check(const StaticModel& model, const NodeField& u) {
  auto margin = spacelike_margin(model, u);
  SpacelikeCheck c;
  auto it = std::min_element(margin.begin(), margin.end());
  c.min_margin = *it;
  c.worst_node = static_cast<std::size_t>(it - margin.begin());
  c.spacelike = c.min_margin > kMarginGuard;
  return c;
}

NodeField hyperbolic_angle(const StaticModel& model, const NodeField& u) {
  auto margin = spacelike_margin(model, u);
  NodeField out(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (!(margin[p] > kMarginGuard))
      throw NonSpacelikeError("graph is not spacelike at node " + std::to_string(p), p, {margin[p]});
    out[p] = 1.0 / std::sqrt(margin[p]);
  }
  return out;
}

NormalCheck unit_normal(const StaticModel& model, const NodeField& u) {
  const std::size_t n = model.n(), m = n + 1, count = u.size();
  auto grad = graph_gradient(model, u);
  NormalCheck c;
  c.normal.assign(count * m, 0.0);
  for (std::size_t p = 0; p < count; ++p) {
    auto du = node_gradient(grad, p);
    auto gi = model.g0_inverse(p);
    const double h = model.h(p);
    double w2 = 1.0 / h - grad_norm2(gi, du);
    if (!(w2 * h > kMarginGuard))
      throw NonSpacelikeError("graph is not spacelike at node " + std::to_string(p), p, {w2 * h});
    double w = std::sqrt(w2);
    std::vector<double> nf(m), alt(m), gbar(m * m, 0.0);
    nf[0] = 1.0 / (h * w);
    alt[0] = -1.0 / (h * w);
    gbar[0] = -h;
    for (std::size_t i = 0; i < n; ++i) {
      double gu = 0.0;
      for (std::size_t j = 0; j < n; ++j) gu += gi[i * n + j] * du[j];
      nf[i + 1] = gu / w;
      alt[i + 1] = gu / w;
    }
    auto pt = model.mesh().coordinates(p);
    std::vector<double> full{u[p]};
    full.insert(full.end(), pt.begin(), pt.end());
    gbar = model.ambient().metric(full);
    std::copy(nf.begin(), nf.end(), c.normal.begin() + static_cast<std::ptrdiff_t>(p * m));
    c.max_norm_error = std::max(c.max_norm_error, std::abs(inner(gbar, nf, nf) + 1.0));
    c.alt_max_norm_error = std::max(c.alt_max_norm_error, std::abs(inner(gbar, alt, alt) + 1.0));
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> t(m, 0.0);
      t[0] = du[k];
      t[k + 1] = 1.0;
      c.max_tangent_pairing = std::max(c.max_tangent_pairing, std::abs(inner(gbar, nf, t)));
      c.alt_max_tangent_pairing = std::max(c.alt_max_tangent_pairing, std::abs(inner(gbar, alt, t)));
    }
  }
  return c;
}

std::vector<NodeField> edge_fluxes(const StaticModel& model, const NodeField& u, const std::vector<NodeField>& grad,
                                   double guard) {
  const std::size_t n = model.n(), count = u.size();
  const auto& mesh = model.mesh();
  std::vector<NodeField> flux(n, NodeField(count, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    const double ds = mesh.spacing(k);
    parallel_for(count, [&](std::size_t p) {
      if (!model.has_face(p, k)) return;
      const std::size_t q = mesh.shifted(p, k, 1);
      std::vector<double> du(n);
      for (std::size_t b = 0; b < n; ++b) du[b] = b == k ? (u[q] - u[p]) / ds : 0.5 * (grad[b][p] + grad[b][q]);
      auto gi = model.face_g0_inverse(p, k);
      const double h = model.face_h(p, k);
      double margin = 1.0 - h * grad_norm2(gi, du);
      if (!(margin > guard))
        throw NonSpacelikeError("graph is not spacelike on the edge from node " + std::to_string(p), p, {margin});
      double w = std::sqrt(margin / h);
      double up = 0.0;
      for (std::size_t b = 0; b < n; ++b) up += gi[k * n + b] * du[b];
      flux[k][p] = std::sqrt(h) * model.face_sqrt_g0(p, k) * up / w;
    });
  }
  return flux;
}

NodeField graph_mean_curvature(const StaticModel& model, const NodeField& u) {
  const std::size_t n = model.n(), count = u.size();
  const auto& mesh = model.mesh();
  auto grad = graph_gradient(model, u);
  auto flux = edge_fluxes(model, u, grad);
  NodeField out(count, 0.0);
  std::vector<std::size_t> boundary;
  for (std::size_t p = 0; p < count; ++p) {
    if (mesh.is_boundary(p)) {
      boundary.push_back(p);
      continue;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += (flux[k][p] - flux[k][mesh.shifted(p, k, -1)]) / mesh.spacing(k);
    out[p] = s / (std::sqrt(model.h(p)) * model.sqrt_g0(p));
  }
  if (boundary.empty()) return out;

  // nodal form: (1/sqrt g0) d_k(sqrt g0 F^k) + F^k d_k log h / 2
  std::vector<NodeField> f(n, NodeField(count)), weighted(n, NodeField(count));
  for (std::size_t p = 0; p < count; ++p) {
    auto du = node_gradient(grad, p);
    auto gi = model.g0_inverse(p);
    double margin = 1.0 - model.h(p) * grad_norm2(gi, du);
    if (!(margin > kMarginGuard)) throw NonSpacelikeError("graph is not spacelike at node " + std::to_string(p), p, {margin});
    double w = std::sqrt(margin / model.h(p));
    for (std::size_t k = 0; k < n; ++k) {
      double up = 0.0;
      for (std::size_t b = 0; b < n; ++b) up += gi[k * n + b] * du[b];
      f[k][p] = up / w;
      weighted[k][p] = model.sqrt_g0(p) * f[k][p];
    }
  }
  std::vector<NodeField> dw(n);
  for (std::size_t k = 0; k < n; ++k) dw[k] = fd_partial(weighted[k], mesh, k);
  for (std::size_t p : boundary) {
    double s = 0.0;
    auto dl = model.dlog_h(p);
    for (std::size_t k = 0; k < n; ++k) s += dw[k][p] / model.sqrt_g0(p) + 0.5 * f[k][p] * dl[k];
    out[p] = s;
  }
  return out;
}

ImmersedSubmanifold graph_immersion(const StaticModel& model, const NodeField& u) {
  const std::size_t n = model.n(), m = n + 1;
  const auto& mesh = model.mesh();
  std::vector<NodeField> coords(m, NodeField(u.size()));
  coords[0] = u;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t p = 0; p < u.size(); ++p) coords[k + 1][p] = mesh.coordinate(p, k);
  std::vector<double> winding(n * m, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (mesh.axis(k).periodic) winding[k * m + k + 1] = mesh.axis(k).length;
  return ImmersedSubmanifold::from_nodes(mesh, model.ambient(), std::move(coords), std::move(winding));
}

namespace {

// (1/sqrt g~) d_i(sqrt g~ g~^ij d_j tau) for g~ = c g.
NodeField laplace_beltrami_tau(const ImmersedSubmanifold& imm, const NodeField& c) {
  const std::size_t n = imm.n(), count = imm.node_count();
  const double half_n = 0.5 * static_cast<double>(n);
  std::vector<NodeField> flux(n, NodeField(count));
  for (std::size_t p = 0; p < count; ++p) {
    auto gi = imm.induced_inverse(p);
    double w = std::pow(c[p], half_n - 1.0) * imm.density()[p];
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += gi[i * n + j] * imm.tangent(p, j)[0];
      flux[i][p] = w * v;
    }
  }
  NodeField out(count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto d = fd_partial(flux[i], imm.mesh(), i);
    for (std::size_t p = 0; p < count; ++p) out[p] += d[p];
  }
  for (std::size_t p = 0; p < count; ++p) out[p] /= std::pow(c[p], half_n) * imm.density()[p];
  return out;
}

struct TauTerms {
  NodeField h, dt_h, pairing;  // h o x, d_t^T(h), g(H, d_t)
};

TauTerms tau_terms(const ImmersedSubmanifold& imm) {
  const auto& model = imm.ambient();
  if (model.kind() != ModelKind::standard_static)
    throw HypothesisError("time-function Laplacian needs a standard static ambient model");
  const std::size_t n = imm.n(), m = imm.m(), count = imm.node_count();
  const FieldExpr& hx = model.lapse_squared();
  std::vector<FieldExpr> dh;
  for (const auto& c : model.coords()) dh.push_back(differentiate(hx, c));
  CompiledField hc(std::vector<FieldExpr>{hx}, model.coords()), dhc(dh, model.coords());
  auto mc = mean_curvature_vector(imm);
  TauTerms t{NodeField(count), NodeField(count), NodeField(count)};
  parallel_for(count, [&](std::size_t p) {
    auto pt = imm.point(p);
    auto g = imm.ambient_metric(p);
    auto gi = imm.induced_inverse(p);
    auto grad_h = dhc.eval(pt);
    t.h[p] = hc.eval(pt)[0];
    std::vector<double> e0(m, 0.0);
    e0[0] = 1.0;
    std::vector<double> proj(n), dj(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto ti = imm.tangent(p, i);
      proj[i] = inner(g, e0, ti);
      double v = 0.0;
      for (std::size_t a = 0; a < m; ++a) v += grad_h[a] * ti[a];
      dj[i] = v;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += gi[i * n + j] * proj[i] * dj[j];
    t.dt_h[p] = s;
    t.pairing[p] = inner(g, mc.at(p), e0);
  });
  return t;
}

void finish(TauLaplacian& r) {
  for (std::size_t p = 0; p < r.lhs.size(); ++p) {
    r.max_residual = std::max(r.max_residual, std::abs(r.lhs[p] - r.rhs[p]));
  }
}

}  // namespace

TauLaplacian laplacian_tau(const ImmersedSubmanifold& imm) {
  auto t = tau_terms(imm);
  const std::size_t count = imm.node_count();
  const double n = static_cast<double>(imm.n());
  TauLaplacian r;
  r.lhs = laplace_beltrami_tau(imm, NodeField(count, 1.0));
  r.rhs.resize(count);
  r.rhs_literal.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    const double h = t.h[p];
    r.rhs[p] = t.dt_h[p] / (h * h) + t.pairing[p] / h;
    r.rhs_literal[p] = 2.0 * t.dt_h[p] / (h * h * h) + n * t.pairing[p] / (h * h);
    r.max_residual_literal = std::max(r.max_residual_literal, std::abs(r.lhs[p] - r.rhs_literal[p]));
  }
  finish(r);
  return r;
}

TauLaplacian conformal_laplacian_tau(const ImmersedSubmanifold& imm) {
  if (imm.n() < 3)
    throw HypothesisError("conformal time-function Laplacian needs n >= 3; the conformal metric is undefined for n = 2");
  auto t = tau_terms(imm);
  const std::size_t count = imm.node_count();
  const double n = static_cast<double>(imm.n());
  NodeField c(count), c_literal(count);
  for (std::size_t p = 0; p < count; ++p) {
    c[p] = std::pow(t.h[p], 2.0 / (n - 2.0));
    c_literal[p] = std::pow(t.h[p], 4.0 / (n - 2.0));
  }
  TauLaplacian r;
  r.lhs = laplace_beltrami_tau(imm, c);
  auto lhs_literal = laplace_beltrami_tau(imm, c_literal);
  r.rhs.resize(count);
  r.rhs_literal.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    r.rhs[p] = std::pow(t.h[p], -n / (n - 2.0)) * t.pairing[p];
    r.rhs_literal[p] = n * std::pow(t.h[p], -2.0 * n / (n - 2.0)) * t.pairing[p];
    r.max_residual_literal = std::max(r.max_residual_literal, std::abs(lhs_literal[p] - r.rhs_literal[p]));
  }
  finish(r);
  return r;
}

}  // namespace lorentzlab
