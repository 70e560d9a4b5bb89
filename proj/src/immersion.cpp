#include "lorentzlab/immersion.hpp"

#include <algorithm>
#include <cmath>

#include "lorentzlab/curvature.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab {

namespace {

void check_dims(const ParamMesh& mesh, const MetricModel& ambient) {
  if (mesh.dim() < 1 || mesh.dim() >= ambient.dim())
    throw HypothesisError("immersion needs 1 <= n < m (n=" + std::to_string(mesh.dim()) +
                          ", m=" + std::to_string(ambient.dim()) + ")");
}

}  // namespace

ImmersedSubmanifold ImmersedSubmanifold::from_expressions(ParamMesh mesh, MetricModel ambient,
                                                          std::vector<FieldExpr> map, std::vector<std::string> params) {
  check_dims(mesh, ambient);
  const std::size_t n = mesh.dim(), m = ambient.dim();
  if (map.size() != m) throw ConfigError("immersion map needs " + std::to_string(m) + " components");
  if (params.size() != n) throw ConfigError("immersion needs " + std::to_string(n) + " parameter names");
  for (const auto& e : map)
    for (const auto& v : e.free_variables())
      if (std::find(params.begin(), params.end(), v) == params.end())
        throw UnboundVariableError(v);

  CompiledField f(map, params);
  const std::size_t count = mesh.node_count();
  std::vector<NodeField> coords(m, NodeField(count));
  std::vector<double> values(count * m);
  parallel_for(count, [&](std::size_t p) {
    auto s = mesh.coordinates(p);
    f.eval(s, std::span<double>(values.data() + p * m, m));
  });
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t a = 0; a < m; ++a) coords[a][p] = values[p * m + a];

  // winding per periodic axis, checked at a handful of nodes
  std::vector<double> winding(n * m, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!mesh.axis(k).periodic) continue;
    const double len = mesh.axis(k).length;
    for (std::size_t probe = 0; probe < 5; ++probe) {
      std::size_t p = (probe * (count / 5 + 7)) % count;
      auto s = mesh.coordinates(p);
      auto x0 = f.eval(s);
      s[k] += len;
      auto x1 = f.eval(s);
      for (std::size_t a = 0; a < m; ++a) {
        double w = x1[a] - x0[a];
        if (probe == 0) {
          winding[k * m + a] = w;
        } else if (std::abs(w - winding[k * m + a]) > 1e-9 * (1.0 + std::abs(w))) {
          throw ConfigError("immersion map component " + std::to_string(a) + " is not periodic plus linear along axis " +
                            std::to_string(k));
        }
      }
    }
  }
  ImmersedSubmanifold imm;
  imm.mesh_ = std::move(mesh);
  imm.ambient_ = std::move(ambient);
  imm.map_ = std::move(map);
  imm.params_ = std::move(params);
  imm.build(std::move(coords), winding);
  return imm;
}

ImmersedSubmanifold ImmersedSubmanifold::from_nodes(ParamMesh mesh, MetricModel ambient, std::vector<NodeField> coords,
                                                    std::vector<double> winding) {
  check_dims(mesh, ambient);
  const std::size_t n = mesh.dim(), m = ambient.dim();
  if (coords.size() != m) throw ConfigError("immersion node table needs " + std::to_string(m) + " coordinate columns");
  for (const auto& c : coords)
    if (c.size() != mesh.node_count()) throw ConfigError("immersion node table does not match the mesh node count");
  if (winding.empty()) winding.assign(n * m, 0.0);
  if (winding.size() != n * m) throw ConfigError("winding needs n*m entries");
  ImmersedSubmanifold imm;
  imm.mesh_ = std::move(mesh);
  imm.ambient_ = std::move(ambient);
  for (std::size_t k = 0; k < n; ++k) imm.params_.push_back("s" + std::to_string(k + 1));
  imm.build(std::move(coords), winding);
  return imm;
}

void ImmersedSubmanifold::build(std::vector<NodeField> coords, const std::vector<double>& winding) {
  n_ = mesh_.dim();
  m_ = ambient_.dim();
  const std::size_t count = mesh_.node_count();

  // periodic part of each coordinate; the drift contributes a constant to d_k
  std::vector<NodeField> periodic = coords;
  for (std::size_t k = 0; k < n_; ++k) {
    if (!mesh_.axis(k).periodic) continue;
    const auto& ax = mesh_.axis(k);
    for (std::size_t a = 0; a < m_; ++a) {
      double w = winding[k * m_ + a];
      if (w == 0.0) continue;
      for (std::size_t p = 0; p < count; ++p) periodic[a][p] -= w * (mesh_.coordinate(p, k) - ax.origin) / ax.length;
    }
  }

  pos_.assign(count * m_, 0.0);
  tan_.assign(count * n_ * m_, 0.0);
  sec_.assign(count * n_ * n_ * m_, 0.0);
  for (std::size_t a = 0; a < m_; ++a) {
    for (std::size_t p = 0; p < count; ++p) pos_[p * m_ + a] = coords[a][p];
    for (std::size_t k = 0; k < n_; ++k) {
      NodeField d = fd_partial(periodic[a], mesh_, k);
      double drift = mesh_.axis(k).periodic ? winding[k * m_ + a] / mesh_.axis(k).length : 0.0;
      for (std::size_t p = 0; p < count; ++p) tan_[(p * n_ + k) * m_ + a] = d[p] + drift;
      for (std::size_t j = 0; j < n_; ++j) {
        if (j < k) continue;
        NodeField dd = j == k ? fd_second(periodic[a], mesh_, k) : fd_partial(d, mesh_, j);
        for (std::size_t p = 0; p < count; ++p) {
          sec_[((p * n_ + k) * n_ + j) * m_ + a] = dd[p];
          sec_[((p * n_ + j) * n_ + k) * m_ + a] = dd[p];
        }
      }
    }
  }

  gbar_.assign(count * m_ * m_, 0.0);
  g_.assign(count * n_ * n_, 0.0);
  ginv_.assign(count * n_ * n_, 0.0);
  density_.assign(count, 0.0);
  parallel_for(count, [&](std::size_t p) {
    auto gb = metric_at(ambient_, point(p));
    std::copy(gb.begin(), gb.end(), gbar_.begin() + static_cast<std::ptrdiff_t>(p * m_ * m_));
    std::vector<double> g(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        double v = inner(gb, tangent(p, i), tangent(p, j));
        g[i * n_ + j] = v;
        g[j * n_ + i] = v;
      }
    auto ev = symmetric_eigenvalues(g, n_);
    double scale = 0.0;
    for (double v : g) scale = std::max(scale, std::abs(v));
    if (!(ev.front() > 1e-12 * std::max(scale, 1e-300)))
      throw NonSpacelikeError("immersion is not spacelike at node " + std::to_string(p) +
                                  " (smallest induced eigenvalue " + std::to_string(ev.front()) + ")",
                              p, ev);
    auto gi = invert_matrix(g, n_);
    std::copy(g.begin(), g.end(), g_.begin() + static_cast<std::ptrdiff_t>(p * n_ * n_));
    std::copy(gi.begin(), gi.end(), ginv_.begin() + static_cast<std::ptrdiff_t>(p * n_ * n_));
    double det = 1.0;
    for (double l : ev) det *= l;
    density_[p] = std::sqrt(det);
  });
}

NodeField ImmersedSubmanifold::coordinate_field(std::size_t a) const {
  NodeField f(node_count());
  for (std::size_t p = 0; p < f.size(); ++p) f[p] = pos_[p * m_ + a];
  return f;
}

InducedMetric induced_metric(const ImmersedSubmanifold& imm) {
  InducedMetric out;
  out.n = imm.n();
  out.g.resize(imm.node_count() * imm.n() * imm.n());
  for (std::size_t p = 0; p < imm.node_count(); ++p) {
    auto g = imm.induced(p);
    std::copy(g.begin(), g.end(), out.g.begin() + static_cast<std::ptrdiff_t>(p * g.size()));
  }
  out.density = imm.density();
  return out;
}

std::vector<double> second_fundamental_form(const ImmersedSubmanifold& imm) {
  const std::size_t n = imm.n(), m = imm.m(), count = imm.node_count();
  std::vector<double> out(count * n * n * m, 0.0);
  parallel_for(count, [&](std::size_t p) {
    auto conn = christoffel_at(imm.ambient(), imm.point(p));
    auto gb = imm.ambient_metric(p);
    auto gi = imm.induced_inverse(p);
    std::vector<double> d(m), rhs(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        auto ti = imm.tangent(p, i), tj = imm.tangent(p, j);
        auto s = imm.second(p, i, j);
        for (std::size_t a = 0; a < m; ++a) {
          double v = s[a];
          for (std::size_t b = 0; b < m; ++b)
            for (std::size_t c = 0; c < m; ++c) v += conn(a, b, c) * ti[b] * tj[c];
          d[a] = v;
        }
        for (std::size_t k = 0; k < n; ++k) rhs[k] = inner(gb, d, imm.tangent(p, k));
        for (std::size_t k = 0; k < n; ++k) {
          double c = 0.0;
          for (std::size_t l = 0; l < n; ++l) c += gi[k * n + l] * rhs[l];
          auto tk = imm.tangent(p, k);
          for (std::size_t a = 0; a < m; ++a) d[a] -= c * tk[a];
        }
        for (std::size_t a = 0; a < m; ++a) {
          out[((p * n + i) * n + j) * m + a] = d[a];
          out[((p * n + j) * n + i) * m + a] = d[a];
        }
      }
  });
  return out;
}

std::string_view to_string(TrappedTag tag) {
  switch (tag) {
    case TrappedTag::extremal: return "extremal";
    case TrappedTag::future_trapped: return "future_trapped";
    case TrappedTag::past_trapped: return "past_trapped";
    case TrappedTag::nearly_future_trapped: return "nearly_future_trapped";
    case TrappedTag::nearly_past_trapped: return "nearly_past_trapped";
    case TrappedTag::marginally_future_trapped: return "marginally_future_trapped";
    case TrappedTag::marginally_past_trapped: return "marginally_past_trapped";
    case TrappedTag::weakly_future_trapped: return "weakly_future_trapped";
    case TrappedTag::weakly_past_trapped: return "weakly_past_trapped";
    case TrappedTag::mixed: return "mixed";
  }
  return "mixed";
}

namespace {

// Tags satisfied by one time orientation, strongest first. `in_cone` says
// whether a class lies in the closed causal cone of that orientation.
std::vector<TrappedTag> side_tags(const std::vector<CausalClass>& classes, bool future) {
  std::size_t timelike = 0, lightlike = 0, zero = 0;
  for (auto c : classes) {
    if (c == CausalClass::zero) {
      ++zero;
    } else if (future ? c == CausalClass::future_timelike : c == CausalClass::past_timelike) {
      ++timelike;
    } else if (future ? c == CausalClass::future_lightlike : c == CausalClass::past_lightlike) {
      ++lightlike;
    } else {
      return {};
    }
  }
  std::vector<TrappedTag> tags;
  const std::size_t total = classes.size();
  if (timelike == total)
    tags.push_back(future ? TrappedTag::future_trapped : TrappedTag::past_trapped);
  if (timelike > 0)
    tags.push_back(future ? TrappedTag::nearly_future_trapped : TrappedTag::nearly_past_trapped);
  if (timelike == 0 && lightlike > 0)
    tags.push_back(future ? TrappedTag::marginally_future_trapped : TrappedTag::marginally_past_trapped);
  if (timelike + lightlike > 0)
    tags.push_back(future ? TrappedTag::weakly_future_trapped : TrappedTag::weakly_past_trapped);
  return tags;
}

}  // namespace

Classification classify_classes(const std::vector<CausalClass>& classes) {
  Classification out;
  if (std::all_of(classes.begin(), classes.end(), [](CausalClass c) { return c == CausalClass::zero; })) {
    out.tag = TrappedTag::extremal;
    return out;
  }
  auto tags = side_tags(classes, true);
  if (tags.empty()) tags = side_tags(classes, false);
  if (tags.empty()) {
    out.tag = TrappedTag::mixed;
    return out;
  }
  out.tag = tags.front();
  out.also_satisfies.assign(tags.begin() + 1, tags.end());
  return out;
}

double MeanCurvatureReport::norm_squared(std::size_t p) const {
  return inner(std::span<const double>(metric.data() + p * m * m, m * m), at(p), at(p));
}

MeanCurvatureReport mean_curvature_vector(const ImmersedSubmanifold& imm, double tol) {
  const std::size_t n = imm.n(), m = imm.m(), count = imm.node_count();
  auto ii = second_fundamental_form(imm);
  MeanCurvatureReport r;
  r.m = m;
  r.tolerance = tol;
  r.h.assign(count * m, 0.0);
  r.metric.assign(imm.ambient_metric(0).size() * count, 0.0);
  r.future.assign(count * m, 0.0);
  r.classes.assign(count, CausalClass::zero);
  parallel_for(count, [&](std::size_t p) {
    auto gi = imm.induced_inverse(p);
    for (std::size_t a = 0; a < m; ++a) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v -= gi[i * n + j] * ii[((p * n + i) * n + j) * m + a];
      r.h[p * m + a] = v;
    }
    auto gb = imm.ambient_metric(p);
    std::copy(gb.begin(), gb.end(), r.metric.begin() + static_cast<std::ptrdiff_t>(p * m * m));
    auto f = imm.ambient().future(imm.point(p));
    std::copy(f.begin(), f.end(), r.future.begin() + static_cast<std::ptrdiff_t>(p * m));
    if (imm.ambient().lorentzian()) {
      r.classes[p] = classify_vector(gb, f, r.at(p), tol);
    } else {
      double scale = 0.0, vmax = 0.0;
      for (double v : gb) scale = std::max(scale, std::abs(v));
      for (double v : r.at(p)) vmax = std::max(vmax, std::abs(v));
      r.classes[p] = vmax < tol * scale ? CausalClass::zero : CausalClass::spacelike;
    }
  });
  r.classification = classify_classes(r.classes);
  return r;
}

Classification classify_submanifold(const MeanCurvatureReport& report, std::optional<double> tol) {
  bool riemannian = !report.future.empty() &&
                    std::all_of(report.future.begin(), report.future.end(), [](double v) { return v == 0.0; });
  if (!tol || *tol == report.tolerance || riemannian) return classify_classes(report.classes);
  const std::size_t m = report.m;
  std::vector<CausalClass> classes(report.classes.size());
  for (std::size_t p = 0; p < classes.size(); ++p)
    classes[p] = classify_vector(std::span<const double>(report.metric.data() + p * m * m, m * m),
                                 std::span<const double>(report.future.data() + p * m, m), report.at(p), *tol);
  return classify_classes(classes);
}

}  // namespace lorentzlab
