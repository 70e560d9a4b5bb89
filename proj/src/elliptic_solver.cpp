#include "lorentzlab/elliptic_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "lorentzlab/error.hpp"

namespace lorentzlab {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::nonconvergent: return "nonconvergent";
    case Verdict::infeasible_by_necessary_condition: return "infeasible_by_necessary_condition";
  }
  return "nonconvergent";
}

double ProblemSpec::tolerance() const {
  if (config.tol_residual > 0.0) return config.tol_residual;
  double hmax = 0.0;
  for (double v : target_h) hmax = std::max(hmax, std::abs(v));
  return 1e-10 * (1.0 + hmax);
}

namespace {

double inf_norm(const NodeField& r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

double two_norm(const NodeField& r) {
  CompensatedSum s;
  for (double v : r) s.add(v * v);
  return std::sqrt(s.value());
}

void validate(const ProblemSpec& spec) {
  const auto& mesh = spec.model.mesh();
  const std::size_t count = mesh.node_count();
  if (spec.target_h.size() != count) throw ConfigError("target H does not match the mesh");
  for (double v : spec.target_h)
    if (!std::isfinite(v)) throw ConfigError("target H is not finite");
  if (spec.domain == DomainKind::closed && !mesh.all_periodic())
    throw ConfigError("closed problem needs every mesh axis periodic");
  if (spec.domain == DomainKind::dirichlet) {
    if (!mesh.has_boundary()) throw ConfigError("Dirichlet problem needs a bounded mesh axis");
    if (spec.u0.size() != count) throw ConfigError("Dirichlet data does not match the mesh");
    for (std::size_t p = 0; p < count; ++p)
      if (mesh.is_boundary(p) && !std::isfinite(spec.u0[p])) throw ConfigError("Dirichlet data is not finite");
  }
  if (!spec.initial.empty() && spec.initial.size() != count) throw ConfigError("initial guess does not match the mesh");
  const auto& c = spec.config;
  if (!(c.min_damping > 0.0 && c.min_damping <= c.max_damping && c.max_damping <= 1.0))
    throw ConfigError("damping range must satisfy 0 < min <= max <= 1");
  if (c.max_newton == 0) throw ConfigError("max_newton must be positive");
}

// Smallest divisor >= 5 of a periodic axis length; bounded axes need no wrap.
std::size_t axis_colors(const MeshAxis& a) {
  if (!a.periodic) return 5;
  for (std::size_t c = 5; c <= a.nodes; ++c)
    if (a.nodes % c == 0) return c;
  return a.nodes;
}

// Column-colored finite-difference Jacobian; dependencies of a residual row
// stay within two nodes along each axis.
Eigen::SparseMatrix<double> fd_jacobian(const ProblemSpec& spec, const NodeField& u, const NodeField& r0) {
  const auto& mesh = spec.model.mesh();
  const std::size_t n = mesh.dim(), count = mesh.node_count();
  std::vector<std::size_t> colors(n);
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) {
    colors[k] = axis_colors(mesh.axis(k));
    total *= colors[k];
  }
  auto color_of = [&](std::size_t p) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < n; ++k) c = c * colors[k] + mesh.index_along(p, k) % colors[k];
    return c;
  };
  std::vector<std::vector<std::size_t>> groups(total);
  for (std::size_t p = 0; p < count; ++p) groups[color_of(p)].push_back(p);

  const bool dirichlet = spec.domain == DomainKind::dirichlet;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(count * 25);
  NodeField up = u;
  std::vector<double> eps(count);
  for (const auto& group : groups) {
    if (group.empty()) continue;
    for (std::size_t p : group) {
      eps[p] = 1e-7 * std::max(1.0, std::abs(u[p]));
      up[p] = u[p] + eps[p];
    }
    NodeField r1 = residual(spec, up);
    for (std::size_t p : group) {
      up[p] = u[p];
      // rows within the box of radius 2 around p
      std::vector<std::size_t> rows{p};
      for (std::size_t k = 0; k < n; ++k) {
        std::vector<std::size_t> next;
        const long len = static_cast<long>(mesh.axis(k).nodes);
        const bool periodic = mesh.axis(k).periodic;
        for (std::size_t q : rows) {
          const long i = static_cast<long>(mesh.index_along(q, k));
          for (long d = -2; d <= 2; ++d) {
            if (!periodic && (i + d < 0 || i + d >= len)) continue;
            if (periodic && len <= 4 && d != 0) continue;
            next.push_back(mesh.shifted(q, k, d));
          }
        }
        rows.swap(next);
      }
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
      for (std::size_t q : rows) {
        if (dirichlet && mesh.is_boundary(q)) continue;
        double v = (r1[q] - r0[q]) / eps[p];
        if (v != 0.0) trip.emplace_back(static_cast<int>(q), static_cast<int>(p), v);
      }
    }
  }
  if (dirichlet)
    for (std::size_t p = 0; p < count; ++p)
      if (mesh.is_boundary(p)) trip.emplace_back(static_cast<int>(p), static_cast<int>(p), 1.0);
  const int dim = static_cast<int>(count) + (dirichlet ? 0 : 1);
  if (!dirichlet) {
    // bordered gauge system [J 1; w^T 0]
    for (std::size_t p = 0; p < count; ++p) {
      trip.emplace_back(static_cast<int>(p), static_cast<int>(count), 1.0);
      trip.emplace_back(static_cast<int>(count), static_cast<int>(p), mesh.quadrature_weight(p));
    }
  }
  Eigen::SparseMatrix<double> j(dim, dim);
  j.setFromTriplets(trip.begin(), trip.end());
  return j;
}

}  // namespace

NodeField residual(const ProblemSpec& spec, const NodeField& u) {
  const auto& mesh = spec.model.mesh();
  NodeField r = graph_mean_curvature(spec.model, u);
  for (std::size_t p = 0; p < r.size(); ++p) {
    if (spec.domain == DomainKind::dirichlet && mesh.is_boundary(p))
      r[p] = u[p] - spec.u0[p];
    else
      r[p] -= spec.target_h[p];
  }
  return r;
}

double necessary_condition(const ProblemSpec& spec) {
  if (spec.domain != DomainKind::closed) throw ConfigError("necessary condition applies to closed problems only");
  const auto& mesh = spec.model.mesh();
  NodeField f(mesh.node_count());
  for (std::size_t p = 0; p < f.size(); ++p) f[p] = std::sqrt(spec.model.h(p)) * spec.target_h[p];
  return integrate(f, mesh, spec.model.volume_density());
}

double lapse_volume(const ProblemSpec& spec) {
  const auto& mesh = spec.model.mesh();
  NodeField f(mesh.node_count());
  for (std::size_t p = 0; p < f.size(); ++p) f[p] = std::sqrt(spec.model.h(p));
  return integrate(f, mesh, spec.model.volume_density());
}

NodeField harmonic_extension(const ParamMesh& mesh, const NodeField& boundary_values) {
  const std::size_t n = mesh.dim(), count = mesh.node_count();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  for (std::size_t p = 0; p < count; ++p) {
    const int row = static_cast<int>(p);
    if (mesh.is_boundary(p)) {
      trip.emplace_back(row, row, 1.0);
      rhs[row] = boundary_values[p];
      continue;
    }
    double diag = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double w = 1.0 / (mesh.spacing(k) * mesh.spacing(k));
      trip.emplace_back(row, static_cast<int>(mesh.shifted(p, k, 1)), w);
      trip.emplace_back(row, static_cast<int>(mesh.shifted(p, k, -1)), w);
      diag -= 2.0 * w;
    }
    trip.emplace_back(row, row, diag);
  }
  Eigen::SparseMatrix<double> a(static_cast<int>(count), static_cast<int>(count));
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("harmonic extension: singular Laplacian");
  Eigen::VectorXd x = lu.solve(rhs);
  NodeField out(count);
  for (std::size_t p = 0; p < count; ++p) out[p] = x[static_cast<Eigen::Index>(p)];
  return out;
}

SolverResult solve(const ProblemSpec& spec) {
  validate(spec);
  const auto& mesh = spec.model.mesh();
  const std::size_t count = mesh.node_count();
  const double tol = spec.tolerance();
  const auto& cfg = spec.config;
  SolverResult res;

  if (spec.domain == DomainKind::closed) {
    double value = necessary_condition(spec);
    res.necessary_condition = value;
    res.necessary_tolerance = tol * lapse_volume(spec);
    if (std::abs(value) > res.necessary_tolerance) {
      res.verdict = Verdict::infeasible_by_necessary_condition;
      res.message = "integral of sqrt(h) H over the closed base is nonzero";
      res.u = spec.initial.empty() ? NodeField(count, 0.0) : spec.initial;
      return res;
    }
  }

  NodeField u = spec.initial;
  if (u.empty()) u = spec.domain == DomainKind::closed ? NodeField(count, 0.0) : harmonic_extension(mesh, spec.u0);
  if (spec.domain == DomainKind::dirichlet)
    for (std::size_t p = 0; p < count; ++p)
      if (mesh.is_boundary(p)) u[p] = spec.u0[p];

  auto check = spacelike_check(spec.model, u);
  if (!(check.min_margin >= cfg.margin_guard))
    throw NonSpacelikeError("initial guess is not spacelike at node " + std::to_string(check.worst_node),
                            check.worst_node, {check.min_margin});

  NodeField r = residual(spec, u);
  double rinf = inf_norm(r);
  res.residual_history.push_back(rinf);
  while (true) {
    if (rinf <= tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cfg.max_newton) {
      res.message = "iteration cap reached";
      break;
    }
    auto jac = fd_jacobian(spec, u, r);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      res.message = "Jacobian is singular beyond the gauge";
      break;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(jac.rows());
    for (std::size_t p = 0; p < count; ++p) rhs[static_cast<Eigen::Index>(p)] = -r[p];
    Eigen::VectorXd step = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !step.allFinite()) {
      res.message = "linear solve failed";
      break;
    }

    const double r2 = two_norm(r);
    bool accepted = false;
    for (double alpha = cfg.max_damping; alpha >= cfg.min_damping; alpha *= 0.5) {
      NodeField trial(count);
      for (std::size_t p = 0; p < count; ++p) trial[p] = u[p] + alpha * step[static_cast<Eigen::Index>(p)];
      if (spacelike_check(spec.model, trial).min_margin < cfg.margin_guard) continue;
      NodeField rt;
      try {
        rt = residual(spec, trial);
      } catch (const NonSpacelikeError&) {
        continue;
      }
      double t2 = two_norm(rt);
      if (t2 <= (1.0 - 1e-4 * alpha) * r2 || (alpha * 0.5 < cfg.min_damping && t2 <= r2)) {
        u.swap(trial);
        r.swap(rt);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.message = "line search failed to reduce the residual";
      break;
    }
    ++res.iterations;
    rinf = inf_norm(r);
    res.residual_history.push_back(rinf);
  }
  res.final_residual = rinf;
  res.min_margin = spacelike_check(spec.model, u).min_margin;
  res.verdict = res.converged ? Verdict::converged : Verdict::nonconvergent;
  res.u = std::move(u);
  return res;
}

InequalityCheck inequality_solution_check(const ProblemSpec& spec, const NodeField& u, double tol) {
  const auto& mesh = spec.model.mesh();
  const std::size_t count = mesh.node_count();
  if (u.size() != count || spec.u0.size() != count) throw ConfigError("inequality check: field size mismatch");
  InequalityCheck c;
  c.tolerance = tol;
  NodeField op = graph_mean_curvature(spec.model, u);
  c.operator_nonpositive = c.operator_nonnegative = c.boundary_matches = c.above_boundary_level = true;
  bool first = true;
  double umin = u[0], umax = u[0];
  for (std::size_t p = 0; p < count; ++p) {
    umin = std::min(umin, u[p]);
    umax = std::max(umax, u[p]);
    if (u[p] < spec.u0[p] - tol) {
      c.above_boundary_level = false;
      if (c.below_level_nodes.size() < 32) c.below_level_nodes.push_back(p);
    }
    if (mesh.is_boundary(p)) {
      if (std::abs(u[p] - spec.u0[p]) > tol) c.boundary_matches = false;
      continue;
    }
    if (first) {
      c.max_operator = c.min_operator = op[p];
      first = false;
    }
    c.max_operator = std::max(c.max_operator, op[p]);
    c.min_operator = std::min(c.min_operator, op[p]);
    if (op[p] > tol) {
      c.operator_nonpositive = false;
      if (c.operator_positive_nodes.size() < 32) c.operator_positive_nodes.push_back(p);
    }
    if (op[p] < -tol) c.operator_nonnegative = false;
  }
  c.constant = umax - umin <= tol;
  c.counterexample_to_claim = c.operator_nonpositive && c.boundary_matches && c.above_boundary_level && !c.constant;
  c.reversed_conditions_hold = c.operator_nonnegative && c.boundary_matches && c.above_boundary_level;
  return c;
}

}  // namespace lorentzlab
