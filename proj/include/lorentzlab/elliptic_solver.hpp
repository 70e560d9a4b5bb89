#pragma once

// Prescribed mean curvature graphs in standard static spacetimes: damped
// Newton on the conservative discrete operator, closed (periodic) base with a
// mean gauge, or Dirichlet data on bounded axes.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorentzlab/static_graphs.hpp"

namespace lorentzlab {

enum class DomainKind { closed, dirichlet };

struct SolverConfig {
  /// <= 0 selects 1e-10 (1 + |H|_inf).
  double tol_residual = 0.0;
  std::size_t max_newton = 50;
  double min_damping = 1.0 / 1024.0;
  double max_damping = 1.0;
  double margin_guard = kMarginGuard;
};

struct ProblemSpec {
  StaticModel model;
  DomainKind domain = DomainKind::closed;
  NodeField target_h;
  /// Dirichlet data; only boundary entries are used.
  NodeField u0;
  /// Empty selects the default: zero (closed) or the discrete harmonic
  /// extension of u0 (Dirichlet).
  NodeField initial;
  SolverConfig config;

  double tolerance() const;
};

enum class Verdict { converged, nonconvergent, infeasible_by_necessary_condition };

std::string_view to_string(Verdict v);

struct SolverResult {
  NodeField u;
  std::vector<double> residual_history;  // |R|_inf per accepted iterate
  bool converged = false;
  std::size_t iterations = 0;
  std::optional<double> necessary_condition;
  double necessary_tolerance = 0.0;
  Verdict verdict = Verdict::nonconvergent;
  double final_residual = 0.0;
  double min_margin = 0.0;
  std::string message;
};

/// Graph operator minus H; Dirichlet rows become u - u0. Throws
/// NonSpacelikeError when the margin guard is violated.
NodeField residual(const ProblemSpec& spec, const NodeField& u);

/// Integral of sqrt(h) H over the closed base. Throws ConfigError for a
/// Dirichlet problem.
double necessary_condition(const ProblemSpec& spec);

/// Integral of sqrt(h) over the base (scale of the necessary condition).
double lapse_volume(const ProblemSpec& spec);

/// Validates the spec (ConfigError) and runs Newton. Infeasible closed
/// problems return before iterating.
SolverResult solve(const ProblemSpec& spec);

/// Discrete harmonic extension (parameter Laplacian) of the boundary values.
NodeField harmonic_extension(const ParamMesh& mesh, const NodeField& boundary_values);

struct InequalityCheck {
  /// Operator <= tol at every interior node.
  bool operator_nonpositive = false;
  /// Operator >= -tol at every interior node.
  bool operator_nonnegative = false;
  bool boundary_matches = false;
  bool above_boundary_level = false;
  bool constant = false;
  /// Conditions as stated (operator <= 0, u = u0 on the boundary, u >= u0)
  /// hold but u is not constant.
  bool counterexample_to_claim = false;
  /// Same with the operator sign reversed (H >= 0).
  bool reversed_conditions_hold = false;
  double max_operator = 0.0;
  double min_operator = 0.0;
  std::vector<std::size_t> operator_positive_nodes;  // at most 32
  std::vector<std::size_t> below_level_nodes;        // at most 32
  double tolerance = 0.0;
};

inline constexpr double kInequalityTolerance = 1e-8;

/// Verifies a given u against the inequality problem with boundary data
/// spec.u0 (the target H is not used).
InequalityCheck inequality_solution_check(const ProblemSpec& spec, const NodeField& u,
                                          double tol = kInequalityTolerance);

}  // namespace lorentzlab
