#pragma once

// Initial data sets (S, g, A) with energy density phi and momentum X: the
// constraint residuals, definiteness of A, the stationarity obstruction for
// submanifolds P of S and definiteness margins along the normal geodesic flow
// of a slice in a given development.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorentzlab/immersion.hpp"
#include "lorentzlab/mesh.hpp"
#include "lorentzlab/spacetime.hpp"

namespace lorentzlab {

/// One scalar component, either an expression in the base coordinates
/// (symbolic derivatives) or node samples (finite differences).
struct ComponentSource {
  std::optional<FieldExpr> expr;
  NodeField grid;

  static ComponentSource from_expr(FieldExpr e) { return {std::move(e), {}}; }
  static ComponentSource from_grid(NodeField f) { return {std::nullopt, std::move(f)}; }
};

class InitialDataSet {
public:
  /// g[i*n+j] = g_ij, a[i*n+j] = A^i_j, x[i] = X^i. Throws HypothesisError
  /// if g is not positive definite or g(A.,.) is not symmetric within 1e-10
  /// relative to max|g A| at some node.
  InitialDataSet(ParamMesh mesh, std::vector<std::string> coords, std::vector<ComponentSource> g,
                 std::vector<ComponentSource> a, ComponentSource phi, std::vector<ComponentSource> x);

  std::size_t n() const noexcept { return n_; }
  const ParamMesh& mesh() const noexcept { return mesh_; }
  const std::vector<std::string>& coords() const noexcept { return coords_; }
  /// Every input is an expression.
  bool symbolic() const noexcept { return symbolic_; }

  /// (S, g) as a Riemannian model; throws ConfigError if g is gridded.
  MetricModel riemannian_model() const;
  /// A^i_j at an arbitrary point; throws ConfigError if A is gridded.
  std::vector<double> shape_at(std::span<const double> point) const;

  /// Samples at node p.
  MetricJet jet(std::size_t p) const;
  std::vector<double> shape(std::size_t p) const;             // A^i_j
  std::vector<double> shape_derivative(std::size_t p) const;  // [k][i][j] = d_k A^i_j
  double phi(std::size_t p) const { return phi_.value[p]; }
  std::vector<double> momentum(std::size_t p) const;

private:
  struct Sampled {
    NodeField value;
    std::vector<NodeField> d;   // [k]
    std::vector<NodeField> dd;  // [k*n+l], only for g
  };
  Sampled sample(const ComponentSource& src, bool second) const;

  ParamMesh mesh_;
  std::vector<std::string> coords_;
  std::size_t n_ = 0;
  bool symbolic_ = true;
  std::vector<ComponentSource> g_src_, a_src_;
  std::vector<Sampled> g_, a_, x_;
  Sampled phi_;
};

struct ConstraintResiduals {
  /// R(g) - tr(A^2) + tr(A)^2 - phi
  NodeField res1;
  /// g^jk (div A_k - d_k tr A) - X^j, [j][node]
  std::vector<NodeField> res2;
  double max_res1 = 0.0;
  double max_res2 = 0.0;
  std::size_t worst_node_res1 = 0;
  std::size_t worst_node_res2 = 0;
};

ConstraintResiduals constraint_residuals(const InitialDataSet& data);

enum class Definiteness {
  negative_definite,
  negative_semidefinite,
  positive_definite,
  positive_semidefinite,
  indefinite,
  zero
};

std::string_view to_string(Definiteness d);

/// Class of a set of eigenvalues with tolerance eps.
Definiteness classify_eigenvalues(const std::vector<double>& ev, double eps);

struct DefinitenessReport {
  std::vector<Definiteness> per_node;
  std::vector<double> min_eigenvalue, max_eigenvalue;
  Definiteness global = Definiteness::zero;
};

/// Eigenvalues of A in a g-orthonormal frame, eps = 1e-9 max|eigenvalue|
/// over the mesh.
DefinitenessReport definiteness_report(const InitialDataSet& data);

/// Embedding of S as a spacelike hypersurface of a development (one
/// expression per development coordinate in the coordinates of S).
struct SliceEmbedding {
  MetricModel development;
  std::vector<FieldExpr> map;
};

enum class ObstructionConclusion { excludes_stationary_development, no_conclusion };

std::string_view to_string(ObstructionConclusion c);

inline constexpr double kMinimalTolerance = 1e-6;

struct ObstructionReport {
  NodeField h_norm;      // |h| per node of P
  NodeField trace;       // trace_P A per node
  std::vector<bool> inequality;
  bool inequality_everywhere = false;
  bool non_minimal = false;
  ObstructionConclusion conclusion = ObstructionConclusion::no_conclusion;
  /// With a development: H = dx(h) + trace N per node and its classes.
  bool has_development = false;
  std::vector<double> mean_curvature;  // [node][a]
  std::vector<CausalClass> classes;
  Classification classification;
  /// max |H assembled - H computed directly on x o P|.
  double decomposition_discrepancy = 0.0;
};

/// `p` is immersed in (S, g) (its ambient must be data.riemannian_model()
/// or an equal metric). A must be given by expressions.
ObstructionReport stationarity_obstruction(const InitialDataSet& data, const ImmersedSubmanifold& p,
                                           const std::optional<SliceEmbedding>& slice = std::nullopt);

struct NormalFlowOptions {
  double t_range = 1.0;
  std::size_t steps = 200;
  /// Use every `stride`-th slice node as a sample.
  std::size_t stride = 1;
};

struct NormalFlowResult {
  double sigma1 = 0.0;  // backwards
  double sigma2 = 0.0;  // forwards
  bool degenerate = false;
  bool capped1 = false, capped2 = false;
  bool left_domain = false;
  std::size_t samples = 0;
  Definiteness initial_sign = Definiteness::zero;
  /// max |A(data) + D_T N| over samples (consistency of A with the slice).
  double shape_mismatch = 0.0;
};

/// Integrates geodesics s -> exp(sN) from slice nodes with RK4, transporting
/// B = D N with the Riccati equation dB/ds + B^2 + R(., N)N = 0 from
/// B(0) = -A on the slice tangent space and B(0) N = 0. The extended shape
/// operator -B restricted to N-perp keeps the initial definiteness on
/// (-sigma1, sigma2), capped by t_range. `slice` is S immersed in the
/// development with the same mesh as the data.
NormalFlowResult normal_flow_margin(const InitialDataSet& data, const MetricModel& development,
                                    const ImmersedSubmanifold& slice, const NormalFlowOptions& options = {});

/// Future unit normal of a spacelike hypersurface with tangents t[i][a].
std::vector<double> hypersurface_normal(std::span<const double> g, std::span<const double> future,
                                        const std::vector<std::vector<double>>& tangents);

}  // namespace lorentzlab
