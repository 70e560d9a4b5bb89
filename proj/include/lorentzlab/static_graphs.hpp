#pragma once

// Spacelike graphs t = u(x) in standard static spacetimes -h dt^2 + g0:
// spacelike condition, unit normal, hyperbolic angle, mean curvature in
// divergence form and the Laplacian of the time function on submanifolds.

#include <string>
#include <vector>

#include "lorentzlab/immersion.hpp"
#include "lorentzlab/mesh.hpp"
#include "lorentzlab/spacetime.hpp"

namespace lorentzlab {

inline constexpr double kMarginGuard = 1e-6;

/// Base manifold data sampled at nodes and at the midpoints of mesh edges.
class StaticModel {
public:
  /// `base_coords` name the mesh axes; the time coordinate is `time_coord`.
  /// Throws HypothesisError if h <= 0 or g0 is not positive definite at a
  /// node or edge midpoint.
  StaticModel(FieldExpr h, std::vector<std::vector<FieldExpr>> g0, std::vector<std::string> base_coords,
              ParamMesh mesh, std::string time_coord = "t");

  std::size_t n() const noexcept { return n_; }
  const ParamMesh& mesh() const noexcept { return mesh_; }
  const MetricModel& ambient() const noexcept { return ambient_; }
  const FieldExpr& h_expr() const noexcept { return h_; }
  const std::vector<std::vector<FieldExpr>>& g0_expr() const noexcept { return g0_; }
  const std::vector<std::string>& base_coords() const noexcept { return base_; }

  /// Node data.
  double h(std::size_t p) const { return node_.h[p]; }
  double sqrt_g0(std::size_t p) const { return node_.sqrt_g0[p]; }
  std::span<const double> g0_inverse(std::size_t p) const { return {node_.g0inv.data() + p * n_ * n_, n_ * n_}; }
  /// d_k log h at a node.
  std::span<const double> dlog_h(std::size_t p) const { return {dlogh_.data() + p * n_, n_}; }
  /// Whether node p has an edge towards p + e_k.
  bool has_face(std::size_t p, std::size_t k) const;
  /// Edge-midpoint data for the edge p -> p + e_k.
  double face_h(std::size_t p, std::size_t k) const { return face_[k].h[p]; }
  double face_sqrt_g0(std::size_t p, std::size_t k) const { return face_[k].sqrt_g0[p]; }
  std::span<const double> face_g0_inverse(std::size_t p, std::size_t k) const {
    return {face_[k].g0inv.data() + p * n_ * n_, n_ * n_};
  }
  /// Quadrature density sqrt(g0) at nodes.
  const NodeField& volume_density() const noexcept { return node_.sqrt_g0; }

private:
  struct Samples {
    NodeField h, sqrt_g0;
    std::vector<double> g0inv;
  };
  Samples sample(const std::vector<std::vector<double>>& points) const;

  FieldExpr h_;
  std::vector<std::vector<FieldExpr>> g0_;
  std::vector<std::string> base_;
  ParamMesh mesh_;
  MetricModel ambient_ = MetricModel::minkowski(2);
  std::size_t n_ = 0;
  Samples node_;
  std::vector<Samples> face_;
  std::vector<double> dlogh_;
};

struct SpacelikeCheck {
  bool spacelike = false;
  double min_margin = 0.0;
  std::size_t worst_node = 0;
};

/// d_k u at every node, [k][node].
std::vector<NodeField> graph_gradient(const StaticModel& model, const NodeField& u);

/// 1 - h |grad0 u|^2 per node.
NodeField spacelike_margin(const StaticModel& model, const NodeField& u);

/// True iff the margin exceeds kMarginGuard at every node.
SpacelikeCheck spacelike_check(const StaticModel& model, const NodeField& u);

/// cosh(theta) = 1/sqrt(margin) against the unit observer d_t/sqrt(h).
/// Throws NonSpacelikeError.
NodeField hyperbolic_angle(const StaticModel& model, const NodeField& u);

struct NormalCheck {
  /// Future unit normal ((1/h) d_t + grad0 u)/W, W = sqrt(1/h - |grad0 u|^2),
  /// flat [node][a] in ambient coordinates (t first).
  std::vector<double> normal;
  double max_norm_error = 0.0;        // |g(N,N) + 1|
  double max_tangent_pairing = 0.0;   // |g(N, d_k x)|
  /// The same diagnostics for (grad0 u - d_t/h)/W.
  double alt_max_norm_error = 0.0;
  double alt_max_tangent_pairing = 0.0;
};

NormalCheck unit_normal(const StaticModel& model, const NodeField& u);

/// Flux through the edge p -> p + e_k, sqrt(h) sqrt(g0) (g0^{kb} d_b u)/W at
/// the edge midpoint: the normal derivative is the difference across the edge
/// and transverse derivatives average the nodal central differences. Entries
/// without an edge are zero. `grad` is graph_gradient(model, u). Throws
/// NonSpacelikeError when the margin at an edge drops to `guard`.
std::vector<NodeField> edge_fluxes(const StaticModel& model, const NodeField& u, const std::vector<NodeField>& grad,
                                   double guard = kMarginGuard);

/// Mean curvature of the graph, div0(F) + g0(F, grad0 log h / 2) with
/// F = grad0 u / W. Interior nodes use the conservative edge-flux form
/// (1/(sqrt h sqrt g0)) sum_k (flux_k(p) - flux_k(p - e_k)) / ds_k; nodes on a
/// bounded-axis end use nodal differences. Throws NonSpacelikeError when the
/// margin at a node or edge drops to kMarginGuard.
NodeField graph_mean_curvature(const StaticModel& model, const NodeField& u);

/// The graph as an immersion into the static spacetime (time first).
ImmersedSubmanifold graph_immersion(const StaticModel& model, const NodeField& u);

struct TauLaplacian {
  NodeField lhs;          // discrete Laplace-Beltrami of tau = t o x
  NodeField rhs;          // identity consistent with -h dt^2
  NodeField rhs_literal;  // the printed coefficients, for comparison
  double max_residual = 0.0;
  double max_residual_literal = 0.0;
};

/// lhs = Delta tau, rhs = d_t^T(h)/h^2 + g(H, d_t)/h where
/// d_t^T(h) = g^ij g(d_t, d_i x) d_j(h o x). rhs_literal uses 2/h^3 and n/h^2.
/// Throws HypothesisError unless the ambient model is standard static.
TauLaplacian laplacian_tau(const ImmersedSubmanifold& imm);

/// Under g~ = h^{2/(n-2)} g: lhs = Delta~ tau, rhs = h^{-n/(n-2)} g(H, d_t);
/// rhs_literal = n h^{-2n/(n-2)} g(H, d_t) with lhs taken in h^{4/(n-2)} g.
/// Throws HypothesisError for n < 3 (the conformal factor needs n - 2 > 0).
TauLaplacian conformal_laplacian_tau(const ImmersedSubmanifold& imm);

}  // namespace lorentzlab
