#pragma once

// Divergence operators on immersed submanifolds and the pointwise and integral
// forms of div(X^T) = div_S X - g(X, H).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lorentzlab/immersion.hpp"

namespace lorentzlab {

/// div_S X = sum_i g(D_{E_i} X, E_i) over an orthonormal tangent frame built
/// by Gram-Schmidt in mesh-axis order. `rotation` turns the frame in the
/// (E_1, E_2) plane by that angle before contracting (frame-independence
/// checks); it is ignored for curves.
NodeField div_S(const ImmersedSubmanifold& imm, const VectorFieldSpec& x, double rotation = 0.0);

/// div of the tangential projection with respect to the induced metric,
/// (1/sqrt g) d_i(sqrt g (X^T)^i) with mesh finite differences.
NodeField tangential_divergence(const ImmersedSubmanifold& imm, const VectorFieldSpec& x);

/// g(X, H) per node.
NodeField normal_pairing(const ImmersedSubmanifold& imm, const MeanCurvatureReport& h, const VectorFieldSpec& x);

struct IdentityReport {
  /// tangential_divergence - div_S + g(X,H) per node.
  NodeField residual;
  NodeField div_s;    // div_S X per node
  NodeField pairing;  // g(X,H) per node
  double max_residual = 0.0;
  bool closed = false;
  /// Integral of div_S X - g(X,H) over S (closed meshes only).
  double integral = 0.0;
  double volume = 0.0;
  double integral_div_s = 0.0;
  double integral_pairing = 0.0;
  /// |integral| relative to the integral of |div_S X| + |g(X,H)|; above
  /// kWitnessThreshold the hypotheses produced an impossible sign.
  double relative_gap = 0.0;
  bool theorem_witness = false;
  double spacing = 0.0;
  int expected_order = 2;
  std::string frame = "gram_schmidt_axis_order";
};

inline constexpr double kWitnessThreshold = 1e-2;

/// Pointwise residual of the divergence identity; integral terms stay zero.
IdentityReport divergence_identity(const ImmersedSubmanifold& imm, const VectorFieldSpec& x);

/// Pointwise residual plus the integral. Throws HypothesisError when the mesh
/// has a boundary.
IdentityReport verify_integral_formula(const ImmersedSubmanifold& imm, const VectorFieldSpec& x);

/// Polynomial vector field of total degree <= `degree` in `coords` with
/// coefficients uniform in [-scale, scale].
VectorFieldSpec random_polynomial_field(const std::vector<std::string>& coords, int degree, double scale,
                                        std::mt19937_64& rng);

}  // namespace lorentzlab
