#pragma once

// Pointwise Levi-Civita connection and curvature from the coordinate jet of a
// metric. Shared by the spacetime models (symbolic jets) and by gridded
// Riemannian data (finite-difference jets).
//
// Conventions: Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc),
// R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb,
// so that (R(X,Y)Z)^a = R^a_bcd Z^b X^c Y^d.

#include <cstddef>
#include <vector>

namespace lorentzlab {

/// Metric and its first (and optionally second) coordinate derivatives at a
/// point. Flat row-major storage.
struct MetricJet {
  std::size_t m = 0;
  std::vector<double> g;    // [a][b]
  std::vector<double> dg;   // [c][a][b] = d_c g_ab
  std::vector<double> ddg;  // [c][d][a][b] = d_c d_d g_ab, empty if not computed

  double metric(std::size_t a, std::size_t b) const { return g[a * m + b]; }
  double d(std::size_t c, std::size_t a, std::size_t b) const { return dg[(c * m + a) * m + b]; }
  double dd(std::size_t c, std::size_t d, std::size_t a, std::size_t b) const {
    return ddg[((c * m + d) * m + a) * m + b];
  }
};

struct Connection {
  std::size_t m = 0;
  std::vector<double> ginv;    // [a][b]
  std::vector<double> gamma;   // [a][b][c] = Gamma^a_bc
  std::vector<double> dgamma;  // [d][a][b][c] = d_d Gamma^a_bc, empty unless requested

  double inverse(std::size_t a, std::size_t b) const { return ginv[a * m + b]; }
  double operator()(std::size_t a, std::size_t b, std::size_t c) const { return gamma[(a * m + b) * m + c]; }
  double d(std::size_t d, std::size_t a, std::size_t b, std::size_t c) const {
    return dgamma[((d * m + a) * m + b) * m + c];
  }
};

/// Throws SingularMatrixError if the metric is not invertible.
Connection connection_from_jet(const MetricJet& jet, bool with_derivative);

/// R^a_bcd, flat [a][b][c][d]. Requires a connection built with derivatives.
std::vector<double> riemann_from_connection(const Connection& conn);

/// Ric_bd = R^a_bad and R = g^bd Ric_bd.
std::vector<double> ricci_from_riemann(const std::vector<double>& riemann, std::size_t m);
double scalar_curvature(const std::vector<double>& riemann, const Connection& conn);

/// Inverse of a small dense symmetric matrix (row-major). Throws
/// SingularMatrixError.
std::vector<double> invert_matrix(const std::vector<double>& a, std::size_t n);

/// Eigenvalues of a small symmetric matrix, ascending.
std::vector<double> symmetric_eigenvalues(const std::vector<double>& a, std::size_t n);

}  // namespace lorentzlab
