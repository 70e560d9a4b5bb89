#include "lorentzlab/curvature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "lorentzlab/error.hpp"

namespace lorentzlab {

std::vector<double> invert_matrix(const std::vector<double>& a, std::size_t n) {
  Eigen::MatrixXd mat(n, n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      mat(i, j) = a[i * n + j];
      scale = std::max(scale, std::abs(a[i * n + j]));
    }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
  if (scale == 0.0 || !lu.isInvertible() || std::abs(lu.determinant()) < 1e-14 * std::pow(scale, n))
    throw SingularMatrixError("singular metric matrix");
  Eigen::MatrixXd inv = lu.inverse();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = 0.5 * (inv(i, j) + inv(j, i));
  return out;
}

std::vector<double> symmetric_eigenvalues(const std::vector<double>& a, std::size_t n) {
  Eigen::MatrixXd mat(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mat(i, j) = 0.5 * (a[i * n + j] + a[j * n + i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
  return out;
}

Connection connection_from_jet(const MetricJet& jet, bool with_derivative) {
  const std::size_t m = jet.m;
  Connection c;
  c.m = m;
  c.ginv = invert_matrix(jet.g, m);
  // Christoffel symbols of the first kind: [d][b][c] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
  std::vector<double> first(m * m * m);
  for (std::size_t d = 0; d < m; ++d)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t cc = b; cc < m; ++cc) {
        double v = 0.5 * (jet.d(b, d, cc) + jet.d(cc, d, b) - jet.d(d, b, cc));
        first[(d * m + b) * m + cc] = v;
        first[(d * m + cc) * m + b] = v;
      }
  c.gamma.assign(m * m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t cc = b; cc < m; ++cc) {
        double v = 0.0;
        for (std::size_t d = 0; d < m; ++d) v += c.ginv[a * m + d] * first[(d * m + b) * m + cc];
        c.gamma[(a * m + b) * m + cc] = v;
        c.gamma[(a * m + cc) * m + b] = v;
      }
  if (!with_derivative) return c;
  if (jet.ddg.empty()) throw Error("connection derivative needs the second metric jet");
  // d_e g^ad = -g^ai d_e g_ij g^jd
  std::vector<double> dginv(m * m * m, 0.0);
  for (std::size_t e = 0; e < m; ++e)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t d = 0; d < m; ++d) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) v -= c.ginv[a * m + i] * jet.d(e, i, j) * c.ginv[j * m + d];
        dginv[(e * m + a) * m + d] = v;
      }
  c.dgamma.assign(m * m * m * m, 0.0);
  for (std::size_t e = 0; e < m; ++e)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t cc = b; cc < m; ++cc) {
          double v = 0.0;
          for (std::size_t d = 0; d < m; ++d) {
            double dfirst = 0.5 * (jet.dd(e, b, d, cc) + jet.dd(e, cc, d, b) - jet.dd(e, d, b, cc));
            v += dginv[(e * m + a) * m + d] * first[(d * m + b) * m + cc] + c.ginv[a * m + d] * dfirst;
          }
          c.dgamma[((e * m + a) * m + b) * m + cc] = v;
          c.dgamma[((e * m + a) * m + cc) * m + b] = v;
        }
  return c;
}

std::vector<double> riemann_from_connection(const Connection& conn) {
  const std::size_t m = conn.m;
  if (conn.dgamma.empty()) throw Error("riemann tensor needs connection derivatives");
  std::vector<double> r(m * m * m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t d = c + 1; d < m; ++d) {
          double v = conn.d(c, a, d, b) - conn.d(d, a, c, b);
          for (std::size_t e = 0; e < m; ++e) v += conn(a, c, e) * conn(e, d, b) - conn(a, d, e) * conn(e, c, b);
          r[((a * m + b) * m + c) * m + d] = v;
          r[((a * m + b) * m + d) * m + c] = -v;
        }
  return r;
}

std::vector<double> ricci_from_riemann(const std::vector<double>& riemann, std::size_t m) {
  std::vector<double> ric(m * m, 0.0);
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t d = 0; d < m; ++d) {
      double v = 0.0;
      for (std::size_t a = 0; a < m; ++a) v += riemann[((a * m + b) * m + a) * m + d];
      ric[b * m + d] = v;
    }
  return ric;
}

double scalar_curvature(const std::vector<double>& riemann, const Connection& conn) {
  const std::size_t m = conn.m;
  auto ric = ricci_from_riemann(riemann, m);
  double r = 0.0;
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t d = 0; d < m; ++d) r += conn.inverse(b, d) * ric[b * m + d];
  return r;
}

}  // namespace lorentzlab
