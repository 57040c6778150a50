#include "regge/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace regge {

namespace {

// Gauss-Jacobi rule with n points for the weight (1-u)^alpha on [0,1],
// computed from the symmetric tridiagonal Jacobi matrix (Golub-Welsch).
// Exact for polynomials of degree <= 2n-1 against that weight.
void gauss_jacobi(int n, int alpha, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  const double a = static_cast<double>(alpha);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    // Recurrence coefficients for Jacobi polynomials with beta = 0.
    double ak;
    if (k == 0) {
      ak = -a / (a + 2.0);
    } else {
      const double s = 2.0 * k + a;
      ak = -(a * a) / (s * (s + 2.0));
    }
    J(k, k) = ak;
    if (k > 0) {
      const double s = 2.0 * k + a;
      const double bk =
          4.0 * k * k * (k + a) * (k + a) / (s * s * (s + 1.0) * (s - 1.0));
      J(k, k - 1) = J(k - 1, k) = std::sqrt(bk);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_jacobi: eigensolver failed");
  // Total mass of (1-u)^alpha on [0,1]; the [-1,1] weights are rescaled
  // through the affine map u = (1+x)/2.
  const double mu0 = 1.0 / (a + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (1.0 + es.eigenvalues()[i]);
    const double v = es.eigenvectors()(0, i);
    weights[i] = mu0 * v * v;
  }
}

int points_for(int exactness) { return exactness / 2 + 1; }

}  // namespace

QuadRule quad_rule(int entity_dim, int exactness) {
  if (entity_dim < 1 || entity_dim > 3)
    throw std::invalid_argument("quad_rule: entity_dim must be 1, 2 or 3");
  if (exactness < 0 || exactness > 50)
    throw std::invalid_argument("quad_rule: exactness out of range");

  const int n = points_for(exactness);
  std::vector<double> x0, w0, x1, w1, x2, w2;
  gauss_jacobi(n, 0, x0, w0);
  if (entity_dim >= 2) gauss_jacobi(n, 1, x1, w1);
  if (entity_dim >= 3) gauss_jacobi(n, 2, x2, w2);

  QuadRule rule;
  rule.entity_dim = entity_dim;
  rule.exactness = exactness;

  if (entity_dim == 1) {
    for (int i = 0; i < n; ++i) {
      const double x = x0[i];
      rule.points.push_back(Eigen::Vector4d(1.0 - x, x, 0.0, 0.0));
      rule.weights.push_back(w0[i]);
    }
  } else if (entity_dim == 2) {
    // Duffy map from the unit square: x = a(1-b), y = b, Jacobian (1-b)
    // absorbed into the Gauss-Jacobi weight in b.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x = x0[i] * (1.0 - x1[j]);
        const double y = x1[j];
        rule.points.push_back(Eigen::Vector4d(1.0 - x - y, x, y, 0.0));
        rule.weights.push_back(w0[i] * w1[j]);
      }
  } else {
    // x = a(1-b)(1-c), y = b(1-c), z = c with Jacobian (1-b)(1-c)^2.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double x = x0[i] * (1.0 - x1[j]) * (1.0 - x2[k]);
          const double y = x1[j] * (1.0 - x2[k]);
          const double z = x2[k];
          rule.points.push_back(Eigen::Vector4d(1.0 - x - y - z, x, y, z));
          rule.weights.push_back(w0[i] * w1[j] * w2[k]);
        }
  }
  return rule;
}

}  // namespace regge
