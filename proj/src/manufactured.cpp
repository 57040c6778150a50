#include "regge/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace regge {

SmoothMetric graph_metric(const ScalarJet3& f, int dim) {
  SmoothMetric m;
  m.dim = dim;
  m.sample = [f, dim](const Eigen::Vector3d& x) {
    SymTensorSample s;
    s.dim = dim;
    const Eigen::Vector3d gr = f.grad(x);
    const Eigen::Matrix3d H = f.hess(x);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        s.val(i, j) = (i == j ? 1.0 : 0.0) + gr(i) * gr(j);
        for (int p = 0; p < dim; ++p) {
          s.d1[p][i][j] = H(i, p) * gr(j) + gr(i) * H(j, p);
          for (int q = 0; q < dim; ++q)
            s.d2[p][q][i][j] = f.d3(x, i, p, q) * gr(j) + H(i, p) * H(j, q) +
                               H(i, q) * H(j, p) + gr(i) * f.d3(x, j, p, q);
        }
      }
    return s;
  };
  if (dim == 2) {
    m.exact_gauss = [f](const Eigen::Vector3d& x) {
      const Eigen::Vector3d gr = f.grad(x);
      const Eigen::Matrix3d H = f.hess(x);
      const double det2 = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
      const double w = 1.0 + gr.head<2>().squaredNorm();
      return det2 / (w * w);
    };
  }
  return m;
}

namespace {

// f = sum_i x_i^2/2 - x_i^4/12 restricted to the first `dim` coordinates.
ScalarJet3 quartic_bump_jet(int dim) {
  ScalarJet3 jet;
  jet.f = [dim](const Eigen::Vector3d& x) {
    double v = 0;
    for (int i = 0; i < dim; ++i)
      v += 0.5 * x(i) * x(i) - x(i) * x(i) * x(i) * x(i) / 12.0;
    return v;
  };
  jet.grad = [dim](const Eigen::Vector3d& x) {
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (int i = 0; i < dim; ++i) g(i) = x(i) - x(i) * x(i) * x(i) / 3.0;
    return g;
  };
  jet.hess = [dim](const Eigen::Vector3d& x) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (int i = 0; i < dim; ++i) h(i, i) = 1.0 - x(i) * x(i);
    return h;
  };
  jet.d3 = [dim](const Eigen::Vector3d& x, int i, int j, int k) {
    if (i == j && j == k && i < dim) return -2.0 * x(i);
    return 0.0;
  };
  return jet;
}

}  // namespace

SmoothMetric benchmark_3d() {
  SmoothMetric m = graph_metric(quartic_bump_jet(3), 3);
  m.exact_q = [](const Eigen::Vector3d& x) {
    auto q = [](double t) {
      const double u = t * t - 3.0;
      return t * t * u * u;
    };
    const double gx = x.x() - x.x() * x.x() * x.x() / 3.0;
    const double gy = x.y() - x.y() * x.y() * x.y() / 3.0;
    const double gz = x.z() - x.z() * x.z() * x.z() / 3.0;
    const double detg = 1.0 + gx * gx + gy * gy + gz * gz;
    const double denom = detg * (q(x.x()) + q(x.y()) + q(x.z()) + 9.0);
    Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
    Q(0, 0) = 9.0 * (x.z() * x.z() - 1.0) * (x.y() * x.y() - 1.0) / denom;
    Q(1, 1) = 9.0 * (x.z() * x.z() - 1.0) * (x.x() * x.x() - 1.0) / denom;
    Q(2, 2) = 9.0 * (x.x() * x.x() - 1.0) * (x.y() * x.y() - 1.0) / denom;
    return Q;
  };
  return m;
}

SmoothMetric benchmark_2d() { return graph_metric(quartic_bump_jet(2), 2); }

SmoothMetric flat_pullback_metric(int dim) {
  // Jacobian of a quadratic diffeomorphism, affine in x: J(x) = A[0] +
  // sum_p x_p A[p+1]. The 0.1 amplitude keeps J invertible on (-1,1)^dim.
  const double a = 0.1;
  std::array<Eigen::Matrix3d, 4> A;
  for (auto& m : A) m = Eigen::Matrix3d::Zero();
  if (dim == 3) {
    A[0] = Eigen::Matrix3d::Identity();
    A[1](0, 2) = a;
    A[1](1, 1) = a;
    A[1](2, 0) = 2 * a;
    A[2](0, 1) = 2 * a;
    A[2](1, 0) = a;
    A[2](2, 2) = a;
    A[3](0, 0) = a;
    A[3](1, 2) = 2 * a;
    A[3](2, 1) = a;
  } else {
    A[0].topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity();
    A[1](0, 1) = a;
    A[1](1, 0) = 2 * a;
    A[1](1, 1) = -a;
    A[2](0, 0) = a;
    A[2](0, 1) = 2 * a;
    A[2](1, 0) = -a;
  }
  SmoothMetric m;
  m.dim = dim;
  m.sample = [A, dim](const Eigen::Vector3d& x) {
    Eigen::Matrix3d J = A[0];
    for (int p = 0; p < dim; ++p) J += x(p) * A[p + 1];
    SymTensorSample s;
    s.dim = dim;
    s.val = J.transpose() * J;
    for (int p = 0; p < dim; ++p) {
      const Eigen::Matrix3d dp = A[p + 1].transpose() * J +
                                 J.transpose() * A[p + 1];
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s.d1[p][i][j] = dp(i, j);
      for (int q = 0; q < dim; ++q) {
        const Eigen::Matrix3d dpq = A[p + 1].transpose() * A[q + 1] +
                                    A[q + 1].transpose() * A[p + 1];
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) s.d2[p][q][i][j] = dpq(i, j);
      }
    }
    return s;
  };
  m.exact_q = [](const Eigen::Vector3d&) { return Eigen::Matrix3d::Zero(); };
  m.exact_gauss = [](const Eigen::Vector3d&) { return 0.0; };
  return m;
}

ConeInstance cone_metric_2d(const std::vector<double>& apex_angles) {
  const int n = static_cast<int>(apex_angles.size());
  if (n < 3)
    throw std::invalid_argument("cone_metric_2d: need at least 3 triangles");
  for (double a : apex_angles)
    if (!(a > 0.0) || !(a < M_PI))
      throw std::invalid_argument("cone_metric_2d: angles must be in (0,pi)");

  ConeInstance out;
  out.mesh = std::make_shared<Mesh>();
  Mesh& mesh = *out.mesh;
  mesh.dim = 2;
  mesh.vertices.push_back(Eigen::Vector3d::Zero());
  for (int j = 0; j < n; ++j) {
    const double phi = 2.0 * M_PI * j / n;
    mesh.vertices.push_back(Eigen::Vector3d(std::cos(phi), std::sin(phi), 0));
  }
  for (int j = 0; j < n; ++j)
    mesh.elements.push_back({0, 1 + j, 1 + (j + 1) % n, -1});
  mesh.finalize();

  out.apex_vertex = 0;
  out.deficit = 2.0 * M_PI;
  out.field.mesh = out.mesh.get();
  out.field.order = 0;
  out.field.elem.resize(n);

  // One constant metric per triangle: both spokes have unit length and the
  // apex angle equals the prescribed one, g = E^{-T} M E^{-1}.
  for (int el = 0; el < mesh.n_elements(); ++el) {
    // finalize() may reorder element vertices; recover the two spokes.
    std::array<int, 2> rim{-1, -1};
    int nrim = 0;
    for (int lv = 0; lv < 3; ++lv)
      if (mesh.elements[el][lv] != 0) rim[nrim++] = mesh.elements[el][lv];
    // Element index equals its position in the fan by construction only
    // before finalize(); recover the angle from the lower rim vertex.
    const int j = std::min(rim[0], rim[1]) - 1;
    const int jn = std::max(rim[0], rim[1]) - 1;
    const double alpha =
        (j == 0 && jn == n - 1) ? apex_angles[n - 1] : apex_angles[j];
    const Eigen::Vector3d e1 = mesh.vertices[rim[0]];
    const Eigen::Vector3d e2 = mesh.vertices[rim[1]];
    Eigen::Matrix2d E;
    E << e1.x(), e2.x(), e1.y(), e2.y();
    Eigen::Matrix2d M;
    M << 1.0, std::cos(alpha), std::cos(alpha), 1.0;
    const Eigen::Matrix2d Ei = E.inverse();
    const Eigen::Matrix2d g = Ei.transpose() * M * Ei;
    PolySymTensor p(2, 0);
    p.coeff(0, 0) = g(0, 0);
    p.coeff(0, 1) = g(1, 1);
    p.coeff(0, 2) = g(0, 1);
    out.field.elem[el] = std::move(p);
  }
  for (double a : apex_angles) out.deficit -= a;
  return out;
}

}  // namespace regge
