#include "regge/linearization.hpp"

#include <cmath>
#include <stdexcept>

#include "regge/quadrature.hpp"

namespace regge {

TQuadrature TQuadrature::gauss(int n) {
  if (n < 1) throw std::invalid_argument("TQuadrature: need n >= 1");
  const QuadRule qr = quad_rule(1, 2 * n - 2);
  TQuadrature tq;
  for (int q = 0; q < qr.size(); ++q) {
    tq.nodes.push_back(qr.points[q][1]);
    tq.weights.push_back(qr.weights[q]);
  }
  return tq;
}

namespace {

constexpr double eps3[3][3][3] = {
    {{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
    {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
    {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};

// First covariant derivative, T[p][i][j] = (nabla_p sigma)_{ij}.
void cov_deriv(const SymTensorSample& s, const PointGeometry& pg,
               double T[3][3][3]) {
  const int d = pg.dim;
  for (int p = 0; p < d; ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = s.d1[p][i][j];
        for (int m = 0; m < d; ++m)
          v -= pg.G2[m][p][i] * s.val(m, j) + pg.G2[m][p][j] * s.val(i, m);
        T[p][i][j] = v;
      }
}

// The one-Christoffel combination W_{rqs} = d_r sigma_qs - Gamma^u_{rq}
// sigma_us that the curl formulas are built from, and its plain derivative.
void curl_core(const SymTensorSample& s, const PointGeometry& pg,
               double W[3][3][3]) {
  const int d = pg.dim;
  for (int r = 0; r < d; ++r)
    for (int q = 0; q < d; ++q)
      for (int t = 0; t < d; ++t) {
        double v = s.d1[r][q][t];
        for (int u = 0; u < d; ++u) v -= pg.G2[u][r][q] * s.val(u, t);
        W[r][q][t] = v;
      }
}

void curl_core_deriv(const SymTensorSample& s, const PointGeometry& pg,
                     double dW[3][3][3][3]) {
  const int d = pg.dim;
  for (int p = 0; p < d; ++p)
    for (int r = 0; r < d; ++r)
      for (int q = 0; q < d; ++q)
        for (int t = 0; t < d; ++t) {
          double v = s.d2[p][r][q][t];
          for (int u = 0; u < d; ++u)
            v -= pg.dG2[p][u][r][q] * s.val(u, t) +
                 pg.G2[u][r][q] * s.d1[p][u][t];
          dW[p][r][q][t] = v;
        }
}

}  // namespace

Eigen::Matrix3d covariant_curl(const SymTensorSample& s,
                               const PointGeometry& pg) {
  if (pg.dim != 3)
    throw std::invalid_argument("covariant_curl: dim 3 only");
  double W[3][3][3];
  curl_core(s, pg, W);
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0;
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          const double e = eps3[p][q][j];
          if (e != 0.0) v += e * W[p][i][q];
        }
      C(i, j) = v / pg.sqrt_det;
    }
  return C;
}

Eigen::Matrix3d covariant_inc(const SymTensorSample& s,
                              const PointGeometry& pg) {
  if (pg.dim != 3)
    throw std::invalid_argument("covariant_inc: dim 3 only");
  double W[3][3][3], dW[3][3][3][3];
  curl_core(s, pg, W);
  curl_core_deriv(s, pg, dW);
  double trG[3];
  for (int p = 0; p < 3; ++p) {
    trG[p] = 0;
    for (int l = 0; l < 3; ++l) trG[p] += pg.G2[l][l][p];
  }
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          const double epq = eps3[p][q][j];
          if (epq == 0.0) continue;
          double inner = 0;
          for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 3; ++t) {
              const double ers = eps3[r][t][i];
              if (ers != 0.0)
                inner += ers * (dW[p][r][q][t] - trG[p] * W[r][q][t]);
              for (int u = 0; u < 3; ++u) {
                const double ersu = eps3[r][t][u];
                if (ersu != 0.0)
                  inner += ersu * pg.G2[i][p][u] * W[r][q][t];
              }
            }
          acc += epq * inner;
        }
      out(i, j) = acc / pg.det;
    }
  return out;
}

double inc_2d(const SymTensorSample& s, const PointGeometry& pg) {
  if (pg.dim != 2) throw std::invalid_argument("inc_2d: dim 2 only");
  double W[3][3][3], dW[3][3][3][3];
  curl_core(s, pg, W);
  curl_core_deriv(s, pg, dW);
  double trG[2];
  for (int q = 0; q < 2; ++q) {
    trG[q] = 0;
    for (int l = 0; l < 2; ++l) trG[q] += pg.G2[l][l][q];
  }
  const double e2[2][2] = {{0, 1}, {-1, 0}};
  double acc = 0;
  for (int q = 0; q < 2; ++q)
    for (int i = 0; i < 2; ++i) {
      if (e2[q][i] == 0.0) continue;
      for (int j = 0; j < 2; ++j)
        for (int kk = 0; kk < 2; ++kk) {
          if (e2[j][kk] == 0.0) continue;
          acc += e2[q][i] * e2[j][kk] *
                 (dW[q][j][i][kk] - trG[q] * W[j][i][kk]);
        }
    }
  return acc / pg.det;
}

Tensor4 second_covariant_derivative(const SymTensorSample& s,
                                    const PointGeometry& pg) {
  const int d = pg.dim;
  double T[3][3][3];
  cov_deriv(s, pg, T);
  Tensor4 out;
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double v = s.d2[p][q][i][j];
          for (int m = 0; m < d; ++m) {
            v -= pg.dG2[p][m][q][i] * s.val(m, j) +
                 pg.G2[m][q][i] * s.d1[p][m][j] +
                 pg.dG2[p][m][q][j] * s.val(i, m) +
                 pg.G2[m][q][j] * s.d1[p][i][m];
            v -= pg.G2[m][p][q] * T[m][i][j] + pg.G2[m][p][i] * T[q][m][j] +
                 pg.G2[m][p][j] * T[q][i][m];
          }
          out.c[p][q][i][j] = v;
        }
  return out;
}

namespace {

// INC = -S P nabla^2 sigma: Riemann-symmetrized second derivative with the
// inner pair swapped.
Tensor4 big_inc(const SymTensorSample& s, const PointGeometry& pg) {
  const Tensor4 T = second_covariant_derivative(s, pg);
  Tensor4 out;
  const int d = pg.dim;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          // (P X)_{pqij} = 1/4 (X_pqij - X_iqpj - X_pjiq + X_ijpq) at
          // (p,q,i,j) = (a,c,b,e), then slots 2 and 3 swapped.
          const double v = 0.25 * (T.c[a][c][b][e] - T.c[b][c][a][e] -
                                   T.c[a][e][b][c] + T.c[b][e][a][c]);
          out.c[a][b][c][e] = -v;
        }
  return out;
}

// (nabla sigma)_{F nu F}: (a,b) -> (nabla_{t_a} sigma)(nu, t_b).
Eigen::Matrix2d nabla_FnF(const double T[3][3][3], const FacetFrame& fr) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  const int nt = fr.dim - 1;
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) {
      double v = 0;
      for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            v += fr.t[a][p] * fr.nu[i] * fr.t[b][j] * T[p][i][j];
      m(a, b) = v;
    }
  return m;
}

// (nabla sigma)_{nu F F}: (a,b) -> (nabla_nu sigma)(t_a, t_b).
Eigen::Matrix2d nabla_nFF(const double T[3][3][3], const FacetFrame& fr) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  const int nt = fr.dim - 1;
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) {
      double v = 0;
      for (int p = 0; p < 3; ++p)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            v += fr.nu[p] * fr.t[a][i] * fr.t[b][j] * T[p][i][j];
      m(a, b) = v;
    }
  return m;
}

// Tangential block of nabla(nu contracted into sigma): the normal component
// of the first derivative plus the shape-operator correction.
Eigen::Matrix2d nabla_contraction(const double T[3][3][3],
                                  const Eigen::Matrix2d& II,
                                  const Eigen::Matrix2d& sigmaF,
                                  const FacetFrame& fr) {
  return nabla_FnF(T, fr) - II * fr.gF_inv * sigmaF;
}

// Q (curl sigma)^T x nu in Cartesian components, tangential in both slots.
Eigen::Matrix3d curl_facet_term(const Eigen::Matrix3d& C,
                                const PointGeometry& pg,
                                const FacetFrame& fr) {
  const Eigen::Vector3d gnu = pg.g * fr.nu;
  const Eigen::Matrix3d Q =
      Eigen::Matrix3d::Identity() - fr.nu * gnu.transpose();
  Eigen::Matrix3d QCt = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      double v = 0;
      for (int j = 0; j < 3; ++j) v += Q(i, j) * C(k, j);
      QCt(i, k) = v;
    }
  Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          const double e = eps3[j][k][l];
          if (e != 0.0) v += e * QCt(i, k) * gnu[l];
        }
      W(i, j) = v / pg.sqrt_det;
    }
  return W;
}

// d/ds of the scalar sigma(nu(s), tau(s)) along the facet of a 2D mesh,
// with the frame derivatives of the g-unit normal and tangent included.
double dtau_sigma_nutau(const SymTensorSample& gsample,
                        const SymTensorSample& sig, const FacetFrame& fr) {
  const Eigen::Vector3d w = fr.tau2d;
  const Eigen::Vector3d dnu = g_normal_derivative(gsample, fr.nhat, w);
  const Eigen::Vector3d th(fr.nhat[1], -fr.nhat[0], 0.0);
  const Eigen::Vector3d dtau = g_unit_derivative(gsample, th, w);
  Eigen::Matrix3d dsig = Eigen::Matrix3d::Zero();
  for (int p = 0; p < 2; ++p)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dsig(i, j) += w[p] * sig.d1[p][i][j];
  return dnu.dot(sig.val * fr.tau2d) + fr.nu.dot(dsig * fr.tau2d) +
         fr.nu.dot(sig.val * dtau);
}

double contract_vec(const double T[3][3][3], const Eigen::Vector3d& a,
                    const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  double v = 0;
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) v += a[p] * b[i] * c[j] * T[p][i][j];
  return v;
}

Eigen::Vector3d ref_coords(const AffineMap& map, const Eigen::Vector3d& x) {
  return map.J_inv * (x - map.origin);
}

std::vector<AffineMap> all_maps(const Mesh& mesh) {
  std::vector<AffineMap> maps;
  maps.reserve(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e)
    maps.push_back(reference_map(mesh, e));
  return maps;
}

double triple_cov(const Eigen::Matrix2d& gi, const Eigen::Matrix2d& a,
                  const Eigen::Matrix2d& b, const Eigen::Matrix2d& c) {
  return (a * gi * b * gi * c * gi).trace();
}

}  // namespace

double a_form(const Mesh& mesh, const MetricEval& g, const MetricEval& sigma,
              const TestField& u, int k, const QuadConfig& qc) {
  if (mesh.dim == 2) return 0.0;  // no zeroth-order part in 2D
  if (u.kind != TestField::Kind::Matrix)
    throw std::invalid_argument("a_form: matrix test required");
  const auto maps = all_maps(mesh);
  double acc = 0;

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, u.degree),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const Eigen::Matrix3d sg =
            sigma.eval(elem, ref_coords(maps[elem], x), x).val;
        const Eigen::Matrix3d Q = curvature_operator_3d(pg);
        const Eigen::Matrix3d U = u.matrix(elem, x);
        // Q : sigma : U with Q contravariant, tr(Q sigma g^-1 U).
        acc += -2.0 * w * (Q * sg * pg.g_inv * U).trace();
      });

  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample*, const PointGeometry pg[2], double w) {
        for (int side = 0; side < 2; ++side) {
          const int elem = fc.elem[side];
          const Eigen::Matrix3d sg =
              sigma.eval(elem, ref_coords(maps[elem], x), x).val;
          const Eigen::Matrix2d II =
              second_fundamental_form(pg[side], fr[side]);
          const Eigen::Matrix2d Ss = trace_reversed(
              facet_restrict(sg, fr[side]), fr[side]);
          const Eigen::Matrix2d Su = trace_reversed(
              facet_restrict(u.matrix(elem, x), fr[side]), fr[side]);
          acc += -2.0 * w * triple_cov(fr[side].gF_inv, II, Ss, Su);
        }
      });

  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        const Eigen::Matrix3d sg =
            sigma.eval(s0.elem, ref_coords(maps[s0.elem], bc.x), bc.x).val;
        const double stt = bc.tau.dot(sg * bc.tau);
        const double utt = bc.tau.dot(u.matrix(s0.elem, bc.x) * bc.tau);
        acc += -2.0 * w * bc.theta * stt * utt;
      });

  return acc;
}

namespace detail {

double b_form_impl(const Mesh& mesh, const MetricEval& g,
                   const MetricEval& sigma, const TestField& u, int k,
                   const QuadConfig& qc, double edge_sign) {
  const auto maps = all_maps(mesh);
  const bool two_d = mesh.dim == 2;
  if (two_d && u.kind != TestField::Kind::Scalar)
    throw std::invalid_argument("b_form: scalar test required in 2D");
  if (!two_d && u.kind != TestField::Kind::Matrix)
    throw std::invalid_argument("b_form: matrix test required in 3D");
  double acc = 0;

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, u.degree),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const SymTensorSample sg = sigma.eval(elem, ref_coords(maps[elem], x), x);
        if (two_d) {
          acc += -2.0 * w * inc_2d(sg, pg) * u.scalar(elem, x);
        } else {
          const Eigen::Matrix3d inc = covariant_inc(sg, pg);
          acc += -2.0 * w * (inc.array() * u.matrix(elem, x).array()).sum();
        }
      });

  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample sm[2], const PointGeometry pg[2], double w) {
        for (int side = 0; side < 2; ++side) {
          const int elem = fc.elem[side];
          const FacetFrame& f = fr[side];
          const SymTensorSample sg =
              sigma.eval(elem, ref_coords(maps[elem], x), x);
          double T[3][3][3];
          cov_deriv(sg, pg[side], T);
          if (two_d) {
            // [curl(sigma)(tau) + nabla_tau sigma_nutau] u
            const double curl_t = contract_vec(T, f.tau2d, f.nu, f.tau2d) -
                                  contract_vec(T, f.nu, f.tau2d, f.tau2d);
            const double dt = dtau_sigma_nutau(sm[side], sg, f);
            acc += 2.0 * w * (curl_t + dt) * u.scalar(elem, x);
          } else {
            const Eigen::Matrix3d U = u.matrix(elem, x);
            const Eigen::Matrix3d C = covariant_curl(sg, pg[side]);
            const Eigen::Matrix3d W1 = curl_facet_term(C, pg[side], f);
            const double pair1 = (W1.array() * U.array()).sum();
            const Eigen::Matrix2d II = second_fundamental_form(pg[side], f);
            const double snn = f.nu.dot(sg.val * f.nu);
            const Eigen::Matrix2d sigF = facet_restrict(sg.val, f);
            const Eigen::Matrix2d W23 =
                snn * trace_reversed(II, f) +
                trace_reversed(nabla_contraction(T, II, sigF, f), f);
            const double pair23 =
                facet_inner(f, W23, facet_restrict(U, f));
            acc += 2.0 * w * (pair1 - pair23);
          }
        }
      });

  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        double utt;
        if (two_d)
          utt = u.scalar(s0.elem, bc.x);
        else
          utt = bc.tau.dot(u.matrix(s0.elem, bc.x) * bc.tau);
        double jump = 0;
        for (const BoneSide& sd : bc.sides) {
          const Eigen::Matrix3d sg =
              sigma.eval(sd.elem, ref_coords(maps[sd.elem], bc.x), bc.x).val;
          jump += sd.nu.dot(sg * sd.mu);
        }
        acc += 2.0 * edge_sign * w * jump * utt;
      });

  return acc;
}

}  // namespace detail

double b_form(const Mesh& mesh, const MetricEval& g, const MetricEval& sigma,
              const TestField& u, int k, const QuadConfig& qc) {
  return detail::b_form_impl(mesh, g, sigma, u, k, qc, 1.0);
}

double distributional_inc(const Mesh& mesh, const MetricEval& g,
                          const MetricEval& sigma, const TestField& u, int k,
                          const QuadConfig& qc) {
  const auto maps = all_maps(mesh);
  const bool two_d = mesh.dim == 2;
  double acc = 0;

  auto phi = [&](int elem, const Eigen::Vector3d& x,
                 const PointGeometry& pg) {
    return two_d ? amap_2d(u.scalar(elem, x), pg)
                 : amap_3d(u.matrix(elem, x), pg);
  };

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, u.degree),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const SymTensorSample sg =
            sigma.eval(elem, ref_coords(maps[elem], x), x);
        acc += w * inner4(pg, big_inc(sg, pg), phi(elem, x, pg));
      });

  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample*, const PointGeometry pg[2], double w) {
        for (int side = 0; side < 2; ++side) {
          const int elem = fc.elem[side];
          const FacetFrame& f = fr[side];
          const SymTensorSample sg =
              sigma.eval(elem, ref_coords(maps[elem], x), x);
          double T[3][3][3];
          cov_deriv(sg, pg[side], T);
          const Eigen::Matrix2d II = second_fundamental_form(pg[side], f);
          const double snn = f.nu.dot(sg.val * f.nu);
          const Eigen::Matrix2d sigF = facet_restrict(sg.val, f);
          // Unreduced bracket: sigma_nn II + (nabla s)_{FnF} +
          // nabla(nu . s) - (nabla s)_{nFF}.
          const Eigen::Matrix2d bracket =
              snn * II + nabla_FnF(T, f) +
              nabla_contraction(T, II, sigF, f) - nabla_nFF(T, f);
          const Eigen::Matrix2d phiblock =
              facet_block(phi(elem, x, pg[side]), f);
          acc -= w * facet_inner(f, bracket, phiblock);
        }
      });

  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const BoneContext& bc, double w) {
        for (const BoneSide& sd : bc.sides) {
          const Eigen::Matrix3d sg =
              sigma.eval(sd.elem, ref_coords(maps[sd.elem], bc.x), bc.x).val;
          const Tensor4 A = phi(sd.elem, bc.x, sd.pg);
          acc -= w * sd.nu.dot(sg * sd.mu) *
                 contract4(A, sd.mu, sd.nu, sd.nu, sd.mu);
        }
      });

  return acc;
}

double distributional_inc_euclidean(const Mesh& mesh, const MetricEval& sigma,
                                    const TestField& u, int k,
                                    const QuadConfig& qc) {
  const EuclideanMetric g(mesh.dim);
  const auto maps = all_maps(mesh);
  const bool two_d = mesh.dim == 2;
  double acc = 0;

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, u.degree),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const SymTensorSample sg =
            sigma.eval(elem, ref_coords(maps[elem], x), x);
        if (two_d)
          acc += w * inc_2d(sg, pg) * u.scalar(elem, x);
        else
          acc += w * (covariant_inc(sg, pg).array() *
                      u.matrix(elem, x).array())
                         .sum();
      });

  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample sm[2], const PointGeometry pg[2], double w) {
        for (int side = 0; side < 2; ++side) {
          const int elem = fc.elem[side];
          const FacetFrame& f = fr[side];
          const SymTensorSample sg =
              sigma.eval(elem, ref_coords(maps[elem], x), x);
          double T[3][3][3];
          cov_deriv(sg, pg[side], T);
          if (two_d) {
            const double curl_t = contract_vec(T, f.tau2d, f.nu, f.tau2d) -
                                  contract_vec(T, f.nu, f.tau2d, f.tau2d);
            const double dt = dtau_sigma_nutau(sm[side], sg, f);
            acc -= w * (curl_t + dt) * u.scalar(elem, x);
          } else {
            const Eigen::Matrix3d U = u.matrix(elem, x);
            const Eigen::Matrix3d C = covariant_curl(sg, pg[side]);
            const Eigen::Matrix3d W1 = curl_facet_term(C, pg[side], f);
            const Eigen::Matrix2d gradF = nabla_FnF(T, f);
            const double p1 = (W1.array() * U.array()).sum();
            const double p2 = facet_inner(f, trace_reversed(gradF, f),
                                          facet_restrict(U, f));
            acc -= w * (p1 - p2);
          }
        }
      });

  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, u.degree),
      [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        double utt;
        if (two_d)
          utt = u.scalar(s0.elem, bc.x);
        else
          utt = bc.tau.dot(u.matrix(s0.elem, bc.x) * bc.tau);
        double jump = 0;
        for (const BoneSide& sd : bc.sides) {
          const Eigen::Matrix3d sg =
              sigma.eval(sd.elem, ref_coords(maps[sd.elem], bc.x), bc.x).val;
          jump += sd.nu.dot(sg * sd.mu);
        }
        acc -= w * jump * utt;
      });

  return acc;
}

// ---------------------------------------------------------------------------
// Probe functionals

namespace {

// One parameter node of the probes: bone sweep under the intermediate
// metric. which selects F1 (deficit term), F2 (jump term) or F3 (sum).
double probe_at_t(int which, const Mesh& mesh, const MetricEval& gt,
                  const MetricEval& sigma, const TestField& u, int k,
                  const QuadConfig& qc) {
  if (mesh.dim != 3)
    throw std::invalid_argument("probes require dim 3");
  const auto maps = all_maps(mesh);
  double acc = 0;
  for_each_interior_bone_point(
      mesh, gt, qc.facet_exactness(k, u.degree),
      [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        const Eigen::Matrix3d sg =
            sigma.eval(s0.elem, ref_coords(maps[s0.elem], bc.x), bc.x).val;
        const double stt = bc.tau.dot(sg * bc.tau);
        if (which == 1 || which == 3) {
          const double utt = bc.tau.dot(u.matrix(s0.elem, bc.x) * bc.tau);
          acc += 0.5 * w * stt * bc.theta * utt;
        }
        if (which == 2 || which == 3) {
          double jump = 0;
          for (const BoneSide& sd : bc.sides)
            jump += sd.nu.dot(u.matrix(sd.elem, bc.x) * sd.mu);
          acc -= 0.5 * w * stt * jump;
        }
      });
  return acc;
}

double probe(int which, const Mesh& mesh, const MetricEval& g0,
             const MetricEval& g1, const TestField& u, int k,
             const TQuadrature& tq, const QuadConfig& qc) {
  const CombinedMetric sigma(1.0, g1, -1.0, g0);
  double acc = 0;
  for (size_t m = 0; m < tq.nodes.size(); ++m) {
    const double t = tq.nodes[m];
    const CombinedMetric gt(1.0 - t, g0, t, g1);
    acc += tq.weights[m] * probe_at_t(which, mesh, gt, sigma, u, k, qc);
  }
  return acc;
}

}  // namespace

double probe_F1(const Mesh& mesh, const MetricEval& g0, const MetricEval& g1,
                const TestField& u, int k, const TQuadrature& tq,
                const QuadConfig& qc) {
  return probe(1, mesh, g0, g1, u, k, tq, qc);
}

double probe_F2(const Mesh& mesh, const MetricEval& g0, const MetricEval& g1,
                const TestField& u, int k, const TQuadrature& tq,
                const QuadConfig& qc) {
  return probe(2, mesh, g0, g1, u, k, tq, qc);
}

double probe_F3(const Mesh& mesh, const MetricEval& g0, const MetricEval& g1,
                const TestField& u, int k, const TQuadrature& tq,
                const QuadConfig& qc) {
  return probe(3, mesh, g0, g1, u, k, tq, qc);
}

AssembledFunctional assemble_probe(int which, const Mesh& mesh,
                                   const MetricEval& g0, const MetricEval& g1,
                                   int k, const LagrangeSpace& test_space,
                                   const TQuadrature& tq,
                                   const QuadConfig& qc) {
  if (mesh.dim != 3)
    throw std::invalid_argument("assemble_probe: probes require dim 3");
  if (which < 1 || which > 3)
    throw std::invalid_argument("assemble_probe: which must be 1, 2 or 3");

  const int nd = n_sym_dirs(3);
  AssembledFunctional out;
  out.dim = 3;
  out.n_dirs = nd;
  out.c = Eigen::MatrixXd::Zero(test_space.n_dofs(), nd);
  out.interior.resize(test_space.n_dofs());
  for (int j = 0; j < test_space.n_dofs(); ++j)
    out.interior[j] = !test_space.boundary_dof()[j];

  const auto maps = all_maps(mesh);
  const CombinedMetric sigma(1.0, g1, -1.0, g0);
  const MonomialBasis basis(3, test_space.order());
  Eigen::VectorXd bval(basis.size()), phi(basis.size());
  std::vector<double> kern(nd);

  for (size_t m = 0; m < tq.nodes.size(); ++m) {
    const double t = tq.nodes[m];
    const double wt = tq.weights[m];
    const CombinedMetric gt(1.0 - t, g0, t, g1);
    for_each_interior_bone_point(
        mesh, gt, qc.facet_exactness(k, test_space.order()),
        [&](const BoneContext& bc, double w) {
          const BoneSide& s0 = bc.sides.front();
          const Eigen::Matrix3d sg =
              sigma.eval(s0.elem, ref_coords(maps[s0.elem], bc.x), bc.x).val;
          const double stt = bc.tau.dot(sg * bc.tau);
          for (int d = 0; d < nd; ++d) {
            const Eigen::Matrix3d E = sym_dir(3, d);
            double v = 0;
            if (which == 1 || which == 3)
              v += 0.5 * stt * bc.theta * bc.tau.dot(E * bc.tau);
            if (which == 2 || which == 3) {
              double jump = 0;
              for (const BoneSide& sd : bc.sides)
                jump += sd.nu.dot(E * sd.mu);
              v -= 0.5 * stt * jump;
            }
            kern[d] = v;
          }
          basis.eval(ref_coords(maps[s0.elem], bc.x), bval);
          phi.noalias() =
              test_space.element_dofs()[s0.elem].coeff.transpose() * bval;
          const std::vector<int>& gids =
              test_space.element_dofs()[s0.elem].global;
          for (size_t j = 0; j < gids.size(); ++j) {
            const int gid = gids[j];
            if (!out.interior[gid]) continue;
            for (int d = 0; d < nd; ++d)
              out.c(gid, d) += wt * w * phi(j) * kern[d];
          }
        });
  }
  return out;
}

}  // namespace regge
