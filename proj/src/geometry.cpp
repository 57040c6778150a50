#include "regge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace regge {

namespace {

// Permutation symbol on {0,1,2}; zero with a repeated index.
inline double eps3(int i, int j, int k) {
  return 0.5 * (j - i) * (k - j) * (k - i);
}
inline double eps2(int i, int j) { return static_cast<double>(j - i); }

inline Eigen::Matrix3d padded(const SymTensorSample& s) {
  Eigen::Matrix3d g = s.val;
  if (s.dim == 2) g(2, 2) = 1.0;
  return g;
}

}  // namespace

SymTensorSample CombinedMetric::eval(int elem, const Eigen::Vector3d& xref,
                                     const Eigen::Vector3d& xglob) const {
  SymTensorSample sa = a_.eval(elem, xref, xglob);
  SymTensorSample sb = b_.eval(elem, xref, xglob);
  SymTensorSample out;
  out.dim = sa.dim;
  out.val = c0_ * sa.val + c1_ * sb.val;
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        out.d1[p][i][j] = c0_ * sa.d1[p][i][j] + c1_ * sb.d1[p][i][j];
        for (int q = 0; q < 3; ++q)
          out.d2[p][q][i][j] =
              c0_ * sa.d2[p][q][i][j] + c1_ * sb.d2[p][q][i][j];
      }
  return out;
}

SymTensorSample EuclideanMetric::eval(int, const Eigen::Vector3d&,
                                      const Eigen::Vector3d&) const {
  SymTensorSample s;
  s.dim = dim_;
  s.val = Eigen::Matrix3d::Zero();
  for (int i = 0; i < dim_; ++i) s.val(i, i) = 1.0;
  return s;
}

PointGeometry point_geometry(const SymTensorSample& s) {
  PointGeometry pg;
  pg.dim = s.dim;
  pg.g = padded(s);
  pg.det = pg.g.determinant();
  if (!(pg.det > 0.0))
    throw std::runtime_error("point_geometry: metric not positive definite");
  pg.sqrt_det = std::sqrt(pg.det);
  pg.g_inv = pg.g.inverse();

  const int d = pg.dim;
  for (int p = 0; p < d; ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) pg.dg[p][i][j] = s.d1[p][i][j];

  // Gamma_{ijk} = (d_i g_jk + d_j g_ik - d_k g_ij)/2, index k lowered.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        pg.G1[i][j][k] =
            0.5 * (s.d1[i][j][k] + s.d1[j][i][k] - s.d1[k][i][j]);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double a = 0.0;
        for (int k = 0; k < d; ++k) a += pg.g_inv(l, k) * pg.G1[i][j][k];
        pg.G2[l][i][j] = a;
      }

  // d_p Gamma^l_{ij} needs d_p g^{lk} = -(g^-1 dg_p g^-1)^{lk}.
  double dG1[3][3][3][3] = {};
  for (int p = 0; p < d; ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          dG1[p][i][j][k] = 0.5 * (s.d2[p][i][j][k] + s.d2[p][j][i][k] -
                                   s.d2[p][k][i][j]);
  for (int p = 0; p < d; ++p) {
    Eigen::Matrix3d dgp = Eigen::Matrix3d::Zero();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) dgp(i, j) = s.d1[p][i][j];
    const Eigen::Matrix3d dginv = -pg.g_inv * dgp * pg.g_inv;
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double a = 0.0;
          for (int k = 0; k < d; ++k)
            a += dginv(l, k) * pg.G1[i][j][k] + pg.g_inv(l, k) * dG1[p][i][j][k];
          pg.dG2[p][l][i][j] = a;
        }
  }

  // R_{ijkl} = g_{lm}(d_i Gamma^m_{jk} - d_j Gamma^m_{ik}
  //            + Gamma^n_{jk} Gamma^m_{in} - Gamma^n_{ik} Gamma^m_{jn}).
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double a = 0.0;
          for (int m = 0; m < d; ++m) {
            double t = pg.dG2[i][m][j][k] - pg.dG2[j][m][i][k];
            for (int n = 0; n < d; ++n)
              t += pg.G2[n][j][k] * pg.G2[m][i][n] -
                   pg.G2[n][i][k] * pg.G2[m][j][n];
            a += pg.g(l, m) * t;
          }
          pg.R[i][j][k][l] = a;
        }
  return pg;
}

Eigen::Matrix3d ricci(const PointGeometry& pg) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (int j = 0; j < pg.dim; ++j)
    for (int k = 0; k < pg.dim; ++k) {
      double a = 0.0;
      for (int i = 0; i < pg.dim; ++i)
        for (int l = 0; l < pg.dim; ++l)
          a += pg.g_inv(i, l) * pg.R[i][j][k][l];
      out(j, k) = a;
    }
  return out;
}

double scalar_curvature(const PointGeometry& pg) {
  const Eigen::Matrix3d ric = ricci(pg);
  double s = 0.0;
  for (int j = 0; j < pg.dim; ++j)
    for (int k = 0; k < pg.dim; ++k) s += pg.g_inv(j, k) * ric(j, k);
  return s;
}

double gauss_curvature_2d(const PointGeometry& pg) {
  if (pg.dim != 2) throw std::invalid_argument("gauss_curvature_2d: dim != 2");
  return pg.R[0][1][1][0] / pg.det;
}

Eigen::Matrix3d einstein(const PointGeometry& pg) {
  return ricci(pg) - 0.5 * scalar_curvature(pg) * pg.g;
}

Eigen::Matrix3d curvature_operator_3d(const PointGeometry& pg) {
  if (pg.dim != 3)
    throw std::invalid_argument("curvature_operator_3d: dim != 3");
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double a = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
              const double e = eps3(i, k, l) * eps3(j, m, n);
              if (e != 0.0) a += e * pg.R[k][l][m][n];
            }
      q(i, j) = -0.25 * a / pg.det;
    }
  return q;
}

Tensor4 riemann_cov(const PointGeometry& pg) {
  Tensor4 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) t.c[i][j][k][l] = pg.R[i][j][k][l];
  return t;
}

Tensor4 kulkarni_nomizu(const Eigen::Matrix3d& h, const Eigen::Matrix3d& k) {
  Tensor4 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int l = 0; l < 3; ++l)
          t.c[i][j][p][l] = h(i, l) * k(j, p) + h(j, p) * k(i, l) -
                            h(i, p) * k(j, l) - h(j, l) * k(i, p);
  return t;
}

double inner4(const PointGeometry& pg, const Tensor4& a, const Tensor4& b) {
  const int d = pg.dim;
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          // raise the first tensor's indices one contraction at a time
          double aup = 0.0;
          for (int p = 0; p < d; ++p)
            for (int q = 0; q < d; ++q)
              for (int r = 0; r < d; ++r)
                for (int u = 0; u < d; ++u)
                  aup += pg.g_inv(i, p) * pg.g_inv(j, q) * pg.g_inv(k, r) *
                         pg.g_inv(l, u) * a.c[p][q][r][u];
          s += aup * b.c[i][j][k][l];
        }
  return s;
}

Tensor4 amap_3d(const Eigen::Matrix3d& U, const PointGeometry& pg) {
  const Eigen::Matrix3d ush = pg.g_inv * U * pg.g_inv;
  Tensor4 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double a = 0.0;
          for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
              const double e = eps3(i, j, m) * eps3(k, l, n);
              if (e != 0.0) a += e * ush(m, n);
            }
          t.c[i][j][k][l] = -pg.det * a;
        }
  return t;
}

Tensor4 amap_2d(double v, const PointGeometry& pg) {
  Tensor4 t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          t.c[i][j][k][l] = -v * pg.det * eps2(i, j) * eps2(k, l);
  return t;
}

Eigen::Matrix3d amap_inv_3d(const Tensor4& A, const PointGeometry& pg) {
  Eigen::Matrix3d u = Eigen::Matrix3d::Zero();
  for (int al = 0; al < 3; ++al)
    for (int be = 0; be < 3; ++be) {
      double a = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
              const double e = eps3(al, i, j) * eps3(be, k, l);
              if (e == 0.0) continue;
              double aup = 0.0;
              for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                  for (int r = 0; r < 3; ++r)
                    for (int s = 0; s < 3; ++s)
                      aup += pg.g_inv(i, p) * pg.g_inv(j, q) *
                             pg.g_inv(k, r) * pg.g_inv(l, s) * A.c[p][q][r][s];
              a += e * aup;
            }
      u(al, be) = -0.25 * pg.det * a;
    }
  return u;
}

double amap_inv_2d(const Tensor4& A, const PointGeometry& pg) {
  double a = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          a += eps2(i, j) * eps2(k, l) * A.c[i][j][k][l];
  return -0.25 * a / pg.det;
}

double riemann_symmetry_defect(const Tensor4& A) {
  double scale = 0.0, defect = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          scale = std::max(scale, std::abs(A.c[i][j][k][l]));
          defect = std::max(defect,
                            std::abs(A.c[i][j][k][l] + A.c[j][i][k][l]));
          defect = std::max(defect,
                            std::abs(A.c[i][j][k][l] + A.c[i][j][l][k]));
          defect = std::max(defect,
                            std::abs(A.c[i][j][k][l] - A.c[k][l][i][j]));
        }
  return scale > 0.0 ? defect / scale : 0.0;
}

Eigen::Vector3d g_normal(const Eigen::Matrix3d& g_inv,
                         const Eigen::Vector3d& nhat) {
  const Eigen::Vector3d gn = g_inv * nhat;
  const double r = nhat.dot(gn);
  return gn / std::sqrt(r);
}

Eigen::Vector3d g_normal_derivative(const SymTensorSample& s,
                                    const Eigen::Vector3d& nhat,
                                    const Eigen::Vector3d& w) {
  const Eigen::Matrix3d g = padded(s);
  const Eigen::Matrix3d G = g.inverse();
  Eigen::Matrix3d dgw = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p) dgw(i, j) += w[p] * s.d1[p][i][j];
  const Eigen::Matrix3d dG = -G * dgw * G;
  const Eigen::Vector3d gn = G * nhat;
  const double r = nhat.dot(gn);
  const double dr = nhat.dot(dG * nhat);
  return dG * nhat / std::sqrt(r) - gn * (0.5 * dr / (r * std::sqrt(r)));
}

Eigen::Vector3d g_unit_derivative(const SymTensorSample& s,
                                  const Eigen::Vector3d& tvec,
                                  const Eigen::Vector3d& w) {
  const Eigen::Matrix3d g = padded(s);
  Eigen::Matrix3d dgw = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p) dgw(i, j) += w[p] * s.d1[p][i][j];
  const double r = tvec.dot(g * tvec);
  const double dr = tvec.dot(dgw * tvec);
  return -tvec * (0.5 * dr / (r * std::sqrt(r)));
}

FacetFrame facet_frame(const Mesh& mesh, int facet, int elem,
                       const SymTensorSample& g) {
  FacetFrame fr;
  fr.facet = facet;
  fr.elem = elem;
  fr.dim = mesh.dim;
  const Facet& f = mesh.facets[facet];
  const Eigen::Matrix3d g3 = padded(g);
  const Eigen::Matrix3d G = g3.inverse();
  fr.nhat = mesh.facet_inward_normal(facet, elem);
  fr.nu = g_normal(G, fr.nhat);
  fr.t[0] = mesh.vertices[f.v[1]] - mesh.vertices[f.v[0]];
  if (mesh.dim == 3) {
    fr.t[1] = mesh.vertices[f.v[2]] - mesh.vertices[f.v[0]];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) fr.gF(a, b) = fr.t[a].dot(g3 * fr.t[b]);
    const double det = fr.gF.determinant();
    if (!(det > 0.0))
      throw std::runtime_error("facet_frame: degenerate facet metric");
    fr.gF_inv = fr.gF.inverse();
    fr.sqrt_detF = std::sqrt(det);
  } else {
    fr.t[1].setZero();
    const double gtt = fr.t[0].dot(g3 * fr.t[0]);
    fr.gF.setIdentity();
    fr.gF(0, 0) = gtt;
    fr.gF_inv.setIdentity();
    fr.gF_inv(0, 0) = 1.0 / gtt;
    fr.sqrt_detF = std::sqrt(gtt);
    // right-handed pair (tau, nu): rotate nhat by -90 degrees
    const Eigen::Vector3d th(fr.nhat[1], -fr.nhat[0], 0.0);
    fr.tau2d = th / std::sqrt(th.dot(g3 * th));
  }
  return fr;
}

Eigen::Matrix2d second_fundamental_form(const PointGeometry& pg,
                                        const FacetFrame& fr) {
  Eigen::Matrix2d II = Eigen::Matrix2d::Zero();
  const int nt = pg.dim - 1;
  for (int a = 0; a < nt; ++a)
    for (int b = 0; b < nt; ++b) {
      double s = 0.0;
      for (int i = 0; i < pg.dim; ++i)
        for (int j = 0; j < pg.dim; ++j)
          for (int k = 0; k < pg.dim; ++k)
            s += fr.t[a][i] * fr.t[b][j] * fr.nu[k] * pg.G1[i][j][k];
      II(a, b) = s;
    }
  return II;
}

Eigen::Matrix2d trace_reversed(const Eigen::Matrix2d& II,
                               const FacetFrame& fr) {
  if (fr.dim == 2) return Eigen::Matrix2d::Zero();  // 1x1 trace reversal
  const double H = (fr.gF_inv * II).trace();
  return II - H * fr.gF;
}

namespace {

Eigen::Vector3d conormal_into_facet(const Mesh& mesh, int facet,
                                    const Eigen::Vector3d& x,
                                    const Eigen::Vector3d& tvec,
                                    const Eigen::Matrix3d& g3) {
  Eigen::Vector3d w = mesh.facet_centroid(facet) - x;
  if (mesh.dim == 3) {
    const double c = w.dot(g3 * tvec) / tvec.dot(g3 * tvec);
    w -= c * tvec;
  }
  return w / std::sqrt(w.dot(g3 * w));
}

}  // namespace

BoneContext bone_context(const Mesh& mesh, int bone, double s,
                         const MetricEval& metric) {
  const Bone& bn = mesh.bones[bone];
  const BoneRing& ring = mesh.bone_rings[bone];
  if (!ring.closed)
    throw std::invalid_argument("bone_context: bone is not interior");

  BoneContext ctx;
  ctx.bone = bone;
  Eigen::Vector3d tvec = Eigen::Vector3d::Zero();
  if (mesh.dim == 3) {
    const Eigen::Vector3d pa = mesh.vertices[bn.v[0]];
    const Eigen::Vector3d pb = mesh.vertices[bn.v[1]];
    tvec = pb - pa;
    ctx.x = pa + s * tvec;
  } else {
    ctx.x = mesh.vertices[bn.v[0]];
  }

  double angle_sum = 0.0;
  for (const BoneRing::Entry& en : ring.entries) {
    const AffineMap map = reference_map(mesh, en.elem);
    const Eigen::Vector3d xref = map.J_inv * (ctx.x - map.origin);
    const SymTensorSample sample = metric.eval(en.elem, xref, ctx.x);
    const Eigen::Matrix3d g3 = sample.dim == 2
                                   ? (Eigen::Matrix3d() << sample.val(0, 0),
                                      sample.val(0, 1), 0, sample.val(1, 0),
                                      sample.val(1, 1), 0, 0, 0, 1)
                                         .finished()
                                   : sample.val;

    BoneSide in_side, out_side;
    in_side.elem = out_side.elem = en.elem;
    in_side.facet = en.facet_in;
    out_side.facet = en.facet_out;
    in_side.g = out_side.g = sample;
    in_side.pg = point_geometry(sample);
    out_side.pg = in_side.pg;
    const Eigen::Matrix3d G = in_side.pg.g_inv;
    in_side.nu = g_normal(G, mesh.facet_inward_normal(en.facet_in, en.elem));
    out_side.nu = g_normal(G, mesh.facet_inward_normal(en.facet_out, en.elem));
    in_side.mu = conormal_into_facet(mesh, en.facet_in, ctx.x, tvec, g3);
    out_side.mu = conormal_into_facet(mesh, en.facet_out, ctx.x, tvec, g3);

    const double c =
        std::clamp(in_side.mu.dot(g3 * out_side.mu), -1.0, 1.0);
    angle_sum += std::acos(c);

    if (ctx.sides.empty() && mesh.dim == 3) {
      ctx.line_form = std::sqrt(tvec.dot(g3 * tvec));
      ctx.tau = tvec / ctx.line_form;
    }
    ctx.sides.push_back(in_side);
    ctx.sides.push_back(out_side);
  }
  ctx.theta = 2.0 * M_PI - angle_sum;
  return ctx;
}

double angle_deficit(const Mesh& mesh, int bone, double s,
                     const MetricEval& metric) {
  return bone_context(mesh, bone, s, metric).theta;
}

}  // namespace regge
