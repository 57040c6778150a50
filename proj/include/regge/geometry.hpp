#pragma once

#include <Eigen/Dense>

#include <vector>

#include "regge/mesh.hpp"
#include "regge/poly.hpp"

namespace regge {

// Metric evaluation interface shared by smooth manufactured metrics, Regge
// fields and linear combinations of both (intermediate metrics). Callers
// supply both the element-reference and the global point so implementations
// never need to invert maps.
class MetricEval {
 public:
  virtual ~MetricEval() = default;
  virtual int dim() const = 0;
  virtual SymTensorSample eval(int elem, const Eigen::Vector3d& xref,
                               const Eigen::Vector3d& xglob) const = 0;
};

// c0*A + c1*B, used for paths g + t(g_h - g) and for g +- eps*sigma.
class CombinedMetric : public MetricEval {
 public:
  CombinedMetric(double c0, const MetricEval& a, double c1, const MetricEval& b)
      : c0_(c0), a_(a), c1_(c1), b_(b) {}
  int dim() const override { return a_.dim(); }
  SymTensorSample eval(int elem, const Eigen::Vector3d& xref,
                       const Eigen::Vector3d& xglob) const override;

 private:
  double c0_;
  const MetricEval& a_;
  double c1_;
  const MetricEval& b_;
};

class EuclideanMetric : public MetricEval {
 public:
  explicit EuclideanMetric(int d) : dim_(d) {}
  int dim() const override { return dim_; }
  SymTensorSample eval(int, const Eigen::Vector3d&,
                       const Eigen::Vector3d&) const override;

 private:
  int dim_;
};

// All pointwise curvature data derived from one metric sample. The metric is
// padded with the identity outside the active dim block so 3x3 linear
// algebra works uniformly; tensor slots beyond dim stay zero.
struct PointGeometry {
  int dim = 3;
  Eigen::Matrix3d g, g_inv;
  double det = 1.0, sqrt_det = 1.0;
  double dg[3][3][3] = {};     // dg[p][i][j]
  double G1[3][3][3] = {};     // G1[i][j][k] = Gamma_{ijk}, lowered last index
  double G2[3][3][3] = {};     // G2[l][i][j] = Gamma^l_{ij}
  double dG2[3][3][3][3] = {}; // dG2[p][l][i][j] = d_p Gamma^l_{ij}
  double R[3][3][3][3] = {};   // covariant Riemann tensor R_{ijkl}
};

PointGeometry point_geometry(const SymTensorSample& s);

// Curvature contractions. ricci/einstein return covariant components; the
// curvature operator is contravariant, Q^{ij} = -1/4 eps^{ikl} eps^{jmn}
// R_{klmn} with the densitized permutation symbol.
Eigen::Matrix3d ricci(const PointGeometry& pg);
double scalar_curvature(const PointGeometry& pg);
double gauss_curvature_2d(const PointGeometry& pg);
Eigen::Matrix3d einstein(const PointGeometry& pg);
Eigen::Matrix3d curvature_operator_3d(const PointGeometry& pg);

// Plain 4-index tensor in Cartesian component storage.
struct Tensor4 {
  double c[3][3][3][3] = {};
};

Tensor4 riemann_cov(const PointGeometry& pg);
// Kulkarni-Nomizu product of two covariant symmetric 2-tensors.
Tensor4 kulkarni_nomizu(const Eigen::Matrix3d& h, const Eigen::Matrix3d& k);
// Full metric pairing of two covariant 4-tensors (four raises).
double inner4(const PointGeometry& pg, const Tensor4& a, const Tensor4& b);

// The metric-dependent bijection between test tensors U and 4-tensors with
// Riemann symmetries; covariant components in and out. In 2D the test datum
// is a scalar.
Tensor4 amap_3d(const Eigen::Matrix3d& U, const PointGeometry& pg);
Tensor4 amap_2d(double v, const PointGeometry& pg);
Eigen::Matrix3d amap_inv_3d(const Tensor4& A, const PointGeometry& pg);
double amap_inv_2d(const Tensor4& A, const PointGeometry& pg);
// Largest violation of the Riemann symmetries (antisymmetry in both pairs,
// pair exchange), relative to the largest entry.
double riemann_symmetry_defect(const Tensor4& A);

// g-unit normal from a Euclidean unit normal: g_inv*nhat normalized in g.
Eigen::Vector3d g_normal(const Eigen::Matrix3d& g_inv,
                         const Eigen::Vector3d& nhat);
// Directional derivative of the g-normal field along w (nhat fixed).
Eigen::Vector3d g_normal_derivative(const SymTensorSample& s,
                                    const Eigen::Vector3d& nhat,
                                    const Eigen::Vector3d& w);
// Directional derivative of t/sqrt(t' g t) along w for fixed Euclidean t.
Eigen::Vector3d g_unit_derivative(const SymTensorSample& s,
                                  const Eigen::Vector3d& tvec,
                                  const Eigen::Vector3d& w);

// Frame data on one facet at one point, seen from one element. Tangents are
// the canonical edge vectors of the sorted facet vertices and are shared by
// both sides; everything metric lives in that basis. In 2D the facet is an
// edge, gF is 1x1 (padded), and tau2d is the g-unit tangent chosen so the
// pair (tau, nu) is right-handed.
struct FacetFrame {
  int facet = -1, elem = -1, dim = 3;
  Eigen::Vector3d t[2];
  Eigen::Vector3d nhat, nu;
  Eigen::Matrix2d gF = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d gF_inv = Eigen::Matrix2d::Identity();
  double sqrt_detF = 1.0;
  Eigen::Vector3d tau2d = Eigen::Vector3d::Zero();
};

FacetFrame facet_frame(const Mesh& mesh, int facet, int elem,
                       const SymTensorSample& g);

// Second fundamental form (inward normal convention) in the frame's shared
// tangent basis: II_ab = t_a^i t_b^j nu^m Gamma_{ijm}.
Eigen::Matrix2d second_fundamental_form(const PointGeometry& pg,
                                        const FacetFrame& fr);

// Trace-reversed form II - tr(II) gF, traces taken with gF.
Eigen::Matrix2d trace_reversed(const Eigen::Matrix2d& II,
                               const FacetFrame& fr);

// Everything needed at one point of a bone (codimension-2 entity): the angle
// deficit and, per (element, facet) incidence around the bone, the inward
// facet normal and the conormal pointing from the bone into the facet.
struct BoneSide {
  int elem = -1, facet = -1;
  Eigen::Vector3d nu, mu;
  SymTensorSample g;
  PointGeometry pg;
};

struct BoneContext {
  int bone = -1;
  Eigen::Vector3d x;
  double theta = 0.0;
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();  // g-unit bone tangent (3D)
  double line_form = 1.0;  // sqrt(t' g t) with t the full edge vector (3D)
  std::vector<BoneSide> sides;  // ring order: (in,out) facet per element
};

// s is the arc parameter on the bone edge in 3D (from the lower sorted
// vertex); ignored in 2D where the bone is a point.
BoneContext bone_context(const Mesh& mesh, int bone, double s,
                         const MetricEval& metric);

double angle_deficit(const Mesh& mesh, int bone, double s,
                     const MetricEval& metric);

}  // namespace regge
