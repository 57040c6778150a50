#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <vector>

#include "regge/geometry.hpp"
#include "regge/manufactured.hpp"
#include "regge/mesh.hpp"
#include "regge/spaces.hpp"

namespace regge {

// Quadrature sizing for the assembly sweeps. Rules are exact for polynomials
// of degree 2k + offset + (test degree); the offsets default to 6 on elements
// and 4 on facets and bones. The integrands are rational in the metric, so
// these are working degrees, not exactness guarantees.
struct QuadConfig {
  int elem_offset = 6;
  int facet_offset = 4;

  int elem_exactness(int k, int test_degree) const {
    return 2 * k + elem_offset + (test_degree > 0 ? test_degree : 0);
  }
  int facet_exactness(int k, int test_degree) const {
    return 2 * k + facet_offset + (test_degree > 0 ? test_degree : 0);
  }
};

// Test function seen through per-element evaluators. Fields built from
// finite element coefficients are only piecewise smooth, so every evaluation
// carries the element id; continuous contracts (tt-trace across facets,
// values on bones) are checked by sampling, not assumed.
struct TestField {
  enum class Kind { Scalar, Matrix };
  Kind kind = Kind::Scalar;
  int degree = 2;  // polynomial degree for quadrature sizing
  std::function<double(int elem, const Eigen::Vector3d& x)> scalar;
  std::function<Eigen::Matrix3d(int elem, const Eigen::Vector3d& x)> matrix;
};

TestField scalar_test_from(const LagrangeSpace& space, const Eigen::VectorXd& u);
TestField matrix_test_from(const ReggeSpace& space, const Eigen::VectorXd& u);
TestField smooth_scalar_test(std::function<double(const Eigen::Vector3d&)> f,
                             int degree = 2);
TestField smooth_matrix_test(
    std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> f, int degree = 2);

// Largest sampled violation of the continuity contracts: value continuity
// for scalar fields, tangential-tangential continuity for matrix fields.
double tt_continuity_defect(const Mesh& mesh, const TestField& u,
                            int samples_per_facet = 4);
// Largest sampled mismatch of the normal-normal trace across interior
// facets, with each side using its own g-normal.
double nn_continuity_defect(const Mesh& mesh, const MetricEval& g,
                            const TestField& u, int samples_per_facet = 4);

// 4-tensor test field with Riemann symmetries, evaluated pointwise with the
// metric data of the requesting side. Used by the generic curvature
// functional; the builders below realize the specializing substitutions.
struct TestField4 {
  int degree = 2;
  std::function<Tensor4(int elem, const Eigen::Vector3d& x,
                        const PointGeometry& pg)>
      eval;
};

// A = map of U through the metric isomorphism (both dims).
TestField4 amap_test(const TestField& u, int dim);
// A = v * (g kn g), scalar-curvature embedding.
TestField4 kn_scalar_test(const TestField& v);
// A = g kn rho, Ricci embedding.
TestField4 kn_test(const TestField& rho);
// A = g kn (rho - 1/2 tr(rho) g), Einstein embedding.
TestField4 kn_trace_reversed_test(const TestField& rho);

// Distributional densitized curvature functionals. `k` is the polynomial
// order of the metric field (used for quadrature sizing only; pass the run
// order for smooth metrics). All functionals skip boundary facets and
// boundary bones, matching the homogeneous test space.
double gauss_functional(const Mesh& mesh, const MetricEval& g, int k,
                        const TestField& v, const QuadConfig& qc = {});
double scalar_functional(const Mesh& mesh, const MetricEval& g, int k,
                         const TestField& v, const QuadConfig& qc = {});
double ricci_functional(const Mesh& mesh, const MetricEval& g, int k,
                        const TestField& rho, const QuadConfig& qc = {});
double einstein_functional(const Mesh& mesh, const MetricEval& g, int k,
                           const TestField& rho, const QuadConfig& qc = {});
double curvature_operator_functional(const Mesh& mesh, const MetricEval& g,
                                     int k, const TestField& u,
                                     const QuadConfig& qc = {});
double riemann_functional(const Mesh& mesh, const MetricEval& g, int k,
                          const TestField4& a, const QuadConfig& qc = {});

// Functional evaluated against a discrete test basis: c(j, d) is the value
// on basis function j times symmetric unit direction d. Scalar functionals
// have one direction; matrix functionals use the six unit directions
// E_00, E_11, E_22, E_01 + E_10, E_02 + E_20, E_12 + E_21 in that order.
// Rows of boundary dofs are zero (homogeneous test space).
struct AssembledFunctional {
  int dim = 3;
  int n_dirs = 1;
  Eigen::MatrixXd c;
  std::vector<bool> interior;

  double norm_sq() const { return c.squaredNorm(); }
};

enum class FunctionalKind {
  Gauss,
  Scalar,
  Ricci,
  Einstein,
  CurvatureOperator,
  Riemann,
};

int n_sym_dirs(int dim);
Eigen::Matrix3d sym_dir(int dim, int d);

AssembledFunctional assemble_against_basis(FunctionalKind kind,
                                           const Mesh& mesh,
                                           const MetricEval& g, int k,
                                           const LagrangeSpace& test_space,
                                           const QuadConfig& qc = {});

// Volume quadrature of the exact curvature pairing against the same basis:
// the comparison target for convergence runs. Gauss and CurvatureOperator
// use the metric's closed-form curvature callbacks when present (falling
// back to pointwise curvature of the exact metric), the other kinds always
// use the pointwise path. Riemann pairs like CurvatureOperator times four.
AssembledFunctional assemble_exact(FunctionalKind kind, const Mesh& mesh,
                                   const SmoothMetric& m, int k,
                                   const LagrangeSpace& test_space,
                                   const QuadConfig& qc = {});

void write_functional_csv(std::ostream& out, const AssembledFunctional& f);

// Assembly walkers shared with the linearization forms. Weights already
// include the metric volume forms: element sweeps carry w = quad weight *
// |J| * sqrt(det g); facet sweeps carry the facet measure times
// sqrt(det g_F) of the first incident side after asserting the two sides
// agree; bone sweeps carry sqrt(t' g t) along the edge in 3D and a unit
// point mass in 2D.
using ElementPointFn =
    std::function<void(int elem, const Eigen::Vector3d& x,
                       const SymTensorSample& s, const PointGeometry& pg,
                       double w)>;
using FacetPointFn = std::function<void(
    const Facet& facet, const Eigen::Vector3d& x, const FacetFrame fr[2],
    const SymTensorSample s[2], const PointGeometry pg[2], double w)>;
using BonePointFn = std::function<void(const BoneContext& bc, double w)>;

void for_each_element_point(const Mesh& mesh, const MetricEval& g,
                            int exactness, const ElementPointFn& fn);
void for_each_interior_facet_point(const Mesh& mesh, const MetricEval& g,
                                   int exactness, const FacetPointFn& fn);
void for_each_interior_bone_point(const Mesh& mesh, const MetricEval& g,
                                  int exactness, const BonePointFn& fn);

// Small contraction helpers used across the functional implementations.
double contract4(const Tensor4& a, const Eigen::Vector3d& x,
                 const Eigen::Vector3d& y, const Eigen::Vector3d& z,
                 const Eigen::Vector3d& w);
// 2x2 block A(t_a, nu, nu, t_b) in the frame's shared tangent basis.
Eigen::Matrix2d facet_block(const Tensor4& a, const FacetFrame& fr);
// Facet inner product of two covariant 2-tensors given in the shared
// tangent basis: tr(gF^-1 X gF^-1 Y).
double facet_inner(const FacetFrame& fr, const Eigen::Matrix2d& x,
                   const Eigen::Matrix2d& y);
// Tangential restriction of a Cartesian symmetric matrix to the frame basis.
Eigen::Matrix2d facet_restrict(const Eigen::Matrix3d& m, const FacetFrame& fr);

}  // namespace regge
