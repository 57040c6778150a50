#pragma once

#include <Eigen/Dense>

#include <vector>

#include "regge/curvature.hpp"
#include "regge/geometry.hpp"
#include "regge/mesh.hpp"

namespace regge {

// Gauss rule on [0,1] for the metric-path parameter.
struct TQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  static TQuadrature gauss(int n);
};

// Pointwise covariant operators on symmetric 2-tensor fields. The sample
// carries the tensor with its first and second derivatives; the point
// geometry carries the metric data of the same point. covariant_curl
// returns mixed components C_i^j, covariant_inc and inc_2d return
// contravariant components (a scalar in 2D).
Eigen::Matrix3d covariant_curl(const SymTensorSample& s,
                               const PointGeometry& pg);
Eigen::Matrix3d covariant_inc(const SymTensorSample& s,
                              const PointGeometry& pg);
double inc_2d(const SymTensorSample& s, const PointGeometry& pg);

// Second covariant derivative, slot order (outer, inner, tensor, tensor),
// covariant components.
Tensor4 second_covariant_derivative(const SymTensorSample& s,
                                    const PointGeometry& pg);

// Linearization forms of the densitized curvature along g(t) = g + t sigma:
// d/dt of the curvature functional equals a_form + b_form. a_form carries
// no derivatives of sigma and vanishes identically in 2D; b_form carries
// first and second derivatives. sigma is passed as a metric-type evaluator
// so its derivatives come in through the sample.
double a_form(const Mesh& mesh, const MetricEval& g, const MetricEval& sigma,
              const TestField& u, int k, const QuadConfig& qc = {});
double b_form(const Mesh& mesh, const MetricEval& g, const MetricEval& sigma,
              const TestField& u, int k, const QuadConfig& qc = {});

// Distributional incompatibility functional, assembled from the generalized
// route: the test field is pushed through the metric isomorphism to a
// 4-tensor and paired with the second covariant derivative of sigma on
// elements, with the unreduced facet bracket on interior facets, and with
// the normal-conormal jumps on bones. Satisfies b_form = -2 * this.
double distributional_inc(const Mesh& mesh, const MetricEval& g,
                          const MetricEval& sigma, const TestField& u, int k,
                          const QuadConfig& qc = {});

// Euclidean specialization with the reduced facet bracket
// Q (curl sigma)^T x n - S_F(grad^F sigma_n); background metric identity.
double distributional_inc_euclidean(const Mesh& mesh, const MetricEval& sigma,
                                    const TestField& u, int k,
                                    const QuadConfig& qc = {});

// Bone-concentrated probe functionals along the path g(t) = g0 + t(g1-g0),
// parameter integral by Gauss quadrature:
//   F1 = 1/2 int_0^1 sum_E int_E sigma_tt Theta(g(t)) U_tt w_E(g(t)) dt
//   F2 = -1/2 int_0^1 sum_E sum_{F > E} int_E sigma_tt [U_nm]^E_F w_E dt
//   F3 = F1 + F2
// with all frames, deficits and measures evaluated from g(t) at each
// parameter node.
double probe_F1(const Mesh& mesh, const MetricEval& g0, const MetricEval& g1,
                const TestField& u, int k, const TQuadrature& tq,
                const QuadConfig& qc = {});
double probe_F2(const Mesh& mesh, const MetricEval& g0, const MetricEval& g1,
                const TestField& u, int k, const TQuadrature& tq,
                const QuadConfig& qc = {});
double probe_F3(const Mesh& mesh, const MetricEval& g0, const MetricEval& g1,
                const TestField& u, int k, const TQuadrature& tq,
                const QuadConfig& qc = {});

// Probe functional against a discrete test basis, one bone sweep per
// parameter node instead of one per basis function. which is 1, 2 or 3.
AssembledFunctional assemble_probe(int which, const Mesh& mesh,
                                   const MetricEval& g0, const MetricEval& g1,
                                   int k, const LagrangeSpace& test_space,
                                   const TQuadrature& tq,
                                   const QuadConfig& qc = {});

namespace detail {
// b_form with a configurable sign on the bone-jump term; the public form
// fixes edge_sign = +1, the sign forced by the frame conventions here
// (inward facet normals, conormals pointing from the bone into the facet).
// The flipped variant exists so the driver can prove the convention is
// load-bearing (a deliberate flip must break the linearization identity).
double b_form_impl(const Mesh& mesh, const MetricEval& g,
                   const MetricEval& sigma, const TestField& u, int k,
                   const QuadConfig& qc, double edge_sign);
}  // namespace detail

}  // namespace regge
