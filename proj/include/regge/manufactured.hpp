#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

#include "regge/geometry.hpp"
#include "regge/mesh.hpp"
#include "regge/spaces.hpp"

namespace regge {

// Smooth exact metrics with analytic derivatives, plus optional closed-form
// curvature for error studies. exact_q returns contravariant components.
struct SmoothMetric {
  int dim = 3;
  std::function<SymTensorSample(const Eigen::Vector3d&)> sample;
  std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> exact_q;  // 3D
  std::function<double(const Eigen::Vector3d&)> exact_gauss;       // 2D
};

class SmoothMetricEval : public MetricEval {
 public:
  explicit SmoothMetricEval(const SmoothMetric& m) : m_(&m) {}
  int dim() const override { return m_->dim; }
  SymTensorSample eval(int, const Eigen::Vector3d&,
                       const Eigen::Vector3d& xglob) const override {
    return m_->sample(xglob);
  }

 private:
  const SmoothMetric* m_;
};

// Scalar function together with derivatives through third order; d3 must be
// symmetric in its index arguments.
struct ScalarJet3 {
  std::function<double(const Eigen::Vector3d&)> f;
  std::function<Eigen::Vector3d(const Eigen::Vector3d&)> grad;
  std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> hess;
  std::function<double(const Eigen::Vector3d&, int, int, int)> d3;
};

// Metric induced by the graph embedding x -> (x, f(x)): g = I + grad f
// tensor grad f. Third derivatives of f feed the second metric derivatives.
// In 2D exact_gauss is filled from K = det(Hess f) / (1 + |grad f|^2)^2.
SmoothMetric graph_metric(const ScalarJet3& f, int dim);

// The benchmark instance on (-1,1)^3: f = (x^2+y^2+z^2)/2 - (x^4+y^4+z^4)/12
// with its closed-form diagonal curvature operator.
SmoothMetric benchmark_3d();

// Dimension-reduced analogue, f = (x^2+y^2)/2 - (x^4+y^4)/12.
SmoothMetric benchmark_2d();

// Curvature-free but non-constant metric: pullback of the Euclidean metric
// under a quadratic diffeomorphism, g = (grad Phi)^T grad Phi. Exercises all
// Christoffel terms while every curvature quantity vanishes identically.
SmoothMetric flat_pullback_metric(int dim);

// Fan of triangles around one interior vertex at the origin carrying
// piecewise-constant flat metrics with prescribed apex angles; tt-continuous
// because all spokes have unit metric length. The apex angle deficit is
// 2*pi - sum(angles).
struct ConeInstance {
  std::shared_ptr<Mesh> mesh;  // shared so the field can point at it safely
  MetricField field;
  int apex_vertex = 0;
  double deficit = 0.0;
};

ConeInstance cone_metric_2d(const std::vector<double>& apex_angles);

}  // namespace regge
