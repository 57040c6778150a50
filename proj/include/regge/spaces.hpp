#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <vector>

#include "regge/geometry.hpp"
#include "regge/mesh.hpp"
#include "regge/poly.hpp"

namespace regge {

// Per-element view of a finite element space: global dof ids plus the
// expansion matrix C whose column j holds the monomial coefficients of the
// basis function dual to local dof j. For vector/matrix valued spaces rows
// are grouped per packed component, c*M + m with M = dim P^k.
struct ElementDofs {
  std::vector<int> global;
  Eigen::MatrixXd coeff;
};

// Regge elements of order k >= 0: piecewise P^k symmetric 2-tensors with
// tangential-tangential continuity. Dofs are edge tt-moments (k+1 per edge,
// Legendre weights in the sorted-vertex arc parameter), face moments in 3D
// (3 dim P^{k-1} per facet), and interior moments. All functionals are built
// from global vertex data only, so the two sides of a shared entity agree on
// them by construction.
class ReggeSpace {
 public:
  ReggeSpace(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int n_dofs() const { return n_dofs_; }
  const std::vector<bool>& boundary_dof() const { return boundary_; }
  const std::vector<ElementDofs>& element_dofs() const { return elem_dofs_; }

  std::vector<PolySymTensor> expand(const Eigen::VectorXd& u) const;
  // Canonical interpolation: evaluate every dof functional on a smooth field.
  Eigen::VectorXd interpolate(
      const std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>& g) const;
  // Largest tt-trace mismatch across interior facets, sampled.
  double tt_jump(const Eigen::VectorXd& u, int samples_per_facet = 4) const;

 private:
  const Mesh* mesh_;
  int order_;
  int n_dofs_ = 0;
  std::vector<bool> boundary_;
  std::vector<ElementDofs> elem_dofs_;
};

// Regge metric field: per-element symmetric matrix polynomials.
struct MetricField {
  const Mesh* mesh = nullptr;
  int order = 0;
  std::vector<PolySymTensor> elem;
};

MetricField make_field(const ReggeSpace& space, const Eigen::VectorXd& u);

// MetricEval adapter over a MetricField.
class FieldMetric : public MetricEval {
 public:
  explicit FieldMetric(const MetricField& f);
  int dim() const override { return f_->mesh->dim; }
  SymTensorSample eval(int elem, const Eigen::Vector3d& xref,
                       const Eigen::Vector3d& xglob) const override;

 private:
  const MetricField* f_;
  std::vector<AffineMap> maps_;
};

// Continuous nodal Lagrange elements of order m >= 1 on the same meshes.
class LagrangeSpace {
 public:
  LagrangeSpace(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int n_dofs() const { return n_dofs_; }
  const std::vector<bool>& boundary_dof() const { return boundary_; }
  const std::vector<ElementDofs>& element_dofs() const { return elem_dofs_; }
  const std::vector<Eigen::Vector3d>& nodes() const { return nodes_; }

  std::vector<PolyScalar> expand(const Eigen::VectorXd& u) const;
  Eigen::VectorXd interpolate(
      const std::function<double(const Eigen::Vector3d&)>& f) const;

 private:
  const Mesh* mesh_;
  int order_;
  int n_dofs_ = 0;
  std::vector<bool> boundary_;
  std::vector<Eigen::Vector3d> nodes_;
  std::vector<ElementDofs> elem_dofs_;
};

// Hellan-Herrmann-Johnson elements of order r >= 0: piecewise P^r symmetric
// tensors with normal-normal continuity. Facet dofs are nn-moments against
// P^r on the facet; interior dofs complete them through an orthonormal basis
// of the facet-moment null space (deterministic SVD construction).
class HHJSpace {
 public:
  HHJSpace(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int n_dofs() const { return n_dofs_; }
  const std::vector<bool>& boundary_dof() const { return boundary_; }
  const std::vector<ElementDofs>& element_dofs() const { return elem_dofs_; }

  std::vector<PolySymTensor> expand(const Eigen::VectorXd& u) const;
  double nn_jump(const Eigen::VectorXd& u, int samples_per_facet = 4) const;

 private:
  const Mesh* mesh_;
  int order_;
  int n_dofs_ = 0;
  std::vector<bool> boundary_;
  std::vector<ElementDofs> elem_dofs_;
};

// One dof value per line, enough to diff runs and feed plots.
void write_coeffs_csv(std::ostream& out, const Eigen::VectorXd& u);

}  // namespace regge
