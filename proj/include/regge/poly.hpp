#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "regge/mesh.hpp"

namespace regge {

// A symmetric 2-tensor sampled at one point together with its first and
// second partial derivatives in global Cartesian coordinates. Unused slots
// (indices >= dim) are zero; metric consumers pad val with the identity
// themselves where needed.
struct SymTensorSample {
  int dim = 3;
  Eigen::Matrix3d val = Eigen::Matrix3d::Zero();
  double d1[3][3][3] = {};     // d1[p][i][j] = d_p val_ij
  double d2[3][3][3][3] = {};  // d2[p][q][i][j] = d_p d_q val_ij
};

// Monomials x^a y^b z^c of total degree <= k in `dim` variables, ordered by
// total degree and, within a degree, by descending exponent of x then y.
// The ordering is part of the element matrices' layout, so keep it frozen.
struct MonomialBasis {
  int dim = 0;
  int degree = 0;
  std::vector<std::array<int, 3>> exps;

  MonomialBasis() = default;
  MonomialBasis(int dim_, int degree_);

  int size() const { return static_cast<int>(exps.size()); }

  // Values (and optionally gradients / Hessians) of every monomial at a
  // point given in reference coordinates of an element; derivatives are
  // returned in reference coordinates too, callers chain through the map.
  void eval(const Eigen::Vector3d& xref, Eigen::VectorXd& val) const;
  void eval(const Eigen::Vector3d& xref, Eigen::VectorXd& val,
            Eigen::MatrixXd& grad) const;  // grad(m, p) = d_p B_m
  void eval(const Eigen::Vector3d& xref, Eigen::VectorXd& val,
            Eigen::MatrixXd& grad,
            std::vector<Eigen::Matrix3d>& hess) const;
};

int dim_poly(int dim, int degree);     // dim P^degree, 0 for degree < 0
int n_sym_comps(int dim);              // 3 in 2D, 6 in 3D

// Index pairs of the packed symmetric component order, 00, 11, 01, 22, 02,
// 12. 2D uses the first three entries.
const std::array<std::pair<int, int>, 6>& sym_pairs();

// Scalar polynomial on one element, stored as monomial coefficients in the
// element's reference coordinates.
struct PolyScalar {
  int dim = 0;
  int degree = 0;
  Eigen::VectorXd coeff;

  PolyScalar() = default;
  PolyScalar(int dim_, int degree_)
      : dim(dim_), degree(degree_),
        coeff(Eigen::VectorXd::Zero(dim_poly(dim_, degree_))) {}

  double value(const Eigen::Vector3d& xref) const;
  // Gradient and Hessian in global coordinates.
  void eval(const Eigen::Vector3d& xref, const AffineMap& map, double& val,
            Eigen::Vector3d& grad, Eigen::Matrix3d& hess) const;
};

// Symmetric-matrix-valued polynomial on one element. Column c of `coeff`
// holds the monomial coefficients of packed component c (see sym_pairs).
struct PolySymTensor {
  int dim = 0;
  int degree = 0;
  Eigen::MatrixXd coeff;

  PolySymTensor() = default;
  PolySymTensor(int dim_, int degree_)
      : dim(dim_), degree(degree_),
        coeff(Eigen::MatrixXd::Zero(dim_poly(dim_, degree_),
                                    n_sym_comps(dim_))) {}

  Eigen::Matrix3d value(const Eigen::Vector3d& xref) const;
  // Value and global-coordinate first/second derivatives.
  SymTensorSample sample(const Eigen::Vector3d& xref,
                         const AffineMap& map) const;
};

}  // namespace regge
