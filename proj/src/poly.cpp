#include "regge/poly.hpp"

#include <stdexcept>

namespace regge {

int dim_poly(int dim, int degree) {
  if (degree < 0) return 0;
  if (dim == 1) return degree + 1;
  if (dim == 2) return (degree + 1) * (degree + 2) / 2;
  if (dim == 3) return (degree + 1) * (degree + 2) * (degree + 3) / 6;
  throw std::invalid_argument("dim_poly: bad dimension");
}

int n_sym_comps(int dim) { return dim == 2 ? 3 : 6; }

const std::array<std::pair<int, int>, 6>& sym_pairs() {
  static const std::array<std::pair<int, int>, 6> pairs = {
      {{0, 0}, {1, 1}, {0, 1}, {2, 2}, {0, 2}, {1, 2}}};
  return pairs;
}

MonomialBasis::MonomialBasis(int dim_, int degree_) : dim(dim_), degree(degree_) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("MonomialBasis: bad dim");
  for (int d = 0; d <= degree; ++d) {
    if (dim == 1) {
      exps.push_back({d, 0, 0});
    } else if (dim == 2) {
      for (int a = d; a >= 0; --a) exps.push_back({a, d - a, 0});
    } else {
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) exps.push_back({a, b, d - a - b});
    }
  }
}

namespace {

// Power table with the convention x^e = 0 for e < 0, so that the monomial
// derivative a*x^(a-1)... can index it without branching.
struct Powers {
  double p[3][32];
  Powers(const Eigen::Vector3d& x, int kmax) {
    for (int v = 0; v < 3; ++v) {
      p[v][0] = 1.0;
      for (int e = 1; e <= kmax; ++e) p[v][e] = p[v][e - 1] * x[v];
    }
  }
  double at(int v, int e) const { return e < 0 ? 0.0 : p[v][e]; }
};

}  // namespace

void MonomialBasis::eval(const Eigen::Vector3d& xref,
                         Eigen::VectorXd& val) const {
  Powers pw(xref, degree);
  val.resize(size());
  for (int m = 0; m < size(); ++m) {
    const auto& e = exps[m];
    val[m] = pw.at(0, e[0]) * pw.at(1, e[1]) * pw.at(2, e[2]);
  }
}

void MonomialBasis::eval(const Eigen::Vector3d& xref, Eigen::VectorXd& val,
                         Eigen::MatrixXd& grad) const {
  eval(xref, val);
  Powers pw(xref, degree);
  grad.setZero(size(), 3);
  for (int m = 0; m < size(); ++m) {
    const auto& e = exps[m];
    for (int p = 0; p < dim; ++p) {
      int f[3] = {e[0], e[1], e[2]};
      const int ep = f[p];
      if (ep == 0) continue;
      f[p] -= 1;
      grad(m, p) = ep * pw.at(0, f[0]) * pw.at(1, f[1]) * pw.at(2, f[2]);
    }
  }
}

void MonomialBasis::eval(const Eigen::Vector3d& xref, Eigen::VectorXd& val,
                         Eigen::MatrixXd& grad,
                         std::vector<Eigen::Matrix3d>& hess) const {
  eval(xref, val, grad);
  Powers pw(xref, degree);
  hess.assign(size(), Eigen::Matrix3d::Zero());
  for (int m = 0; m < size(); ++m) {
    const auto& e = exps[m];
    for (int p = 0; p < dim; ++p)
      for (int q = p; q < dim; ++q) {
        int f[3] = {e[0], e[1], e[2]};
        double c = f[p];
        f[p] -= 1;
        c *= f[q];
        f[q] -= 1;
        if (c == 0.0) continue;
        const double v =
            c * pw.at(0, f[0]) * pw.at(1, f[1]) * pw.at(2, f[2]);
        hess[m](p, q) = v;
        hess[m](q, p) = v;
      }
  }
}

double PolyScalar::value(const Eigen::Vector3d& xref) const {
  MonomialBasis basis(dim, degree);
  Eigen::VectorXd v;
  basis.eval(xref, v);
  return v.dot(coeff);
}

void PolyScalar::eval(const Eigen::Vector3d& xref, const AffineMap& map,
                      double& val, Eigen::Vector3d& grad,
                      Eigen::Matrix3d& hess) const {
  MonomialBasis basis(dim, degree);
  Eigen::VectorXd v;
  Eigen::MatrixXd g;
  std::vector<Eigen::Matrix3d> h;
  basis.eval(xref, v, g, h);
  val = v.dot(coeff);
  Eigen::Vector3d gr = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hr = Eigen::Matrix3d::Zero();
  for (int m = 0; m < basis.size(); ++m) {
    gr += coeff[m] * g.row(m).transpose();
    hr += coeff[m] * h[m];
  }
  const Eigen::Matrix3d JinvT = map.J_inv.transpose();
  grad = JinvT * gr;
  hess = JinvT * hr * map.J_inv;
}

Eigen::Matrix3d PolySymTensor::value(const Eigen::Vector3d& xref) const {
  MonomialBasis basis(dim, degree);
  Eigen::VectorXd v;
  basis.eval(xref, v);
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (int c = 0; c < n_sym_comps(dim); ++c) {
    const auto [i, j] = sym_pairs()[c];
    const double s = v.dot(coeff.col(c));
    out(i, j) = s;
    out(j, i) = s;
  }
  return out;
}

SymTensorSample PolySymTensor::sample(const Eigen::Vector3d& xref,
                                      const AffineMap& map) const {
  MonomialBasis basis(dim, degree);
  Eigen::VectorXd v;
  Eigen::MatrixXd g;
  std::vector<Eigen::Matrix3d> h;
  basis.eval(xref, v, g, h);
  const Eigen::Matrix3d JinvT = map.J_inv.transpose();

  SymTensorSample s;
  s.dim = dim;
  for (int c = 0; c < n_sym_comps(dim); ++c) {
    const auto [i, j] = sym_pairs()[c];
    const double val = v.dot(coeff.col(c));
    Eigen::Vector3d gr = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hr = Eigen::Matrix3d::Zero();
    for (int m = 0; m < basis.size(); ++m) {
      gr += coeff(m, c) * g.row(m).transpose();
      hr += coeff(m, c) * h[m];
    }
    const Eigen::Vector3d gg = JinvT * gr;
    const Eigen::Matrix3d hg = JinvT * hr * map.J_inv;
    s.val(i, j) = val;
    s.val(j, i) = val;
    for (int p = 0; p < dim; ++p) {
      s.d1[p][i][j] = gg[p];
      s.d1[p][j][i] = gg[p];
      for (int q = 0; q < dim; ++q) {
        s.d2[p][q][i][j] = hg(p, q);
        s.d2[p][q][j][i] = hg(p, q);
      }
    }
  }
  return s;
}

}  // namespace regge
