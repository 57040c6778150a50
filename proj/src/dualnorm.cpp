#include "regge/dualnorm.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

#include "regge/poly.hpp"
#include "regge/quadrature.hpp"

namespace regge {

namespace {

using Triplet = Eigen::Triplet<double>;

// Monomial data of one element quadrature point with global derivatives.
struct BasisPoint {
  Eigen::VectorXd val;
  Eigen::MatrixXd grad;                // (m, p) global d_p
  std::vector<Eigen::Matrix3d> hess;   // global Hessians
};

void eval_basis_point(const MonomialBasis& basis, const Eigen::Vector3d& xref,
                      const AffineMap& map, BasisPoint& bp) {
  Eigen::MatrixXd gref;
  std::vector<Eigen::Matrix3d> href;
  basis.eval(xref, bp.val, gref, href);
  const Eigen::Matrix3d JinvT = map.J_inv.transpose();
  bp.grad = gref * map.J_inv;  // row m: gref.row(m) * J_inv = (J_inv^T g)^T
  bp.hess.resize(href.size());
  for (size_t m = 0; m < href.size(); ++m)
    bp.hess[m] = JinvT * href[m] * map.J_inv;
}

// Value of packed symmetric-tensor dof column a at monomial values bval.
Eigen::Matrix3d packed_value(const Eigen::MatrixXd& coeff, int a,
                             const Eigen::VectorXd& bval, int dim) {
  const int M = int(bval.size());
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  const auto& pairs = sym_pairs();
  for (int c = 0; c < n_sym_comps(dim); ++c) {
    const double v = coeff.col(a).segment(c * M, M).dot(bval);
    out(pairs[c].first, pairs[c].second) = v;
    out(pairs[c].second, pairs[c].first) = v;
  }
  return out;
}

struct FacetQuadPoint {
  Eigen::Vector3d x;
  Eigen::Vector3d n_in;  // Euclidean unit normal into the element
  double w = 0.0;        // includes the facet measure
};

// Euclidean quadrature points of one facet of one element, with the inward
// unit normal.
std::vector<FacetQuadPoint> facet_points(const Mesh& mesh, int elem,
                                         int local, int exactness) {
  const Facet& fc = mesh.facets[mesh.elem_facet[elem][local]];
  const Eigen::Vector3d a = mesh.vertices[fc.v[0]];
  std::vector<FacetQuadPoint> out;
  const Eigen::Vector3d vop = mesh.vertices[mesh.elements[elem][local]];
  if (mesh.dim == 3) {
    const Eigen::Vector3d e1 = mesh.vertices[fc.v[1]] - a;
    const Eigen::Vector3d e2 = mesh.vertices[fc.v[2]] - a;
    Eigen::Vector3d n = e1.cross(e2);
    const double jac = n.norm();
    n /= jac;
    if (n.dot(vop - a) < 0) n = -n;
    const QuadRule qr = quad_rule(2, exactness);
    for (int q = 0; q < qr.size(); ++q) {
      const Eigen::Vector3d r = qr.ref_point(q);
      out.push_back({a + r[0] * e1 + r[1] * e2, n, qr.weights[q] * jac});
    }
  } else {
    const Eigen::Vector3d e1 = mesh.vertices[fc.v[1]] - a;
    const double jac = e1.norm();
    Eigen::Vector3d n(e1[1] / jac, -e1[0] / jac, 0.0);
    if (n.dot(vop - a) < 0) n = -n;
    const QuadRule qr = quad_rule(1, exactness);
    for (int q = 0; q < qr.size(); ++q)
      out.push_back({a + qr.ref_point(q)[0] * e1, n, qr.weights[q] * jac});
  }
  return out;
}

}  // namespace

SparseSystem assemble_hhj_biharmonic(const Mesh& mesh, int m) {
  if (m < 1)
    throw std::invalid_argument("assemble_hhj_biharmonic: need m >= 1");
  const LagrangeSpace disp(mesh, m);
  const HHJSpace stress(mesh, m - 1);
  const int ns = stress.n_dofs();

  std::vector<int> disp_keep(disp.n_dofs(), -1);
  std::vector<int> disp_dofs;
  for (int j = 0; j < disp.n_dofs(); ++j)
    if (!disp.boundary_dof()[j]) {
      disp_keep[j] = int(disp_dofs.size());
      disp_dofs.push_back(j);
    }
  const int nd = int(disp_dofs.size());

  const MonomialBasis sbasis(mesh.dim, m - 1);
  const MonomialBasis dbasis(mesh.dim, m);
  const int exact = 2 * m + 2;
  const QuadRule qr = quad_rule(mesh.dim, exact);

  std::vector<Triplet> tm, tb;
  BasisPoint bp;
  Eigen::VectorXd sval(sbasis.size());

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const AffineMap map = reference_map(mesh, e);
    const auto& sd = stress.element_dofs()[e];
    const auto& dd = disp.element_dofs()[e];
    const int nls = int(sd.global.size());
    const int nld = int(dd.global.size());

    Eigen::MatrixXd Mloc = Eigen::MatrixXd::Zero(nls, nls);
    Eigen::MatrixXd Bloc = Eigen::MatrixXd::Zero(nld, nls);

    std::vector<Eigen::Matrix3d> tau(nls);
    for (int q = 0; q < qr.size(); ++q) {
      const Eigen::Vector3d xref = qr.ref_point(q);
      const double w = qr.weights[q] * map.det;
      sbasis.eval(xref, sval);
      for (int a = 0; a < nls; ++a)
        tau[a] = packed_value(sd.coeff, a, sval, mesh.dim);
      for (int a = 0; a < nls; ++a)
        for (int b = a; b < nls; ++b) {
          const double v = w * (tau[a].array() * tau[b].array()).sum();
          Mloc(a, b) += v;
          if (b != a) Mloc(b, a) += v;
        }
      eval_basis_point(dbasis, xref, map, bp);
      for (int j = 0; j < nld; ++j) {
        Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
        for (int mm = 0; mm < dbasis.size(); ++mm)
          H += dd.coeff(mm, j) * bp.hess[mm];
        for (int a = 0; a < nls; ++a)
          Bloc(j, a) += w * (tau[a].array() * H.array()).sum();
      }
    }

    // Facet part: + int tau_nn d_n v with the inward normal, which is the
    // outward-normal HHJ term with its sign absorbed.
    for (int loc = 0; loc < mesh.dim + 1; ++loc) {
      for (const FacetQuadPoint& fq : facet_points(mesh, e, loc, exact)) {
        const Eigen::Vector3d xref = map.J_inv * (fq.x - map.origin);
        sbasis.eval(xref, sval);
        Eigen::MatrixXd gref;
        Eigen::VectorXd dval;
        dbasis.eval(xref, dval, gref);
        const Eigen::MatrixXd gglob = gref * map.J_inv;
        for (int a = 0; a < nls; ++a) {
          const Eigen::Matrix3d t = packed_value(sd.coeff, a, sval, mesh.dim);
          const double tnn = fq.n_in.dot(t * fq.n_in);
          if (tnn == 0.0) continue;
          for (int j = 0; j < nld; ++j) {
            double dn = 0;
            for (int mm = 0; mm < dbasis.size(); ++mm)
              dn += dd.coeff(mm, j) * gglob.row(mm).head(mesh.dim).dot(
                                          fq.n_in.head(mesh.dim));
            Bloc(j, a) += fq.w * tnn * dn;
          }
        }
      }
    }

    for (int a = 0; a < nls; ++a)
      for (int b = 0; b < nls; ++b)
        if (Mloc(a, b) != 0.0)
          tm.emplace_back(sd.global[a], sd.global[b], Mloc(a, b));
    for (int j = 0; j < nld; ++j) {
      const int row = disp_keep[dd.global[j]];
      if (row < 0) continue;
      for (int a = 0; a < nls; ++a)
        if (Bloc(j, a) != 0.0) tb.emplace_back(row, sd.global[a], Bloc(j, a));
    }
  }

  SparseSystem sys;
  sys.mass.resize(ns, ns);
  sys.mass.setFromTriplets(tm.begin(), tm.end());
  sys.pairing.resize(nd, ns);
  sys.pairing.setFromTriplets(tb.begin(), tb.end());
  sys.stress_dofs.resize(ns);
  for (int a = 0; a < ns; ++a) sys.stress_dofs[a] = a;
  sys.disp_dofs = std::move(disp_dofs);
  return sys;
}

namespace {

Eigen::SparseMatrix<double> saddle_matrix(const SparseSystem& sys) {
  const int ns = int(sys.mass.rows());
  const int nd = int(sys.pairing.rows());
  std::vector<Triplet> tr;
  tr.reserve(sys.mass.nonZeros() + 2 * sys.pairing.nonZeros());
  for (int k = 0; k < sys.mass.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.mass, k); it; ++it)
      tr.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int k = 0; k < sys.pairing.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.pairing, k); it;
         ++it) {
      tr.emplace_back(ns + int(it.row()), int(it.col()), -it.value());
      tr.emplace_back(int(it.col()), ns + int(it.row()), -it.value());
    }
  Eigen::SparseMatrix<double> K(ns + nd, ns + nd);
  K.setFromTriplets(tr.begin(), tr.end());
  return K;
}

}  // namespace

Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& a,
                             const Eigen::VectorXd& rhs, int* iterations,
                             bool* converged) {
  const int n = int(a.rows());
  Eigen::VectorXd x;
  int iters = 0;
  bool ok = true;
  if (n < 50000) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("sparse_solve: factorization failed");
    x = lu.solve(rhs);
    x += lu.solve(rhs - a * x);  // one refinement step for stiff systems
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                    Eigen::IncompleteLUT<double>>
        krylov;
    krylov.setMaxIterations(int(10.0 * std::sqrt(double(n))));
    krylov.setTolerance(1e-10);
    krylov.compute(a);
    x = krylov.solve(rhs);
    iters = int(krylov.iterations());
  }
  const double rn = rhs.norm();
  if (rn > 0) ok = (a * x - rhs).norm() <= 1e-10 * rn;
  if (iterations) *iterations = iters;
  if (converged) *converged = ok;
  return x;
}

BiharmonicSolution solve_biharmonic(const SparseSystem& sys, const Mesh& mesh,
                                    int m, const Eigen::VectorXd& f) {
  const LagrangeSpace disp(mesh, m);
  const HHJSpace stress(mesh, m - 1);
  const int ns = int(sys.mass.rows());
  const int nd = int(sys.pairing.rows());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns + nd);
  for (int i = 0; i < nd; ++i) rhs[ns + i] = -f[sys.disp_dofs[i]];

  BiharmonicSolution sol;
  const Eigen::VectorXd x =
      sparse_solve(saddle_matrix(sys), rhs, &sol.iterations, &sol.converged);

  sol.stress = Eigen::VectorXd::Zero(stress.n_dofs());
  for (int a = 0; a < ns; ++a) sol.stress[sys.stress_dofs[a]] = x[a];
  sol.displacement = Eigen::VectorXd::Zero(disp.n_dofs());
  for (int i = 0; i < nd; ++i) sol.displacement[sys.disp_dofs[i]] = x[ns + i];
  return sol;
}

// ---------------------------------------------------------------------------

struct BiharmonicSolver::Impl {
  const Mesh* mesh = nullptr;
  int m = 0;
  int ns = 0, nd = 0;
  int stress_ndofs = 0, disp_ndofs = 0;
  bool direct = true;

  Eigen::SparseMatrix<double> saddle;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

  // Schur path: M sigma = B^T u, (B M^-1 B^T) u = F, preconditioned by the
  // Lagrange stiffness-mass-stiffness sandwich.
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> mass_llt;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> stiff_llt;
  Eigen::SparseMatrix<double> mass_lagr_red;

  // Full-size Gram matrices for the solution norm.
  Eigen::SparseMatrix<double> disp_mass, disp_stiff;
};

BiharmonicSolver::BiharmonicSolver(const Mesh& mesh, int m)
    : impl_(std::make_shared<Impl>()), sys_(assemble_hhj_biharmonic(mesh, m)) {
  Impl& im = *impl_;
  im.mesh = &mesh;
  im.m = m;
  im.ns = int(sys_.mass.rows());
  im.nd = int(sys_.pairing.rows());

  const LagrangeSpace disp(mesh, m);
  im.disp_ndofs = disp.n_dofs();
  im.stress_ndofs = HHJSpace(mesh, m - 1).n_dofs();
  const MonomialBasis dbasis(mesh.dim, m);
  const QuadRule qr = quad_rule(mesh.dim, 2 * m + 2);
  std::vector<Triplet> tmass, tstiff;
  BasisPoint bp;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const AffineMap map = reference_map(mesh, e);
    const auto& dd = disp.element_dofs()[e];
    const int nld = int(dd.global.size());
    Eigen::MatrixXd Ml = Eigen::MatrixXd::Zero(nld, nld);
    Eigen::MatrixXd Kl = Eigen::MatrixXd::Zero(nld, nld);
    for (int q = 0; q < qr.size(); ++q) {
      const double w = qr.weights[q] * map.det;
      eval_basis_point(dbasis, qr.ref_point(q), map, bp);
      const Eigen::VectorXd phi = dd.coeff.transpose() * bp.val;
      const Eigen::MatrixXd gphi = dd.coeff.transpose() * bp.grad;
      Ml += w * phi * phi.transpose();
      Kl += w * gphi * gphi.transpose();
    }
    for (int i = 0; i < nld; ++i)
      for (int j = 0; j < nld; ++j) {
        tmass.emplace_back(dd.global[i], dd.global[j], Ml(i, j));
        tstiff.emplace_back(dd.global[i], dd.global[j], Kl(i, j));
      }
  }
  im.disp_mass.resize(disp.n_dofs(), disp.n_dofs());
  im.disp_mass.setFromTriplets(tmass.begin(), tmass.end());
  im.disp_stiff.resize(disp.n_dofs(), disp.n_dofs());
  im.disp_stiff.setFromTriplets(tstiff.begin(), tstiff.end());

  const int n = im.ns + im.nd;
  im.direct = n < 50000;
  if (im.direct) {
    im.saddle = saddle_matrix(sys_);
    im.lu.compute(im.saddle);
    if (im.lu.info() != Eigen::Success)
      throw std::runtime_error("biharmonic: factorization failed");
  } else {
    im.mass_llt.compute(sys_.mass);
    if (im.mass_llt.info() != Eigen::Success)
      throw std::runtime_error("biharmonic: stress mass not SPD");
    // Reduced Lagrange matrices for the preconditioner.
    std::vector<int> keep(disp.n_dofs(), -1);
    for (int i = 0; i < im.nd; ++i) keep[sys_.disp_dofs[i]] = i;
    std::vector<Triplet> tk, tmr;
    for (int k = 0; k < im.disp_stiff.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(im.disp_stiff, k);
           it; ++it) {
        const int r = keep[it.row()], c = keep[it.col()];
        if (r >= 0 && c >= 0) tk.emplace_back(r, c, it.value());
      }
    for (int k = 0; k < im.disp_mass.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(im.disp_mass, k);
           it; ++it) {
        const int r = keep[it.row()], c = keep[it.col()];
        if (r >= 0 && c >= 0) tmr.emplace_back(r, c, it.value());
      }
    Eigen::SparseMatrix<double> Kred(im.nd, im.nd);
    Kred.setFromTriplets(tk.begin(), tk.end());
    im.mass_lagr_red.resize(im.nd, im.nd);
    im.mass_lagr_red.setFromTriplets(tmr.begin(), tmr.end());
    im.stiff_llt.compute(Kred);
    if (im.stiff_llt.info() != Eigen::Success)
      throw std::runtime_error("biharmonic: preconditioner not SPD");
  }
}

BiharmonicSolution BiharmonicSolver::solve(const Eigen::VectorXd& f) const {
  const Impl& im = *impl_;
  const int ns = im.ns, nd = im.nd;
  if (int(f.size()) != im.disp_ndofs)
    throw std::invalid_argument("biharmonic solve: load size mismatch");
  Eigen::VectorXd F(nd);
  for (int i = 0; i < nd; ++i) F[i] = f[sys_.disp_dofs[i]];

  BiharmonicSolution sol;
  Eigen::VectorXd u, sg;
  if (im.direct) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ns + nd);
    rhs.tail(nd) = -F;
    Eigen::VectorXd x = im.lu.solve(rhs);
    x += im.lu.solve(rhs - im.saddle * x);
    const double rn = rhs.norm();
    if (rn > 0)
      sol.converged = (im.saddle * x - rhs).norm() <= 1e-10 * rn;
    sg = x.head(ns);
    u = x.tail(nd);
  } else {
    // PCG on the Schur complement S = B M^-1 B^T.
    const auto apply_s = [&](const Eigen::VectorXd& v) {
      return Eigen::VectorXd(sys_.pairing *
                             im.mass_llt.solve(sys_.pairing.transpose() * v));
    };
    const auto apply_pinv = [&](const Eigen::VectorXd& v) {
      return Eigen::VectorXd(
          im.stiff_llt.solve(im.mass_lagr_red * im.stiff_llt.solve(v)));
    };
    u = Eigen::VectorXd::Zero(nd);
    Eigen::VectorXd r = F;
    const double fnorm = F.norm();
    sol.converged = fnorm == 0.0;
    if (!sol.converged) {
      Eigen::VectorXd z = apply_pinv(r);
      Eigen::VectorXd p = z;
      double rz = r.dot(z);
      const int cap = int(10.0 * std::sqrt(double(ns + nd)));
      for (int it = 0; it < cap; ++it) {
        const Eigen::VectorXd Sp = apply_s(p);
        const double alpha = rz / p.dot(Sp);
        u += alpha * p;
        r -= alpha * Sp;
        sol.iterations = it + 1;
        if (r.norm() <= 1e-10 * fnorm) {
          sol.converged = true;
          break;
        }
        z = apply_pinv(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
      }
    }
    sg = im.mass_llt.solve(sys_.pairing.transpose() * u);
  }

  sol.stress = Eigen::VectorXd::Zero(im.stress_ndofs);
  for (int a = 0; a < ns; ++a) sol.stress[sys_.stress_dofs[a]] = sg[a];
  sol.displacement = Eigen::VectorXd::Zero(im.disp_ndofs);
  for (int i = 0; i < nd; ++i) sol.displacement[sys_.disp_dofs[i]] = u[i];
  return sol;
}

double BiharmonicSolver::h2_norm(const BiharmonicSolution& sol) const {
  const Impl& im = *impl_;
  const double uu = sol.displacement.dot(im.disp_mass * sol.displacement);
  const double gg = sol.displacement.dot(im.disp_stiff * sol.displacement);
  const double ss = sol.stress.dot(sys_.mass * sol.stress);
  return std::sqrt(uu + gg + ss);
}

DualNormReport hminus2_norm(const AssembledFunctional& f, const Mesh& mesh,
                            int m) {
  const BiharmonicSolver solver(mesh, m);
  DualNormReport rep;
  double total2 = 0;
  for (int d = 0; d < f.n_dirs; ++d) {
    // Matrix-valued functionals are assembled against the raw symmetric
    // directions e_i e_j^T + e_j e_i^T, whose off-diagonal members have
    // squared Frobenius norm 2. The dual norm decomposes over an
    // orthonormal basis of symmetric matrices, so those columns enter the
    // total with weight 1/2 (equivalently: diagonal entries once,
    // off-diagonal entries twice, as for entrywise matrix norms).
    const double weight = (f.n_dirs > 1 && d >= f.dim) ? 0.5 : 1.0;
    const BiharmonicSolution sol = solver.solve(f.c.col(d));
    const double nrm = std::sqrt(weight) * solver.h2_norm(sol);
    rep.component.push_back(nrm);
    total2 += nrm * nrm;
    rep.iterations = std::max(rep.iterations, sol.iterations);
    rep.converged = rep.converged && sol.converged;
  }
  rep.total = std::sqrt(total2);
  return rep;
}

}  // namespace regge
