#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

#include "regge/curvature.hpp"
#include "regge/mesh.hpp"
#include "regge/spaces.hpp"

namespace regge {

// Symmetric saddle-point system for one scalar biharmonic solve,
//   [ M  -B^T ] [sigma]   [ 0 ]
//   [ -B   0  ] [  u  ] = [-F ],
// with M the Hellan-Herrmann-Johnson mass matrix, B the distributional
// Hessian pairing b(tau, v) = sum_T int tau : hess(v) - sum_F int tau_nn
// [d_n v], all in the Euclidean metric. Constrained dofs are condensed out
// before the solve; `stress_dofs` and `disp_dofs` map the reduced blocks
// back to space dofs.
struct SparseSystem {
  Eigen::SparseMatrix<double> mass;      // reduced stress block
  Eigen::SparseMatrix<double> pairing;   // reduced B, rows = displacement
  std::vector<int> stress_dofs;
  std::vector<int> disp_dofs;

  int n() const { return int(mass.rows() + pairing.rows()); }
};

struct DualNormReport {
  double total = 0.0;                  // sqrt of sum of squared components
  std::vector<double> component;       // one entry per test direction
  int iterations = 0;                  // max over component solves (0 = direct)
  bool converged = true;
};

// Mixed HHJ discretization of the clamped biharmonic problem on the mesh:
// displacements in Lagrange order m (zero boundary values), stresses in HHJ
// order m-1 with no boundary constraint; the boundary nn-trace acts as the
// multiplier that enforces the zero normal derivative weakly. The load
// enters the displacement equations only.
SparseSystem assemble_hhj_biharmonic(const Mesh& mesh, int m);

// Solve the saddle system for the load vector f given on all displacement
// dofs of the Lagrange space (boundary rows ignored). Returns the stress
// and displacement coefficients scattered back to full space sizes.
struct BiharmonicSolution {
  Eigen::VectorXd stress;
  Eigen::VectorXd displacement;
  int iterations = 0;
  bool converged = true;
};

BiharmonicSolution solve_biharmonic(const SparseSystem& sys,
                                    const Mesh& mesh, int m,
                                    const Eigen::VectorXd& f);

// Factor once, solve many loads: used by the dual norm which issues one
// solve per test direction against the same system.
class BiharmonicSolver {
 public:
  BiharmonicSolver(const Mesh& mesh, int m);
  const SparseSystem& system() const { return sys_; }
  BiharmonicSolution solve(const Eigen::VectorXd& f) const;
  // Discrete H2-proxy norm of a solution:
  // sqrt(|u|_L2^2 + |grad u|_L2^2 + |sigma|_L2^2).
  double h2_norm(const BiharmonicSolution& sol) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  SparseSystem sys_;
};

// Discrete H^-2 norm of an assembled functional: per test direction solve
// the clamped biharmonic problem with the coefficient column as load and
// measure sqrt(|u|_L2^2 + |grad u|_L2^2 + |sigma|_L2^2); the total combines
// the directions euclideanly. m defaults to the displacement order of the
// convergence runs, k + 2.
DualNormReport hminus2_norm(const AssembledFunctional& f, const Mesh& mesh,
                            int m);

// Direct sparse factorization below 50k unknowns, ILU-preconditioned Krylov
// above, iteration cap 10 sqrt(n), relative residual 1e-10. The biharmonic
// solver uses a Schur-complement CG instead when it crosses the same
// threshold, since it knows the block structure.
Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& a,
                             const Eigen::VectorXd& rhs, int* iterations,
                             bool* converged);

}  // namespace regge
