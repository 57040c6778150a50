#pragma once

// Permutation-symbol contraction oracles: every sum is a literal loop over
// all index tuples with a parity computed on the spot. No Levi-Civita
// tables, no shared helpers with the library under test.

#include <Eigen/Dense>

#include <array>

namespace oracle {

// Sign of the permutation (i,j,k) of {0,1,2}; 0 on repeats.
inline double perm3(int i, int j, int k) {
  std::array<int, 3> p = {i, j, k};
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (p[a] == p[b]) return 0.0;
  int swaps = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 2; ++b)
      if (p[b] > p[b + 1]) {
        std::swap(p[b], p[b + 1]);
        ++swaps;
      }
  return swaps % 2 == 0 ? 1.0 : -1.0;
}

inline double perm2(int i, int j) {
  if (i == j) return 0.0;
  return i < j ? 1.0 : -1.0;
}

inline double eps_eps_full_contraction_3d() {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) s += perm3(i, j, k) * perm3(i, j, k);
  return s;  // = 6
}

struct Tensor4O {
  double c[3][3][3][3] = {};
};

// Covariant components of the test-tensor map: first the contravariant
// epsilon-hat contraction, then four explicit index lowerings.
inline Tensor4O amap_oracle_3d(const Eigen::Matrix3d& U,
                               const Eigen::Matrix3d& g) {
  const double det = g.determinant();
  double up[3][3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              s += perm3(i, j, a) * perm3(k, l, b) * U(a, b);
          up[i][j][k][l] = -s / det;
        }
  Tensor4O low;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
              for (int r = 0; r < 3; ++r)
                for (int u = 0; u < 3; ++u)
                  s += g(i, p) * g(j, q) * g(k, r) * g(l, u) * up[p][q][r][u];
          low.c[i][j][k][l] = s;
        }
  return low;
}

// Q^{ij} = -1/4 eps-hat^{ikl} eps-hat^{jmn} R_{klmn}.
inline Eigen::Matrix3d q_oracle_3d(const double R[3][3][3][3],
                                   const Eigen::Matrix3d& g) {
  const double det = g.determinant();
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n)
              s += perm3(i, k, l) * perm3(j, m, n) * R[k][l][m][n];
      q(i, j) = -0.25 * s / det;
    }
  return q;
}

// Euclidean incompatibility from second partials, d2[p][q][i][j] =
// d_p d_q sigma_ij. 3D gives a matrix, 2D a scalar.
inline Eigen::Matrix3d inc_euclid_oracle_3d(const double d2[3][3][3][3]) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
          for (int r = 0; r < 3; ++r)
            for (int t = 0; t < 3; ++t)
              s += perm3(p, q, j) * perm3(r, t, i) * d2[p][r][q][t];
      out(i, j) = s;
    }
  return out;
}

inline double inc_euclid_oracle_2d(const double d2[3][3][3][3]) {
  double s = 0.0;
  for (int q = 0; q < 2; ++q)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          s += perm2(q, i) * perm2(j, k) * d2[j][q][i][k];
  return s;
}

// Exact monomial integral over the unit simplex (Dirichlet formula):
// int x^a y^b z^c = a! b! c! / (a+b+c+dim)!.
inline double simplex_monomial_integral(int dim, int a, int b, int c) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + dim);
}

}  // namespace oracle
