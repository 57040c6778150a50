#pragma once

// Finite-difference curvature oracle. Builds Christoffel symbols and the
// Riemann tensor purely from metric *values* via nested central differences
// with Richardson extrapolation. Used by tests as an independent reference
// for the analytic geometry kernel; deliberately shares no code with it.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using MetricFn = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;

struct FDConfig {
  double step = 1e-2;
  int levels = 3;
  double rel_tol = 1e-6;
};

struct Riemann4 {
  double c[3][3][3][3] = {};
};

inline Eigen::Matrix3d fd_pad(const Eigen::Matrix3d& g, int dim) {
  Eigen::Matrix3d out = g;
  if (dim == 2) {
    out.row(2).setZero();
    out.col(2).setZero();
    out(2, 2) = 1.0;
  }
  return out;
}

// Gamma^l_{ij} at x with one central-difference step h.
inline void fd_christoffel(const MetricFn& g, const Eigen::Vector3d& x,
                           int dim, double h, double out[3][3][3]) {
  Eigen::Matrix3d dg[3];
  for (int p = 0; p < dim; ++p) {
    Eigen::Vector3d xp = x, xm = x;
    xp[p] += h;
    xm[p] -= h;
    dg[p] = (fd_pad(g(xp), dim) - fd_pad(g(xm), dim)) / (2.0 * h);
  }
  const Eigen::Matrix3d ginv = fd_pad(g(x), dim).inverse();
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[l][i][j] = 0.0;
  for (int l = 0; l < dim; ++l)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        double s = 0.0;
        for (int k = 0; k < dim; ++k)
          s += ginv(l, k) * (dg[i](j, k) + dg[j](i, k) - dg[k](i, j));
        out[l][i][j] = 0.5 * s;
      }
}

// Riemann tensor with a single step h (no extrapolation).
inline Riemann4 fd_riemann_step(const MetricFn& g, const Eigen::Vector3d& x,
                                int dim, double h) {
  double gam[3][3][3];
  fd_christoffel(g, x, dim, h, gam);
  double dgam[3][3][3][3];  // dgam[p][l][i][j] = d_p Gamma^l_{ij}
  for (int p = 0; p < dim; ++p) {
    Eigen::Vector3d xp = x, xm = x;
    xp[p] += h;
    xm[p] -= h;
    double gp[3][3][3], gm[3][3][3];
    fd_christoffel(g, xp, dim, h, gp);
    fd_christoffel(g, xm, dim, h, gm);
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          dgam[p][l][i][j] = (gp[l][i][j] - gm[l][i][j]) / (2.0 * h);
  }
  const Eigen::Matrix3d gmat = fd_pad(g(x), dim);
  Riemann4 r;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double s = 0.0;
          for (int m = 0; m < dim; ++m) {
            double t = dgam[i][m][j][k] - dgam[j][m][i][k];
            for (int n = 0; n < dim; ++n)
              t += gam[n][j][k] * gam[m][i][n] - gam[n][i][k] * gam[m][j][n];
            s += gmat(l, m) * t;
          }
          r.c[i][j][k][l] = s;
        }
  return r;
}

inline Riemann4 fd_riemann(const MetricFn& g, const Eigen::Vector3d& x,
                           int dim, const FDConfig& cfg = {}) {
  if (!(cfg.step > 0.0)) throw std::invalid_argument("fd_riemann: step <= 0");
  if (cfg.levels < 2) throw std::invalid_argument("fd_riemann: levels < 2");
  std::vector<Riemann4> row(cfg.levels), prev;
  for (int m = 0; m < cfg.levels; ++m) {
    const double h = cfg.step / (1 << m);
    if (h < 1e-8) throw std::runtime_error("fd_riemann: step underflow");
    row[m] = fd_riemann_step(g, x, dim, h);
  }
  // Richardson triangle in h^2.
  for (int j = 1; j < cfg.levels; ++j) {
    const double f = std::pow(4.0, j);
    for (int m = cfg.levels - 1; m >= j; --m)
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
              row[m].c[i][k][p][q] =
                  (f * row[m].c[i][k][p][q] - row[m - 1].c[i][k][p][q]) /
                  (f - 1.0);
  }
  return row[cfg.levels - 1];
}

inline double fd_gauss_2d(const MetricFn& g, const Eigen::Vector3d& x,
                          const FDConfig& cfg = {}) {
  const Riemann4 r = fd_riemann(g, x, 2, cfg);
  const double det = g(x).topLeftCorner<2, 2>().determinant();
  return r.c[0][1][1][0] / det;
}

}  // namespace oracle
