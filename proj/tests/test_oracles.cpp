#include <doctest.h>

#include <cmath>

#include "oracle/eps_contract.hpp"
#include "oracle/fd_riemann.hpp"

// Self-checks of the reference implementations against closed forms, so the
// oracles themselves are trustworthy when the real tests lean on them.

TEST_SUITE("oracles") {
  TEST_CASE("epsilon-epsilon full contraction is 6") {
    CHECK(oracle::eps_eps_full_contraction_3d() == doctest::Approx(6.0));
  }

  TEST_CASE("permutation signs") {
    CHECK(oracle::perm3(0, 1, 2) == 1.0);
    CHECK(oracle::perm3(1, 0, 2) == -1.0);
    CHECK(oracle::perm3(2, 0, 1) == 1.0);
    CHECK(oracle::perm3(0, 0, 2) == 0.0);
    CHECK(oracle::perm2(0, 1) == 1.0);
    CHECK(oracle::perm2(1, 0) == -1.0);
    CHECK(oracle::perm2(1, 1) == 0.0);
  }

  TEST_CASE("simplex monomial integrals") {
    // Dirichlet: int_T x^a y^b z^c = a! b! c! / (a+b+c+dim)!.
    CHECK(oracle::simplex_monomial_integral(2, 0, 0, 0) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(oracle::simplex_monomial_integral(2, 1, 1, 0) ==
          doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    CHECK(oracle::simplex_monomial_integral(3, 0, 0, 0) ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(oracle::simplex_monomial_integral(3, 2, 1, 1) ==
          doctest::Approx(1.0 / 2520.0).epsilon(1e-14));
  }

  TEST_CASE("euclidean inc oracle on diag(y^2,0,0)") {
    double d2[3][3][3][3] = {};
    d2[1][1][0][0] = 2.0;  // d_y d_y sigma_xx
    const Eigen::Matrix3d inc = oracle::inc_euclid_oracle_3d(d2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double want = (i == 2 && j == 2) ? 2.0 : 0.0;
        CHECK(inc(i, j) == doctest::Approx(want).epsilon(1e-14));
      }
    CHECK(oracle::inc_euclid_oracle_2d(d2) == doctest::Approx(2.0));
  }

  TEST_CASE("fd riemann vanishes for the identity metric") {
    auto g = [](const Eigen::Vector3d&) {
      return Eigen::Matrix3d::Identity().eval();
    };
    const oracle::Riemann4 r =
        oracle::fd_riemann(g, Eigen::Vector3d(0.2, -0.1, 0.4), 3);
    double m = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) m = std::max(m, std::abs(r.c[i][j][k][l]));
    CHECK(m < 1e-9);
  }

  TEST_CASE("fd gauss detects flat polar-style metric") {
    // g = diag(1, (1+x)^2) is the plane in (r, theta)-like coordinates.
    auto g = [](const Eigen::Vector3d& x) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
      m(1, 1) = (1.0 + x[0]) * (1.0 + x[0]);
      return m;
    };
    CHECK(std::abs(oracle::fd_gauss_2d(g, Eigen::Vector3d(0.2, 0.3, 0.0))) <
          1e-7);
  }

  TEST_CASE("fd gauss matches the graph metric closed form") {
    // Graph of f = (x^2+y^2)/2: K = 1/(1+x^2+y^2)^2.
    auto g = [](const Eigen::Vector3d& x) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
      m(0, 0) = 1.0 + x[0] * x[0];
      m(0, 1) = m(1, 0) = x[0] * x[1];
      m(1, 1) = 1.0 + x[1] * x[1];
      return m;
    };
    const Eigen::Vector3d x(0.3, -0.2, 0.0);
    const double want = 1.0 / std::pow(1.0 + 0.09 + 0.04, 2);
    CHECK(oracle::fd_gauss_2d(g, x) == doctest::Approx(want).epsilon(1e-6));
  }

  TEST_CASE("amap oracle output has riemann symmetries") {
    Eigen::Matrix3d U;
    U << 0.7, 0.2, -0.1, 0.2, -0.4, 0.3, -0.1, 0.3, 1.1;
    Eigen::Matrix3d g;
    g << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.8;
    const oracle::Tensor4O a = oracle::amap_oracle_3d(U, g);
    double defect = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            defect = std::max(
                defect, std::abs(a.c[i][j][k][l] + a.c[j][i][k][l]));
            defect = std::max(
                defect, std::abs(a.c[i][j][k][l] + a.c[i][j][l][k]));
            defect = std::max(
                defect, std::abs(a.c[i][j][k][l] - a.c[k][l][i][j]));
          }
    CHECK(defect < 1e-12);
  }
}
