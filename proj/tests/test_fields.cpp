#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle/eps_contract.hpp"
#include "regge/poly.hpp"
#include "regge/quadrature.hpp"

using namespace regge;

namespace {

double quad_integrate_monomial(int entity_dim, int exactness, int a, int b,
                               int c) {
  const QuadRule rule = quad_rule(entity_dim, exactness);
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::Vector3d x = rule.ref_point(q);
    s += rule.weights[q] * std::pow(x[0], a) * std::pow(x[1], b) *
         std::pow(x[2], c);
  }
  return s;
}

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("quadrature weights sum to the reference measure") {
    const double want[] = {1.0, 0.5, 1.0 / 6.0};
    for (int d = 1; d <= 3; ++d) {
      for (int ex : {1, 3, 6, 11}) {
        const QuadRule rule = quad_rule(d, ex);
        double s = 0.0;
        for (double w : rule.weights) s += w;
        CHECK(s == doctest::Approx(want[d - 1]).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("quadrature integrates monomials exactly") {
    // Dirichlet closed form on the unit simplex.
    for (int d = 1; d <= 3; ++d) {
      for (int ex = 1; ex <= 9; ex += 2) {
        for (int a = 0; a + 0 <= ex; ++a)
          for (int b = 0; d >= 2 && a + b <= ex; ++b)
            for (int c = 0; (d == 3 ? a + b + c <= ex : c == 0); ++c) {
              const double got = quad_integrate_monomial(d, ex, a, b, c);
              const double want =
                  oracle::simplex_monomial_integral(d, a, b, c);
              CHECK(got == doctest::Approx(want).epsilon(1e-12));
            }
      }
    }
  }

  TEST_CASE("monomial basis size and degree-major ordering") {
    const MonomialBasis b2(2, 3);
    CHECK(b2.size() == dim_poly(2, 3));
    CHECK(b2.size() == 10);
    const MonomialBasis b3(3, 2);
    CHECK(b3.size() == dim_poly(3, 2));
    CHECK(b3.size() == 10);
    int prev = -1;
    for (const auto& e : b3.exps) {
      const int deg = e[0] + e[1] + e[2];
      CHECK(deg >= prev);
      prev = deg;
    }
    CHECK(b3.exps.front() == std::array<int, 3>{0, 0, 0});
  }

  TEST_CASE("monomial derivatives match finite differences") {
    const MonomialBasis basis(3, 4);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unif(0.05, 0.25);
    const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
    const double h = 1e-5;

    Eigen::VectorXd val;
    Eigen::MatrixXd grad;
    std::vector<Eigen::Matrix3d> hess;
    basis.eval(x, val, grad, hess);

    for (int p = 0; p < 3; ++p) {
      Eigen::Vector3d xp = x, xm = x;
      xp[p] += h;
      xm[p] -= h;
      Eigen::VectorXd vp, vm;
      basis.eval(xp, vp);
      basis.eval(xm, vm);
      for (int m = 0; m < basis.size(); ++m) {
        CHECK(grad(m, p) ==
              doctest::Approx((vp[m] - vm[m]) / (2 * h)).epsilon(1e-6));
      }
      Eigen::MatrixXd gp, gm;
      basis.eval(xp, vp, gp);
      basis.eval(xm, vm, gm);
      for (int q = 0; q < 3; ++q)
        for (int m = 0; m < basis.size(); ++m)
          CHECK(hess[m](p, q) ==
                doctest::Approx((gp(m, q) - gm(m, q)) / (2 * h))
                    .epsilon(1e-5));
    }
  }

  TEST_CASE("sym pair packing order") {
    const auto& pairs = sym_pairs();
    CHECK(pairs[0] == std::make_pair(0, 0));
    CHECK(pairs[1] == std::make_pair(1, 1));
    CHECK(pairs[2] == std::make_pair(0, 1));
    CHECK(pairs[3] == std::make_pair(2, 2));
    CHECK(pairs[4] == std::make_pair(0, 2));
    CHECK(pairs[5] == std::make_pair(1, 2));
    CHECK(n_sym_comps(2) == 3);
    CHECK(n_sym_comps(3) == 6);
  }

  TEST_CASE("poly scalar derivatives through an affine map") {
    Mesh mesh = build_structured_cube_mesh(0, 3, 0.0, 1);
    const AffineMap map = reference_map(mesh, 2);

    PolyScalar p(3, 2);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < p.coeff.size(); ++i) p.coeff[i] = unif(rng);

    const Eigen::Vector3d xref(0.21, 0.13, 0.4);
    double val;
    Eigen::Vector3d grad;
    Eigen::Matrix3d hess;
    p.eval(xref, map, val, grad, hess);
    CHECK(val == doctest::Approx(p.value(xref)).epsilon(1e-13));

    const double h = 1e-5;
    const Eigen::Vector3d xglob = map.origin + map.J * xref;
    auto value_at = [&](const Eigen::Vector3d& g) {
      return p.value(map.J_inv * (g - map.origin));
    };
    for (int a = 0; a < 3; ++a) {
      Eigen::Vector3d gp = xglob, gm = xglob;
      gp[a] += h;
      gm[a] -= h;
      CHECK(grad[a] ==
            doctest::Approx((value_at(gp) - value_at(gm)) / (2 * h))
                .epsilon(1e-6));
      for (int b = 0; b < 3; ++b) {
        Eigen::Vector3d gpp = xglob, gpm = xglob, gmp = xglob, gmm = xglob;
        gpp[a] += h; gpp[b] += h;
        gpm[a] += h; gpm[b] -= h;
        gmp[a] -= h; gmp[b] += h;
        gmm[a] -= h; gmm[b] -= h;
        const double fd = (value_at(gpp) - value_at(gpm) - value_at(gmp) +
                           value_at(gmm)) /
                          (4 * h * h);
        CHECK(hess(a, b) == doctest::Approx(fd).epsilon(2e-4));
      }
    }
  }

  TEST_CASE("poly sym tensor sample matches finite differences") {
    Mesh mesh = build_structured_cube_mesh(0, 2, 0.0, 1);
    const AffineMap map = reference_map(mesh, 1);

    PolySymTensor s(2, 3);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < s.coeff.rows(); ++i)
      for (int j = 0; j < s.coeff.cols(); ++j) s.coeff(i, j) = unif(rng);

    const Eigen::Vector3d xref(0.3, 0.25, 0.0);
    const SymTensorSample sample = s.sample(xref, map);
    CHECK((sample.val - s.value(xref)).norm() < 1e-13);
    CHECK(sample.val(0, 1) == doctest::Approx(sample.val(1, 0)));

    const Eigen::Vector3d xglob = map.origin + map.J * xref;
    auto value_at = [&](const Eigen::Vector3d& g) {
      return s.value(map.J_inv * (g - map.origin));
    };
    const double h = 1e-5;
    for (int p = 0; p < 2; ++p) {
      Eigen::Vector3d gp = xglob, gm = xglob;
      gp[p] += h;
      gm[p] -= h;
      const Eigen::Matrix3d fd = (value_at(gp) - value_at(gm)) / (2 * h);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(sample.d1[p][i][j] ==
                doctest::Approx(fd(i, j)).epsilon(1e-6));
      for (int q = 0; q < 2; ++q) {
        Eigen::Vector3d gpp = xglob, gpm = xglob, gmp = xglob, gmm = xglob;
        gpp[p] += h; gpp[q] += h;
        gpm[p] += h; gpm[q] -= h;
        gmp[p] -= h; gmp[q] += h;
        gmm[p] -= h; gmm[q] -= h;
        const Eigen::Matrix3d fd2 =
            (value_at(gpp) - value_at(gpm) - value_at(gmp) + value_at(gmm)) /
            (4 * h * h);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            CHECK(sample.d2[p][q][i][j] ==
                  doctest::Approx(fd2(i, j)).epsilon(2e-4));
      }
    }
  }
}
