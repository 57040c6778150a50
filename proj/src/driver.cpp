#include "regge/driver.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "regge/manufactured.hpp"
#include "regge/quadrature.hpp"

namespace regge {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "dim=" << dim << ";levels=";
  for (size_t i = 0; i < levels.size(); ++i)
    os << (i ? "," : "") << levels[i];
  os << ";order=" << order << ";test_order=" << test_order
     << ";perturb=" << fmt(perturb) << ";seed=" << seed << ";gp=" << gp
     << ";functional=" << functional << ";out=" << out;
  return os.str();
}

std::string RunConfig::hash() const {
  const std::string s = canonical();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double observed_order(double h_coarse, double e_coarse, double h_fine,
                      double e_fine) {
  if (e_coarse <= 0 || e_fine <= 0 || h_coarse <= h_fine) return 0.0;
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

SmoothMetric benchmark_metric(int dim) {
  if (dim == 3) return benchmark_3d();
  if (dim == 2) return benchmark_2d();
  throw std::invalid_argument("benchmark_metric: dim must be 2 or 3");
}

namespace {

bool selector_kind(const std::string& s, FunctionalKind& kind) {
  if (s == "gauss") kind = FunctionalKind::Gauss;
  else if (s == "scalar") kind = FunctionalKind::Scalar;
  else if (s == "ricci") kind = FunctionalKind::Ricci;
  else if (s == "einstein") kind = FunctionalKind::Einstein;
  else if (s == "qop") kind = FunctionalKind::CurvatureOperator;
  else if (s == "riemann") kind = FunctionalKind::Riemann;
  else return false;
  return true;
}

std::vector<AffineMap> all_maps(const Mesh& mesh) {
  std::vector<AffineMap> maps;
  maps.reserve(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e)
    maps.push_back(reference_map(mesh, e));
  return maps;
}

// Q (curl sigma)^T x n for the Euclidean background: Q = I - n n^T and the
// plain permutation symbol.
Eigen::Matrix3d euclid_curl_cross(const Eigen::Matrix3d& C,
                                  const Eigen::Vector3d& nu) {
  constexpr double eps3[3][3][3] = {
      {{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
      {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
      {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};
  const Eigen::Matrix3d QCt =
      (Eigen::Matrix3d::Identity() - nu * nu.transpose()) * C.transpose();
  Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int kk = 0; kk < 3; ++kk)
        for (int l = 0; l < 3; ++l)
          W(i, j) += eps3[j][kk][l] * QCt(i, kk) * nu[l];
  return W;
}

// Euclidean distributional incompatibility of a tensor field, assembled
// against the Lagrange basis with the same entity sweeps as the curvature
// functionals. Scalar tests in 2D, the six matrix directions in 3D.
AssembledFunctional assemble_inc(const Mesh& mesh, const MetricEval& sigma,
                                 int k, const LagrangeSpace& test,
                                 const QuadConfig& qc) {
  const bool two_d = mesh.dim == 2;
  const int nd = two_d ? 1 : n_sym_dirs(3);
  AssembledFunctional out;
  out.dim = mesh.dim;
  out.n_dirs = nd;
  out.c = Eigen::MatrixXd::Zero(test.n_dofs(), nd);
  out.interior.resize(test.n_dofs());
  for (int j = 0; j < test.n_dofs(); ++j)
    out.interior[j] = !test.boundary_dof()[j];

  const EuclideanMetric g(mesh.dim);
  const auto maps = all_maps(mesh);
  const MonomialBasis basis(mesh.dim, test.order());
  Eigen::VectorXd bval(basis.size()), phi;
  std::vector<double> kern(nd);

  const auto scatter = [&](int elem, const Eigen::Vector3d& x, double w) {
    basis.eval(maps[elem].J_inv * (x - maps[elem].origin), bval);
    phi.noalias() = test.element_dofs()[elem].coeff.transpose() * bval;
    const std::vector<int>& gids = test.element_dofs()[elem].global;
    for (size_t j = 0; j < gids.size(); ++j) {
      if (!out.interior[gids[j]]) continue;
      for (int d = 0; d < nd; ++d) out.c(gids[j], d) += w * phi(j) * kern[d];
    }
  };

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, test.order()),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const SymTensorSample sg =
            sigma.eval(elem, maps[elem].J_inv * (x - maps[elem].origin), x);
        if (two_d) {
          kern[0] = inc_2d(sg, pg);
        } else {
          const Eigen::Matrix3d inc = covariant_inc(sg, pg);
          for (int d = 0; d < nd; ++d)
            kern[d] = (inc.array() * sym_dir(3, d).array()).sum();
        }
        scatter(elem, x, w);
      });

  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, test.order()),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample sm[2], const PointGeometry pg[2], double w) {
        for (int side = 0; side < 2; ++side) {
          const int elem = fc.elem[side];
          const FacetFrame& f = fr[side];
          const SymTensorSample sg = sigma.eval(
              elem, maps[elem].J_inv * (x - maps[elem].origin), x);
          double T[3][3][3] = {};
          for (int p = 0; p < mesh.dim; ++p)
            for (int i = 0; i < mesh.dim; ++i)
              for (int j = 0; j < mesh.dim; ++j) T[p][i][j] = sg.d1[p][i][j];
          if (two_d) {
            double curl_t = 0, grad_nt = 0;
            for (int p = 0; p < 2; ++p)
              for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                  curl_t += (f.tau2d[p] * f.nu[i] - f.nu[p] * f.tau2d[i]) *
                            f.tau2d[j] * T[p][i][j];
                  grad_nt += f.tau2d[p] * f.nu[i] * f.tau2d[j] * T[p][i][j];
                }
            kern[0] = -(curl_t + grad_nt);
          } else {
            const Eigen::Matrix3d C = covariant_curl(sg, pg[side]);
            const Eigen::Matrix3d W1 = euclid_curl_cross(C, f.nu);
            Eigen::Matrix2d gradF = Eigen::Matrix2d::Zero();
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                for (int p = 0; p < 3; ++p)
                  for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                      gradF(a, b) +=
                          f.t[a][p] * f.nu[i] * f.t[b][j] * T[p][i][j];
            const Eigen::Matrix2d S = trace_reversed(gradF, f);
            for (int d = 0; d < nd; ++d) {
              const Eigen::Matrix3d E = sym_dir(3, d);
              kern[d] = -((W1.array() * E.array()).sum() -
                          facet_inner(f, S, facet_restrict(E, f)));
            }
          }
          scatter(elem, x, w);
        }
        (void)sm;
      });

  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, test.order()),
      [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        double jump = 0;
        for (const BoneSide& sd : bc.sides) {
          const Eigen::Matrix3d sg =
              sigma
                  .eval(sd.elem,
                        maps[sd.elem].J_inv * (bc.x - maps[sd.elem].origin),
                        bc.x)
                  .val;
          jump += sd.nu.dot(sg * sd.mu);
        }
        if (two_d) {
          kern[0] = jump;
        } else {
          for (int d = 0; d < nd; ++d)
            kern[d] = jump * bc.tau.dot(sym_dir(3, d) * bc.tau);
        }
        scatter(s0.elem, bc.x, w);
      });

  return out;
}

// Exact counterpart: plain volume quadrature of <inc sigma, phi E_d> for the
// smooth field.
AssembledFunctional assemble_inc_exact(const Mesh& mesh,
                                       const SmoothMetric& sm, int k,
                                       const LagrangeSpace& test,
                                       const QuadConfig& qc) {
  const bool two_d = mesh.dim == 2;
  const int nd = two_d ? 1 : n_sym_dirs(3);
  AssembledFunctional out;
  out.dim = mesh.dim;
  out.n_dirs = nd;
  out.c = Eigen::MatrixXd::Zero(test.n_dofs(), nd);
  out.interior.resize(test.n_dofs());
  for (int j = 0; j < test.n_dofs(); ++j)
    out.interior[j] = !test.boundary_dof()[j];

  const EuclideanMetric g(mesh.dim);
  const auto maps = all_maps(mesh);
  const MonomialBasis basis(mesh.dim, test.order());
  Eigen::VectorXd bval(basis.size()), phi;

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, test.order()),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const SymTensorSample sg = sm.sample(x);
        double kern[6];
        if (two_d) {
          kern[0] = inc_2d(sg, pg);
        } else {
          const Eigen::Matrix3d inc = covariant_inc(sg, pg);
          for (int d = 0; d < nd; ++d)
            kern[d] = (inc.array() * sym_dir(3, d).array()).sum();
        }
        basis.eval(maps[elem].J_inv * (x - maps[elem].origin), bval);
        phi.noalias() = test.element_dofs()[elem].coeff.transpose() * bval;
        const std::vector<int>& gids = test.element_dofs()[elem].global;
        for (size_t j = 0; j < gids.size(); ++j) {
          if (!out.interior[gids[j]]) continue;
          for (int d = 0; d < nd; ++d)
            out.c(gids[j], d) += w * phi(j) * kern[d];
        }
      });
  return out;
}

}  // namespace

RunResult run_convergence(const RunConfig& cfg) {
  RunResult res;
  FunctionalKind kind{};
  const bool is_inc = cfg.functional == "inc";
  if (!is_inc && !selector_kind(cfg.functional, kind)) {
    res.ok = false;
    res.message = "unknown functional selector: " + cfg.functional;
    return res;
  }
  const SmoothMetric gm = benchmark_metric(cfg.dim);
  const int m = cfg.resolved_test_order();
  const QuadConfig qc;

  for (int level : cfg.levels) {
    try {
      const Mesh mesh =
          build_structured_cube_mesh(level, cfg.dim, cfg.perturb, cfg.seed);
      const ReggeSpace space(mesh, cfg.order);
      const Eigen::VectorXd coeffs = space.interpolate(
          [&](const Eigen::Vector3d& x) { return gm.sample(x).val; });
      const MetricField field = make_field(space, coeffs);
      const FieldMetric gh(field);
      const LagrangeSpace test(mesh, m);

      AssembledFunctional num, exact;
      if (is_inc) {
        num = assemble_inc(mesh, gh, cfg.order, test, qc);
        exact = assemble_inc_exact(mesh, gm, cfg.order, test, qc);
      } else {
        num = assemble_against_basis(kind, mesh, gh, cfg.order, test, qc);
        exact = assemble_exact(kind, mesh, gm, cfg.order, test, qc);
      }
      AssembledFunctional diff = num;
      diff.c -= exact.c;

      const DualNormReport rep = hminus2_norm(diff, mesh, m);
      if (!rep.converged) {
        res.ok = false;
        res.message = "dual-norm solver did not converge at level " +
                      std::to_string(level);
      }

      LevelRow row;
      row.level = level;
      row.h = mesh.max_edge_length();
      row.ndof = space.n_dofs();
      row.error = rep.total;
      row.gp = cfg.gp;
      if (!res.rows.empty())
        row.order = observed_order(res.rows.back().h, res.rows.back().error,
                                   row.h, row.error);
      res.rows.push_back(row);
    } catch (const std::exception& e) {
      res.ok = false;
      res.message =
          "level " + std::to_string(level) + ": " + std::string(e.what());
      return res;
    }
  }
  return res;
}

RunResult run_probes(const RunConfig& cfg) {
  RunResult res;
  if (cfg.dim != 3) {
    res.ok = false;
    res.message = "probes require dim 3";
    return res;
  }
  const SmoothMetric gm = benchmark_metric(3);
  const int m = cfg.resolved_test_order();
  const QuadConfig qc;
  std::vector<int> gps{cfg.gp};
  if (cfg.gp != 7) gps.push_back(7);

  for (int gp : gps) {
    const TQuadrature tq = TQuadrature::gauss(gp);
    double prev_h = 0.0, prev_f3 = 0.0;
    bool have_prev = false;
    for (int level : cfg.levels) {
      try {
        const Mesh mesh =
            build_structured_cube_mesh(level, 3, cfg.perturb, cfg.seed);
        const ReggeSpace space(mesh, cfg.order);
        const Eigen::VectorXd coeffs = space.interpolate(
            [&](const Eigen::Vector3d& x) { return gm.sample(x).val; });
        const MetricField field = make_field(space, coeffs);
        const FieldMetric gh(field);
        const EuclideanMetric g0(3);
        const LagrangeSpace test(mesh, m);

        LevelRow row;
        row.level = level;
        row.h = mesh.max_edge_length();
        row.ndof = space.n_dofs();
        row.gp = gp;
        double f[3];
        for (int which = 1; which <= 3; ++which) {
          const AssembledFunctional af =
              assemble_probe(which, mesh, g0, gh, cfg.order, test, tq, qc);
          const DualNormReport rep = hminus2_norm(af, mesh, m);
          if (!rep.converged) {
            res.ok = false;
            res.message = "dual-norm solver did not converge at level " +
                          std::to_string(level);
          }
          f[which - 1] = rep.total;
        }
        row.f1 = f[0];
        row.f2 = f[1];
        row.f3 = f[2];
        if (have_prev) row.order = observed_order(prev_h, prev_f3, row.h, row.f3);
        prev_h = row.h;
        prev_f3 = row.f3;
        have_prev = true;
        res.rows.push_back(row);
      } catch (const std::exception& e) {
        res.ok = false;
        res.message =
            "level " + std::to_string(level) + ": " + std::string(e.what());
        return res;
      }
    }
  }
  return res;
}

LinCheckResult run_lincheck(const RunConfig& cfg) {
  LinCheckResult out;
  try {
    const int level = cfg.levels.empty() ? 1 : cfg.levels.front();
    const Mesh mesh =
        build_structured_cube_mesh(level, cfg.dim, cfg.perturb, cfg.seed);
    const SmoothMetric gm = benchmark_metric(cfg.dim);
    const ReggeSpace space(mesh, cfg.order);

    const Eigen::VectorXd gc = space.interpolate(
        [&](const Eigen::Vector3d& x) { return gm.sample(x).val; });
    const MetricField gf = make_field(space, gc);
    const FieldMetric g(gf);

    // A tame smooth deformation direction, interpolated so it lives in the
    // same space as the metric.
    const auto smooth_sigma = [&](const Eigen::Vector3d& x) {
      Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
      const int d = cfg.dim;
      for (int i = 0; i < d; ++i) {
        s(i, i) = 0.1 * (1.0 + x[i] * x[i]);
        for (int j = i + 1; j < d; ++j) {
          s(i, j) = 0.05 * x[i] * x[j] + 0.02 * double(i + j);
          s(j, i) = s(i, j);
        }
      }
      return s;
    };
    const Eigen::VectorXd sc = space.interpolate(smooth_sigma);
    const MetricField sf = make_field(space, sc);
    const FieldMetric sigma(sf);

    // Test field vanishing on the boundary of the box.
    const auto bump = [d = cfg.dim](const Eigen::Vector3d& x) {
      double s = 1.0;
      for (int i = 0; i < d; ++i) s *= (1.0 - x[i] * x[i]);
      return s;
    };
    TestField u;
    if (cfg.dim == 2) {
      u = smooth_scalar_test(
          [&](const Eigen::Vector3d& x) {
            return bump(x) * (1.0 + 0.3 * x[0] - 0.2 * x[1]);
          },
          6);
    } else {
      u = smooth_matrix_test(
          [&](const Eigen::Vector3d& x) {
            Eigen::Matrix3d mval;
            mval << 1.0 + 0.2 * x[2], 0.3, -0.1, 0.3, -0.5 + 0.1 * x[0], 0.2,
                -0.1, 0.2, 0.4 + 0.15 * x[1];
            return Eigen::Matrix3d(bump(x) * mval);
          },
          8);
    }

    const QuadConfig qc;
    const int k = cfg.order;
    const double a = a_form(mesh, g, sigma, u, k, qc);
    const double b = b_form(mesh, g, sigma, u, k, qc);
    const double inc = distributional_inc(mesh, g, sigma, u, k, qc);
    const double flipped = detail::b_form_impl(mesh, g, sigma, u, k, qc, -1.0);

    const double bscale = std::max(std::abs(b), 1e-30);
    out.inc_rel = std::abs(b + 2.0 * inc) / bscale;
    out.flipped_rel = std::abs(flipped + 2.0 * inc) /
                      std::max(std::abs(flipped), 1e-30);

    // a + b is the derivative of the Riemann functional with the test
    // pushed through the metric isomorphism (the specialized functionals
    // carry an extra factor 1/4).
    const TestField4 au = amap_test(u, cfg.dim);
    const auto functional_at = [&](double eps) {
      const CombinedMetric gt(1.0, g, eps, sigma);
      return riemann_functional(mesh, gt, k, au, qc);
    };
    const double target = a + b;
    double eps = 1e-2;
    std::vector<double> errs;
    for (int i = 0; i < 4; ++i) {
      const double diff =
          (functional_at(eps) - functional_at(-eps)) / (2.0 * eps);
      errs.push_back(std::abs(diff - target));
      eps *= 0.5;
    }
    const double err_floor = 1e-13 * std::max(1.0, std::abs(target));
    if (errs.front() <= err_floor) {
      // Central difference is exact to roundoff (flat or linear case).
      out.eps_order = 2.0;
    } else {
      out.eps_order =
          std::log2(errs.front() / std::max(errs.back(), err_floor)) /
          double(errs.size() - 1);
    }

    const bool two_d_zero = cfg.dim != 2 || a == 0.0;
    out.ok = out.eps_order >= 1.8 && out.inc_rel <= 1e-10 &&
             out.flipped_rel > 1e-6 && two_d_zero;
    std::ostringstream msg;
    msg << "eps_order=" << out.eps_order << " inc_rel=" << out.inc_rel
        << " flipped_rel=" << out.flipped_rel << " a=" << a << " b=" << b;
    out.message = msg.str();
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = e.what();
  }
  return out;
}

void write_convergence_csv(std::ostream& out, const RunConfig& cfg,
                           const RunResult& r) {
  out << "level,h,ndof,error,order,hash\n";
  const std::string h = cfg.hash();
  for (const LevelRow& row : r.rows)
    out << row.level << ',' << fmt(row.h) << ',' << row.ndof << ','
        << fmt(row.error) << ',' << fmt(row.order) << ',' << h << '\n';
}

void write_probes_csv(std::ostream& out, const RunConfig& cfg,
                      const RunResult& r) {
  out << "level,h,ndof,error,order,F1,F2,F3,gp,hash\n";
  const std::string h = cfg.hash();
  for (const LevelRow& row : r.rows)
    out << row.level << ',' << fmt(row.h) << ',' << row.ndof << ','
        << fmt(row.error) << ',' << fmt(row.order) << ',' << fmt(row.f1)
        << ',' << fmt(row.f2) << ',' << fmt(row.f3) << ',' << row.gp << ','
        << h << '\n';
}

}  // namespace regge
