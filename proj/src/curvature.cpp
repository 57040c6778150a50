#include "regge/curvature.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "regge/quadrature.hpp"

namespace regge {

namespace {

Eigen::Vector3d ref_coords(const AffineMap& map, const Eigen::Vector3d& x) {
  return map.J_inv * (x - map.origin);
}

std::shared_ptr<std::vector<AffineMap>> all_maps(const Mesh& mesh) {
  auto maps = std::make_shared<std::vector<AffineMap>>();
  maps->reserve(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e)
    maps->push_back(reference_map(mesh, e));
  return maps;
}

// <a, b>_g for covariant symmetric tensors, tr(g^-1 a g^-1 b).
double pair_cov(const PointGeometry& pg, const Eigen::Matrix3d& a,
                const Eigen::Matrix3d& b) {
  return (pg.g_inv * a * pg.g_inv * b).trace();
}

}  // namespace

// ---------------------------------------------------------------------------
// Test fields

TestField scalar_test_from(const LagrangeSpace& space,
                           const Eigen::VectorXd& u) {
  auto polys = std::make_shared<std::vector<PolyScalar>>(space.expand(u));
  auto maps = all_maps(space.mesh());
  TestField t;
  t.kind = TestField::Kind::Scalar;
  t.degree = space.order();
  t.scalar = [polys, maps](int elem, const Eigen::Vector3d& x) {
    return (*polys)[elem].value(ref_coords((*maps)[elem], x));
  };
  return t;
}

TestField matrix_test_from(const ReggeSpace& space, const Eigen::VectorXd& u) {
  auto polys = std::make_shared<std::vector<PolySymTensor>>(space.expand(u));
  auto maps = all_maps(space.mesh());
  TestField t;
  t.kind = TestField::Kind::Matrix;
  t.degree = space.order();
  t.matrix = [polys, maps](int elem, const Eigen::Vector3d& x) {
    return (*polys)[elem].value(ref_coords((*maps)[elem], x));
  };
  return t;
}

TestField smooth_scalar_test(std::function<double(const Eigen::Vector3d&)> f,
                             int degree) {
  TestField t;
  t.kind = TestField::Kind::Scalar;
  t.degree = degree;
  t.scalar = [f = std::move(f)](int, const Eigen::Vector3d& x) { return f(x); };
  return t;
}

TestField smooth_matrix_test(
    std::function<Eigen::Matrix3d(const Eigen::Vector3d&)> f, int degree) {
  TestField t;
  t.kind = TestField::Kind::Matrix;
  t.degree = degree;
  t.matrix = [f = std::move(f)](int, const Eigen::Vector3d& x) { return f(x); };
  return t;
}

namespace {

// Deterministic sample points on a facet, interior-biased.
Eigen::Vector3d facet_sample(const Mesh& mesh, const Facet& fc, int s, int n) {
  const Eigen::Vector3d va = mesh.vertices[fc.v[0]];
  const Eigen::Vector3d t1 = mesh.vertices[fc.v[1]] - va;
  const double a = (s + 0.37) / n;
  if (mesh.dim == 2) return va + a * t1;
  const Eigen::Vector3d t2 = mesh.vertices[fc.v[2]] - va;
  const double b = (1.0 - a) * (0.23 + 0.5 * ((s * 7) % n) / double(n));
  return va + a * t1 + b * t2;
}

}  // namespace

double tt_continuity_defect(const Mesh& mesh, const TestField& u,
                            int samples_per_facet) {
  double worst = 0;
  for (const Facet& fc : mesh.facets) {
    if (fc.boundary) continue;
    const Eigen::Vector3d th1 =
        (mesh.vertices[fc.v[1]] - mesh.vertices[fc.v[0]]).normalized();
    Eigen::Vector3d th2 = Eigen::Vector3d::Zero();
    if (mesh.dim == 3)
      th2 = (mesh.vertices[fc.v[2]] - mesh.vertices[fc.v[0]]).normalized();
    for (int s = 0; s < samples_per_facet; ++s) {
      const Eigen::Vector3d x = facet_sample(mesh, fc, s, samples_per_facet);
      if (u.kind == TestField::Kind::Scalar) {
        worst = std::max(worst, std::abs(u.scalar(fc.elem[0], x) -
                                         u.scalar(fc.elem[1], x)));
      } else {
        const Eigen::Matrix3d d =
            u.matrix(fc.elem[0], x) - u.matrix(fc.elem[1], x);
        worst = std::max(worst, std::abs(th1.dot(d * th1)));
        if (mesh.dim == 3) {
          worst = std::max(worst, std::abs(th2.dot(d * th2)));
          worst = std::max(worst, std::abs(th1.dot(d * th2)));
        }
      }
    }
  }
  return worst;
}

double nn_continuity_defect(const Mesh& mesh, const MetricEval& g,
                            const TestField& u, int samples_per_facet) {
  if (u.kind == TestField::Kind::Scalar) return 0.0;
  double worst = 0;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& fc = mesh.facets[f];
    if (fc.boundary) continue;
    AffineMap maps[2] = {reference_map(mesh, fc.elem[0]),
                         reference_map(mesh, fc.elem[1])};
    for (int s = 0; s < samples_per_facet; ++s) {
      const Eigen::Vector3d x = facet_sample(mesh, fc, s, samples_per_facet);
      double nn[2];
      for (int side = 0; side < 2; ++side) {
        const SymTensorSample smp =
            g.eval(fc.elem[side], ref_coords(maps[side], x), x);
        const PointGeometry pg = point_geometry(smp);
        const Eigen::Vector3d nu =
            g_normal(pg.g_inv, mesh.facet_inward_normal(f, fc.elem[side]));
        nn[side] = nu.dot(u.matrix(fc.elem[side], x) * nu);
      }
      worst = std::max(worst, std::abs(nn[0] - nn[1]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Test-field-4 builders

namespace {

Tensor4 scale4(Tensor4 a, double c) {
  for (auto& p : a.c)
    for (auto& q : p)
      for (auto& r : q)
        for (double& v : r) v *= c;
  return a;
}

}  // namespace

TestField4 amap_test(const TestField& u, int dim) {
  TestField4 t;
  t.degree = u.degree;
  if (dim == 3) {
    t.eval = [u](int elem, const Eigen::Vector3d& x, const PointGeometry& pg) {
      return amap_3d(u.matrix(elem, x), pg);
    };
  } else {
    t.eval = [u](int elem, const Eigen::Vector3d& x, const PointGeometry& pg) {
      return amap_2d(u.scalar(elem, x), pg);
    };
  }
  return t;
}

TestField4 kn_scalar_test(const TestField& v) {
  TestField4 t;
  t.degree = v.degree;
  t.eval = [v](int elem, const Eigen::Vector3d& x, const PointGeometry& pg) {
    return scale4(kulkarni_nomizu(pg.g, pg.g), v.scalar(elem, x));
  };
  return t;
}

TestField4 kn_test(const TestField& rho) {
  TestField4 t;
  t.degree = rho.degree;
  t.eval = [rho](int elem, const Eigen::Vector3d& x, const PointGeometry& pg) {
    return kulkarni_nomizu(pg.g, rho.matrix(elem, x));
  };
  return t;
}

TestField4 kn_trace_reversed_test(const TestField& rho) {
  TestField4 t;
  t.degree = rho.degree;
  t.eval = [rho](int elem, const Eigen::Vector3d& x, const PointGeometry& pg) {
    const Eigen::Matrix3d r = rho.matrix(elem, x);
    const double tr = (pg.g_inv * r).trace();
    return kulkarni_nomizu(pg.g, (r - 0.5 * tr * pg.g).eval());
  };
  return t;
}

// ---------------------------------------------------------------------------
// Assembly walkers

void for_each_element_point(const Mesh& mesh, const MetricEval& g,
                            int exactness, const ElementPointFn& fn) {
  const QuadRule qr = quad_rule(mesh.dim, exactness);
  for (int el = 0; el < mesh.n_elements(); ++el) {
    const AffineMap map = reference_map(mesh, el);
    for (int q = 0; q < qr.size(); ++q) {
      const Eigen::Vector3d xref = qr.ref_point(q);
      const Eigen::Vector3d x = map.origin + map.J * xref;
      const SymTensorSample s = g.eval(el, xref, x);
      const PointGeometry pg = point_geometry(s);
      if (!(pg.det > 0.0))
        throw std::runtime_error("non-positive metric at a quadrature point");
      fn(el, x, s, pg, qr.weights[q] * map.det * pg.sqrt_det);
    }
  }
}

void for_each_interior_facet_point(const Mesh& mesh, const MetricEval& g,
                                   int exactness, const FacetPointFn& fn) {
  const QuadRule qr = quad_rule(mesh.dim - 1, exactness);
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& fc = mesh.facets[f];
    if (fc.boundary) continue;
    const Eigen::Vector3d va = mesh.vertices[fc.v[0]];
    const Eigen::Vector3d t1 = mesh.vertices[fc.v[1]] - va;
    const Eigen::Vector3d t2 = mesh.dim == 3
                                   ? (mesh.vertices[fc.v[2]] - va).eval()
                                   : Eigen::Vector3d::Zero().eval();
    const AffineMap maps[2] = {reference_map(mesh, fc.elem[0]),
                               reference_map(mesh, fc.elem[1])};
    for (int q = 0; q < qr.size(); ++q) {
      const double a = qr.points[q][1];
      const double b = mesh.dim == 3 ? qr.points[q][2] : 0.0;
      const Eigen::Vector3d x = va + a * t1 + b * t2;
      SymTensorSample s[2];
      PointGeometry pg[2];
      FacetFrame fr[2];
      for (int side = 0; side < 2; ++side) {
        s[side] = g.eval(fc.elem[side], ref_coords(maps[side], x), x);
        pg[side] = point_geometry(s[side]);
        if (!(pg[side].det > 0.0))
          throw std::runtime_error(
              "non-positive metric at a facet quadrature point");
        fr[side] = facet_frame(mesh, f, fc.elem[side], s[side]);
      }
      const double mismatch = (fr[0].gF - fr[1].gF).cwiseAbs().maxCoeff();
      if (!(mismatch <= 1e-6 * (1.0 + fr[0].gF.cwiseAbs().maxCoeff())))
        throw std::runtime_error(
            "facet metric mismatch: metric is not tt-continuous");
      fn(fc, x, fr, s, pg, qr.weights[q] * fr[0].sqrt_detF);
    }
  }
}

void for_each_interior_bone_point(const Mesh& mesh, const MetricEval& g,
                                  int exactness, const BonePointFn& fn) {
  if (mesh.dim == 3) {
    const QuadRule qr = quad_rule(1, exactness);
    for (int b = 0; b < mesh.n_bones(); ++b) {
      if (!mesh.bone_rings[b].closed) continue;
      for (int q = 0; q < qr.size(); ++q) {
        const BoneContext bc = bone_context(mesh, b, qr.points[q][1], g);
        fn(bc, qr.weights[q] * bc.line_form);
      }
    }
  } else {
    for (int b = 0; b < mesh.n_bones(); ++b) {
      if (!mesh.bone_rings[b].closed) continue;
      fn(bone_context(mesh, b, 0.0, g), 1.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Contraction helpers

double contract4(const Tensor4& a, const Eigen::Vector3d& x,
                 const Eigen::Vector3d& y, const Eigen::Vector3d& z,
                 const Eigen::Vector3d& w) {
  double acc = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double xy = x[i] * y[j];
      if (xy == 0.0) continue;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) acc += a.c[i][j][k][l] * xy * z[k] * w[l];
    }
  return acc;
}

Eigen::Matrix2d facet_block(const Tensor4& a, const FacetFrame& fr) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  const int nt = fr.dim - 1;
  for (int p = 0; p < nt; ++p)
    for (int q = 0; q < nt; ++q)
      m(p, q) = contract4(a, fr.t[p], fr.nu, fr.nu, fr.t[q]);
  return m;
}

double facet_inner(const FacetFrame& fr, const Eigen::Matrix2d& x,
                   const Eigen::Matrix2d& y) {
  return (fr.gF_inv * x * fr.gF_inv * y).trace();
}

Eigen::Matrix2d facet_restrict(const Eigen::Matrix3d& m,
                               const FacetFrame& fr) {
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  const int nt = fr.dim - 1;
  for (int p = 0; p < nt; ++p)
    for (int q = 0; q < nt; ++q) out(p, q) = fr.t[p].dot(m * fr.t[q]);
  return out;
}

// ---------------------------------------------------------------------------
// Functional kernels. Each functional is a sum of an element, a facet, and a
// bone part; all three are linear in the test value, which lets the direct
// evaluations and the basis assembly share the same code paths.

namespace {

struct TestVals {
  double v = 0.0;                                  // scalar kinds
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();     // matrix kinds
  Tensor4 a;                                       // Riemann
};

double elem_kernel(FunctionalKind kind, const PointGeometry& pg,
                   const TestVals& t) {
  switch (kind) {
    case FunctionalKind::Gauss:
      return gauss_curvature_2d(pg) * t.v;
    case FunctionalKind::Scalar:
      return scalar_curvature(pg) * t.v;
    case FunctionalKind::Ricci:
      return pair_cov(pg, ricci(pg), t.m);
    case FunctionalKind::Einstein:
      return pair_cov(pg, einstein(pg), t.m);
    case FunctionalKind::CurvatureOperator:
      return (curvature_operator_3d(pg).array() * t.m.array()).sum();
    case FunctionalKind::Riemann:
      return inner4(pg, riemann_cov(pg), t.a);
  }
  return 0.0;
}

// One side of a facet term; callers sum over the two sides, which realizes
// the jump with side-wise inward normals.
double facet_side_kernel(FunctionalKind kind, const FacetFrame& fr,
                         const PointGeometry& pg, const TestVals& t) {
  const Eigen::Matrix2d II = second_fundamental_form(pg, fr);
  switch (kind) {
    case FunctionalKind::Gauss:
      return (fr.gF_inv * II).trace() * t.v;
    case FunctionalKind::Scalar:
      return 2.0 * (fr.gF_inv * II).trace() * t.v;
    case FunctionalKind::Ricci: {
      const double rnn = fr.nu.dot(t.m * fr.nu);
      const Eigen::Matrix2d block =
          facet_restrict(t.m, fr) + rnn * fr.gF;
      return facet_inner(fr, II, block);
    }
    case FunctionalKind::Einstein:
      return facet_inner(fr, trace_reversed(II, fr), facet_restrict(t.m, fr));
    case FunctionalKind::CurvatureOperator:
      return -facet_inner(fr, trace_reversed(II, fr), facet_restrict(t.m, fr));
    case FunctionalKind::Riemann:
      return 4.0 * facet_inner(fr, II, facet_block(t.a, fr));
  }
  return 0.0;
}

double bone_kernel(FunctionalKind kind, const BoneContext& bc,
                   const TestVals& t) {
  const BoneSide& s0 = bc.sides.front();
  switch (kind) {
    case FunctionalKind::Gauss:
      return bc.theta * t.v;
    case FunctionalKind::Scalar:
      return 2.0 * bc.theta * t.v;
    case FunctionalKind::Ricci: {
      // rho_nunu + rho_mumu over the normal plane equals tr_g rho - rho_tt,
      // which is single-valued around the ring.
      const double trg = (s0.pg.g_inv * t.m).trace();
      const double rtt = bc.tau.dot(t.m * bc.tau);
      return bc.theta * (trg - rtt);
    }
    case FunctionalKind::Einstein:
      return -bc.theta * bc.tau.dot(t.m * bc.tau);
    case FunctionalKind::CurvatureOperator:
      return bc.theta * bc.tau.dot(t.m * bc.tau);
    case FunctionalKind::Riemann:
      return 4.0 * bc.theta * contract4(t.a, s0.mu, s0.nu, s0.nu, s0.mu);
  }
  return 0.0;
}

bool is_scalar_kind(FunctionalKind kind, int dim) {
  return kind == FunctionalKind::Gauss || kind == FunctionalKind::Scalar ||
         (kind == FunctionalKind::Riemann && dim == 2);
}

void check_kind_dim(FunctionalKind kind, int dim) {
  if (kind == FunctionalKind::Gauss && dim != 2)
    throw std::invalid_argument("Gauss functional is two-dimensional");
  if ((kind == FunctionalKind::Einstein ||
       kind == FunctionalKind::CurvatureOperator) &&
      dim != 3)
    throw std::invalid_argument("functional requires dim 3");
}

// Direct evaluation shared by the public functionals. eval(elem, x, pg)
// produces the test values seen from one element.
double eval_functional(
    FunctionalKind kind, const Mesh& mesh, const MetricEval& g, int k,
    int test_degree,
    const std::function<TestVals(int, const Eigen::Vector3d&,
                                 const PointGeometry&)>& eval,
    const QuadConfig& qc) {
  check_kind_dim(kind, mesh.dim);
  double acc = 0;
  for_each_element_point(
      mesh, g, qc.elem_exactness(k, test_degree),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        acc += w * elem_kernel(kind, pg, eval(elem, x, pg));
      });
  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, test_degree),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample*, const PointGeometry pg[2], double w) {
        for (int side = 0; side < 2; ++side)
          acc += w * facet_side_kernel(kind, fr[side], pg[side],
                                       eval(fc.elem[side], x, pg[side]));
      });
  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, test_degree),
      [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        acc += w * bone_kernel(kind, bc, eval(s0.elem, bc.x, s0.pg));
      });
  return acc;
}

std::function<TestVals(int, const Eigen::Vector3d&, const PointGeometry&)>
scalar_eval(const TestField& v) {
  return [&v](int elem, const Eigen::Vector3d& x, const PointGeometry&) {
    TestVals t;
    t.v = v.scalar(elem, x);
    return t;
  };
}

std::function<TestVals(int, const Eigen::Vector3d&, const PointGeometry&)>
matrix_eval(const TestField& u) {
  return [&u](int elem, const Eigen::Vector3d& x, const PointGeometry&) {
    TestVals t;
    t.m = u.matrix(elem, x);
    return t;
  };
}

void require_scalar(const TestField& v, const char* who) {
  if (v.kind != TestField::Kind::Scalar || !v.scalar)
    throw std::invalid_argument(std::string(who) + ": scalar test required");
}

void require_tt_matrix(const Mesh& mesh, const TestField& u, const char* who) {
  if (u.kind != TestField::Kind::Matrix || !u.matrix)
    throw std::invalid_argument(std::string(who) + ": matrix test required");
  const double defect = tt_continuity_defect(mesh, u, 2);
  if (!(defect <= 1e-7))
    throw std::invalid_argument(std::string(who) +
                                ": test field violates tt-continuity");
}

}  // namespace

double gauss_functional(const Mesh& mesh, const MetricEval& g, int k,
                        const TestField& v, const QuadConfig& qc) {
  require_scalar(v, "gauss_functional");
  return eval_functional(FunctionalKind::Gauss, mesh, g, k, v.degree,
                         scalar_eval(v), qc);
}

double scalar_functional(const Mesh& mesh, const MetricEval& g, int k,
                         const TestField& v, const QuadConfig& qc) {
  require_scalar(v, "scalar_functional");
  return eval_functional(FunctionalKind::Scalar, mesh, g, k, v.degree,
                         scalar_eval(v), qc);
}

double ricci_functional(const Mesh& mesh, const MetricEval& g, int k,
                        const TestField& rho, const QuadConfig& qc) {
  require_tt_matrix(mesh, rho, "ricci_functional");
  const double nn = nn_continuity_defect(mesh, g, rho, 2);
  if (!(nn <= 1e-7))
    throw std::invalid_argument(
        "ricci_functional: test field violates nn-continuity");
  return eval_functional(FunctionalKind::Ricci, mesh, g, k, rho.degree,
                         matrix_eval(rho), qc);
}

double einstein_functional(const Mesh& mesh, const MetricEval& g, int k,
                           const TestField& rho, const QuadConfig& qc) {
  require_tt_matrix(mesh, rho, "einstein_functional");
  return eval_functional(FunctionalKind::Einstein, mesh, g, k, rho.degree,
                         matrix_eval(rho), qc);
}

double curvature_operator_functional(const Mesh& mesh, const MetricEval& g,
                                     int k, const TestField& u,
                                     const QuadConfig& qc) {
  require_tt_matrix(mesh, u, "curvature_operator_functional");
  return eval_functional(FunctionalKind::CurvatureOperator, mesh, g, k,
                         u.degree, matrix_eval(u), qc);
}

double riemann_functional(const Mesh& mesh, const MetricEval& g, int k,
                          const TestField4& a, const QuadConfig& qc) {
  if (!a.eval)
    throw std::invalid_argument("riemann_functional: empty test field");
  return eval_functional(
      FunctionalKind::Riemann, mesh, g, k, a.degree,
      [&a](int elem, const Eigen::Vector3d& x, const PointGeometry& pg) {
        TestVals t;
        t.a = a.eval(elem, x, pg);
        return t;
      },
      qc);
}

// ---------------------------------------------------------------------------
// Assembly against a Lagrange test basis

int n_sym_dirs(int dim) { return dim == 2 ? 3 : 6; }

Eigen::Matrix3d sym_dir(int dim, int d) {
  Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
  auto set = [&e](int i, int j) {
    e(i, j) += 1.0;
    if (i != j) e(j, i) += 1.0;
  };
  if (dim == 2) {
    switch (d) {
      case 0: set(0, 0); break;
      case 1: set(1, 1); break;
      case 2: set(0, 1); break;
      default: throw std::invalid_argument("sym_dir: bad direction");
    }
  } else {
    switch (d) {
      case 0: set(0, 0); break;
      case 1: set(1, 1); break;
      case 2: set(2, 2); break;
      case 3: set(0, 1); break;
      case 4: set(0, 2); break;
      case 5: set(1, 2); break;
      default: throw std::invalid_argument("sym_dir: bad direction");
    }
  }
  return e;
}

namespace {

int dirs_for(FunctionalKind kind, int dim) {
  if (is_scalar_kind(kind, dim)) return 1;
  return n_sym_dirs(dim);
}

// Per-direction test values with unit scalar coefficient; the Lagrange
// factor multiplies the kernel afterwards.
std::vector<TestVals> direction_vals(FunctionalKind kind, int dim,
                                     const PointGeometry& pg) {
  const int nd = dirs_for(kind, dim);
  std::vector<TestVals> vals(nd);
  if (is_scalar_kind(kind, dim)) {
    vals[0].v = 1.0;
    if (kind == FunctionalKind::Riemann) vals[0].a = amap_2d(1.0, pg);
    return vals;
  }
  for (int d = 0; d < nd; ++d) {
    vals[d].m = sym_dir(dim, d);
    if (kind == FunctionalKind::Riemann) vals[d].a = amap_3d(vals[d].m, pg);
  }
  return vals;
}

// Local Lagrange values at a point of one element.
struct BasisEval {
  const LagrangeSpace* space = nullptr;
  MonomialBasis basis;
  Eigen::VectorXd bval, phi;

  explicit BasisEval(const LagrangeSpace& s)
      : space(&s), basis(s.mesh().dim, s.order()),
        bval(basis.size()), phi(basis.size()) {}

  void at(int elem, const Eigen::Vector3d& xref) {
    basis.eval(xref, bval);
    phi.noalias() = space->element_dofs()[elem].coeff.transpose() * bval;
  }
};

}  // namespace

AssembledFunctional assemble_against_basis(FunctionalKind kind,
                                           const Mesh& mesh,
                                           const MetricEval& g, int k,
                                           const LagrangeSpace& test_space,
                                           const QuadConfig& qc) {
  check_kind_dim(kind, mesh.dim);
  const int nd = dirs_for(kind, mesh.dim);
  AssembledFunctional out;
  out.dim = mesh.dim;
  out.n_dirs = nd;
  out.c = Eigen::MatrixXd::Zero(test_space.n_dofs(), nd);
  out.interior.resize(test_space.n_dofs());
  for (int j = 0; j < test_space.n_dofs(); ++j)
    out.interior[j] = !test_space.boundary_dof()[j];

  auto maps = all_maps(mesh);
  BasisEval be(test_space);
  const int td = test_space.order();

  auto scatter = [&](int elem, double w,
                     const std::vector<double>& kern) {
    const std::vector<int>& gids = test_space.element_dofs()[elem].global;
    for (size_t j = 0; j < gids.size(); ++j) {
      const int gid = gids[j];
      if (!out.interior[gid]) continue;
      const double wphi = w * be.phi(j);
      if (wphi == 0.0) continue;
      for (int d = 0; d < nd; ++d) out.c(gid, d) += wphi * kern[d];
    }
  };

  std::vector<double> kern(nd);

  for_each_element_point(
      mesh, g, qc.elem_exactness(k, td),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        const auto dirs = direction_vals(kind, mesh.dim, pg);
        for (int d = 0; d < nd; ++d)
          kern[d] = elem_kernel(kind, pg, dirs[d]);
        be.at(elem, ref_coords((*maps)[elem], x));
        scatter(elem, w, kern);
      });

  for_each_interior_facet_point(
      mesh, g, qc.facet_exactness(k, td),
      [&](const Facet& fc, const Eigen::Vector3d& x, const FacetFrame fr[2],
          const SymTensorSample*, const PointGeometry pg[2], double w) {
        std::fill(kern.begin(), kern.end(), 0.0);
        for (int side = 0; side < 2; ++side) {
          const auto dirs = direction_vals(kind, mesh.dim, pg[side]);
          for (int d = 0; d < nd; ++d)
            kern[d] += facet_side_kernel(kind, fr[side], pg[side], dirs[d]);
        }
        // The Lagrange trace on the facet is single-valued; basis functions
        // without support on it evaluate to zero there.
        be.at(fc.elem[0], ref_coords((*maps)[fc.elem[0]], x));
        scatter(fc.elem[0], w, kern);
      });

  for_each_interior_bone_point(
      mesh, g, qc.facet_exactness(k, td), [&](const BoneContext& bc, double w) {
        const BoneSide& s0 = bc.sides.front();
        const auto dirs = direction_vals(kind, mesh.dim, s0.pg);
        for (int d = 0; d < nd; ++d) kern[d] = bone_kernel(kind, bc, dirs[d]);
        be.at(s0.elem, ref_coords((*maps)[s0.elem], bc.x));
        scatter(s0.elem, w, kern);
      });

  return out;
}

AssembledFunctional assemble_exact(FunctionalKind kind, const Mesh& mesh,
                                   const SmoothMetric& m, int k,
                                   const LagrangeSpace& test_space,
                                   const QuadConfig& qc) {
  check_kind_dim(kind, mesh.dim);
  const int nd = dirs_for(kind, mesh.dim);
  AssembledFunctional out;
  out.dim = mesh.dim;
  out.n_dirs = nd;
  out.c = Eigen::MatrixXd::Zero(test_space.n_dofs(), nd);
  out.interior.resize(test_space.n_dofs());
  for (int j = 0; j < test_space.n_dofs(); ++j)
    out.interior[j] = !test_space.boundary_dof()[j];

  auto maps = all_maps(mesh);
  BasisEval be(test_space);
  SmoothMetricEval geval(m);
  std::vector<double> kern(nd);

  for_each_element_point(
      mesh, geval, qc.elem_exactness(k, test_space.order()),
      [&](int elem, const Eigen::Vector3d& x, const SymTensorSample&,
          const PointGeometry& pg, double w) {
        switch (kind) {
          case FunctionalKind::Gauss:
            kern[0] = m.exact_gauss ? m.exact_gauss(x)
                                    : gauss_curvature_2d(pg);
            break;
          case FunctionalKind::Scalar:
            kern[0] = scalar_curvature(pg);
            break;
          case FunctionalKind::Ricci: {
            const Eigen::Matrix3d ric = ricci(pg);
            for (int d = 0; d < nd; ++d)
              kern[d] = pair_cov(pg, ric, sym_dir(mesh.dim, d));
            break;
          }
          case FunctionalKind::Einstein: {
            const Eigen::Matrix3d G = einstein(pg);
            for (int d = 0; d < nd; ++d)
              kern[d] = pair_cov(pg, G, sym_dir(mesh.dim, d));
            break;
          }
          case FunctionalKind::CurvatureOperator: {
            const Eigen::Matrix3d Q =
                m.exact_q ? m.exact_q(x) : curvature_operator_3d(pg);
            for (int d = 0; d < nd; ++d)
              kern[d] = (Q.array() * sym_dir(3, d).array()).sum();
            break;
          }
          case FunctionalKind::Riemann: {
            if (mesh.dim == 2) {
              kern[0] = 4.0 * (m.exact_gauss ? m.exact_gauss(x)
                                             : gauss_curvature_2d(pg));
            } else {
              const Eigen::Matrix3d Q =
                  m.exact_q ? m.exact_q(x) : curvature_operator_3d(pg);
              for (int d = 0; d < nd; ++d)
                kern[d] = 4.0 * (Q.array() * sym_dir(3, d).array()).sum();
            }
            break;
          }
        }
        be.at(elem, ref_coords((*maps)[elem], x));
        const std::vector<int>& gids = test_space.element_dofs()[elem].global;
        for (size_t j = 0; j < gids.size(); ++j) {
          const int gid = gids[j];
          if (!out.interior[gid]) continue;
          for (int d = 0; d < nd; ++d)
            out.c(gid, d) += w * be.phi(j) * kern[d];
        }
      });

  return out;
}

void write_functional_csv(std::ostream& out, const AssembledFunctional& f) {
  out << "dof,dir,value\n";
  char buf[64];
  for (int j = 0; j < f.c.rows(); ++j)
    for (int d = 0; d < f.n_dirs; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", f.c(j, d));
      out << j << ',' << d << ',' << buf << '\n';
    }
}

}  // namespace regge
