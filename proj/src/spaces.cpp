#include "regge/spaces.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "regge/quadrature.hpp"

namespace regge {

namespace {

// Shifted Legendre value P_i(2s - 1), s in [0,1].
double legendre01(int i, double s) {
  double t = 2.0 * s - 1.0;
  double p0 = 1.0, p1 = t;
  if (i == 0) return p0;
  if (i == 1) return p1;
  for (int n = 1; n < i; ++n) {
    double p2 = ((2 * n + 1) * t * p1 - n * p0) / (n + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Eigen::Matrix3d sym_unit(int c) {
  const auto& pr = sym_pairs()[c];
  Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
  e(pr.first, pr.second) += 1.0;
  e(pr.second, pr.first) += 1.0;
  if (pr.first == pr.second) e(pr.first, pr.second) = 1.0;
  return e;
}

struct EdgeKey {
  int a, b;
  bool operator<(const EdgeKey& o) const {
    return a != o.a ? a < o.a : b < o.b;
  }
};

std::map<EdgeKey, int> edge_lookup(const Mesh& mesh) {
  std::map<EdgeKey, int> m;
  for (int e = 0; e < mesh.n_edges(); ++e)
    m[{mesh.edges[e][0], mesh.edges[e][1]}] = e;
  return m;
}

// Local vertex pairs of the element edges, fixed enumeration.
std::vector<std::pair<int, int>> local_edges(int dim) {
  if (dim == 2) return {{0, 1}, {0, 2}, {1, 2}};
  return {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
}

Eigen::Vector3d to_ref(const AffineMap& map, const Eigen::Vector3d& x) {
  return map.J_inv * (x - map.origin);
}

}  // namespace

// ---------------------------------------------------------------------------
// Regge elements

ReggeSpace::ReggeSpace(const Mesh& mesh, int order) : mesh_(&mesh), order_(order) {
  if (order < 0) throw std::invalid_argument("ReggeSpace: order must be >= 0");
  const int dim = mesh.dim;
  const int k = order;
  const int nep = k + 1;                       // moments per edge
  const int nfc = 3 * dim_poly(2, k - 1);      // per 3D facet
  const int nic = (dim == 2) ? 3 * dim_poly(2, k - 1)
                             : 6 * dim_poly(3, k - 2);  // interior per element

  const int edge_base = 0;
  const int face_base = mesh.n_edges() * nep;
  const int cell_base =
      face_base + (dim == 3 ? mesh.n_facets() * nfc : 0);
  n_dofs_ = cell_base + mesh.n_elements() * nic;

  boundary_.assign(n_dofs_, false);
  for (int e = 0; e < mesh.n_edges(); ++e)
    if (mesh.edge_on_boundary[e])
      for (int i = 0; i < nep; ++i) boundary_[edge_base + e * nep + i] = true;
  if (dim == 3)
    for (int f = 0; f < mesh.n_facets(); ++f)
      if (mesh.facets[f].boundary)
        for (int i = 0; i < nfc; ++i) boundary_[face_base + f * nfc + i] = true;

  auto edges = edge_lookup(mesh);
  auto ledges = local_edges(dim);
  const MonomialBasis basis(dim, k);
  const int M = basis.size();
  const int ncomp = n_sym_comps(dim);
  const int nloc = M * ncomp;

  const QuadRule qr_edge = quad_rule(1, 2 * k + 1);
  const QuadRule qr_face = quad_rule(2, 2 * k + 1);
  const QuadRule qr_cell = quad_rule(dim, 2 * k + 1);
  const MonomialBasis face_poly(2, k - 1 >= 0 ? k - 1 : 0);
  const MonomialBasis cell_poly(dim, dim == 2 ? (k - 1 >= 0 ? k - 1 : 0)
                                              : (k - 2 >= 0 ? k - 2 : 0));

  elem_dofs_.resize(mesh.n_elements());
  Eigen::VectorXd bval(M);

  for (int el = 0; el < mesh.n_elements(); ++el) {
    const AffineMap map = reference_map(mesh, el);
    ElementDofs& ed = elem_dofs_[el];
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nloc, nloc);
    int row = 0;

    // Edge tt-moments against shifted Legendre polynomials. The edge
    // direction and arc parameter come from the sorted global vertex pair,
    // so the two incident elements build identical functionals.
    for (const auto& le : ledges) {
      int ga = mesh.elements[el][le.first];
      int gb = mesh.elements[el][le.second];
      if (ga > gb) std::swap(ga, gb);
      const int edge = edges.at({ga, gb});
      const Eigen::Vector3d va = mesh.vertices[ga];
      const Eigen::Vector3d t = mesh.vertices[gb] - va;
      for (int i = 0; i < nep; ++i) {
        for (int q = 0; q < qr_edge.size(); ++q) {
          const double s = qr_edge.points[q][1];
          const double w = qr_edge.weights[q] * legendre01(i, s);
          basis.eval(to_ref(map, va + s * t), bval);
          for (int c = 0; c < ncomp; ++c) {
            const double tt = t.dot(sym_unit(c) * t);
            for (int m = 0; m < M; ++m) V(row, c * M + m) += w * tt * bval(m);
          }
        }
        ed.global.push_back(edge_base + edge * nep + i);
        ++row;
      }
    }

    // Facet tt-moments in 3D: the three tangential pairings (t1,t1),
    // (t2,t2), (t1,t2) against P^{k-1} monomials in the facet chart spanned
    // by the sorted vertices.
    if (dim == 3 && nfc > 0) {
      for (int lf = 0; lf < 4; ++lf) {
        const int f = mesh.elem_facet[el][lf];
        const auto& fv = mesh.facets[f].v;
        const Eigen::Vector3d va = mesh.vertices[fv[0]];
        const Eigen::Vector3d t1 = mesh.vertices[fv[1]] - va;
        const Eigen::Vector3d t2 = mesh.vertices[fv[2]] - va;
        const Eigen::Vector3d tp[3][2] = {{t1, t1}, {t2, t2}, {t1, t2}};
        Eigen::VectorXd qval(face_poly.size());
        for (int p = 0; p < 3; ++p) {
          for (int m2 = 0; m2 < face_poly.size(); ++m2) {
            for (int q = 0; q < qr_face.size(); ++q) {
              const double u = qr_face.points[q][1];
              const double v = qr_face.points[q][2];
              face_poly.eval(Eigen::Vector3d(u, v, 0), qval);
              const double w = qr_face.weights[q] * qval(m2);
              basis.eval(to_ref(map, va + u * t1 + v * t2), bval);
              for (int c = 0; c < ncomp; ++c) {
                const double tt = tp[p][0].dot(sym_unit(c) * tp[p][1]);
                for (int m = 0; m < M; ++m)
                  V(row, c * M + m) += w * tt * bval(m);
              }
            }
            ed.global.push_back(face_base + f * nfc + p * face_poly.size() + m2);
            ++row;
          }
        }
      }
    }

    // Interior moments against unit symmetric directions times monomials in
    // the element reference chart.
    if (nic > 0) {
      Eigen::VectorXd qval(cell_poly.size());
      for (int c2 = 0; c2 < ncomp; ++c2) {
        for (int m2 = 0; m2 < cell_poly.size(); ++m2) {
          for (int q = 0; q < qr_cell.size(); ++q) {
            const Eigen::Vector3d xr = qr_cell.ref_point(q);
            cell_poly.eval(xr, qval);
            basis.eval(xr, bval);
            const double w = qr_cell.weights[q] * qval(m2);
            const Eigen::Matrix3d dir = sym_unit(c2);
            for (int c = 0; c < ncomp; ++c) {
              const double dd = (sym_unit(c).array() * dir.array()).sum();
              for (int m = 0; m < M; ++m)
                V(row, c * M + m) += w * dd * bval(m);
            }
          }
          ed.global.push_back(cell_base + el * nic + c2 * cell_poly.size() + m2);
          ++row;
        }
      }
    }

    if (row != nloc)
      throw std::logic_error("ReggeSpace: dof count mismatch");
    ed.coeff = V.inverse();
    const double check = (V * ed.coeff - Eigen::MatrixXd::Identity(nloc, nloc))
                             .cwiseAbs()
                             .maxCoeff();
    if (!(check < 1e-6))
      throw std::runtime_error("ReggeSpace: singular element matrix");
  }
}

std::vector<PolySymTensor> ReggeSpace::expand(const Eigen::VectorXd& u) const {
  const Mesh& mesh = *mesh_;
  const int M = dim_poly(mesh.dim, order_);
  const int ncomp = n_sym_comps(mesh.dim);
  std::vector<PolySymTensor> out(mesh.n_elements());
  for (int el = 0; el < mesh.n_elements(); ++el) {
    const ElementDofs& ed = elem_dofs_[el];
    PolySymTensor p(mesh.dim, order_);
    Eigen::VectorXd local(ed.global.size());
    for (size_t j = 0; j < ed.global.size(); ++j) local(j) = u(ed.global[j]);
    const Eigen::VectorXd c = ed.coeff * local;
    for (int comp = 0; comp < ncomp; ++comp)
      p.coeff.col(comp) = c.segment(comp * M, M);
    out[el] = std::move(p);
  }
  return out;
}

Eigen::VectorXd ReggeSpace::interpolate(
    const std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>& g) const {
  const Mesh& mesh = *mesh_;
  const int dim = mesh.dim;
  const int k = order_;
  const int nep = k + 1;
  const int nfc = 3 * dim_poly(2, k - 1);
  const int nic = (dim == 2) ? 3 * dim_poly(2, k - 1) : 6 * dim_poly(3, k - 2);
  const int face_base = mesh.n_edges() * nep;
  const int cell_base = face_base + (dim == 3 ? mesh.n_facets() * nfc : 0);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_dofs_);
  const QuadRule qr_edge = quad_rule(1, 2 * k + 8);
  const QuadRule qr_face = quad_rule(2, 2 * k + 8);
  const QuadRule qr_cell = quad_rule(dim, 2 * k + 8);

  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Eigen::Vector3d va = mesh.vertices[mesh.edges[e][0]];
    const Eigen::Vector3d t = mesh.vertices[mesh.edges[e][1]] - va;
    for (int i = 0; i < nep; ++i) {
      double acc = 0;
      for (int q = 0; q < qr_edge.size(); ++q) {
        const double s = qr_edge.points[q][1];
        acc += qr_edge.weights[q] * legendre01(i, s) *
               t.dot(g(va + s * t) * t);
      }
      u(e * nep + i) = acc;
    }
  }
  if (dim == 3 && nfc > 0) {
    const MonomialBasis face_poly(2, k - 1);
    Eigen::VectorXd qv(face_poly.size());
    for (int f = 0; f < mesh.n_facets(); ++f) {
      const auto& fv = mesh.facets[f].v;
      const Eigen::Vector3d va = mesh.vertices[fv[0]];
      const Eigen::Vector3d t1 = mesh.vertices[fv[1]] - va;
      const Eigen::Vector3d t2 = mesh.vertices[fv[2]] - va;
      const Eigen::Vector3d tp[3][2] = {{t1, t1}, {t2, t2}, {t1, t2}};
      for (int p = 0; p < 3; ++p)
        for (int m = 0; m < face_poly.size(); ++m) {
          double acc = 0;
          for (int q = 0; q < qr_face.size(); ++q) {
            const double a = qr_face.points[q][1];
            const double b = qr_face.points[q][2];
            face_poly.eval(Eigen::Vector3d(a, b, 0), qv);
            acc += qr_face.weights[q] * qv(m) *
                   tp[p][0].dot(g(va + a * t1 + b * t2) * tp[p][1]);
          }
          u(face_base + f * nfc + p * face_poly.size() + m) = acc;
        }
    }
  }
  if (nic > 0) {
    const MonomialBasis cell_poly(dim, dim == 2 ? k - 1 : k - 2);
    Eigen::VectorXd qv(cell_poly.size());
    for (int el = 0; el < mesh.n_elements(); ++el) {
      const AffineMap map = reference_map(mesh, el);
      for (int c2 = 0; c2 < n_sym_comps(dim); ++c2)
        for (int m = 0; m < cell_poly.size(); ++m) {
          double acc = 0;
          for (int q = 0; q < qr_cell.size(); ++q) {
            const Eigen::Vector3d xr = qr_cell.ref_point(q);
            cell_poly.eval(xr, qv);
            const Eigen::Vector3d x = map.origin + map.J * xr;
            acc += qr_cell.weights[q] * qv(m) *
                   (g(x).array() * sym_unit(c2).array()).sum();
          }
          u(cell_base + el * nic + c2 * cell_poly.size() + m) = acc;
        }
    }
  }
  return u;
}

double ReggeSpace::tt_jump(const Eigen::VectorXd& u,
                           int samples_per_facet) const {
  const Mesh& mesh = *mesh_;
  auto elems = expand(u);
  double worst = 0;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& fc = mesh.facets[f];
    if (fc.boundary) continue;
    const Eigen::Vector3d va = mesh.vertices[fc.v[0]];
    const Eigen::Vector3d t1 = mesh.vertices[fc.v[1]] - va;
    const Eigen::Vector3d t2 =
        mesh.dim == 3 ? (mesh.vertices[fc.v[2]] - va).eval()
                      : Eigen::Vector3d::Zero().eval();
    AffineMap m0 = reference_map(mesh, fc.elem[0]);
    AffineMap m1 = reference_map(mesh, fc.elem[1]);
    for (int s = 0; s < samples_per_facet; ++s) {
      double a = (s + 0.37) / samples_per_facet;
      double b = mesh.dim == 3 ? 0.7 * (1.0 - a) * (s % 2 ? 0.31 : 0.62) : 0.0;
      const Eigen::Vector3d x = va + a * t1 + b * t2;
      const Eigen::Matrix3d s0 = elems[fc.elem[0]].value(to_ref(m0, x));
      const Eigen::Matrix3d s1 = elems[fc.elem[1]].value(to_ref(m1, x));
      const Eigen::Matrix3d d = s0 - s1;
      worst = std::max(worst, std::abs(t1.dot(d * t1)));
      if (mesh.dim == 3) {
        worst = std::max(worst, std::abs(t2.dot(d * t2)));
        worst = std::max(worst, std::abs(t1.dot(d * t2)));
      }
    }
  }
  return worst;
}

MetricField make_field(const ReggeSpace& space, const Eigen::VectorXd& u) {
  MetricField f;
  f.mesh = &space.mesh();
  f.order = space.order();
  f.elem = space.expand(u);
  return f;
}

FieldMetric::FieldMetric(const MetricField& f) : f_(&f) {
  maps_.reserve(f.mesh->n_elements());
  for (int e = 0; e < f.mesh->n_elements(); ++e)
    maps_.push_back(reference_map(*f.mesh, e));
}

SymTensorSample FieldMetric::eval(int elem, const Eigen::Vector3d& xref,
                                  const Eigen::Vector3d&) const {
  return f_->elem[elem].sample(xref, maps_[elem]);
}

// ---------------------------------------------------------------------------
// Lagrange elements

namespace {

// Reference-coordinate lattice nodes of P_m on the dim-simplex, grouped by
// entity so global numbering can be shared: vertex nodes, then per-edge
// interior nodes in sorted-vertex order, then per-facet interior nodes (3D),
// then cell-interior nodes.
struct Lattice {
  std::vector<Eigen::Vector3d> vertex;  // size dim+1
};

}  // namespace

LagrangeSpace::LagrangeSpace(const Mesh& mesh, int order)
    : mesh_(&mesh), order_(order) {
  if (order < 1) throw std::invalid_argument("LagrangeSpace: order must be >= 1");
  const int dim = mesh.dim;
  const int m = order;
  const int npe = m - 1;                                  // per edge
  const int npf = dim == 3 ? (m - 1) * (m - 2) / 2 : 0;   // per 3D facet
  int npc;                                                // per cell
  if (dim == 2)
    npc = std::max(0, (m - 1) * (m - 2) / 2);
  else
    npc = std::max(0, (m - 1) * (m - 2) * (m - 3) / 6);

  const int edge_base = mesh.n_vertices();
  const int face_base = edge_base + mesh.n_edges() * npe;
  const int cell_base = face_base + (dim == 3 ? mesh.n_facets() * npf : 0);
  n_dofs_ = cell_base + mesh.n_elements() * npc;

  boundary_.assign(n_dofs_, false);
  nodes_.assign(n_dofs_, Eigen::Vector3d::Zero());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    boundary_[v] = mesh.vertex_on_boundary[v];
    nodes_[v] = mesh.vertices[v];
  }
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Eigen::Vector3d va = mesh.vertices[mesh.edges[e][0]];
    const Eigen::Vector3d vb = mesh.vertices[mesh.edges[e][1]];
    for (int i = 1; i <= npe; ++i) {
      const int dof = edge_base + e * npe + (i - 1);
      nodes_[dof] = va + (double(i) / m) * (vb - va);
      boundary_[dof] = mesh.edge_on_boundary[e];
    }
  }
  if (dim == 3 && npf > 0) {
    for (int f = 0; f < mesh.n_facets(); ++f) {
      const auto& fv = mesh.facets[f].v;
      const Eigen::Vector3d va = mesh.vertices[fv[0]];
      const Eigen::Vector3d t1 = mesh.vertices[fv[1]] - va;
      const Eigen::Vector3d t2 = mesh.vertices[fv[2]] - va;
      int idx = 0;
      for (int i = 1; i < m; ++i)
        for (int j = 1; i + j < m; ++j, ++idx) {
          const int dof = face_base + f * npf + idx;
          nodes_[dof] = va + (double(i) / m) * t1 + (double(j) / m) * t2;
          boundary_[dof] = mesh.facets[f].boundary;
        }
    }
  }

  auto edges = edge_lookup(mesh);
  auto ledges = local_edges(dim);
  const MonomialBasis basis(dim, m);
  const int nloc = basis.size();
  elem_dofs_.resize(mesh.n_elements());
  Eigen::VectorXd bval(nloc);

  for (int el = 0; el < mesh.n_elements(); ++el) {
    const AffineMap map = reference_map(mesh, el);
    ElementDofs& ed = elem_dofs_[el];
    std::vector<Eigen::Vector3d> pts;

    for (int lv = 0; lv <= dim; ++lv) {
      ed.global.push_back(mesh.elements[el][lv]);
      pts.push_back(mesh.vertices[mesh.elements[el][lv]]);
    }
    for (const auto& le : ledges) {
      int ga = mesh.elements[el][le.first];
      int gb = mesh.elements[el][le.second];
      if (ga > gb) std::swap(ga, gb);
      const int e = edges.at({ga, gb});
      for (int i = 1; i <= npe; ++i) {
        const int dof = edge_base + e * npe + (i - 1);
        ed.global.push_back(dof);
        pts.push_back(nodes_[dof]);
      }
    }
    if (dim == 3 && npf > 0) {
      for (int lf = 0; lf < 4; ++lf) {
        const int f = mesh.elem_facet[el][lf];
        for (int i = 0; i < npf; ++i) {
          const int dof = face_base + f * npf + i;
          ed.global.push_back(dof);
          pts.push_back(nodes_[dof]);
        }
      }
    }
    if (npc > 0) {
      int idx = 0;
      const Eigen::Vector3d v0 = mesh.vertices[mesh.elements[el][0]];
      Eigen::Vector3d t[3];
      for (int d = 0; d < dim; ++d)
        t[d] = mesh.vertices[mesh.elements[el][d + 1]] - v0;
      if (dim == 2) {
        for (int i = 1; i < m; ++i)
          for (int j = 1; i + j < m; ++j, ++idx) {
            const int dof = cell_base + el * npc + idx;
            nodes_[dof] = v0 + (double(i) / m) * t[0] + (double(j) / m) * t[1];
            ed.global.push_back(dof);
            pts.push_back(nodes_[dof]);
          }
      } else {
        for (int i = 1; i < m; ++i)
          for (int j = 1; i + j < m; ++j)
            for (int l = 1; i + j + l < m; ++l, ++idx) {
              const int dof = cell_base + el * npc + idx;
              nodes_[dof] = v0 + (double(i) / m) * t[0] +
                            (double(j) / m) * t[1] + (double(l) / m) * t[2];
              ed.global.push_back(dof);
              pts.push_back(nodes_[dof]);
            }
      }
    }

    if (int(pts.size()) != nloc)
      throw std::logic_error("LagrangeSpace: node count mismatch");
    Eigen::MatrixXd V(nloc, nloc);
    for (int r = 0; r < nloc; ++r) {
      basis.eval(to_ref(map, pts[r]), bval);
      V.row(r) = bval.transpose();
    }
    ed.coeff = V.inverse();
  }
}

std::vector<PolyScalar> LagrangeSpace::expand(const Eigen::VectorXd& u) const {
  const Mesh& mesh = *mesh_;
  std::vector<PolyScalar> out(mesh.n_elements());
  for (int el = 0; el < mesh.n_elements(); ++el) {
    const ElementDofs& ed = elem_dofs_[el];
    PolyScalar p(mesh.dim, order_);
    Eigen::VectorXd local(ed.global.size());
    for (size_t j = 0; j < ed.global.size(); ++j) local(j) = u(ed.global[j]);
    p.coeff = ed.coeff * local;
    out[el] = std::move(p);
  }
  return out;
}

Eigen::VectorXd LagrangeSpace::interpolate(
    const std::function<double(const Eigen::Vector3d&)>& f) const {
  Eigen::VectorXd u(n_dofs_);
  for (int j = 0; j < n_dofs_; ++j) u(j) = f(nodes_[j]);
  return u;
}

// ---------------------------------------------------------------------------
// Hellan-Herrmann-Johnson elements

HHJSpace::HHJSpace(const Mesh& mesh, int order) : mesh_(&mesh), order_(order) {
  if (order < 0) throw std::invalid_argument("HHJSpace: order must be >= 0");
  const int dim = mesh.dim;
  const int r = order;
  const int nnf = dim_poly(dim - 1, r);  // nn-moments per facet
  const MonomialBasis basis(dim, r);
  const int M = basis.size();
  const int ncomp = n_sym_comps(dim);
  const int nloc = M * ncomp;
  const int nif = nloc - (dim + 1) * nnf;  // interior per element
  if (nif < 0) throw std::logic_error("HHJSpace: negative interior count");

  const int cell_base = mesh.n_facets() * nnf;
  n_dofs_ = cell_base + mesh.n_elements() * nif;
  boundary_.assign(n_dofs_, false);
  for (int f = 0; f < mesh.n_facets(); ++f)
    if (mesh.facets[f].boundary)
      for (int i = 0; i < nnf; ++i) boundary_[f * nnf + i] = true;

  const QuadRule qr_facet = quad_rule(dim - 1, 2 * r + 1);
  const QuadRule qr_cell = quad_rule(dim, 2 * r + 1);
  const MonomialBasis facet_poly(dim - 1, r);

  // L2 Gram of the local basis on the reference element, used to express
  // the interior functionals through the facet-moment null space.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nloc, nloc);
  {
    Eigen::VectorXd bv(M);
    for (int q = 0; q < qr_cell.size(); ++q) {
      basis.eval(qr_cell.ref_point(q), bv);
      Eigen::MatrixXd mm = qr_cell.weights[q] * bv * bv.transpose();
      for (int c = 0; c < ncomp; ++c) {
        const double dd =
            (sym_unit(c).array() * sym_unit(c).array()).sum();
        G.block(c * M, c * M, M, M) += dd * mm;
      }
    }
  }

  elem_dofs_.resize(mesh.n_elements());
  Eigen::VectorXd bval(M), qv(facet_poly.size());

  for (int el = 0; el < mesh.n_elements(); ++el) {
    const AffineMap map = reference_map(mesh, el);
    ElementDofs& ed = elem_dofs_[el];
    Eigen::MatrixXd Mf = Eigen::MatrixXd::Zero((dim + 1) * nnf, nloc);
    int row = 0;

    for (int lf = 0; lf <= dim; ++lf) {
      const int f = mesh.elem_facet[el][lf];
      const auto& fv = mesh.facets[f].v;
      const Eigen::Vector3d va = mesh.vertices[fv[0]];
      const Eigen::Vector3d t1 = mesh.vertices[fv[1]] - va;
      Eigen::Vector3d t2 = Eigen::Vector3d::Zero();
      Eigen::Vector3d nhat;
      if (dim == 3) {
        t2 = mesh.vertices[fv[2]] - va;
        nhat = t1.cross(t2).normalized();
      } else {
        nhat = Eigen::Vector3d(t1.y(), -t1.x(), 0).normalized();
      }
      for (int i = 0; i < nnf; ++i) {
        for (int q = 0; q < qr_facet.size(); ++q) {
          const double a = qr_facet.points[q][1];
          const double b = dim == 3 ? qr_facet.points[q][2] : 0.0;
          facet_poly.eval(Eigen::Vector3d(a, b, 0), qv);
          const double w = qr_facet.weights[q] * qv(i);
          basis.eval(to_ref(map, va + a * t1 + b * t2), bval);
          for (int c = 0; c < ncomp; ++c) {
            const double nn = nhat.dot(sym_unit(c) * nhat);
            for (int m = 0; m < M; ++m)
              Mf(row, c * M + m) += w * nn * bval(m);
          }
        }
        ed.global.push_back(f * nnf + i);
        ++row;
      }
    }

    Eigen::MatrixXd V(nloc, nloc);
    V.topRows(row) = Mf;
    if (nif > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          Mf, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::MatrixXd N = svd.matrixV().rightCols(nif);
      V.bottomRows(nif) = N.transpose() * G;
      for (int i = 0; i < nif; ++i)
        ed.global.push_back(cell_base + el * nif + i);
    }
    ed.coeff = V.inverse();
    const double check = (V * ed.coeff - Eigen::MatrixXd::Identity(nloc, nloc))
                             .cwiseAbs()
                             .maxCoeff();
    if (!(check < 1e-6))
      throw std::runtime_error("HHJSpace: singular element matrix");
  }
}

std::vector<PolySymTensor> HHJSpace::expand(const Eigen::VectorXd& u) const {
  const Mesh& mesh = *mesh_;
  const int M = dim_poly(mesh.dim, order_);
  const int ncomp = n_sym_comps(mesh.dim);
  std::vector<PolySymTensor> out(mesh.n_elements());
  for (int el = 0; el < mesh.n_elements(); ++el) {
    const ElementDofs& ed = elem_dofs_[el];
    PolySymTensor p(mesh.dim, order_);
    Eigen::VectorXd local(ed.global.size());
    for (size_t j = 0; j < ed.global.size(); ++j) local(j) = u(ed.global[j]);
    const Eigen::VectorXd c = ed.coeff * local;
    for (int comp = 0; comp < ncomp; ++comp)
      p.coeff.col(comp) = c.segment(comp * M, M);
    out[el] = std::move(p);
  }
  return out;
}

double HHJSpace::nn_jump(const Eigen::VectorXd& u, int samples_per_facet) const {
  const Mesh& mesh = *mesh_;
  auto elems = expand(u);
  double worst = 0;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& fc = mesh.facets[f];
    if (fc.boundary) continue;
    const Eigen::Vector3d va = mesh.vertices[fc.v[0]];
    const Eigen::Vector3d t1 = mesh.vertices[fc.v[1]] - va;
    Eigen::Vector3d t2 = Eigen::Vector3d::Zero();
    Eigen::Vector3d nhat;
    if (mesh.dim == 3) {
      t2 = mesh.vertices[fc.v[2]] - va;
      nhat = t1.cross(t2).normalized();
    } else {
      nhat = Eigen::Vector3d(t1.y(), -t1.x(), 0).normalized();
    }
    AffineMap m0 = reference_map(mesh, fc.elem[0]);
    AffineMap m1 = reference_map(mesh, fc.elem[1]);
    for (int s = 0; s < samples_per_facet; ++s) {
      double a = (s + 0.41) / samples_per_facet;
      double b = mesh.dim == 3 ? 0.8 * (1.0 - a) * (s % 2 ? 0.27 : 0.55) : 0.0;
      const Eigen::Vector3d x = va + a * t1 + b * t2;
      const Eigen::Matrix3d d = elems[fc.elem[0]].value(to_ref(m0, x)) -
                                elems[fc.elem[1]].value(to_ref(m1, x));
      worst = std::max(worst, std::abs(nhat.dot(d * nhat)));
    }
  }
  return worst;
}

void write_coeffs_csv(std::ostream& out, const Eigen::VectorXd& u) {
  out << "dof,value\n";
  for (int i = 0; i < u.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", u(i));
    out << i << ',' << buf << '\n';
  }
}

}  // namespace regge
