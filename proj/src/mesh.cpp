#include "regge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace regge {

namespace {

// Uniform double in [0,1) from the raw generator output. We do not use
// uniform_real_distribution: its output is implementation-defined and mesh
// reproducibility across standard libraries matters for the CSV outputs.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::Matrix3d edge_matrix(const Mesh& mesh, const std::array<int, 4>& elem) {
  Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
  for (int c = 0; c < mesh.dim; ++c)
    J.col(c) = mesh.vertices[elem[c + 1]] - mesh.vertices[elem[0]];
  if (mesh.dim == 2) J.col(2) = Eigen::Vector3d::UnitZ();
  return J;
}

double signed_det(const Mesh& mesh, const std::array<int, 4>& elem) {
  return edge_matrix(mesh, elem).determinant();
}

int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

void Mesh::finalize() {
  const int nv_facet = dim;           // vertices per facet
  const int ne = n_elements();

  // Positive orientation: swap the last two vertices if needed. Entity
  // canonicalization below uses sorted global ids, so this is harmless.
  for (auto& el : elements) {
    std::sort(el.begin(), el.begin() + dim + 1);
    if (signed_det(*this, el) < 0) std::swap(el[dim - 1], el[dim]);
    if (signed_det(*this, el) <= 0)
      throw std::runtime_error("mesh: degenerate element");
  }

  // Facets keyed by sorted vertex tuple.
  facets.clear();
  elem_facet.assign(ne, {-1, -1, -1, -1});
  std::map<std::array<int, 3>, int> facet_ids;
  for (int e = 0; e < ne; ++e) {
    for (int i = 0; i <= dim; ++i) {
      std::array<int, 3> key{-1, -1, -1};
      int p = 0;
      for (int j = 0; j <= dim; ++j)
        if (j != i) key[p++] = elements[e][j];
      std::sort(key.begin(), key.begin() + nv_facet);
      auto [it, inserted] = facet_ids.try_emplace(key, n_facets());
      if (inserted) {
        Facet f;
        f.v = key;
        facets.push_back(f);
      }
      Facet& f = facets[it->second];
      if (f.elem[0] == -1) {
        f.elem[0] = e;
        f.local[0] = i;
      } else if (f.elem[1] == -1) {
        f.elem[1] = e;
        f.local[1] = i;
      } else {
        throw std::runtime_error("mesh: facet with more than 2 incidences");
      }
      elem_facet[e][i] = it->second;
    }
  }
  for (auto& f : facets) f.boundary = (f.elem[1] == -1);

  // Edges.
  edges.clear();
  std::map<std::array<int, 2>, int> edge_ids;
  for (int e = 0; e < ne; ++e) {
    for (int i = 0; i <= dim; ++i)
      for (int j = i + 1; j <= dim; ++j) {
        std::array<int, 2> key{std::min(elements[e][i], elements[e][j]),
                               std::max(elements[e][i], elements[e][j])};
        auto [it, inserted] = edge_ids.try_emplace(key, static_cast<int>(edges.size()));
        if (inserted) edges.push_back(key);
      }
  }

  // Boundary flags. An edge is a boundary edge iff it is contained in a
  // boundary facet (endpoint membership alone is not enough in 3D).
  vertex_on_boundary.assign(vertices.size(), false);
  edge_on_boundary.assign(edges.size(), false);
  auto facet_contains = [&](const Facet& f, int a, int b) {
    bool ha = false, hb = false;
    for (int q = 0; q < nv_facet; ++q) {
      ha = ha || f.v[q] == a;
      hb = hb || (b < 0 || f.v[q] == b);
    }
    return ha && (b < 0 || hb);
  };
  for (const auto& f : facets) {
    if (!f.boundary) continue;
    for (int q = 0; q < nv_facet; ++q) vertex_on_boundary[f.v[q]] = true;
  }
  for (int k = 0; k < n_edges(); ++k)
    for (const auto& f : facets)
      if (f.boundary && facet_contains(f, edges[k][0], edges[k][1])) {
        edge_on_boundary[k] = true;
        break;
      }

  // Bones: edges in 3D, vertices in 2D. Interior iff not contained in any
  // boundary facet.
  bones.clear();
  if (dim == 3) {
    bones.reserve(edges.size());
    for (int k = 0; k < n_edges(); ++k) {
      Bone b;
      b.v = edges[k];
      b.interior = !edge_on_boundary[k];
      bones.push_back(b);
    }
  } else {
    bones.reserve(vertices.size());
    for (int v = 0; v < n_vertices(); ++v) {
      Bone b;
      b.v = {v, -1};
      b.interior = !vertex_on_boundary[v];
      bones.push_back(b);
    }
  }

  bone_rings = enumerate_rings_impl();
}

namespace {

bool elem_has_vertex(const std::array<int, 4>& el, int dim, int v) {
  for (int i = 0; i <= dim; ++i)
    if (el[i] == v) return true;
  return false;
}

}  // namespace

std::vector<BoneRing> Mesh::enumerate_rings_impl() const {
  // Vertex -> incident elements.
  std::vector<std::vector<int>> v2e(vertices.size());
  for (int e = 0; e < n_elements(); ++e)
    for (int i = 0; i <= dim; ++i) v2e[elements[e][i]].push_back(e);

  auto bone_facets_of_elem = [&](int bone_id, int e) {
    const Bone& b = bones[bone_id];
    std::array<int, 2> out{-1, -1};
    int p = 0;
    for (int i = 0; i <= dim; ++i) {
      const Facet& f = facets[elem_facet[e][i]];
      bool has = true;
      for (int q = 0; q < (dim == 3 ? 2 : 1); ++q) {
        bool found = false;
        for (int r = 0; r < dim; ++r) found = found || f.v[r] == b.v[q];
        has = has && found;
      }
      if (has) {
        if (p >= 2) throw std::runtime_error("mesh: bone in >2 facets of one element");
        out[p++] = elem_facet[e][i];
      }
    }
    if (p != 2) throw std::runtime_error("mesh: bone not in exactly 2 facets of an element");
    return out;
  };

  std::vector<BoneRing> rings;
  rings.reserve(bones.size());
  for (int bid = 0; bid < n_bones(); ++bid) {
    const Bone& b = bones[bid];
    std::vector<int> incident;
    for (int e : v2e[b.v[0]])
      if (dim == 2 || elem_has_vertex(elements[e], dim, b.v[1])) incident.push_back(e);

    BoneRing ring;
    ring.bone = bid;

    // Start element: for open chains start at an element owning a boundary
    // facet through the bone, so the walk sweeps the whole fan.
    int start = incident.front();
    int start_in = -1;
    if (!b.interior) {
      for (int e : incident) {
        auto bf = bone_facets_of_elem(bid, e);
        for (int s = 0; s < 2; ++s)
          if (facets[bf[s]].boundary) {
            start = e;
            start_in = bf[s];
          }
      }
    }

    int cur = start;
    int in_facet = start_in;
    for (std::size_t step = 0; step < incident.size(); ++step) {
      auto bf = bone_facets_of_elem(bid, cur);
      int out_facet = (bf[0] == in_facet) ? bf[1] : bf[0];
      if (in_facet == -1 && step == 0) {
        // interior bone: pick an arbitrary entry facet for the first element
        in_facet = bf[0];
        out_facet = bf[1];
      }
      ring.entries.push_back({cur, in_facet, out_facet});
      const Facet& fo = facets[out_facet];
      int next = (fo.elem[0] == cur) ? fo.elem[1] : fo.elem[0];
      if (next == -1) break;  // hit the boundary (open chain)
      in_facet = out_facet;
      cur = next;
    }
    ring.closed = b.interior && ring.entries.size() == incident.size() &&
                  ring.entries.back().facet_out == ring.entries.front().facet_in &&
                  !ring.entries.empty();
    if (b.interior) {
      if (ring.entries.size() != incident.size() || !ring.closed)
        throw std::runtime_error("mesh: interior bone ring does not close");
    }
    rings.push_back(std::move(ring));
  }
  return rings;
}

double Mesh::element_volume(int e) const {
  return signed_det(*this, elements[e]) / factorial(dim);
}

Eigen::Vector3d Mesh::element_centroid(int e) const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i = 0; i <= dim; ++i) c += vertices[elements[e][i]];
  return c / (dim + 1);
}

Eigen::Vector3d Mesh::facet_centroid(int f) const {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i = 0; i < dim; ++i) c += vertices[facets[f].v[i]];
  return c / dim;
}

Eigen::Vector3d Mesh::facet_inward_normal(int f, int e) const {
  const Facet& fct = facets[f];
  Eigen::Vector3d n;
  if (dim == 3) {
    Eigen::Vector3d a = vertices[fct.v[1]] - vertices[fct.v[0]];
    Eigen::Vector3d b = vertices[fct.v[2]] - vertices[fct.v[0]];
    n = a.cross(b);
  } else {
    Eigen::Vector3d t = vertices[fct.v[1]] - vertices[fct.v[0]];
    n = Eigen::Vector3d(-t.y(), t.x(), 0.0);
  }
  n.normalize();
  // Point into e: toward the vertex of e opposite the facet.
  int local = (fct.elem[0] == e) ? fct.local[0] : fct.local[1];
  if (fct.elem[0] != e && fct.elem[1] != e)
    throw std::runtime_error("mesh: facet_inward_normal with non-incident element");
  Eigen::Vector3d opp = vertices[elements[e][local]] - vertices[fct.v[0]];
  if (n.dot(opp) < 0) n = -n;
  return n;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& ed : edges)
    h = std::max(h, (vertices[ed[1]] - vertices[ed[0]]).norm());
  return h;
}

AffineMap reference_map(const Mesh& mesh, int element) {
  AffineMap m;
  m.origin = mesh.vertices[mesh.elements[element][0]];
  m.J = edge_matrix(mesh, mesh.elements[element]);
  m.J_inv = m.J.inverse();
  m.det = m.J.determinant();  // third column is e_z in 2D, so this is the 2x2 det
  return m;
}

Mesh build_structured_cube_mesh(int level, int dim, double perturb_amplitude,
                                std::uint64_t seed) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("mesh: dim must be 2 or 3");
  if (level < 0) throw std::invalid_argument("mesh: level must be >= 0");

  const int n = 1 << level;
  const double s = 2.0 / n;  // cell size on (-1,1)^dim
  const double h_tilde = std::sqrt(static_cast<double>(dim)) * s;

  Mesh mesh;
  mesh.dim = dim;

  const int nv1 = n + 1;
  auto vid = [&](int ix, int iy, int iz) {
    return ix + nv1 * (iy + (dim == 3 ? nv1 * iz : 0));
  };
  const int nz = (dim == 3) ? nv1 : 1;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < nv1; ++iy)
      for (int ix = 0; ix < nv1; ++ix)
        mesh.vertices.push_back(Eigen::Vector3d(
            -1.0 + s * ix, -1.0 + s * iy, dim == 3 ? -1.0 + s * iz : 0.0));

  std::vector<bool> on_bdry(mesh.vertices.size(), false);
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < nv1; ++iy)
      for (int ix = 0; ix < nv1; ++ix) {
        bool b = ix == 0 || ix == n || iy == 0 || iy == n;
        if (dim == 3) b = b || iz == 0 || iz == n;
        on_bdry[vid(ix, iy, iz)] = b;
      }

  // Elements in canonical construction order; unperturbed determinants are
  // positive by the chosen vertex orders.
  if (dim == 2) {
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        int v00 = vid(ix, iy, 0), v10 = vid(ix + 1, iy, 0);
        int v01 = vid(ix, iy + 1, 0), v11 = vid(ix + 1, iy + 1, 0);
        mesh.elements.push_back({v00, v10, v11, -1});
        mesh.elements.push_back({v00, v11, v01, -1});
      }
  } else {
    // Kuhn split: one tet per permutation pi of the axes, walking from the
    // low corner to the high corner adding e_{pi(0)}, e_{pi(1)}, e_{pi(2)}.
    // All six share the cube's main diagonal.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const int parity[6] = {+1, -1, -1, +1, +1, -1};
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          int c[3] = {ix, iy, iz};
          for (int p = 0; p < 6; ++p) {
            int a[3] = {c[0], c[1], c[2]};
            std::array<int, 4> el{};
            el[0] = vid(a[0], a[1], a[2]);
            for (int q = 0; q < 3; ++q) {
              a[perms[p][q]] += 1;
              el[q + 1] = vid(a[0], a[1], a[2]);
            }
            // Odd permutations give negative volume in this order; swap the
            // two middle vertices to keep the construction-order sign positive.
            if (parity[p] < 0) std::swap(el[1], el[2]);
            mesh.elements.push_back(el);
          }
        }
  }

  // Perturb interior vertices; retry with halved amplitude on inversion.
  if (perturb_amplitude > 0.0) {
    const std::vector<Eigen::Vector3d> base = mesh.vertices;
    double a = perturb_amplitude;
    bool ok = false;
    for (int attempt = 0; attempt <= 8 && !ok; ++attempt) {
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * attempt);
      mesh.vertices = base;
      for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (on_bdry[v]) continue;
        for (int c = 0; c < dim; ++c)
          mesh.vertices[v][c] += a * h_tilde * (2.0 * uniform01(rng) - 1.0);
      }
      ok = true;
      for (const auto& el : mesh.elements)
        ok = ok && signed_det(mesh, el) > 0.0;
      if (!ok) a *= 0.5;
    }
    if (!ok)
      throw std::runtime_error(
          "mesh: perturbation inverts elements even after 8 halvings");
  }

  mesh.finalize();
  return mesh;
}

std::vector<BoneRing> enumerate_bones(const Mesh& mesh) {
  std::vector<BoneRing> out;
  for (const auto& r : mesh.bone_rings)
    if (mesh.bones[r.bone].interior) out.push_back(r);
  return out;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_elements() << '\n';
  out.precision(17);
  for (const auto& v : mesh.vertices) {
    out << v.x() << ' ' << v.y();
    if (mesh.dim == 3) out << ' ' << v.z();
    out << '\n';
  }
  for (const auto& el : mesh.elements) {
    for (int i = 0; i <= mesh.dim; ++i) out << (i ? " " : "") << el[i];
    out << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  int nv = 0, ne = 0;
  if (!(in >> mesh.dim >> nv >> ne)) throw std::runtime_error("mesh: bad header");
  if (mesh.dim != 2 && mesh.dim != 3) throw std::runtime_error("mesh: bad dim");
  mesh.vertices.resize(nv);
  for (int v = 0; v < nv; ++v) {
    double x, y, z = 0.0;
    in >> x >> y;
    if (mesh.dim == 3) in >> z;
    mesh.vertices[v] = Eigen::Vector3d(x, y, z);
  }
  mesh.elements.resize(ne);
  for (int e = 0; e < ne; ++e) {
    mesh.elements[e] = {-1, -1, -1, -1};
    for (int i = 0; i <= mesh.dim; ++i) in >> mesh.elements[e][i];
  }
  if (!in) throw std::runtime_error("mesh: truncated file");
  mesh.finalize();
  return mesh;
}

}  // namespace regge
