#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace regge {

// Affine simplicial meshes of the box (-1,1)^dim, dim = 2 or 3, with full
// facet and codimension-2 adjacency. Vertices are stored as Vector3d with the
// z component zero in 2D; all dimension-dependent loops run over `dim` only.
//
// Element vertex tuples are stored with positive Jacobian determinant. All
// orientation-sensitive quantities downstream (permutation symbols, frame
// handedness) are taken with respect to the global Cartesian frame, so the
// local vertex order never enters any formula.

struct Facet {
  std::array<int, 3> v{-1, -1, -1};   // sorted vertex ids, v[2] unused in 2D
  std::array<int, 2> elem{-1, -1};    // incident elements, elem[1] = -1 on boundary
  std::array<int, 2> local{-1, -1};   // local facet index (opposite vertex) per side
  bool boundary = false;
};

// Codimension-2 entity: an edge in 3D, a vertex in 2D.
struct Bone {
  std::array<int, 2> v{-1, -1};       // sorted vertex ids, v[1] unused in 2D
  bool interior = false;
};

// Ordered walk around a bone. Entry i is (element, facet entered through,
// facet exited through); consecutive entries share a facet. For interior
// bones the walk is cyclic: entry 0 is entered through the facet the last
// entry exits through.
struct BoneRing {
  int bone = -1;
  struct Entry {
    int elem;
    int facet_in;
    int facet_out;
  };
  std::vector<Entry> entries;
  bool closed = false;
};

struct AffineMap {
  Eigen::Vector3d origin;
  Eigen::Matrix3d J;      // columns v_i - v_0; third column e_z in 2D
  Eigen::Matrix3d J_inv;
  double det = 0.0;       // det of the dim x dim block, positive
};

struct Mesh {
  int dim = 3;
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 4>> elements;   // [3] = -1 in 2D
  std::vector<Facet> facets;
  std::vector<std::array<int, 4>> elem_facet; // facet ids, entry i opposite local vertex i
  std::vector<std::array<int, 2>> edges;      // sorted vertex pairs, unique
  std::vector<Bone> bones;                    // same index set as `edges` in 3D
  std::vector<BoneRing> bone_rings;           // one per bone (open chains on boundary bones)
  std::vector<bool> vertex_on_boundary;
  std::vector<bool> edge_on_boundary;         // edge contained in a boundary facet

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_facets() const { return static_cast<int>(facets.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_bones() const { return static_cast<int>(bones.size()); }
  int verts_per_elem() const { return dim + 1; }

  // Rebuilds facets, edges, bones, rings, and boundary flags from
  // vertices/elements; reorients elements to positive determinant.
  void finalize();

  std::vector<BoneRing> enumerate_rings_impl() const;

  double element_volume(int e) const;
  Eigen::Vector3d element_centroid(int e) const;
  Eigen::Vector3d facet_centroid(int f) const;

  // Euclidean inward unit normal of facet f with respect to element e
  // (e must be incident to f).
  Eigen::Vector3d facet_inward_normal(int f, int e) const;

  double max_edge_length() const;
};

AffineMap reference_map(const Mesh& mesh, int element);

// Structured family on (-1,1)^dim: 2^level cells per axis, Kuhn subdivision
// (6 tets per cube) in 3D, diagonal split (2 triangles per square) in 2D.
// Interior vertices are perturbed componentwise by uniform samples in
// [-a*h_tilde, a*h_tilde] where a = perturb_amplitude and h_tilde =
// sqrt(dim)*2^(1-level) is the maximal element diameter of the unperturbed
// mesh. Boundary vertices stay put. Perturbations that invert an element are
// rejected and retried with halved amplitude, at most 8 times.
Mesh build_structured_cube_mesh(int level, int dim, double perturb_amplitude,
                                std::uint64_t seed);

std::vector<BoneRing> enumerate_bones(const Mesh& mesh);

// Plain-text format: header "dim nv ne", nv coordinate lines, ne element
// lines of 0-based vertex indices.
void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);

}  // namespace regge
