#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "regge/mesh.hpp"

using namespace regge;

TEST_SUITE("mesh") {
  TEST_CASE("level 0 entity counts") {
    const Mesh m3 = build_structured_cube_mesh(0, 3, 0.0, 1);
    CHECK(m3.n_vertices() == 8);
    CHECK(m3.n_elements() == 6);
    CHECK(m3.n_facets() == 18);
    CHECK(m3.n_edges() == 19);
    CHECK(m3.n_bones() == 19);

    const Mesh m2 = build_structured_cube_mesh(0, 2, 0.0, 1);
    CHECK(m2.n_vertices() == 4);
    CHECK(m2.n_elements() == 2);
    CHECK(m2.n_facets() == 5);
    CHECK(m2.n_bones() == 4);
  }

  TEST_CASE("element count scales like 2^(dim*level)") {
    for (int level : {1, 2}) {
      const Mesh m3 = build_structured_cube_mesh(level, 3, 0.0, 1);
      CHECK(m3.n_elements() == 6 << (3 * level));
      const Mesh m2 = build_structured_cube_mesh(level, 2, 0.0, 1);
      CHECK(m2.n_elements() == 2 << (2 * level));
    }
  }

  TEST_CASE("volumes sum to the box volume") {
    for (int dim : {2, 3}) {
      for (double amp : {0.0, std::pow(2.0, -3.5)}) {
        const Mesh m = build_structured_cube_mesh(1, dim, amp, 3);
        double vol = 0.0;
        for (int e = 0; e < m.n_elements(); ++e) {
          CHECK(m.element_volume(e) > 0.0);
          vol += m.element_volume(e);
        }
        CHECK(vol == doctest::Approx(dim == 2 ? 4.0 : 8.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("max edge length of the unperturbed family") {
    for (int dim : {2, 3})
      for (int level : {0, 1, 2}) {
        const Mesh m = build_structured_cube_mesh(level, dim, 0.0, 1);
        CHECK(m.max_edge_length() ==
              doctest::Approx(std::sqrt(double(dim)) *
                              std::pow(2.0, 1 - level))
                  .epsilon(1e-12));
      }
  }

  TEST_CASE("perturbation is deterministic and boundary-fixing") {
    const Mesh a = build_structured_cube_mesh(2, 3, std::pow(2.0, -3.5), 42);
    const Mesh b = build_structured_cube_mesh(2, 3, std::pow(2.0, -3.5), 42);
    const Mesh c = build_structured_cube_mesh(2, 3, std::pow(2.0, -3.5), 43);
    const Mesh flat = build_structured_cube_mesh(2, 3, 0.0, 42);
    REQUIRE(a.n_vertices() == b.n_vertices());
    double same = 0.0, other = 0.0, moved = 0.0;
    for (int v = 0; v < a.n_vertices(); ++v) {
      same = std::max(same, (a.vertices[v] - b.vertices[v]).norm());
      other = std::max(other, (a.vertices[v] - c.vertices[v]).norm());
      if (a.vertex_on_boundary[v]) {
        CHECK((a.vertices[v] - flat.vertices[v]).norm() == 0.0);
      } else {
        moved = std::max(moved, (a.vertices[v] - flat.vertices[v]).norm());
      }
    }
    CHECK(same == 0.0);
    CHECK(other > 0.0);
    CHECK(moved > 0.0);
  }

  TEST_CASE("interior bone rings close") {
    const Mesh m = build_structured_cube_mesh(1, 3, std::pow(2.0, -3.5), 7);
    int interior = 0;
    for (const BoneRing& ring : m.bone_rings) {
      if (!m.bones[ring.bone].interior) continue;
      ++interior;
      REQUIRE(ring.entries.size() >= 3);
      CHECK(ring.closed);
      for (size_t i = 0; i < ring.entries.size(); ++i) {
        const auto& cur = ring.entries[i];
        const auto& nxt = ring.entries[(i + 1) % ring.entries.size()];
        CHECK(cur.facet_out == nxt.facet_in);
      }
    }
    CHECK(interior > 0);
  }

  TEST_CASE("facet incidence is consistent") {
    const Mesh m = build_structured_cube_mesh(1, 3, std::pow(2.0, -3.5), 7);
    for (int f = 0; f < m.n_facets(); ++f) {
      const Facet& fc = m.facets[f];
      CHECK((fc.elem[1] == -1) == fc.boundary);
      for (int side = 0; side < (fc.boundary ? 1 : 2); ++side) {
        const int e = fc.elem[side];
        // The facet vertices must all belong to the element.
        std::set<int> ev(m.elements[e].begin(), m.elements[e].end());
        for (int i = 0; i < m.dim; ++i) CHECK(ev.count(fc.v[i]) == 1);
        // The opposite-vertex bookkeeping points back to this facet.
        CHECK(m.elem_facet[e][fc.local[side]] == f);
        CHECK(ev.count(m.elements[e][fc.local[side]]) == 1);
      }
    }
  }

  TEST_CASE("inward normals point toward the opposite vertex") {
    const Mesh m = build_structured_cube_mesh(1, 3, std::pow(2.0, -3.5), 9);
    for (int f = 0; f < m.n_facets(); ++f) {
      const Facet& fc = m.facets[f];
      for (int side = 0; side < (fc.boundary ? 1 : 2); ++side) {
        const int e = fc.elem[side];
        const Eigen::Vector3d n = m.facet_inward_normal(f, e);
        CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
        const Eigen::Vector3d vop =
            m.vertices[m.elements[e][fc.local[side]]];
        CHECK(n.dot(vop - m.facet_centroid(f)) > 0.0);
      }
    }
  }

  TEST_CASE("reference map round trip") {
    const Mesh m = build_structured_cube_mesh(1, 3, std::pow(2.0, -3.5), 5);
    for (int e = 0; e < m.n_elements(); e += 7) {
      const AffineMap map = reference_map(m, e);
      CHECK(map.det > 0.0);
      for (int v = 0; v <= m.dim; ++v) {
        Eigen::Vector3d ref = Eigen::Vector3d::Zero();
        if (v > 0) ref[v - 1] = 1.0;
        const Eigen::Vector3d glob = map.origin + map.J * ref;
        CHECK((glob - m.vertices[m.elements[e][v]]).norm() < 1e-12);
        const Eigen::Vector3d back = map.J_inv * (glob - map.origin);
        CHECK((back - ref).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("text io round trip") {
    for (int dim : {2, 3}) {
      const Mesh m = build_structured_cube_mesh(1, dim, std::pow(2.0, -3.5), 11);
      std::stringstream ss;
      write_mesh(m, ss);
      const Mesh back = read_mesh(ss);
      REQUIRE(back.dim == m.dim);
      REQUIRE(back.n_vertices() == m.n_vertices());
      REQUIRE(back.n_elements() == m.n_elements());
      CHECK(back.n_facets() == m.n_facets());
      CHECK(back.n_bones() == m.n_bones());
      double d = 0.0;
      for (int v = 0; v < m.n_vertices(); ++v)
        d = std::max(d, (m.vertices[v] - back.vertices[v]).norm());
      CHECK(d < 1e-14);
    }
  }
}
