#pragma once

#include <Eigen/Dense>

#include <vector>

namespace regge {

// Gauss rules on the reference entities: segment [0,1], unit triangle
// {x,y >= 0, x+y <= 1}, unit tetrahedron. Points are stored in barycentric
// coordinates (entity_dim+1 entries); weights carry the reference measure
// (1, 1/2, 1/6 respectively).
struct QuadRule {
  int entity_dim = 0;
  int exactness = 0;
  std::vector<Eigen::Vector4d> points;  // barycentric, unused entries zero
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }

  // Cartesian reference coordinates: drop the leading barycentric entry.
  Eigen::Vector3d ref_point(int q) const {
    return Eigen::Vector3d(points[q][1], points[q][2], points[q][3]);
  }
};

// Exact for all polynomials of total degree <= exactness. Built from
// collapsed-coordinate (Duffy) tensor products of Gauss-Jacobi rules, so any
// requested exactness is available; we cap at 50 to catch runaway callers.
QuadRule quad_rule(int entity_dim, int exactness);

}  // namespace regge
