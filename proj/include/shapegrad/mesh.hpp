#pragma once

// Conforming 2D triangle meshes with marked boundary edges.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shapegrad/flow.hpp"
#include "shapegrad/tensor.hpp"

namespace shapegrad {

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int marker = 1;
};

/// Immutable after construction; the constructor checks every invariant and
/// throws MeshValidationError naming the first one that fails.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary);
  Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary, Box holdall);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary() const { return boundary_; }
  const Box& holdall() const { return holdall_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  /// Unique undirected edges. Local edge e of a triangle joins vertices e and (e+1)%3.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& triangle_edges() const { return tri_edges_; }

  /// Triangle and local edge adjacent to boundary edge i.
  int boundary_triangle(std::size_t i) const { return bnd_tri_[i]; }
  int boundary_local_edge(std::size_t i) const { return bnd_local_[i]; }
  int boundary_global_edge(std::size_t i) const { return tri_edges_[bnd_tri_[i]][bnd_local_[i]]; }

  bool has_marker(int marker) const;
  std::vector<int> markers() const;

  double area(std::size_t t) const;
  double total_area() const;
  Vec2 centroid(std::size_t t) const;
  double edge_length(std::size_t boundary_index) const;
  double max_edge_length() const;

  /// Unit normal of boundary edge i pointing away from its triangle.
  Vec2 outward_normal(std::size_t boundary_index) const;

  /// Same connectivity and hold-all, new coordinates. Only node count is checked.
  Mesh with_nodes(std::vector<Vec2> nodes) const;

  /// FNV-1a over coordinates and connectivity.
  std::uint64_t hash() const;

  /// Bounding box of the nodes inflated by 25% about its center.
  static Box default_holdall(const std::vector<Vec2>& nodes);

 private:
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_;
  Box holdall_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<int> bnd_tri_;
  std::vector<int> bnd_local_;

  void build_topology();
  void validate() const;
};

/// Crossed layout: each of the nx·ny cells is split into four triangles by a
/// center node, so there are (nx+1)(ny+1) + nx·ny nodes and 4·nx·ny triangles.
/// Every boundary edge carries marker 1.
Mesh gen_rectangle(double x0, double y0, double x1, double y1, int nx, int ny);

/// Hexagon (center plus six rim nodes) refined `refinement` times by edge
/// bisection, with new rim nodes projected to the circle. 6·4^k triangles.
Mesh gen_disk(const Vec2& center, double radius, int refinement);

Mesh load_mesh(const std::string& path);
void save_mesh(const Mesh& mesh, const std::string& path);
std::string format_mesh(const Mesh& mesh);
Mesh parse_mesh(const std::string& text);

/// Shortest decimal representation that reads back to the same double.
std::string format_double(double v);

}  // namespace shapegrad
