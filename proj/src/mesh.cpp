#include "shapegrad/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "shapegrad/io.hpp"

namespace shapegrad {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 u = b - a, v = c - a;
  return 0.5 * (u(0) * v(1) - u(1) * v(0));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary)
    : Mesh(nodes, std::move(triangles), std::move(boundary), default_holdall(nodes)) {}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary, Box holdall)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary)),
      holdall_(holdall) {
  validate();
  build_topology();
}

Box Mesh::default_holdall(const std::vector<Vec2>& nodes) {
  if (nodes.empty()) return Box{};
  Vec2 lo = nodes[0], hi = nodes[0];
  for (const auto& x : nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const Vec2 c = 0.5 * (lo + hi);
  const Vec2 half = 0.5 * (hi - lo) * 1.25;
  return Box{c - half, c + half};
}

void Mesh::validate() const {
  const int n = static_cast<int>(nodes_.size());
  if (n < 3) throw MeshValidationError("mesh needs at least three nodes");
  if (triangles_.empty()) throw MeshValidationError("mesh has no triangles");
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (!nodes_[k].allFinite()) throw MeshValidationError("node " + std::to_string(k) + " is not finite");
    if (!holdall_.strictly_contains(nodes_[k]))
      throw MeshValidationError("node " + std::to_string(k) + " lies outside the hold-all box");
  }
  std::map<std::uint64_t, int> edge_use;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= n) throw MeshValidationError("triangle " + std::to_string(t) + " has an out-of-range node index");
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshValidationError("triangle " + std::to_string(t) + " repeats a node");
    if (!(signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]) > 0.0))
      throw MeshValidationError("triangle " + std::to_string(t) + " has non-positive signed area");
    for (int e = 0; e < 3; ++e) ++edge_use[edge_key(tri[e], tri[(e + 1) % 3])];
  }
  for (const auto& [key, count] : edge_use)
    if (count > 2) throw MeshValidationError("an edge is shared by more than two triangles");

  std::set<std::uint64_t> listed;
  std::vector<int> degree(n, 0);
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    const auto& be = boundary_[i];
    if (be.a < 0 || be.a >= n || be.b < 0 || be.b >= n || be.a == be.b)
      throw MeshValidationError("boundary edge " + std::to_string(i) + " has invalid node indices");
    const auto key = edge_key(be.a, be.b);
    const auto it = edge_use.find(key);
    if (it == edge_use.end())
      throw MeshValidationError("boundary edge " + std::to_string(i) + " is dangling (belongs to no triangle)");
    if (it->second != 1)
      throw MeshValidationError("boundary edge " + std::to_string(i) + " does not belong to exactly one triangle");
    if (!listed.insert(key).second)
      throw MeshValidationError("boundary edge " + std::to_string(i) + " is listed twice");
    ++degree[be.a];
    ++degree[be.b];
  }
  for (const auto& [key, count] : edge_use)
    if (count == 1 && !listed.count(key))
      throw MeshValidationError("boundary edges do not cover the triangulation boundary");
  for (int v = 0; v < n; ++v)
    if (degree[v] != 0 && degree[v] != 2)
      throw MeshValidationError("boundary edges do not form closed loops");
}

void Mesh::build_topology() {
  std::map<std::uint64_t, int> index;
  tri_edges_.resize(triangles_.size());
  edges_.clear();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = triangles_[t][e], b = triangles_[t][(e + 1) % 3];
      const auto [it, inserted] = index.emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) edges_.push_back({std::min(a, b), std::max(a, b)});
      tri_edges_[t][e] = it->second;
    }
  }
  std::vector<int> edge_tri(edges_.size(), -1), edge_local(edges_.size(), -1);
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    for (int e = 0; e < 3; ++e) {
      edge_tri[tri_edges_[t][e]] = static_cast<int>(t);
      edge_local[tri_edges_[t][e]] = e;
    }
  bnd_tri_.resize(boundary_.size());
  bnd_local_.resize(boundary_.size());
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    const int g = index.at(edge_key(boundary_[i].a, boundary_[i].b));
    bnd_tri_[i] = edge_tri[g];
    bnd_local_[i] = edge_local[g];
  }
}

bool Mesh::has_marker(int marker) const {
  return std::any_of(boundary_.begin(), boundary_.end(), [&](const BoundaryEdge& b) { return b.marker == marker; });
}

std::vector<int> Mesh::markers() const {
  std::set<int> m;
  for (const auto& b : boundary_) m.insert(b.marker);
  return {m.begin(), m.end()};
}

double Mesh::area(std::size_t t) const {
  const auto& tri = triangles_[t];
  return signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) sum += area(t);
  return sum;
}

Vec2 Mesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
}

double Mesh::edge_length(std::size_t i) const {
  return (nodes_[boundary_[i].b] - nodes_[boundary_[i].a]).norm();
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& e : edges_) h = std::max(h, (nodes_[e[1]] - nodes_[e[0]]).norm());
  return h;
}

Vec2 Mesh::outward_normal(std::size_t i) const {
  if (i >= boundary_.size()) throw InvalidInput("edge index " + std::to_string(i) + " is not a boundary edge");
  const Vec2 a = nodes_[boundary_[i].a], b = nodes_[boundary_[i].b];
  const Vec2 t = b - a;
  Vec2 n(t(1), -t(0));
  n.normalize();
  const Vec2 mid = 0.5 * (a + b);
  if (n.dot(mid - centroid(bnd_tri_[i])) < 0.0) n = -n;
  return n;
}

Mesh Mesh::with_nodes(std::vector<Vec2> nodes) const {
  if (nodes.size() != nodes_.size()) throw InvalidInput("with_nodes: node count mismatch");
  Mesh m = *this;
  m.nodes_ = std::move(nodes);
  return m;
}

std::uint64_t Mesh::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& x : nodes_) {
    double c[2] = {x(0), x(1)};
    feed(c, sizeof c);
  }
  for (const auto& t : triangles_) feed(t.data(), sizeof(int) * 3);
  for (const auto& b : boundary_) {
    int v[3] = {b.a, b.b, b.marker};
    feed(v, sizeof v);
  }
  return h;
}

Mesh gen_rectangle(double x0, double y0, double x1, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidInput("gen_rectangle: degenerate extents");
  if (nx < 1 || ny < 1) throw InvalidInput("gen_rectangle: nx and ny must be at least 1");
  const double hx = (x1 - x0) / nx, hy = (y1 - y0) / ny;
  std::vector<Vec2> nodes;
  nodes.reserve((nx + 1) * (ny + 1) + nx * ny);
  auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      nodes.emplace_back(i == nx ? x1 : x0 + i * hx, j == ny ? y1 : y0 + j * hy);
  const int base = (nx + 1) * (ny + 1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) nodes.emplace_back(x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy);
  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = base + j * nx + i;
      const int sw = grid(i, j), se = grid(i + 1, j), ne = grid(i + 1, j + 1), nw = grid(i, j + 1);
      tris.push_back({sw, se, c});
      tris.push_back({se, ne, c});
      tris.push_back({ne, nw, c});
      tris.push_back({nw, sw, c});
    }
  std::vector<BoundaryEdge> bnd;
  for (int i = 0; i < nx; ++i) bnd.push_back({grid(i, 0), grid(i + 1, 0), 1});
  for (int j = 0; j < ny; ++j) bnd.push_back({grid(nx, j), grid(nx, j + 1), 1});
  for (int i = nx; i > 0; --i) bnd.push_back({grid(i, ny), grid(i - 1, ny), 1});
  for (int j = ny; j > 0; --j) bnd.push_back({grid(0, j), grid(0, j - 1), 1});
  return Mesh(std::move(nodes), std::move(tris), std::move(bnd));
}

Mesh gen_disk(const Vec2& center, double radius, int refinement) {
  if (!(radius > 0.0)) throw InvalidInput("gen_disk: radius must be positive");
  if (refinement < 0) throw InvalidInput("gen_disk: refinement must be non-negative");
  std::vector<Vec2> nodes{center};
  std::vector<std::array<int, 3>> tris;
  std::vector<std::array<int, 2>> bnd;
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    nodes.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  }
  for (int k = 0; k < 6; ++k) {
    tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
    bnd.push_back({1 + k, 1 + (k + 1) % 6});
  }
  for (int level = 0; level < refinement; ++level) {
    std::map<std::uint64_t, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto [it, inserted] = mid.emplace(edge_key(a, b), static_cast<int>(nodes.size()));
      if (inserted) nodes.push_back(0.5 * (nodes[a] + nodes[b]));
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      const int m01 = midpoint(t[0], t[1]), m12 = midpoint(t[1], t[2]), m20 = midpoint(t[2], t[0]);
      next.push_back({t[0], m01, m20});
      next.push_back({m01, t[1], m12});
      next.push_back({m20, m12, t[2]});
      next.push_back({m01, m12, m20});
    }
    std::vector<std::array<int, 2>> next_bnd;
    next_bnd.reserve(2 * bnd.size());
    for (const auto& e : bnd) {
      const int m = mid.at(edge_key(e[0], e[1]));
      const Vec2 d = nodes[m] - center;
      nodes[m] = center + radius * d / d.norm();
      next_bnd.push_back({e[0], m});
      next_bnd.push_back({m, e[1]});
    }
    tris = std::move(next);
    bnd = std::move(next_bnd);
  }
  std::vector<BoundaryEdge> edges;
  edges.reserve(bnd.size());
  for (const auto& e : bnd) edges.push_back({e[0], e[1], 1});
  return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_mesh(const Mesh& mesh) {
  std::string out = "shapegrad-mesh v1\n";
  out += "nodes " + std::to_string(mesh.num_nodes()) + "\n";
  for (const auto& x : mesh.nodes()) out += format_double(x(0)) + " " + format_double(x(1)) + "\n";
  out += "triangles " + std::to_string(mesh.num_triangles()) + "\n";
  for (const auto& t : mesh.triangles())
    out += std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  out += "boundary " + std::to_string(mesh.boundary().size()) + "\n";
  for (const auto& b : mesh.boundary())
    out += std::to_string(b.a) + " " + std::to_string(b.b) + " " + std::to_string(b.marker) + "\n";
  return out;
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-blank line split into tokens; throws at end of input.
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ls(line);
      std::vector<std::string> tok;
      std::string w;
      while (ls >> w) tok.push_back(w);
      if (!tok.empty()) return tok;
    }
    throw ParseError(std::string("unexpected end of file, expected ") + expecting, line_ + 1);
  }
  int line() const { return line_; }

 private:
  std::istringstream in_;
  int line_ = 0;
};

double to_double(const std::string& s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("invalid number '" + s + "'", line);
  return v;
}

long to_int(const std::string& s, int line) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("invalid integer '" + s + "'", line);
  return v;
}

std::size_t section(LineReader& r, const char* name) {
  const auto tok = r.next(name);
  if (tok.size() != 2 || tok[0] != name)
    throw ParseError(std::string("expected '") + name + " <count>'", r.line());
  const long n = to_int(tok[1], r.line());
  if (n < 0) throw ParseError("negative count", r.line());
  return static_cast<std::size_t>(n);
}

}  // namespace

Mesh parse_mesh(const std::string& text) {
  LineReader r(text);
  const auto head = r.next("header");
  if (head.size() != 2 || head[0] != "shapegrad-mesh" || head[1] != "v1")
    throw ParseError("expected header 'shapegrad-mesh v1'", r.line());
  std::vector<Vec2> nodes(section(r, "nodes"));
  for (auto& x : nodes) {
    const auto tok = r.next("node coordinates");
    if (tok.size() != 2) throw ParseError("node line needs 2 values", r.line());
    x = Vec2(to_double(tok[0], r.line()), to_double(tok[1], r.line()));
  }
  std::vector<std::array<int, 3>> tris(section(r, "triangles"));
  for (auto& t : tris) {
    const auto tok = r.next("triangle indices");
    if (tok.size() != 3) throw ParseError("triangle line needs 3 indices", r.line());
    for (int k = 0; k < 3; ++k) t[k] = static_cast<int>(to_int(tok[k], r.line()));
  }
  std::vector<BoundaryEdge> bnd(section(r, "boundary"));
  for (auto& b : bnd) {
    const auto tok = r.next("boundary edge");
    if (tok.size() != 3) throw ParseError("boundary line needs 'i j marker'", r.line());
    b.a = static_cast<int>(to_int(tok[0], r.line()));
    b.b = static_cast<int>(to_int(tok[1], r.line()));
    b.marker = static_cast<int>(to_int(tok[2], r.line()));
  }
  return Mesh(std::move(nodes), std::move(tris), std::move(bnd));
}

Mesh load_mesh(const std::string& path) { return parse_mesh(read_file(path)); }

void save_mesh(const Mesh& mesh, const std::string& path) { write_atomic(path, format_mesh(mesh)); }

}  // namespace shapegrad
