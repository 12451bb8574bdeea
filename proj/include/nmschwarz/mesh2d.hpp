#pragma once

/// \file mesh2d.hpp
/// \brief Structured triangulations of axis-aligned rectangles with tagged boundary edges.
///
/// Every subdomain of a decomposition gets its own lattice mesh, generated
/// independently of its neighbours, so traces on a shared side generally do
/// not match. Boundary edges carry a tag telling whether they lie on the
/// exterior boundary or on a named interface.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nmschwarz {

/// Absolute tolerance for geometric membership tests.
inline constexpr double kGeomTol = 1e-12;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) { return std::hypot(b.x - a.x, b.y - a.y); }

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  void validate() const {
    if (!(x0 < x1) || !(y0 < y1)) throw std::invalid_argument("Rect: requires x0 < x1 and y0 < y1");
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// A straight interface segment shared by two subdomain rectangles. The
/// arclength coordinate used on the interface runs from \c a to \c b.
struct InterfaceDecl {
  int id = 0;
  Point2 a;
  Point2 b;
  int left_subdomain = 0;   ///< lower index
  int right_subdomain = 1;  ///< higher index

  double length() const { return distance(a, b); }
  bool axis_aligned() const {
    return std::abs(a.x - b.x) <= kGeomTol || std::abs(a.y - b.y) <= kGeomTol;
  }
  /// Signed distance-free test: is \p p on the closed segment?
  bool contains(const Point2& p) const {
    const double len = length();
    const double tx = (b.x - a.x) / len, ty = (b.y - a.y) / len;
    const double dx = p.x - a.x, dy = p.y - a.y;
    const double s = dx * tx + dy * ty;
    const double off = std::abs(-dx * ty + dy * tx);
    return off <= kGeomTol && s >= -kGeomTol && s <= len + kGeomTol;
  }
  /// Arclength coordinate of \p p measured from \c a.
  double arclength(const Point2& p) const {
    const double len = length();
    return ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / len;
  }
  friend bool operator==(const InterfaceDecl&, const InterfaceDecl&) = default;
};

/// Boundary edge tag: exterior boundary or interface with a given id.
struct BoundaryTag {
  static constexpr int kExterior = -1;
  int interface_id = kExterior;

  static BoundaryTag exterior() { return {}; }
  static BoundaryTag interface(int id) { return {id}; }
  bool is_exterior() const { return interface_id == kExterior; }
  friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag;
};

enum class DiagonalRule {
  Same,       ///< every cell split along the (i,j)-(i+1,j+1) diagonal
  Alternate,  ///< checkerboard alternation of both diagonals
};

inline std::string to_string(DiagonalRule d) { return d == DiagonalRule::Same ? "same" : "alternate"; }

inline DiagonalRule diagonal_rule_from_string(const std::string& s) {
  if (s == "same") return DiagonalRule::Same;
  if (s == "alternate") return DiagonalRule::Alternate;
  throw std::invalid_argument("unknown diagonal rule '" + s + "'");
}

struct Mesh2D {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;  ///< counter-clockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<InterfaceDecl> interfaces;  ///< interfaces touching this mesh
  Rect rect;
  double h_max = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(std::size_t t) const {
    const auto& [i, j, k] = triangles[t];
    const Point2 &a = vertices[i], &b = vertices[j], &c = vertices[k];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }

  double diameter(std::size_t t) const {
    const auto& [i, j, k] = triangles[t];
    return std::max({distance(vertices[i], vertices[j]), distance(vertices[j], vertices[k]),
                     distance(vertices[k], vertices[i])});
  }

  const InterfaceDecl& interface_decl(int id) const {
    for (const auto& d : interfaces)
      if (d.id == id) return d;
    throw std::invalid_argument("Mesh2D: unknown interface id " + std::to_string(id));
  }

  bool has_interface(int id) const {
    return std::any_of(interfaces.begin(), interfaces.end(), [id](const auto& d) { return d.id == id; });
  }
};

namespace detail {

inline double compute_h_max(const Mesh2D& m) {
  double h = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) h = std::max(h, m.diameter(t));
  return h;
}

inline std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

// Returns the tag of a rectangle side (0 bottom, 1 right, 2 top, 3 left).
inline BoundaryTag side_tag(const Rect& r, int side, const std::vector<InterfaceDecl>& decls) {
  const std::array<Point2, 4> corners{Point2{r.x0, r.y0}, Point2{r.x1, r.y0}, Point2{r.x1, r.y1},
                                      Point2{r.x0, r.y1}};
  const Point2 p = corners[side];
  const Point2 q = corners[(side + 1) % 4];
  for (const auto& d : decls) {
    if (d.contains(p) && d.contains(q)) return BoundaryTag::interface(d.id);
  }
  return BoundaryTag::exterior();
}

}  // namespace detail

/// Checks that every declared interface coincides with a full side of \p rect.
inline void check_interfaces_match_rect(const Rect& rect, const std::vector<InterfaceDecl>& decls) {
  for (const auto& d : decls) {
    if (!d.axis_aligned()) throw std::invalid_argument("interface " + std::to_string(d.id) + " is not axis-aligned");
    bool matched = false;
    for (int side = 0; side < 4; ++side) {
      if (detail::side_tag(rect, side, {d}).interface_id != d.id) continue;
      const double side_len = (side % 2 == 0) ? rect.width() : rect.height();
      if (std::abs(side_len - d.length()) <= kGeomTol) matched = true;
    }
    if (!matched)
      throw std::invalid_argument("interface " + std::to_string(d.id) + " does not match a side of the rectangle");
  }
}

/// Uniform lattice triangulation of \p rect with nx-by-ny cells, each cell split
/// into two triangles. Vertices are numbered row-major (x fastest).
inline Mesh2D generate_structured(const Rect& rect, int nx, int ny, DiagonalRule diag = DiagonalRule::Same,
                                  const std::vector<InterfaceDecl>& interfaces = {}) {
  rect.validate();
  if (nx < 1 || ny < 1) throw std::invalid_argument("generate_structured: nx and ny must be >= 1");
  check_interfaces_match_rect(rect, interfaces);

  Mesh2D m;
  m.rect = rect;
  m.interfaces = interfaces;
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Endpoints are assigned exactly so shared sides agree bit-for-bit.
      const double x = i == nx ? rect.x1 : rect.x0 + rect.width() * i / nx;
      const double y = j == ny ? rect.y1 : rect.y0 + rect.height() * j / ny;
      m.vertices.push_back({x, y});
    }
  }
  m.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      const bool main_diag = diag == DiagonalRule::Same || (i + j) % 2 == 0;
      if (main_diag) {
        m.triangles.push_back({v00, v10, v11});
        m.triangles.push_back({v00, v11, v01});
      } else {
        m.triangles.push_back({v00, v10, v01});
        m.triangles.push_back({v10, v11, v01});
      }
    }
  }
  const std::array<BoundaryTag, 4> tags{detail::side_tag(rect, 0, interfaces), detail::side_tag(rect, 1, interfaces),
                                        detail::side_tag(rect, 2, interfaces), detail::side_tag(rect, 3, interfaces)};
  for (int i = 0; i < nx; ++i) m.boundary_edges.push_back({{vid(i, 0), vid(i + 1, 0)}, tags[0]});
  for (int j = 0; j < ny; ++j) m.boundary_edges.push_back({{vid(nx, j), vid(nx, j + 1)}, tags[1]});
  for (int i = nx; i > 0; --i) m.boundary_edges.push_back({{vid(i, ny), vid(i - 1, ny)}, tags[2]});
  for (int j = ny; j > 0; --j) m.boundary_edges.push_back({{vid(0, j), vid(0, j - 1)}, tags[3]});
  m.h_max = detail::compute_h_max(m);
  return m;
}

/// Red refinement: every triangle is split into four by its edge midpoints.
/// Boundary edges are split in two and both halves keep the parent tag.
inline Mesh2D refine_uniform(const Mesh2D& mesh) {
  Mesh2D out;
  out.rect = mesh.rect;
  out.interfaces = mesh.interfaces;
  out.vertices = mesh.vertices;
  std::map<std::pair<int, int>, int> midpoint;
  const auto mid = [&](int a, int b) {
    const auto key = detail::edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const Point2 &pa = mesh.vertices[a], &pb = mesh.vertices[b];
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    midpoint.emplace(key, id);
    return id;
  };
  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& [a, b, c] : mesh.triangles) {
    const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  out.boundary_edges.reserve(2 * mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    const int m = mid(e.v[0], e.v[1]);
    out.boundary_edges.push_back({{e.v[0], m}, e.tag});
    out.boundary_edges.push_back({{m, e.v[1]}, e.tag});
  }
  out.h_max = detail::compute_h_max(out);
  return out;
}

/// Trace of a mesh on one interface: sorted arclength coordinates and the
/// mesh vertex sitting at each of them.
struct InterfaceTrace {
  int interface_id = 0;
  std::vector<double> coords;
  std::vector<int> vertices;
};

inline InterfaceTrace interface_trace(const Mesh2D& mesh, int interface_id) {
  const InterfaceDecl& decl = mesh.interface_decl(interface_id);
  std::vector<std::pair<double, int>> nodes;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag.interface_id != interface_id) continue;
    for (int v : e.v) {
      if (!decl.contains(mesh.vertices[v]))
        throw std::invalid_argument("interface_trace: tagged edge not on interface segment");
      nodes.emplace_back(decl.arclength(mesh.vertices[v]), v);
    }
  }
  if (nodes.empty()) throw std::invalid_argument("interface_trace: no edge tagged with interface id");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](const auto& l, const auto& r) { return l.second == r.second; }),
              nodes.end());
  InterfaceTrace tr;
  tr.interface_id = interface_id;
  for (const auto& [s, v] : nodes) {
    if (!tr.coords.empty() && s <= tr.coords.back() + kGeomTol)
      throw std::invalid_argument("interface_trace: coincident trace nodes");
    tr.coords.push_back(s);
    tr.vertices.push_back(v);
  }
  return tr;
}

/// Strictly increasing arclength coordinates of the mesh vertices on an interface.
inline std::vector<double> interface_trace_nodes(const Mesh2D& mesh, int interface_id) {
  return interface_trace(mesh, interface_id).coords;
}

/// Full consistency check of the mesh invariants; throws on the first violation.
inline void validate_mesh(const Mesh2D& mesh) {
  double area = 0.0;
  std::map<std::pair<int, int>, int> edge_count;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.signed_area(t);
    if (!(a > 0.0)) throw std::invalid_argument("mesh: triangle with non-positive signed area");
    area += a;
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) ++edge_count[detail::edge_key(tri[e], tri[(e + 1) % 3])];
  }
  if (std::abs(area - mesh.rect.area()) > 1e-12 * mesh.rect.area())
    throw std::invalid_argument("mesh: triangles do not tile the rectangle");
  std::size_t boundary_count = 0;
  for (const auto& [key, count] : edge_count) {
    if (count > 2) throw std::invalid_argument("mesh: edge shared by more than two triangles");
    if (count == 1) ++boundary_count;
  }
  if (boundary_count != mesh.boundary_edges.size()) throw std::invalid_argument("mesh: boundary edge count mismatch");
  for (const auto& e : mesh.boundary_edges) {
    auto it = edge_count.find(detail::edge_key(e.v[0], e.v[1]));
    if (it == edge_count.end() || it->second != 1) throw std::invalid_argument("mesh: boundary edge not on boundary");
    if (!e.tag.is_exterior()) {
      const InterfaceDecl& d = mesh.interface_decl(e.tag.interface_id);
      if (!d.contains(mesh.vertices[e.v[0]]) || !d.contains(mesh.vertices[e.v[1]]))
        throw std::invalid_argument("mesh: interface edge off its segment");
    }
  }
}

/// Number of distinct edges (V - E + T = 1 for a disk).
inline std::size_t count_edges(const Mesh2D& mesh) {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) edges[detail::edge_key(tri[e], tri[(e + 1) % 3])] = 1;
  return edges.size();
}

/// Writes the plain-text mesh dump:
/// `mesh2d v1 <nv> <nt> <nb>`, then `x y`, `i j k` and `i j tag` lines
/// (tag -1 for exterior, otherwise the interface id).
inline void write_mesh(std::ostream& os, const Mesh2D& mesh) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "mesh2d v1 " << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges.size()
      << '\n';
  for (const auto& p : mesh.vertices) buf << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles) buf << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) buf << e.v[0] << ' ' << e.v[1] << ' ' << e.tag.interface_id << '\n';
  os << buf.str();
}

/// Reads a mesh dump. Rect and interface declarations are not part of the
/// format; the rect is recomputed as the vertex bounding box.
inline Mesh2D read_mesh(std::istream& is) {
  std::string magic, version;
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(is >> magic >> version >> nv >> nt >> nb) || magic != "mesh2d" || version != "v1")
    throw std::runtime_error("read_mesh: bad header");
  Mesh2D m;
  m.vertices.resize(nv);
  m.triangles.resize(nt);
  m.boundary_edges.resize(nb);
  for (auto& p : m.vertices)
    if (!(is >> p.x >> p.y)) throw std::runtime_error("read_mesh: truncated vertex block");
  for (auto& t : m.triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) throw std::runtime_error("read_mesh: truncated triangle block");
  for (auto& e : m.boundary_edges)
    if (!(is >> e.v[0] >> e.v[1] >> e.tag.interface_id)) throw std::runtime_error("read_mesh: truncated boundary block");
  if (!m.vertices.empty()) {
    m.rect = {m.vertices[0].x, m.vertices[0].y, m.vertices[0].x, m.vertices[0].y};
    for (const auto& p : m.vertices) {
      m.rect.x0 = std::min(m.rect.x0, p.x);
      m.rect.y0 = std::min(m.rect.y0, p.y);
      m.rect.x1 = std::max(m.rect.x1, p.x);
      m.rect.y1 = std::max(m.rect.y1, p.y);
    }
  }
  m.h_max = detail::compute_h_max(m);
  return m;
}

}  // namespace nmschwarz
