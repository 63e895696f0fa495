#include "dnf/core/error.hpp"
#include "dnf/fe/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>

namespace dnf::fe {

int nodes_per_element(ElementKind kind) { return kind == ElementKind::Hex8 ? 8 : 10; }

const char* element_kind_name(ElementKind kind) { return kind == ElementKind::Hex8 ? "hex8" : "tet10"; }

int Mesh::element_count() const {
  return static_cast<int>(connectivity.size()) / nodes_per_element(kind);
}

void Mesh::validate() const {
  const int npe = nodes_per_element(kind);
  if (connectivity.size() % static_cast<std::size_t>(npe) != 0)
    throw ConfigError("mesh connectivity length is not a multiple of the element size");
  for (int id : connectivity)
    if (id < 0 || id >= node_count()) throw ConfigError("mesh connectivity references a missing node");
  for (const auto& [name, ids] : node_sets)
    for (int id : ids)
      if (id < 0 || id >= node_count()) throw ConfigError("node set '" + name + "' references a missing node");
}

namespace {

using Point = std::array<double, 3>;
using Mapping = std::function<Point(const Point&)>;
using CellFilter = std::function<bool(int, int, int)>;
using NodePredicate = std::function<bool(const Point&)>;

/// Tensor grid with optional inactive cells and a geometric map applied to nodes.
struct GridSpec {
  std::vector<double> xs, ys, zs;
  CellFilter active = [](int, int, int) { return true; };
  Mapping map = [](const Point& p) { return p; };
  std::map<std::string, NodePredicate> sets;  // evaluated on unmapped coordinates
};

std::vector<double> subdivide(const std::vector<double>& breaks, double target) {
  std::vector<double> out{breaks.front()};
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const double a = breaks[i - 1];
    const double b = breaks[i];
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / target - 1e-9)));
    for (int k = 1; k <= n; ++k) out.push_back(a + (b - a) * k / n);
  }
  return out;
}

std::vector<double> uniform(double a, double b, int n) {
  std::vector<double> out;
  for (int k = 0; k <= n; ++k) out.push_back(a + (b - a) * k / n);
  return out;
}

double signed_volume(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
  const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
  const double wx = d[0] - a[0], wy = d[1] - a[1], wz = d[2] - a[2];
  return (ux * (vy * wz - vz * wy) - uy * (vx * wz - vz * wx) + uz * (vx * wy - vy * wx)) / 6.0;
}

Mesh build_grid(const GridSpec& g, ElementKind kind) {
  const int nx = static_cast<int>(g.xs.size()) - 1;
  const int ny = static_cast<int>(g.ys.size()) - 1;
  const int nz = static_cast<int>(g.zs.size()) - 1;
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("mesh template needs at least one cell per direction");
  // Lattice step 1 for hexahedra, 1/2 for quadratic tetrahedra.
  const int f = kind == ElementKind::Hex8 ? 1 : 2;
  const int lx = f * nx + 1, ly = f * ny + 1;
  auto coord = [&](const std::vector<double>& lines, int li) {
    if (li % f == 0) return lines[static_cast<std::size_t>(li / f)];
    return 0.5 * (lines[static_cast<std::size_t>(li / f)] + lines[static_cast<std::size_t>(li / f + 1)]);
  };
  auto lattice_id = [&](int i, int j, int k) { return (static_cast<long>(k) * ly + j) * lx + i; };

  std::vector<std::array<int, 3>> cells;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (g.active(i, j, k)) cells.push_back({i, j, k});
  if (cells.empty()) throw ConfigError("mesh template produced no cells");

  // Element connectivity in lattice ids, later compacted.
  std::vector<long> conn;
  if (kind == ElementKind::Hex8) {
    static const int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    for (const auto& c : cells)
      for (const auto& d : corner) conn.push_back(lattice_id(c[0] + d[0], c[1] + d[1], c[2] + d[2]));
  } else {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    static const int edges[6][2] = {{0, 1}, {1, 2}, {2, 0}, {3, 0}, {3, 2}, {3, 1}};
    for (const auto& c : cells) {
      for (const auto& p : perms) {
        std::array<std::array<int, 3>, 4> v;
        v[0] = {2 * c[0], 2 * c[1], 2 * c[2]};
        v[1] = v[0];
        v[1][static_cast<std::size_t>(p[0])] += 2;
        v[2] = v[1];
        v[2][static_cast<std::size_t>(p[1])] += 2;
        v[3] = {2 * c[0] + 2, 2 * c[1] + 2, 2 * c[2] + 2};
        auto pos = [&](const std::array<int, 3>& l) {
          return g.map({coord(g.xs, l[0]), coord(g.ys, l[1]), coord(g.zs, l[2])});
        };
        if (signed_volume(pos(v[0]), pos(v[1]), pos(v[2]), pos(v[3])) < 0.0) std::swap(v[1], v[2]);
        for (const auto& vv : v) conn.push_back(lattice_id(vv[0], vv[1], vv[2]));
        for (const auto& e : edges) {
          const auto& a = v[static_cast<std::size_t>(e[0])];
          const auto& b = v[static_cast<std::size_t>(e[1])];
          conn.push_back(lattice_id((a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2));
        }
      }
    }
  }

  std::vector<long> used(conn);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::map<long, int> compact;
  Mesh mesh;
  mesh.kind = kind;
  for (long id : used) {
    const int i = static_cast<int>(id % lx);
    const int j = static_cast<int>((id / lx) % ly);
    const int k = static_cast<int>(id / (static_cast<long>(lx) * ly));
    const Point ref{coord(g.xs, i), coord(g.ys, j), coord(g.zs, k)};
    compact[id] = mesh.node_count();
    mesh.nodes.push_back(g.map(ref));
    for (const auto& [name, pred] : g.sets)
      if (pred(ref)) mesh.node_sets[name].push_back(compact[id]);
  }
  mesh.connectivity.reserve(conn.size());
  for (long id : conn) mesh.connectivity.push_back(compact[id]);
  for (const auto& [name, pred] : g.sets) mesh.node_sets.try_emplace(name);
  mesh.validate();
  return mesh;
}

bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

/// Cross-section lines in y for one strip or two strips with a gap; returns the strip layer test.
std::vector<double> strip_lines(double thickness, double span, bool single, int cells, int* gap_first,
                                int* gap_last) {
  std::vector<double> ys = uniform(0.0, thickness, cells);
  if (single) {
    *gap_first = *gap_last = -1;
    return ys;
  }
  const double gap = span - 2.0 * thickness;
  if (!(gap > 0.0)) throw ConfigError("double-strip template needs span larger than twice the thickness");
  const int gap_cells = std::max(1, static_cast<int>(std::lround(gap / (thickness / cells))));
  *gap_first = static_cast<int>(ys.size()) - 1;
  for (int k = 1; k <= gap_cells; ++k) ys.push_back(thickness + gap * k / gap_cells);
  *gap_last = static_cast<int>(ys.size()) - 2;
  for (int k = 1; k <= cells; ++k) ys.push_back(thickness + gap + thickness * k / cells);
  return ys;
}

}  // namespace

Mesh generate_block(const BlockParams& p, ElementKind kind) {
  if (!(p.lx > 0 && p.ly > 0 && p.lz > 0)) throw ConfigError("block dimensions must be positive");
  if (p.nx < 1 || p.ny < 1 || p.nz < 1) throw ConfigError("block subdivisions must be positive");
  GridSpec g;
  g.xs = uniform(0.0, p.lx, p.nx);
  g.ys = uniform(0.0, p.ly, p.ny);
  g.zs = uniform(0.0, p.lz, p.nz);
  const double s = std::max({p.lx, p.ly, p.lz});
  g.sets["xmin"] = [s](const Point& q) { return near(q[0], 0.0, s); };
  g.sets["xmax"] = [s, p](const Point& q) { return near(q[0], p.lx, s); };
  g.sets["ymin"] = [s](const Point& q) { return near(q[1], 0.0, s); };
  g.sets["ymax"] = [s, p](const Point& q) { return near(q[1], p.ly, s); };
  g.sets["zmin"] = [s](const Point& q) { return near(q[2], 0.0, s); };
  g.sets["zmax"] = [s, p](const Point& q) { return near(q[2], p.lz, s); };
  g.sets["clamped"] = g.sets["xmin"];
  return build_grid(g, kind);
}

Mesh generate_beam(const BeamParams& p, ElementKind kind) {
  if (!(p.length > 0 && p.depth > 0 && p.thickness > 0 && p.target_cell > 0))
    throw ConfigError("beam dimensions must be positive (zero thickness is degenerate)");
  if (p.cells_thickness < 1 || p.cells_depth < 1) throw ConfigError("beam subdivisions must be positive");
  std::vector<std::pair<double, double>> bridges;
  if (!p.single_strip) {
    const double w = 0.5 * p.bridge_width;
    if (!(p.bridge_width > 0)) throw ConfigError("bridge width must be positive");
    bridges.emplace_back(p.bridge_left - w, p.bridge_left + w);
    if (p.centre_bridge) bridges.emplace_back(0.5 * p.length - w, 0.5 * p.length + w);
    bridges.emplace_back(p.length - p.bridge_right - w, p.length - p.bridge_right + w);
    for (const auto& [a, b] : bridges)
      if (a <= 0.0 || b >= p.length) throw ConfigError("bridge lies outside the beam length");
  }
  std::vector<double> breaks{0.0, p.length};
  for (const auto& [a, b] : bridges) {
    breaks.push_back(a);
    breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  GridSpec g;
  g.xs = subdivide(breaks, p.target_cell);
  int gap_first = -1, gap_last = -1;
  g.ys = strip_lines(p.thickness, p.span, p.single_strip, p.cells_thickness, &gap_first, &gap_last);
  g.zs = uniform(0.0, p.depth, p.cells_depth);
  const auto xs = g.xs;
  g.active = [=](int i, int j, int) {
    if (j < gap_first || j > gap_last || gap_first < 0) return true;
    const double xc = 0.5 * (xs[static_cast<std::size_t>(i)] + xs[static_cast<std::size_t>(i) + 1]);
    for (const auto& [a, b] : bridges)
      if (xc > a && xc < b) return true;
    return false;
  };
  const double L = p.length;
  g.sets["left"] = [L](const Point& q) { return near(q[0], 0.0, L); };
  g.sets["right"] = [L](const Point& q) { return near(q[0], L, L); };
  g.sets["clamped"] = [L](const Point& q) { return near(q[0], 0.0, L) || near(q[0], L, L); };
  return build_grid(g, kind);
}

Mesh generate_arch(const ArchParams& p, ElementKind kind) {
  if (!(p.length > 0 && p.depth > 0 && p.thickness > 0 && p.rise > 0 && p.target_cell > 0))
    throw ConfigError("arch dimensions must be positive (zero thickness is degenerate)");
  const bool single = p.span <= p.thickness * (1.0 + 1e-12);
  std::vector<std::pair<double, double>> joints;
  if (!single) joints.emplace_back(0.5 * (p.length - p.joint_width), 0.5 * (p.length + p.joint_width));
  std::vector<double> breaks{0.0, p.length};
  for (const auto& [a, b] : joints) {
    breaks.push_back(a);
    breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  GridSpec g;
  g.xs = subdivide(breaks, p.target_cell);
  int gap_first = -1, gap_last = -1;
  g.ys = strip_lines(p.thickness, single ? p.thickness : p.span, single, p.cells_thickness, &gap_first,
                     &gap_last);
  g.zs = uniform(0.0, p.depth, p.cells_depth);
  const auto xs = g.xs;
  g.active = [=](int i, int j, int) {
    if (gap_first < 0 || j < gap_first || j > gap_last) return true;
    const double xc = 0.5 * (xs[static_cast<std::size_t>(i)] + xs[static_cast<std::size_t>(i) + 1]);
    for (const auto& [a, b] : joints)
      if (xc > a && xc < b) return true;
    return false;
  };
  const double half = 0.5 * p.length;
  const double radius = (half * half + p.rise * p.rise) / (2.0 * p.rise);
  g.map = [=](const Point& q) {
    const double dx = q[0] - half;
    const double yc = std::sqrt(radius * radius - dx * dx) - (radius - p.rise);
    return Point{q[0], q[1] + yc, q[2]};
  };
  const double L = p.length;
  g.sets["left"] = [L](const Point& q) { return near(q[0], 0.0, L); };
  g.sets["right"] = [L](const Point& q) { return near(q[0], L, L); };
  g.sets["clamped"] = [L](const Point& q) { return near(q[0], 0.0, L) || near(q[0], L, L); };
  return build_grid(g, kind);
}

}  // namespace dnf::fe
