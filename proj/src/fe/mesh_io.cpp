#include "dnf/core/error.hpp"
#include "dnf/fe/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace dnf::fe {

namespace {

struct RawElement {
  int type = 0;
  int physical = 0;
  std::vector<long> nodes;
};

int nodes_for_type(int type) {
  switch (type) {
    case 15: return 1;   // point
    case 1: return 2;    // line
    case 2: return 3;    // triangle
    case 3: return 4;    // quadrangle
    case 4: return 4;    // tet4
    case 5: return 8;    // hex8
    case 8: return 3;    // line3
    case 9: return 6;    // triangle6
    case 10: return 9;   // quad9
    case 11: return 10;  // tet10
    case 16: return 8;   // quad8
    default: return -1;
  }
}

bool is_volume(int type) { return type == 4 || type == 5 || type == 11; }

[[noreturn]] void malformed(const std::string& section, const std::string& what) {
  throw IoError("malformed " + section + " section: " + what);
}

std::string next_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return line;
  }
  return {};
}

void expect_end(std::istream& in, const std::string& section) {
  const std::string end = next_line(in);
  if (end != "$End" + section) malformed(section, "missing $End" + section);
}

}  // namespace

Mesh parse_msh_string(const std::string& text) {
  std::istringstream in(text);
  std::map<int, std::string> physical_names;
  std::vector<long> node_tags;
  std::vector<std::array<double, 3>> coords;
  std::vector<RawElement> elements;
  bool have_format = false, have_nodes = false, have_elements = false;

  for (std::string header = next_line(in); !header.empty(); header = next_line(in)) {
    if (header.front() != '$') throw IoError("unexpected text outside a section: '" + header + "'");
    const std::string section = header.substr(1);
    if (section == "MeshFormat") {
      std::istringstream ls(next_line(in));
      double version = 0;
      int file_type = -1;
      if (!(ls >> version >> file_type)) malformed(section, "version line");
      if (version < 2.0 || version >= 3.0) throw IoError("unsupported mesh format version " + std::to_string(version));
      if (file_type != 0) throw IoError("binary mesh files are not supported");
      expect_end(in, section);
      have_format = true;
    } else if (section == "PhysicalNames") {
      long count = 0;
      if (!(std::istringstream(next_line(in)) >> count) || count < 0) malformed(section, "count");
      for (long i = 0; i < count; ++i) {
        std::istringstream ls(next_line(in));
        int dim = 0, tag = 0;
        std::string name;
        if (!(ls >> dim >> tag)) malformed(section, "entry");
        std::getline(ls, name);
        const auto a = name.find('"');
        const auto b = name.rfind('"');
        if (a == std::string::npos || b == a) malformed(section, "unquoted name");
        physical_names[tag] = name.substr(a + 1, b - a - 1);
      }
      expect_end(in, section);
    } else if (section == "Nodes") {
      long count = 0;
      if (!(std::istringstream(next_line(in)) >> count) || count < 0) malformed(section, "count");
      for (long i = 0; i < count; ++i) {
        std::istringstream ls(next_line(in));
        long tag = 0;
        std::array<double, 3> x{};
        if (!(ls >> tag >> x[0] >> x[1] >> x[2])) malformed(section, "node line " + std::to_string(i + 1));
        node_tags.push_back(tag);
        coords.push_back(x);
      }
      expect_end(in, section);
      have_nodes = true;
    } else if (section == "Elements") {
      long count = 0;
      if (!(std::istringstream(next_line(in)) >> count) || count < 0) malformed(section, "count");
      for (long i = 0; i < count; ++i) {
        std::istringstream ls(next_line(in));
        long tag = 0;
        int ntags = 0;
        RawElement e;
        if (!(ls >> tag >> e.type >> ntags) || ntags < 0) malformed(section, "element line " + std::to_string(i + 1));
        std::vector<long> tags(static_cast<std::size_t>(ntags));
        for (auto& t : tags)
          if (!(ls >> t)) malformed(section, "element tags");
        e.physical = ntags > 0 ? static_cast<int>(tags[0]) : 0;
        const int nn = nodes_for_type(e.type);
        if (nn < 0) throw IoError("unsupported element type " + std::to_string(e.type));
        e.nodes.resize(static_cast<std::size_t>(nn));
        for (auto& n : e.nodes)
          if (!(ls >> n)) malformed(section, "element node list");
        elements.push_back(std::move(e));
      }
      expect_end(in, section);
      have_elements = true;
    } else {
      throw IoError("unknown mesh file section '$" + section + "'");
    }
  }
  if (!have_format) throw IoError("mesh file lacks $MeshFormat");
  if (!have_nodes || !have_elements) throw IoError("mesh file lacks $Nodes or $Elements");

  std::unordered_map<long, int> index;
  for (std::size_t i = 0; i < node_tags.size(); ++i) index[node_tags[i]] = static_cast<int>(i);
  auto lookup = [&](long tag) {
    auto it = index.find(tag);
    if (it == index.end()) throw IoError("element references unknown node " + std::to_string(tag));
    return it->second;
  };

  std::set<int> volume_types;
  for (const auto& e : elements)
    if (is_volume(e.type)) volume_types.insert(e.type == 4 ? 11 : e.type);
  if (volume_types.empty()) throw IoError("mesh file contains no volume elements");
  if (volume_types.size() > 1) throw IoError("mixed hexahedral and tetrahedral meshes are not supported");

  Mesh mesh;
  mesh.kind = *volume_types.begin() == 5 ? ElementKind::Hex8 : ElementKind::Tet10;
  mesh.nodes = coords;
  // Linear tetrahedra are promoted to quadratic ones by inserting edge midpoints.
  std::map<std::pair<int, int>, int> midpoints;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoints.find(key);
    if (it != midpoints.end()) return it->second;
    const auto& pa = mesh.nodes[static_cast<std::size_t>(a)];
    const auto& pb = mesh.nodes[static_cast<std::size_t>(b)];
    mesh.nodes.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])});
    const int id = mesh.node_count() - 1;
    midpoints[key] = id;
    return id;
  };
  static const int edges[6][2] = {{0, 1}, {1, 2}, {2, 0}, {3, 0}, {3, 2}, {3, 1}};
  std::map<std::string, std::set<int>> sets;
  for (const auto& e : elements) {
    std::vector<int> ids;
    for (long t : e.nodes) ids.push_back(lookup(t));
    if (is_volume(e.type)) {
      if (e.type == 4) {
        for (const auto& ed : edges) ids.push_back(midpoint(ids[static_cast<std::size_t>(ed[0])], ids[static_cast<std::size_t>(ed[1])]));
      }
      mesh.connectivity.insert(mesh.connectivity.end(), ids.begin(), ids.end());
    }
    if (!is_volume(e.type) && e.physical != 0) {
      auto it = physical_names.find(e.physical);
      const std::string name = it != physical_names.end() ? it->second : "physical_" + std::to_string(e.physical);
      sets[name].insert(ids.begin(), ids.end());
    }
  }
  for (auto& [name, ids] : sets) mesh.node_sets[name] = std::vector<int>(ids.begin(), ids.end());
  mesh.validate();
  return mesh;
}

Mesh parse_msh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_msh_string(ss.str());
}

std::string write_msh_string(const Mesh& mesh) {
  mesh.validate();
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
  os << "$PhysicalNames\n" << mesh.node_sets.size() << "\n";
  int tag = 1;
  for (const auto& [name, ids] : mesh.node_sets) os << "0 " << tag++ << " \"" << name << "\"\n";
  os << "$EndPhysicalNames\n";
  os << "$Nodes\n" << mesh.node_count() << "\n";
  for (int i = 0; i < mesh.node_count(); ++i) {
    const auto& x = mesh.nodes[static_cast<std::size_t>(i)];
    os << i + 1 << ' ' << x[0] << ' ' << x[1] << ' ' << x[2] << "\n";
  }
  os << "$EndNodes\n";
  std::size_t point_count = 0;
  for (const auto& [name, ids] : mesh.node_sets) point_count += ids.size();
  os << "$Elements\n" << static_cast<std::size_t>(mesh.element_count()) + point_count << "\n";
  long id = 1;
  tag = 1;
  for (const auto& [name, ids] : mesh.node_sets) {
    for (int n : ids) os << id++ << " 15 2 " << tag << ' ' << tag << ' ' << n + 1 << "\n";
    ++tag;
  }
  const int type = mesh.kind == ElementKind::Hex8 ? 5 : 11;
  const int npe = nodes_per_element(mesh.kind);
  for (int e = 0; e < mesh.element_count(); ++e) {
    os << id++ << ' ' << type << " 2 0 1";
    for (int k = 0; k < npe; ++k) os << ' ' << mesh.element(e)[k] + 1;
    os << "\n";
  }
  os << "$EndElements\n";
  return os.str();
}

void write_msh(const Mesh& mesh, const std::filesystem::path& path) {
  const std::string text = write_msh_string(mesh);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file " + path.string());
  out << text;
  if (!out) throw IoError("failed writing mesh file " + path.string());
}

}  // namespace dnf::fe
