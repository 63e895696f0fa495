#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dnf::fe {

enum class ElementKind { Hex8, Tet10 };

int nodes_per_element(ElementKind kind);
const char* element_kind_name(ElementKind kind);

/// Volume mesh of a single element kind with named boundary node sets.
struct Mesh {
  ElementKind kind = ElementKind::Hex8;
  std::vector<std::array<double, 3>> nodes;
  std::vector<int> connectivity;  ///< flattened, nodes_per_element(kind) entries per element
  std::map<std::string, std::vector<int>> node_sets;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const;
  const int* element(int e) const { return connectivity.data() + e * nodes_per_element(kind); }
  /// Throws ConfigError on out-of-range connectivity or set entries.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Templates

struct BlockParams {
  double lx = 1.0, ly = 1.0, lz = 1.0;
  int nx = 1, ny = 1, nz = 1;
};

/// Double beam: two clamped-clamped strips joined by three bridges.
struct BeamParams {
  double length = 1000.0;        ///< L along x
  double depth = 12.0;           ///< B, out-of-plane (z)
  double thickness = 5.0;        ///< H, in-plane thickness of each strip (y)
  double span = 15.0;            ///< S, outer in-plane size: two strips plus the gap
  double bridge_left = 311.0;    ///< P1, bridge centre measured from the left end
  double bridge_right = 316.0;   ///< P2, bridge centre measured from the right end
  double bridge_width = 5.0;     ///< bridge extent along x (not given by the drawings)
  bool centre_bridge = true;
  bool single_strip = false;     ///< one plain strip of thickness H (clamped-clamped beam)
  double target_cell = 10.0;     ///< nominal cell length along x
  int cells_thickness = 1;       ///< cells through each strip (y)
  int cells_depth = 1;           ///< cells through the depth (z)
};

/// Shallow circular arch made of one or two strips joined at midspan.
struct ArchParams {
  double length = 530.0;     ///< chord L
  double rise = 13.4;        ///< R, midspan rise of the centre line
  double depth = 20.0;       ///< B, out-of-plane
  double thickness = 5.0;    ///< H, strip thickness
  double span = 20.0;        ///< S, outer in-plane size (two strips + gap); equal to H for one strip
  double joint_width = 5.0;  ///< midspan joint extent along x
  double target_cell = 10.0;
  int cells_thickness = 1;
  int cells_depth = 1;
};

Mesh generate_block(const BlockParams& p, ElementKind kind);
Mesh generate_beam(const BeamParams& p, ElementKind kind);
Mesh generate_arch(const ArchParams& p, ElementKind kind);

// ---------------------------------------------------------------------------
// ASCII mesh files (sectioned format, version 2.2 subset)

Mesh parse_msh(const std::filesystem::path& path);
Mesh parse_msh_string(const std::string& text);
void write_msh(const Mesh& mesh, const std::filesystem::path& path);
std::string write_msh_string(const Mesh& mesh);

}  // namespace dnf::fe
