#include "dnf/cli/pipeline.hpp"

#include "dnf/core/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

namespace dnf::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Drops a trailing comment that starts with '#' outside double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

std::vector<std::string> split_list(const std::string& v) {
  std::string body = trim(v);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

Setter real(double PipelineConfig::*field) {
  return [field](PipelineConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(k, v); };
}

template <class Owner, class T>
Setter nested(Owner PipelineConfig::*owner, T Owner::*field) {
  return [owner, field](PipelineConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, double>) {
      (c.*owner).*field = to_double(k, v);
    } else if constexpr (std::is_same_v<T, int>) {
      (c.*owner).*field = to_int(k, v);
    } else {
      (c.*owner).*field = to_bool(k, v);
    }
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["system"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      static const std::map<std::string, SystemSource> names = {{"discrete", SystemSource::Discrete},
                                                                {"block", SystemSource::Block},
                                                                {"beam", SystemSource::Beam},
                                                                {"arch", SystemSource::Arch},
                                                                {"msh", SystemSource::MshFile}};
      const auto it = names.find(v);
      if (it == names.end()) throw ConfigError(k + ": unknown system '" + v + "' (discrete, block, beam, arch, msh)");
      c.source = it->second;
    };
    t["file"] = [](PipelineConfig& c, const std::string&, const std::string& v) { c.system_file = v; };
    t["element"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      if (v == "hex8") {
        c.element = fe::ElementKind::Hex8;
      } else if (v == "tet10") {
        c.element = fe::ElementKind::Tet10;
      } else {
        throw ConfigError(k + ": unknown element '" + v + "' (hex8, tet10)");
      }
    };
    t["clamp"] = [](PipelineConfig& c, const std::string&, const std::string& v) { c.clamp_sets = split_list(v); };

    t["material"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      if (v != "silicon") throw ConfigError(k + ": the only named material is 'silicon'");
      c.material = fe::silicon_mems();
    };
    t["material.young_modulus"] = nested(&PipelineConfig::material, &fe::Material::young_modulus);
    t["material.poisson_ratio"] = nested(&PipelineConfig::material, &fe::Material::poisson_ratio);
    t["material.density"] = nested(&PipelineConfig::material, &fe::Material::density);

    t["block.lx"] = nested(&PipelineConfig::block, &fe::BlockParams::lx);
    t["block.ly"] = nested(&PipelineConfig::block, &fe::BlockParams::ly);
    t["block.lz"] = nested(&PipelineConfig::block, &fe::BlockParams::lz);
    t["block.nx"] = nested(&PipelineConfig::block, &fe::BlockParams::nx);
    t["block.ny"] = nested(&PipelineConfig::block, &fe::BlockParams::ny);
    t["block.nz"] = nested(&PipelineConfig::block, &fe::BlockParams::nz);

    t["beam.length"] = nested(&PipelineConfig::beam, &fe::BeamParams::length);
    t["beam.depth"] = nested(&PipelineConfig::beam, &fe::BeamParams::depth);
    t["beam.thickness"] = nested(&PipelineConfig::beam, &fe::BeamParams::thickness);
    t["beam.span"] = nested(&PipelineConfig::beam, &fe::BeamParams::span);
    t["beam.bridge_left"] = nested(&PipelineConfig::beam, &fe::BeamParams::bridge_left);
    t["beam.bridge_right"] = nested(&PipelineConfig::beam, &fe::BeamParams::bridge_right);
    t["beam.bridge_width"] = nested(&PipelineConfig::beam, &fe::BeamParams::bridge_width);
    t["beam.centre_bridge"] = nested(&PipelineConfig::beam, &fe::BeamParams::centre_bridge);
    t["beam.single_strip"] = nested(&PipelineConfig::beam, &fe::BeamParams::single_strip);
    t["beam.target_cell"] = nested(&PipelineConfig::beam, &fe::BeamParams::target_cell);
    t["beam.cells_thickness"] = nested(&PipelineConfig::beam, &fe::BeamParams::cells_thickness);
    t["beam.cells_depth"] = nested(&PipelineConfig::beam, &fe::BeamParams::cells_depth);

    t["arch.length"] = nested(&PipelineConfig::arch, &fe::ArchParams::length);
    t["arch.rise"] = nested(&PipelineConfig::arch, &fe::ArchParams::rise);
    t["arch.depth"] = nested(&PipelineConfig::arch, &fe::ArchParams::depth);
    t["arch.thickness"] = nested(&PipelineConfig::arch, &fe::ArchParams::thickness);
    t["arch.span"] = nested(&PipelineConfig::arch, &fe::ArchParams::span);
    t["arch.joint_width"] = nested(&PipelineConfig::arch, &fe::ArchParams::joint_width);
    t["arch.target_cell"] = nested(&PipelineConfig::arch, &fe::ArchParams::target_cell);
    t["arch.cells_thickness"] = nested(&PipelineConfig::arch, &fe::ArchParams::cells_thickness);
    t["arch.cells_depth"] = nested(&PipelineConfig::arch, &fe::ArchParams::cells_depth);

    t["masters"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.masters.clear();
      for (const auto& item : split_list(v)) c.masters.push_back(to_int(k, item));
    };
    t["modes"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.mode_count = to_int(k, v); };
    t["epsilon"] = real(&PipelineConfig::resonance_tolerance);
    t["quality_factor"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.quality_factor = v == "inf" ? std::numeric_limits<double>::infinity() : to_double(k, v);
    };

    t["forcing.driven"] = [](PipelineConfig& c, const std::string& k, const std::string& v) { c.driven = to_int(k, v); };
    t["forcing.kappa"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.kappa.clear();
      for (const auto& item : split_list(v)) c.kappa.push_back(to_double(k, item));
    };
    t["forcing.omega"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      const auto items = split_list(v);
      if (items.size() != 2) throw ConfigError(k + ": expected two values 'low, high'");
      c.omega_min = to_double(k, items[0]);
      c.omega_max = to_double(k, items[1]);
    };
    t["forcing.omega_units"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      if (v != "relative" && v != "absolute") throw ConfigError(k + ": expected 'relative' or 'absolute'");
      c.omega_relative = v == "relative";
    };
    t["forcing.physical_amplitude"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.physical_amplitude = to_bool(k, v);
    };
    t["forcing.physical_dof"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.physical_dof = to_int(k, v);
    };

    t["hb.harmonics"] = nested(&PipelineConfig::hb, &solvers::HBConfig::harmonics);
    t["hb.tolerance"] = nested(&PipelineConfig::hb, &solvers::HBConfig::tolerance);
    t["hb.max_iterations"] = nested(&PipelineConfig::hb, &solvers::HBConfig::max_iterations);
    using CC = solvers::ContinuationConfig;
    t["continuation.initial_step"] = nested(&PipelineConfig::continuation, &CC::initial_step);
    t["continuation.min_step"] = nested(&PipelineConfig::continuation, &CC::min_step);
    t["continuation.max_step"] = nested(&PipelineConfig::continuation, &CC::max_step);
    t["continuation.grow"] = nested(&PipelineConfig::continuation, &CC::grow);
    t["continuation.shrink"] = nested(&PipelineConfig::continuation, &CC::shrink);
    t["continuation.max_points"] = nested(&PipelineConfig::continuation, &CC::max_points);
    t["continuation.stability"] = nested(&PipelineConfig::continuation, &CC::stability);
    t["continuation.amplitude_scale"] = nested(&PipelineConfig::continuation, &CC::amplitude_scale);

    t["output.dir"] = [](PipelineConfig& c, const std::string&, const std::string& v) { c.output_dir = v; };
    t["output.sidecar"] = [](PipelineConfig& c, const std::string& k, const std::string& v) {
      c.sidecar = to_bool(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!section.empty()) key = section + "." + key;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    it->second(c, where + key, value);
  }
  if (!c.system_file.empty() && c.system_file.is_relative()) c.system_file = base_dir / c.system_file;
  if (c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void PipelineConfig::validate() const {
  const bool needs_file = source == SystemSource::Discrete || source == SystemSource::MshFile;
  if (needs_file) {
    if (system_file.empty()) throw ConfigError("file: required for discrete and msh systems");
    if (!std::filesystem::is_regular_file(system_file))
      throw ConfigError("file: " + system_file.string() + " does not exist");
  }
  if (source != SystemSource::Discrete) {
    if (clamp_sets.empty()) throw ConfigError("clamp: at least one boundary set is required for mesh systems");
    material.validate();
  }
  if (masters.empty()) throw ConfigError("masters: at least one master mode is required");
  std::set<int> unique;
  for (int m : masters) {
    if (m < 1) throw ConfigError("masters: mode numbers are 1-based");
    if (!unique.insert(m).second) throw ConfigError("masters: mode " + std::to_string(m) + " listed twice");
  }
  if (mode_count < 0) throw ConfigError("modes: must be non-negative");
  if (!(resonance_tolerance > 0.0 && resonance_tolerance <= 0.2)) throw ConfigError("epsilon: must lie in (0, 0.2]");
  if (!(quality_factor > 0.0)) throw ConfigError("quality_factor: must be positive");
  if (driven < 1 || driven > static_cast<int>(masters.size()))
    throw ConfigError("forcing.driven: must name a position in the master list (1.." +
                      std::to_string(masters.size()) + ")");
  for (double k : kappa)
    if (!std::isfinite(k)) throw ConfigError("forcing.kappa: values must be finite");
  if (!(omega_min > 0.0 && omega_max > omega_min)) throw ConfigError("forcing.omega: need 0 < low < high");
  if (physical_dof < 0) throw ConfigError("forcing.physical_dof: must be non-negative");
  if (hb.harmonics < 1) throw ConfigError("hb.harmonics: must be at least 1");
  if (!(hb.tolerance > 0.0)) throw ConfigError("hb.tolerance: must be positive");
  if (!(continuation.min_step > 0.0 && continuation.max_step >= continuation.min_step &&
        continuation.initial_step >= continuation.min_step))
    throw ConfigError("continuation: need 0 < min_step <= initial_step and min_step <= max_step");
  if (output_dir.empty()) throw ConfigError("output.dir: must not be empty");
}

}  // namespace dnf::cli
