#pragma once

#include "dnf/model/mechanical_system.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <vector>

namespace dnf::model {

/// Sparse coefficient tables of a system written in modal coordinates (0-based keys).
struct DiscreteCoefficients {
  std::vector<double> frequencies;
  std::map<std::array<int, 3>, double> g;  ///< g[s][k][l]
  std::map<std::array<int, 4>, double> h;  ///< h[s][k][l][m]
};

/**
 * Builds M = I, K = diag(omega^2) with
 *   G(a,b)_s   = sum g[s][k][l] a_k b_l
 *   H(a,b,c)_s = sum h[s][k][l][m] a_k b_l c_m.
 * Tables must already be symmetric in the trailing indices; asymmetric
 * input raises ConfigError instead of being symmetrized.
 */
MechanicalSystem build_discrete_system(const DiscreteCoefficients& coeffs);

/// Parses {"frequencies":[...], "g":[[s,k,l,v],...], "h":[[s,k,l,m,v],...]} with 1-based indices.
DiscreteCoefficients load_discrete_json(const std::filesystem::path& path);
DiscreteCoefficients parse_discrete_json(const std::string& text);
std::string to_discrete_json(const DiscreteCoefficients& coeffs);

/// Inserts v at every distinct permutation of the trailing indices.
void set_symmetric_g(DiscreteCoefficients& c, int s, int k, int l, double v);
void set_symmetric_h(DiscreteCoefficients& c, int s, int k, int l, int m, double v);

}  // namespace dnf::model
