#include "dnf/fe/material.hpp"

#include "dnf/core/error.hpp"

#include <cmath>

namespace dnf::fe {

void Material::validate() const {
  if (!(young_modulus > 0.0) || !std::isfinite(young_modulus)) throw ConfigError("Young's modulus must be positive");
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) throw ConfigError("Poisson ratio must lie in (-1, 0.5)");
  if (!(density > 0.0) || !std::isfinite(density)) throw ConfigError("density must be positive");
}

double Material::lame_lambda() const {
  return young_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
}

double Material::lame_mu() const { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }

Material silicon_mems() {
  // E = 167 GPa -> 1.67e5 uN/um^2; rho = 2330 kg/m^3 -> 2.33e-3 uN us^2 / um^4.
  return Material{1.67e5, 0.22, 2.33e-3};
}

}  // namespace dnf::fe
