#pragma once

namespace dnf::fe {

/// Isotropic Saint-Venant-Kirchhoff material.
struct Material {
  double young_modulus = 1.0;
  double poisson_ratio = 0.0;
  double density = 1.0;

  /// Throws ConfigError unless E > 0, -1 < nu < 0.5 and rho > 0.
  void validate() const;
  double lame_lambda() const;
  double lame_mu() const;
};

/// Polycrystalline silicon in the micrometre / microsecond / micronewton unit set.
Material silicon_mems();

}  // namespace dnf::fe
