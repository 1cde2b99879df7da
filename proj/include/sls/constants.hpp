#pragma once

#include "sls/errors.hpp"

namespace sls {

inline constexpr double kAvogadro = 6.022e23;  // 1/mol

// Fixed physical inputs of one experiment. All internal computation uses
// g/mL, cm and 1/cm; the CLI converts user-facing mg/mL at the boundary.
struct PhysicalConstants {
  double lambda = 657e-7;      // incident wavelength, cm
  double n0 = 1.33;            // solvent refractive index
  double avogadro = kAvogadro; // 1/mol
  double monomer_mass = 14307; // g/mol

  void validate() const {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (!(n0 >= 1.0)) throw ConfigError("n0 must be >= 1");
    if (avogadro != kAvogadro) throw ConfigError("avogadro must be 6.022e23");
    if (!(monomer_mass > 0.0)) throw ConfigError("monomer mass must be > 0");
  }
};

// mg/mL -> g/mL.
inline double convert_concentration(double nominal_mg_per_ml) {
  if (nominal_mg_per_ml < 0.0)
    throw NegativeConcentration("concentration must be >= 0 mg/mL");
  return nominal_mg_per_ml * 1e-3;
}

}  // namespace sls
