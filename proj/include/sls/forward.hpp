#pragma once

#include <numbers>

#include "sls/constants.hpp"

namespace sls {

// Optics of one solute/solvent pair: refractive index increment (mL/g) plus
// the fixed experimental constants.
struct OpticalParams {
  double dndc = 0.0;
  PhysicalConstants constants;
};

// Material constant K* = 4 pi^2 n0^2 (dn/dc)^2 / (N_A lambda^4),
// in cm^2 mol / g^2.
inline double kstar(const OpticalParams& p) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double l2 = p.constants.lambda * p.constants.lambda;
  return 4.0 * pi2 * p.constants.n0 * p.constants.n0 * p.dndc * p.dndc /
         (p.constants.avogadro * l2 * l2);
}

// Small-particle Rayleigh ratio R = K* Mw c (1 - 2 A2 Mw c), 1/cm.
// The angular factor is identically 1 in this regime.
inline double rayleigh(double c, double mw, double a2, const OpticalParams& p) {
  return kstar(p) * mw * c * (1.0 - 2.0 * a2 * mw * c);
}

// Refractive index difference of solution versus solvent: c * dn/dc.
inline double delta_n(double c, const OpticalParams& p) {
  return c * p.dndc;
}

}  // namespace sls
