#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "sqgate/constants.hpp"
#include "sqgate/errors.hpp"

namespace sqgate {

// Fabrication-fixed parameters of one rf SQUID. Both qubits are identical.
// beta_l = 2*pi*L*I_c/Phi_0 controls the well shape; beta_l > 1 gives a
// double well near half-flux bias.
struct DeviceParams {
  double inductance;   // L, henry
  double capacitance;  // C, farad
  double beta_l;       // dimensionless

  static DeviceParams from_beta(double inductance, double capacitance,
                                double beta_l);
  static DeviceParams from_critical_current(double inductance,
                                            double capacitance,
                                            double critical_current);
  // When both beta_l and I_c are given they must agree to 1e-9 relative.
  static DeviceParams from_both(double inductance, double capacitance,
                                double beta_l, double critical_current);

  double critical_current() const {
    return beta_l * kFluxQuantum / (2.0 * kPi * inductance);
  }
};

// Dimensionless model constants. All downstream computation works in units
// of hbar*omega_lc (energy), 1/omega_lc (time) and Phi_0 (flux); SI values
// appear only at the configuration boundary.
struct ModelScales {
  double omega_lc;   // 1/sqrt(LC), rad/s
  double mass_si;    // C*Phi_0^2, J s^2
  double rho;        // mass_si*omega_lc/hbar, dimensionless
  double josephson;  // E_J/(hbar*omega_lc) = rho*beta_l/(4 pi^2)
};

ModelScales derive_scales(const DeviceParams& dp);

// Externally tunable controls: flux biases (Phi_0 units) and the mutual
// inductance ratio kappa = M/L.
struct WorkingParams {
  double bias1;     // x_e1
  double bias2;     // x_e2
  double coupling;  // kappa
};

// |kappa| < 1 always; biases must sit inside the configured window.
void validate(const WorkingParams& wp, double bias_lo = 0.49,
              double bias_hi = 0.51);

// Dimensionless single-qubit potential rho*(x-x_e)^2/2 - eJ*cos(2*pi*x).
template <typename Scalar>
Scalar potential_1d(Scalar x, double bias, const ModelScales& s) {
  using std::cos;
  const Scalar d = x - bias;
  return 0.5 * s.rho * d * d - s.josephson * cos(2.0 * kPi * x);
}

// Coupled potential: U(x1) + U(x2) + rho*kappa*(x1-x_e1)*(x2-x_e2).
template <typename Scalar>
Scalar potential_2d(Scalar x1, Scalar x2, const WorkingParams& wp,
                    const ModelScales& s) {
  return potential_1d(x1, wp.bias1, s) + potential_1d(x2, wp.bias2, s) +
         s.rho * wp.coupling * (x1 - wp.bias1) * (x2 - wp.bias2);
}

// Well quadrant by (low/high flux of qubit 1, qubit 2). Order is fixed:
// LL, LH, HL, HH, matching the logical states 00, 01, 10, 11.
enum class WellLabel { LL = 0, LH = 1, HL = 2, HH = 3 };

inline const char* to_string(WellLabel w) {
  switch (w) {
    case WellLabel::LL: return "LL";
    case WellLabel::LH: return "LH";
    case WellLabel::HL: return "HL";
    default: return "HH";
  }
}

struct WellMinimum {
  Eigen::Vector2d location;  // (x1, x2), Phi_0 units
  double value;              // potential, hbar*omega_lc units
  WellLabel label;
};

// Central stationary point of the coupled potential near (1/2, 1/2); the
// quadrant boundaries used for well labeling.
Eigen::Vector2d central_divider(const WorkingParams& wp, const ModelScales& s);

// All local minima of the coupled potential inside the window, found by
// multi-start damped-Newton descent seeded on a 64x64 grid, deduplicated at
// distance 1e-4 and labeled by quadrant. Throws FourWellStructureError when
// the count differs from four.
std::array<WellMinimum, 4> find_wells(const WorkingParams& wp,
                                      const ModelScales& s, double lo = 0.05,
                                      double hi = 0.95);

}  // namespace sqgate
