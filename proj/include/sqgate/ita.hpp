#pragma once

#include <array>
#include <string>
#include <vector>

#include "sqgate/spectro.hpp"

namespace sqgate {

enum class Envelope { Rectangular };

// Microwave pulse x_m(tau) = x_m0 * cos(omega * tau) applied to the target
// qubit. Dimensionless throughout: amplitude in Phi_0, frequency in
// omega_lc, duration in 1/omega_lc.
struct DrivePulse {
  double amplitude;   // x_m0
  double frequency;   // omega
  double duration;    // tau_f
  Envelope envelope = Envelope::Rectangular;
  bool capped = false;  // duration was clipped at the configured maximum
};

void validate(const DrivePulse& pulse);

// Warns (returns false) when 2*x_m0*max|O_ij|*max_N N*J_N/y exceeds
// 0.1*omega: outside that regime the independent-transition estimate
// degrades.
bool weak_field_ok(const SpectroTable& table, const DrivePulse& pulse);

// N*J_N(y)/y, continuous through y = 0 (limits 1/2 for N = 1, 0 above).
double bessel_rabi_factor(int n_photon, double y);

struct TransitionRecord {
  int from = 0, to = 0;
  int n_photon = 1;
  double rabi = 0.0;        // Omega, omega_lc units
  double detuning = 0.0;    // |E_j - E_i| - N*omega
  double bessel_arg = 0.0;  // y = x_m0*(O_jj - O_ii)/omega
  double probability = 0.0;
};

// Maximum transition probability Omega^2/(D^2 + Omega^2) for the isolated
// pair (i, j) in an n_photon process.
TransitionRecord transition_probability(const SpectroTable& table,
                                        const DrivePulse& pulse, int i, int j,
                                        int n_photon);

enum class PhotonAggregation { Max, Sum };

struct ItaOptions {
  int max_photon = 3;
  PhotonAggregation aggregation = PhotonAggregation::Max;
};

struct ComponentLeakage {
  CompState component{};
  double eta = 0.0;
  // (state index, probability) over the component's undesired set.
  std::vector<std::pair<int, double>> breakdown;
  int dominant_channel = -1;
};

// Undesired states for a component: every retained state except itself and,
// for |10> / |11>, the intended partner of the controlled flip.
std::vector<int> undesired_states(const SpectroTable& table, CompState c);

ComponentLeakage component_leakage(const SpectroTable& table,
                                   const DrivePulse& pulse, CompState c,
                                   const ItaOptions& opts = {});

struct GateLeakage {
  double eta = 0.0;  // max over the four components; not clipped at 1
  std::array<ComponentLeakage, 4> components;
};

GateLeakage gate_leakage(const SpectroTable& table, const DrivePulse& pulse,
                         const ItaOptions& opts = {});

struct LeakagePoint {
  WorkingParams wp{};
  double eta = 1.0;
  std::array<double, 4> component_eta{1.0, 1.0, 1.0, 1.0};
  bool flagged = false;
  std::string flag_reason;
  // Diagnostic only; never serialized, so outputs stay deterministic.
  double wall_seconds = 0.0;
};

struct LeakageMap {
  WpGrid grid;
  std::vector<LeakagePoint> points;  // grid order
  std::string method;                // "ita" or "dm"
  double drive_amplitude = 0.0;
  double wall_seconds = 0.0;
};

// Leakage at every grid point with the drive set on the controlled-flip
// resonance. Failed points carry eta = 1 and a flag instead of aborting.
LeakageMap ita_leakage_map(const ModelScales& s, const WpGrid& grid,
                           double drive_amplitude, const SolveOptions& solve,
                           const ItaOptions& ita = {}, int threads = 1);

}  // namespace sqgate
