#include "sqgate/ita.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>

#include "sqgate/detail/parallel.hpp"

namespace sqgate {

void validate(const DrivePulse& pulse) {
  if (!(pulse.amplitude >= 0.0)) {
    throw InvalidParameterError("pulse amplitude must not be negative");
  }
  if (!(pulse.frequency > 0.0)) {
    throw InvalidParameterError("pulse frequency must be positive");
  }
  if (!(pulse.duration > 0.0)) {
    throw InvalidParameterError("pulse duration must be positive");
  }
}

double bessel_rabi_factor(int n_photon, double y) {
  if (n_photon < 1) throw InvalidParameterError("photon number must be >= 1");
  const double a = std::abs(y);
  double f;
  if (a < 1e-3) {
    // Leading series of N*J_N(y)/y; avoids the 0/0 at y = 0.
    const double y2 = a * a;
    switch (n_photon) {
      case 1: f = 0.5 * (1.0 - y2 / 8.0); break;
      case 2: f = (a / 4.0) * (1.0 - y2 / 12.0); break;
      case 3: f = (y2 / 16.0) * (1.0 - y2 / 16.0); break;
      default: f = 0.0; break;
    }
  } else {
    f = n_photon * std::cyl_bessel_j(n_photon, a) / a;
  }
  // J_N(-y)/(-y) picks up (-1)^(N+1).
  if (y < 0.0 && n_photon % 2 == 0) f = -f;
  return f;
}

TransitionRecord transition_probability(const SpectroTable& table,
                                        const DrivePulse& pulse, int i, int j,
                                        int n_photon) {
  if (i == j) throw InvalidParameterError("transition needs i != j");
  const int k = static_cast<int>(table.energies.size());
  if (i < 0 || j < 0 || i >= k || j >= k) {
    throw InvalidParameterError("transition state index out of range");
  }
  TransitionRecord r;
  r.from = i;
  r.to = j;
  r.n_photon = n_photon;
  r.bessel_arg =
      pulse.amplitude * (table.drive(j, j) - table.drive(i, i)) / pulse.frequency;
  r.rabi = 2.0 * pulse.amplitude * std::abs(table.drive(i, j)) *
           bessel_rabi_factor(n_photon, r.bessel_arg);
  r.detuning =
      std::abs(table.energies[j] - table.energies[i]) - n_photon * pulse.frequency;
  const double o2 = r.rabi * r.rabi;
  const double d2 = r.detuning * r.detuning;
  if (o2 == 0.0) {
    // Forbidden transition: no coupling means no transfer, including the
    // degenerate 0/0 point exactly on resonance.
    r.probability = 0.0;
  } else {
    r.probability = o2 / (d2 + o2);
  }
  return r;
}

std::vector<int> undesired_states(const SpectroTable& table, CompState c) {
  const auto& map = table.computational();
  const int self = map[c];
  int partner = -1;
  if (c == CompState::q10) partner = map[CompState::q11];
  if (c == CompState::q11) partner = map[CompState::q10];
  std::vector<int> out;
  out.reserve(table.energies.size());
  for (int n = 0; n < table.energies.size(); ++n) {
    if (n != self && n != partner) out.push_back(n);
  }
  return out;
}

ComponentLeakage component_leakage(const SpectroTable& table,
                                   const DrivePulse& pulse, CompState c,
                                   const ItaOptions& opts) {
  const int self = table.comp_index(c);
  ComponentLeakage out;
  out.component = c;
  double worst = -1.0;
  for (int n : undesired_states(table, c)) {
    double p = 0.0;
    for (int np = 1; np <= opts.max_photon; ++np) {
      const double q = transition_probability(table, pulse, self, n, np).probability;
      p = opts.aggregation == PhotonAggregation::Sum ? p + q : std::max(p, q);
    }
    out.breakdown.emplace_back(n, p);
    out.eta += p;
    if (p > worst) {
      worst = p;
      out.dominant_channel = n;
    }
  }
  return out;
}

namespace {

// The closed-form transition probability assumes a weak drive. Warn once
// when the strongest dressed Rabi rate exceeds a tenth of the frequency.
void warn_if_strong(const SpectroTable& table, const DrivePulse& pulse) {
  static std::atomic<bool> warned{false};
  if (!warned.load(std::memory_order_relaxed) &&
      !weak_field_ok(table, pulse)) {
    if (!warned.exchange(true)) {
      std::cerr << "warning: drive amplitude " << pulse.amplitude
                << " exceeds the weak-field regime at frequency "
                << pulse.frequency << "; transition estimates degrade\n";
    }
  }
}

}  // namespace

GateLeakage gate_leakage(const SpectroTable& table, const DrivePulse& pulse,
                         const ItaOptions& opts) {
  warn_if_strong(table, pulse);
  GateLeakage out;
  for (int c = 0; c < 4; ++c) {
    out.components[c] =
        component_leakage(table, pulse, static_cast<CompState>(c), opts);
    out.eta = std::max(out.eta, out.components[c].eta);
  }
  return out;
}

bool weak_field_ok(const SpectroTable& table, const DrivePulse& pulse) {
  double max_rate = 0.0;
  const int k = static_cast<int>(table.energies.size());
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double y =
          pulse.amplitude * (table.drive(j, j) - table.drive(i, i)) / pulse.frequency;
      for (int np = 1; np <= 3; ++np) {
        max_rate = std::max(max_rate,
                            2.0 * pulse.amplitude * std::abs(table.drive(i, j)) *
                                std::abs(bessel_rabi_factor(np, y)));
      }
    }
  }
  return max_rate <= 0.1 * pulse.frequency;
}

LeakageMap ita_leakage_map(const ModelScales& s, const WpGrid& grid,
                           double drive_amplitude, const SolveOptions& solve,
                           const ItaOptions& ita, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  LeakageMap map;
  map.grid = grid;
  map.method = "ita";
  map.drive_amplitude = drive_amplitude;
  const int n = grid.point_count();
  map.points.resize(n);
  detail::parallel_indexed(n, threads, [&](int i) {
    LeakagePoint& pt = map.points[i];
    const auto p0 = std::chrono::steady_clock::now();
    pt.wp = grid.at(i);
    try {
      const SpectroTable table = solve_coupled(s, pt.wp, solve);
      DrivePulse pulse{drive_amplitude, table.drive_frequency(),
                       2.0 * kPi / table.drive_frequency()};
      const GateLeakage g = gate_leakage(table, pulse, ita);
      pt.eta = g.eta;
      for (int c = 0; c < 4; ++c) pt.component_eta[c] = g.components[c].eta;
      pt.flagged = false;
    } catch (const std::exception& e) {
      pt.eta = 1.0;
      pt.component_eta = {1.0, 1.0, 1.0, 1.0};
      pt.flagged = true;
      pt.flag_reason = e.what();
    }
    pt.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - p0)
            .count();
  });
  map.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return map;
}

}  // namespace sqgate
