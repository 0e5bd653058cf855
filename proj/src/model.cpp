#include "sqgate/model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

namespace sqgate {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameterError(std::string(name) + " must be positive");
  }
}

void warn_single_well(double beta_l) {
  if (beta_l <= 1.0) {
    std::cerr << "warning: beta_l = " << beta_l
              << " <= 1, potential has no double well near half-flux bias\n";
  }
}

}  // namespace

DeviceParams DeviceParams::from_beta(double inductance, double capacitance,
                                     double beta_l) {
  check_positive(inductance, "inductance");
  check_positive(capacitance, "capacitance");
  check_positive(beta_l, "beta_l");
  warn_single_well(beta_l);
  return DeviceParams{inductance, capacitance, beta_l};
}

DeviceParams DeviceParams::from_critical_current(double inductance,
                                                 double capacitance,
                                                 double critical_current) {
  check_positive(critical_current, "critical_current");
  const double beta_l =
      2.0 * kPi * inductance * critical_current / kFluxQuantum;
  return from_beta(inductance, capacitance, beta_l);
}

DeviceParams DeviceParams::from_both(double inductance, double capacitance,
                                     double beta_l, double critical_current) {
  const DeviceParams a = from_beta(inductance, capacitance, beta_l);
  const double implied = a.critical_current();
  if (std::abs(implied - critical_current) >
      1e-9 * std::max(std::abs(implied), std::abs(critical_current))) {
    throw InvalidParameterError(
        "beta_l and critical_current disagree: beta_l implies I_c = " +
        std::to_string(implied));
  }
  return a;
}

ModelScales derive_scales(const DeviceParams& dp) {
  check_positive(dp.inductance, "inductance");
  check_positive(dp.capacitance, "capacitance");
  check_positive(dp.beta_l, "beta_l");
  ModelScales s;
  s.omega_lc = 1.0 / std::sqrt(dp.inductance * dp.capacitance);
  s.mass_si = dp.capacitance * kFluxQuantum * kFluxQuantum;
  s.rho = s.mass_si * s.omega_lc / kHbar;
  s.josephson = s.rho * dp.beta_l / (4.0 * kPi * kPi);
  return s;
}

void validate(const WorkingParams& wp, double bias_lo, double bias_hi) {
  if (!(std::abs(wp.coupling) < 1.0)) {
    throw InvalidParameterError("|kappa| must be < 1");
  }
  for (double b : {wp.bias1, wp.bias2}) {
    if (!(b >= bias_lo && b <= bias_hi)) {
      throw InvalidParameterError("bias " + std::to_string(b) +
                                  " outside window [" + std::to_string(bias_lo) +
                                  ", " + std::to_string(bias_hi) + "]");
    }
  }
}

namespace {

Eigen::Vector2d gradient_2d(const Eigen::Vector2d& x, const WorkingParams& wp,
                            const ModelScales& s) {
  const double tp = 2.0 * kPi;
  Eigen::Vector2d g;
  g[0] = s.rho * (x[0] - wp.bias1) + tp * s.josephson * std::sin(tp * x[0]) +
         s.rho * wp.coupling * (x[1] - wp.bias2);
  g[1] = s.rho * (x[1] - wp.bias2) + tp * s.josephson * std::sin(tp * x[1]) +
         s.rho * wp.coupling * (x[0] - wp.bias1);
  return g;
}

Eigen::Matrix2d hessian_2d(const Eigen::Vector2d& x, const WorkingParams& wp,
                           const ModelScales& s) {
  const double tp = 2.0 * kPi;
  Eigen::Matrix2d h;
  h(0, 0) = s.rho + tp * tp * s.josephson * std::cos(tp * x[0]);
  h(1, 1) = s.rho + tp * tp * s.josephson * std::cos(tp * x[1]);
  h(0, 1) = h(1, 0) = s.rho * wp.coupling;
  return h;
}

// Damped Newton descent; returns true when a stationary point is reached.
bool descend(Eigen::Vector2d& x, const WorkingParams& wp, const ModelScales& s,
             double lo, double hi) {
  double lambda = 0.0;
  const double grad_tol = 1e-10 * s.rho;
  for (int it = 0; it < 80; ++it) {
    const Eigen::Vector2d g = gradient_2d(x, wp, s);
    if (g.norm() < grad_tol) return true;
    Eigen::Matrix2d h = hessian_2d(x, wp, s);
    // Push indefinite or ill-conditioned Hessians toward gradient descent.
    const double floor = 1e-6 * s.rho;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    double shift = std::max(0.0, floor - es.eigenvalues().minCoeff()) + lambda;
    h += shift * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d step = h.ldlt().solve(g);
    const double u0 = potential_2d(x[0], x[1], wp, s);
    Eigen::Vector2d trial = x - step;
    trial[0] = std::clamp(trial[0], lo, hi);
    trial[1] = std::clamp(trial[1], lo, hi);
    if (potential_2d(trial[0], trial[1], wp, s) <= u0 + 1e-14 * std::abs(u0)) {
      x = trial;
      lambda = std::max(0.0, lambda * 0.25);
    } else {
      lambda = std::max(floor, lambda * 8.0 + floor);
    }
  }
  return gradient_2d(x, wp, s).norm() < 1e3 * grad_tol;
}

}  // namespace

Eigen::Vector2d central_divider(const WorkingParams& wp,
                                const ModelScales& s) {
  // Newton iteration for the stationary point nearest the window center.
  Eigen::Vector2d x(0.5, 0.5);
  for (int it = 0; it < 60; ++it) {
    const Eigen::Vector2d g = gradient_2d(x, wp, s);
    if (g.norm() < 1e-12 * s.rho) break;
    x -= hessian_2d(x, wp, s).ldlt().solve(g);
  }
  return x;
}

std::array<WellMinimum, 4> find_wells(const WorkingParams& wp,
                                      const ModelScales& s, double lo,
                                      double hi) {
  validate(wp);
  constexpr int kSeeds = 64;
  const double dedup = 1e-4;
  std::vector<WellMinimum> minima;
  for (int i = 0; i < kSeeds; ++i) {
    for (int j = 0; j < kSeeds; ++j) {
      Eigen::Vector2d x(lo + (hi - lo) * (i + 0.5) / kSeeds,
                        lo + (hi - lo) * (j + 0.5) / kSeeds);
      if (!descend(x, wp, s, lo, hi)) continue;
      if (x[0] <= lo + 1e-9 || x[0] >= hi - 1e-9 || x[1] <= lo + 1e-9 ||
          x[1] >= hi - 1e-9) {
        continue;  // clamped against the window edge, not a true minimum
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hessian_2d(x, wp, s));
      if (es.eigenvalues().minCoeff() <= 0.0) continue;  // saddle or maximum
      bool dup = false;
      for (const auto& m : minima) {
        if ((m.location - x).norm() < dedup) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        minima.push_back(
            WellMinimum{x, potential_2d(x[0], x[1], wp, s), WellLabel::LL});
      }
    }
  }
  if (minima.size() != 4) {
    throw FourWellStructureError(static_cast<int>(minima.size()));
  }
  const Eigen::Vector2d c = central_divider(wp, s);
  for (auto& m : minima) {
    const int hi1 = m.location[0] > c[0] ? 1 : 0;
    const int hi2 = m.location[1] > c[1] ? 1 : 0;
    m.label = static_cast<WellLabel>(hi1 * 2 + hi2);
  }
  std::sort(minima.begin(), minima.end(),
            [](const WellMinimum& a, const WellMinimum& b) {
              return static_cast<int>(a.label) < static_cast<int>(b.label);
            });
  for (std::size_t i = 1; i < minima.size(); ++i) {
    if (minima[i].label == minima[i - 1].label) {
      throw FourWellStructureError(static_cast<int>(minima.size()));
    }
  }
  std::array<WellMinimum, 4> out;
  std::copy(minima.begin(), minima.end(), out.begin());
  return out;
}

}  // namespace sqgate
