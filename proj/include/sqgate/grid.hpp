#pragma once

#include <Eigen/Dense>

#include "sqgate/errors.hpp"

namespace sqgate {

// Uniform periodic grid for the Fourier-grid Hamiltonian. The grid point
// x_i = lo + i*spacing covers [lo, hi) with hi identified with lo.
struct FghGrid {
  double lo = 0.05;
  double hi = 0.95;
  int n = 64;

  double spacing() const { return (hi - lo) / n; }
  double point(int i) const { return lo + i * spacing(); }
  Eigen::VectorXd points() const {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = point(i);
    return x;
  }
};

// n must be even (the kinetic matrix below uses the even-N closed form) and
// at least 16.
inline FghGrid build_grid(double lo = 0.05, double hi = 0.95, int n = 64) {
  if (!(hi > lo)) throw ConfigError("grid window is empty");
  if (n < 16) throw ConfigError("grid needs at least 16 points");
  if (n % 2 != 0) throw ConfigError("grid point count must be even");
  return FghGrid{lo, hi, n};
}

}  // namespace sqgate
