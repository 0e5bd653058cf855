#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sqgate/grid.hpp"
#include "sqgate/model.hpp"

namespace sqgate {

// Lowest eigenpairs of one flux qubit on the grid.
struct Spectrum1D {
  Eigen::VectorXd energies;    // ascending, hbar*omega_lc units
  Eigen::MatrixXd states;      // n x k, normalized so sum |psi|^2 dx = 1
  Eigen::MatrixXd x_elements;  // k x k, <m|x|n>
  FghGrid grid;
  double bias = 0.5;
};

// Dense FGH Hamiltonian: exact spectral kinetic matrix for a periodic grid
// plus the diagonal potential.
Eigen::MatrixXd fgh_hamiltonian_1d(const ModelScales& s, double bias,
                                   const FghGrid& g);

// Lowest k eigenpairs; sign convention: the largest-magnitude component of
// each state is positive.
Spectrum1D solve_1d(const ModelScales& s, double bias, const FghGrid& g,
                    int k);

enum class CompState { q00 = 0, q01 = 1, q10 = 2, q11 = 3 };

inline const char* to_string(CompState c) {
  switch (c) {
    case CompState::q00: return "00";
    case CompState::q01: return "01";
    case CompState::q10: return "10";
    default: return "11";
  }
}

// Eigenstate index of the lowest state dominating each well, in label order
// LL, LH, HL, HH.
struct ComputationalMap {
  std::array<int, 4> index;
  int operator[](CompState c) const { return index[static_cast<int>(c)]; }
};

enum class CoupledBackend { Product, Full2d };

struct SolveOptions {
  FghGrid grid;
  int n_states = 20;               // K, retained coupled eigenpairs
  CoupledBackend backend = CoupledBackend::Product;
  int product_basis = 10;          // 1D states per qubit (product backend)
  double dominance_threshold = 0.5;
};

// Spectroscopic data of the coupled qubits at one working point: energies,
// flux matrix elements, the microwave coupling matrix and the computational
// state assignment.
struct SpectroTable {
  WorkingParams wp{};
  ModelScales scales{};
  Eigen::VectorXd energies;  // K ascending
  Eigen::MatrixXd x1;        // K x K, (m| x1 |n)
  Eigen::MatrixXd x2;        // K x K, (m| x2 |n)
  // drive[m][n] = rho*(m| (x2 - x_e2) + kappa*(x1 - x_e1) |n); energy change
  // per unit microwave flux amplitude.
  Eigen::MatrixXd drive;
  std::vector<WellLabel> well_label;  // dominant quadrant per state
  Eigen::VectorXd well_weight;        // probability mass in that quadrant
  std::optional<ComputationalMap> comp;
  std::string comp_error;  // set when comp is empty

  // Throws ComputationalBasisError when the assignment failed.
  const ComputationalMap& computational() const;
  int comp_index(CompState c) const { return computational()[c]; }
  // |E(11) - E(10)|: the resonant drive frequency of the controlled flip.
  double drive_frequency() const;
};

// Solve the coupled eigenproblem. The product backend projects onto tensor
// products of 1D eigenstates; full2d diagonalizes the dense N^2 x N^2 FGH
// matrix. Well labeling failures are stored in the table, not thrown.
SpectroTable solve_coupled(const ModelScales& s, const WorkingParams& wp,
                           const SolveOptions& opts);

// Working-point grid for sweeps: a base point plus one or two swept axes.
enum class WpAxis { Bias1, Bias2, Coupling };

const char* to_string(WpAxis a);
WpAxis wp_axis_from_string(const std::string& name);

struct WpGrid {
  WorkingParams base{};
  struct Axis {
    WpAxis which;
    double lo, hi;
    int count;
    double value(int i) const {
      return count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    }
  };
  std::vector<Axis> axes;  // 1 or 2; axis 0 is the outer (slow) one

  int point_count() const;
  WorkingParams at(int flat) const;
};

struct LevelRow {
  WorkingParams wp{};
  Eigen::VectorXd energies;
  // Spacings |E_j - E_i| of the four lowest levels, pair order
  // (1,2) (1,3) (1,4) (2,3) (2,4) (3,4).
  std::array<double, 6> spacings{};
  bool ok = false;
  std::string error;
};

// Per-point spectra over a working-point grid; failed rows are flagged.
std::vector<LevelRow> level_spacing_map(const ModelScales& s,
                                        const WpGrid& grid,
                                        const SolveOptions& opts,
                                        int threads = 1);

}  // namespace sqgate
