#include "sqgate/spectro.hpp"

#include <algorithm>
#include <cmath>

#include "sqgate/detail/parallel.hpp"

namespace sqgate {

namespace {

// Flip eigenvector columns so the largest-magnitude entry is positive.
// First index wins on ties, which keeps the convention platform-stable.
void fix_signs(Eigen::MatrixXd& columns) {
  for (int c = 0; c < columns.cols(); ++c) {
    int arg = 0;
    double best = 0.0;
    for (int r = 0; r < columns.rows(); ++r) {
      const double a = std::abs(columns(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (columns(arg, c) < 0.0) columns.col(c) = -columns.col(c);
  }
}

}  // namespace

Eigen::MatrixXd fgh_hamiltonian_1d(const ModelScales& s, double bias,
                                   const FghGrid& g) {
  const int n = g.n;
  const double len = g.hi - g.lo;
  const double c = kPi * kPi / (s.rho * len * len);
  Eigen::MatrixXd h(n, n);
  const double diag = c * (static_cast<double>(n) * n + 2.0) / 6.0;
  for (int i = 0; i < n; ++i) {
    h(i, i) = diag + potential_1d(g.point(i), bias, s);
    for (int j = 0; j < i; ++j) {
      const double sn = std::sin(kPi * (i - j) / n);
      const double t = ((i - j) % 2 ? -c : c) / (sn * sn);
      h(i, j) = t;
      h(j, i) = t;
    }
  }
  return h;
}

Spectrum1D solve_1d(const ModelScales& s, double bias, const FghGrid& g,
                    int k) {
  if (k < 1 || k > g.n) {
    throw InvalidParameterError("solve_1d: need 1 <= k <= N");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      fgh_hamiltonian_1d(s, bias, g));
  if (es.info() != Eigen::Success) {
    throw NumericError("solve_1d: eigendecomposition failed");
  }
  Spectrum1D out;
  out.grid = g;
  out.bias = bias;
  out.energies = es.eigenvalues().head(k);
  Eigen::MatrixXd vec = es.eigenvectors().leftCols(k);
  fix_signs(vec);
  const Eigen::VectorXd x = g.points();
  // <m|x|n> with unit-l2 vectors equals the dx-weighted integral of the
  // grid-normalized states.
  out.x_elements = vec.transpose() * x.asDiagonal() * vec;
  out.states = vec / std::sqrt(g.spacing());
  return out;
}

const ComputationalMap& SpectroTable::computational() const {
  if (!comp) {
    throw ComputationalBasisError(
        comp_error.empty() ? "computational basis undefined" : comp_error);
  }
  return *comp;
}

double SpectroTable::drive_frequency() const {
  const auto& m = computational();
  return std::abs(energies[m[CompState::q11]] - energies[m[CompState::q10]]);
}

namespace {

struct GridRep {
  // Wavefunctions of the retained coupled states evaluated on the 2D grid,
  // one N*N column per state (x1-major flattening).
  Eigen::MatrixXd psi;
};

void label_states(SpectroTable& table, const GridRep& rep, const FghGrid& g,
                  double threshold) {
  const int k = static_cast<int>(table.energies.size());
  const Eigen::Vector2d divider = central_divider(table.wp, table.scales);
  table.well_label.assign(k, WellLabel::LL);
  table.well_weight.resize(k);
  const int n = g.n;
  for (int m = 0; m < k; ++m) {
    double mass[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
      const int hi1 = g.point(i) > divider[0] ? 1 : 0;
      for (int j = 0; j < n; ++j) {
        const int hi2 = g.point(j) > divider[1] ? 1 : 0;
        const double a = rep.psi(i * n + j, m);
        mass[hi1 * 2 + hi2] += a * a;
      }
    }
    const double total = mass[0] + mass[1] + mass[2] + mass[3];
    int arg = 0;
    for (int q = 1; q < 4; ++q) {
      if (mass[q] > mass[arg]) arg = q;
    }
    table.well_label[m] = static_cast<WellLabel>(arg);
    table.well_weight[m] = mass[arg] / total;
  }
  // Lowest dominant state per well, scanning in energy order. Logical 0 is
  // the bias-favored well of each qubit (low flux for x_e < 1/2), which
  // keeps the gate definition covariant under x -> 1 - x.
  const auto logical = [&](int quadrant) {
    int hi1 = quadrant / 2, hi2 = quadrant % 2;
    if (table.wp.bias1 > 0.5) hi1 = 1 - hi1;
    if (table.wp.bias2 > 0.5) hi2 = 1 - hi2;
    return hi1 * 2 + hi2;
  };
  std::array<int, 4> idx{-1, -1, -1, -1};
  for (int m = 0; m < k; ++m) {
    const int q = logical(static_cast<int>(table.well_label[m]));
    if (idx[q] < 0 && table.well_weight[m] >= threshold) idx[q] = m;
  }
  for (int q = 0; q < 4; ++q) {
    if (idx[q] < 0) {
      table.comp.reset();
      table.comp_error = std::string("no eigenstate dominates well ") +
                         to_string(static_cast<WellLabel>(q));
      return;
    }
  }
  table.comp = ComputationalMap{idx};
  table.comp_error.clear();
}

// Wavefunction amplitude at the window edge must be negligible or the
// periodic kinetic operator couples the wells to their images.
void check_boundary_amplitude(const SpectroTable& table, const GridRep& rep,
                              const FghGrid& g) {
  std::vector<int> states;
  if (table.comp) {
    for (int i : table.comp->index) states.push_back(i);
  } else {
    states.push_back(0);
  }
  const int n = g.n;
  const double dx = g.spacing();
  double worst = 0.0;
  for (int m : states) {
    for (int i = 0; i < n; ++i) {
      worst = std::max({worst, std::abs(rep.psi(i * n + 0, m)),
                        std::abs(rep.psi(i * n + (n - 1), m)),
                        std::abs(rep.psi(0 * n + i, m)),
                        std::abs(rep.psi((n - 1) * n + i, m))});
    }
  }
  if (worst / dx >= 1e-10) {
    throw ConfigError(
        "wavefunction amplitude at the grid boundary is " +
        std::to_string(worst / dx) +
        "; widen [window_min, window_max]");
  }
}

void check_wells_inside(const WorkingParams& wp, const ModelScales& s,
                        const FghGrid& g) {
  try {
    // Search a wide fixed range so a clipped window cannot hide wells.
    const auto wells = find_wells(wp, s, 0.02, 0.98);
    const double margin = 5.0 * g.spacing();
    for (const auto& w : wells) {
      for (double c : {w.location[0], w.location[1]}) {
        if (c < g.lo + margin || c > g.hi - margin) {
          throw ConfigError("well at " + std::to_string(c) +
                            " is closer than 5 grid spacings to the window "
                            "edge; widen the window");
        }
      }
    }
  } catch (const FourWellStructureError&) {
    // No four-well structure; nothing to contain. State labeling will
    // record why the computational basis is undefined.
  }
}

SpectroTable solve_product(const ModelScales& s, const WorkingParams& wp,
                           const SolveOptions& opts) {
  const int nb = opts.product_basis;
  const int k = opts.n_states;
  const FghGrid& g = opts.grid;
  if (nb < 2 || nb > g.n) {
    throw InvalidParameterError("product basis size must be in [2, N]");
  }
  if (k > nb * nb) {
    throw InvalidParameterError("n_states exceeds product basis dimension");
  }
  const Spectrum1D s1 = solve_1d(s, wp.bias1, g, nb);
  const Spectrum1D s2 = solve_1d(s, wp.bias2, g, nb);

  const int dim = nb * nb;  // flat index p = i*nb + j
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) {
      h(i * nb + j, i * nb + j) = s1.energies[i] + s2.energies[j];
    }
  }
  Eigen::MatrixXd d1 = s1.x_elements;
  Eigen::MatrixXd d2 = s2.x_elements;
  d1.diagonal().array() -= wp.bias1;
  d2.diagonal().array() -= wp.bias2;
  const double cc = s.rho * wp.coupling;
  for (int i = 0; i < nb; ++i) {
    for (int ip = 0; ip < nb; ++ip) {
      for (int j = 0; j < nb; ++j) {
        for (int jp = 0; jp < nb; ++jp) {
          h(i * nb + j, ip * nb + jp) += cc * d1(i, ip) * d2(j, jp);
        }
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericError("solve_coupled: product eigendecomposition failed");
  }

  SpectroTable table;
  table.wp = wp;
  table.scales = s;
  table.energies = es.eigenvalues().head(k);
  Eigen::MatrixXd coef = es.eigenvectors().leftCols(k);

  // Grid representation for sign fixing and quadrant masses. The 1D factors
  // are grid-normalized, so scale back to unit l2 per column.
  const int n = g.n;
  GridRep rep;
  rep.psi.resize(n * n, k);
  const Eigen::MatrixXd phi1 = s1.states * std::sqrt(g.spacing());
  const Eigen::MatrixXd phi2 = s2.states * std::sqrt(g.spacing());
  for (int m = 0; m < k; ++m) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        cm(coef.col(m).data(), nb, nb);
    const Eigen::MatrixXd grid2d = phi1 * cm * phi2.transpose();
    // grid2d rows follow x1: flatten x1-major.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) rep.psi(i * n + j, m) = grid2d(i, j);
    }
    // Grid-space sign convention, applied to both representations.
    int arg = 0;
    rep.psi.col(m).cwiseAbs().maxCoeff(&arg);
    if (rep.psi(arg, m) < 0.0) {
      rep.psi.col(m) = -rep.psi.col(m);
      coef.col(m) = -coef.col(m);
    }
  }

  // Matrix elements via the 1D operators.
  table.x1.resize(k, k);
  table.x2.resize(k, k);
  for (int m = 0; m < k; ++m) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        cm(coef.col(m).data(), nb, nb);
    for (int mm = m; mm < k; ++mm) {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
          cn(coef.col(mm).data(), nb, nb);
      const double v1 = (cm.array() * (s1.x_elements * cn).array()).sum();
      const double v2 = (cm.array() * (cn * s2.x_elements.transpose()).array()).sum();
      table.x1(m, mm) = v1;
      table.x1(mm, m) = v1;
      table.x2(m, mm) = v2;
      table.x2(mm, m) = v2;
    }
  }
  label_states(table, rep, g, opts.dominance_threshold);
  check_boundary_amplitude(table, rep, g);
  return table;
}

SpectroTable solve_full2d(const ModelScales& s, const WorkingParams& wp,
                          const SolveOptions& opts) {
  const FghGrid& g = opts.grid;
  const int n = g.n;
  const int dim = n * n;
  const int k = opts.n_states;
  if (k > dim) throw InvalidParameterError("n_states exceeds grid dimension");

  Eigen::MatrixXd t1 = fgh_hamiltonian_1d(s, wp.bias1, g);
  Eigen::MatrixXd t2 = fgh_hamiltonian_1d(s, wp.bias2, g);
  const Eigen::VectorXd x = g.points();
  for (int i = 0; i < n; ++i) {
    t1(i, i) -= potential_1d(x[i], wp.bias1, s);  // keep kinetic part only
    t2(i, i) -= potential_1d(x[i], wp.bias2, s);
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      if (t1(i1, i2) != 0.0) {
        h.block(i1 * n, i2 * n, n, n).diagonal().array() += t1(i1, i2);
      }
    }
    h.block(i1 * n, i1 * n, n, n) += t2;
    for (int j = 0; j < n; ++j) {
      h(i1 * n + j, i1 * n + j) += potential_2d(x[i1], x[j], wp, s);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericError("solve_coupled: full2d eigendecomposition failed");
  }

  SpectroTable table;
  table.wp = wp;
  table.scales = s;
  table.energies = es.eigenvalues().head(k);
  GridRep rep;
  rep.psi = es.eigenvectors().leftCols(k);
  fix_signs(rep.psi);

  Eigen::VectorXd x1flat(dim), x2flat(dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      x1flat[i * n + j] = x[i];
      x2flat[i * n + j] = x[j];
    }
  }
  table.x1 = rep.psi.transpose() * x1flat.asDiagonal() * rep.psi;
  table.x2 = rep.psi.transpose() * x2flat.asDiagonal() * rep.psi;

  // Symmetrize away eigensolver round-off.
  table.x1 = ((table.x1 + table.x1.transpose()) / 2.0).eval();
  table.x2 = ((table.x2 + table.x2.transpose()) / 2.0).eval();

  label_states(table, rep, g, opts.dominance_threshold);
  check_boundary_amplitude(table, rep, g);
  return table;
}

}  // namespace

SpectroTable solve_coupled(const ModelScales& s, const WorkingParams& wp,
                           const SolveOptions& opts) {
  validate(wp);
  check_wells_inside(wp, s, opts.grid);
  SpectroTable table = opts.backend == CoupledBackend::Full2d
                           ? solve_full2d(s, wp, opts)
                           : solve_product(s, wp, opts);
  const int k = opts.n_states;
  table.drive.resize(k, k);
  Eigen::MatrixXd d2 = table.x2;
  d2.diagonal().array() -= wp.bias2;
  Eigen::MatrixXd d1 = table.x1;
  d1.diagonal().array() -= wp.bias1;
  table.drive = s.rho * (d2 + wp.coupling * d1);
  return table;
}

int WpGrid::point_count() const {
  int n = 1;
  for (const auto& a : axes) n *= a.count;
  return n;
}

WorkingParams WpGrid::at(int flat) const {
  WorkingParams wp = base;
  int idx[2] = {0, 0};
  if (axes.size() == 2) {
    idx[0] = flat / axes[1].count;
    idx[1] = flat % axes[1].count;
  } else if (axes.size() == 1) {
    idx[0] = flat;
  }
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const double v = axes[a].value(idx[a]);
    switch (axes[a].which) {
      case WpAxis::Bias1: wp.bias1 = v; break;
      case WpAxis::Bias2: wp.bias2 = v; break;
      case WpAxis::Coupling: wp.coupling = v; break;
    }
  }
  return wp;
}

const char* to_string(WpAxis a) {
  switch (a) {
    case WpAxis::Bias1: return "x_e1";
    case WpAxis::Bias2: return "x_e2";
    default: return "kappa";
  }
}

WpAxis wp_axis_from_string(const std::string& name) {
  if (name == "x_e1") return WpAxis::Bias1;
  if (name == "x_e2") return WpAxis::Bias2;
  if (name == "kappa") return WpAxis::Coupling;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

std::vector<LevelRow> level_spacing_map(const ModelScales& s,
                                        const WpGrid& grid,
                                        const SolveOptions& opts,
                                        int threads) {
  const int n = grid.point_count();
  std::vector<LevelRow> rows(n);
  detail::parallel_indexed(n, threads, [&](int i) {
    LevelRow& row = rows[i];
    row.wp = grid.at(i);
    try {
      const SpectroTable t = solve_coupled(s, row.wp, opts);
      row.energies = t.energies;
      int p = 0;
      for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
          row.spacings[p++] = std::abs(t.energies[b] - t.energies[a]);
        }
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace sqgate
