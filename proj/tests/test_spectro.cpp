#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sqgate/spectro.hpp"

using namespace sqgate;

namespace {

ModelScales paper_scales() {
  return derive_scales(DeviceParams::from_beta(100e-12, 40e-15, 1.2));
}

ModelScales harmonic_scales(double rho = 810.9332629613574) {
  ModelScales s = paper_scales();
  s.rho = rho;
  s.josephson = 0.0;
  return s;
}

SolveOptions default_opts() { return SolveOptions{}; }

}  // namespace

TEST_CASE("build_grid validation") {
  CHECK(build_grid(0.30, 0.70, 64).spacing() == doctest::Approx(0.00625));
  CHECK_THROWS_AS(build_grid(0.3, 0.7, 15), ConfigError);
  CHECK_THROWS_AS(build_grid(0.3, 0.7, 14), ConfigError);
  CHECK_THROWS_AS(build_grid(0.3, 0.7, 18 + 1), ConfigError);  // odd
  CHECK_THROWS_AS(build_grid(0.7, 0.3, 64), ConfigError);
}

TEST_CASE("default window contains the four wells with margin") {
  const auto wells = find_wells(WorkingParams{0.499, 0.49985, 5e-4},
                                paper_scales());
  const FghGrid g = build_grid();
  for (const auto& w : wells) {
    for (double c : {w.location[0], w.location[1]}) {
      CHECK(c > g.lo + 5 * g.spacing());
      CHECK(c < g.hi - 5 * g.spacing());
    }
  }
}

TEST_CASE("fgh hamiltonian is symmetric") {
  const FghGrid g = build_grid();
  const Eigen::MatrixXd h = fgh_hamiltonian_1d(paper_scales(), 0.499, g);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("harmonic limit reproduces n + 1/2") {
  const Spectrum1D sp = solve_1d(harmonic_scales(), 0.5, build_grid(), 8);
  for (int n = 0; n < 6; ++n) {
    CHECK(sp.energies[n] == doctest::Approx(n + 0.5).epsilon(1e-6));
  }
  // Parity: <0|x|0> = x_e.
  CHECK(sp.x_elements(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("double well near half bias gives a near-degenerate doublet") {
  // Independent oracle: second-order finite differences with hard-wall ends
  // on a fine grid, Richardson-extrapolated in the step size.
  const ModelScales s = paper_scales();
  auto fd_levels = [&](int n) {
    const double a = 0.05, b = 0.95;
    const double dx = (b - a) / (n + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    const double t = 1.0 / (2.0 * s.rho * dx * dx);
    for (int i = 0; i < n; ++i) {
      h(i, i) = 2.0 * t + potential_1d(a + (i + 1) * dx, 0.499, s);
      if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = -t;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return std::vector<double>{es.eigenvalues()[0], es.eigenvalues()[1],
                               es.eigenvalues()[2]};
  };
  const auto c1 = fd_levels(700);
  const auto c2 = fd_levels(1400);
  std::vector<double> oracle(3);
  for (int i = 0; i < 3; ++i) oracle[i] = c2[i] + (c2[i] - c1[i]) / 3.0;

  const Spectrum1D sp = solve_1d(s, 0.499, build_grid(), 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(sp.energies[i] == doctest::Approx(oracle[i]).epsilon(5e-7));
  }
  // Two near-degenerate lowest levels, far below the next spacing.
  const double split = sp.energies[1] - sp.energies[0];
  const double gap = sp.energies[2] - sp.energies[1];
  CHECK(split < 0.3);
  CHECK(gap > split);
}

TEST_CASE("1D eigenvectors are dx-orthonormal and stable under N doubling") {
  const ModelScales s = paper_scales();
  const Spectrum1D a = solve_1d(s, 0.499, build_grid(0.05, 0.95, 64), 10);
  const Spectrum1D b = solve_1d(s, 0.499, build_grid(0.05, 0.95, 128), 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(a.energies[i] - b.energies[i]) < 1e-8);
  }
  const Eigen::MatrixXd gram =
      a.states.transpose() * a.states * a.grid.spacing();
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("boundary amplitude is negligible on the default window") {
  const Spectrum1D sp = solve_1d(paper_scales(), 0.499, build_grid(), 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(sp.states(0, k)) < 1e-10);
    CHECK(std::abs(sp.states(sp.grid.n - 1, k)) < 1e-10);
  }
}

TEST_CASE("coupled solve: kappa = 0 separates into 1D sums") {
  const ModelScales s = paper_scales();
  SolveOptions opts = default_opts();
  opts.n_states = 10;
  const WorkingParams wp{0.499, 0.49985, 0.0};
  const SpectroTable t = solve_coupled(s, wp, opts);

  const Spectrum1D s1 = solve_1d(s, wp.bias1, opts.grid, 6);
  const Spectrum1D s2 = solve_1d(s, wp.bias2, opts.grid, 6);
  std::vector<double> sums;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) sums.push_back(s1.energies[i] + s2.energies[j]);
  }
  std::sort(sums.begin(), sums.end());
  for (int n = 0; n < 10; ++n) {
    CHECK(t.energies[n] == doctest::Approx(sums[n]).epsilon(1e-9));
  }
}

TEST_CASE("coupled harmonic pair matches the normal-mode spectrum") {
  ModelScales s = harmonic_scales();
  SolveOptions opts = default_opts();
  opts.n_states = 10;
  const double kappa = 0.1;
  const SpectroTable t = solve_coupled(s, WorkingParams{0.5, 0.5, kappa}, opts);
  std::vector<double> exact;
  for (int p = 0; p < 8; ++p) {
    for (int m = 0; m < 8; ++m) {
      exact.push_back((p + 0.5) * std::sqrt(1.0 + kappa) +
                      (m + 0.5) * std::sqrt(1.0 - kappa));
    }
  }
  std::sort(exact.begin(), exact.end());
  for (int n = 0; n < 10; ++n) {
    CHECK(t.energies[n] == doctest::Approx(exact[n]).epsilon(1e-8));
  }
}

TEST_CASE("spectro table invariants at the figure working point") {
  const ModelScales s = paper_scales();
  const WorkingParams wp{0.499, 0.49985, 5e-4};
  const SpectroTable t = solve_coupled(s, wp, default_opts());

  SUBCASE("matrix elements symmetric") {
    CHECK((t.x1 - t.x1.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((t.x2 - t.x2.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((t.drive - t.drive.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  }

  SUBCASE("drive matrix consistency identity") {
    Eigen::MatrixXd expect = t.x2;
    expect.diagonal().array() -= wp.bias2;
    Eigen::MatrixXd d1 = t.x1;
    d1.diagonal().array() -= wp.bias1;
    expect = s.rho * (expect + wp.coupling * d1);
    CHECK((t.drive - expect).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("computational map is the four lowest states in order") {
    REQUIRE(t.comp.has_value());
    CHECK(t.comp->index == std::array<int, 4>{0, 1, 2, 3});
    for (int c = 0; c < 4; ++c) {
      CHECK(t.well_weight[t.comp->index[c]] >= 0.5);
    }
    // Conditional splitting: the controlled-flip spacing differs from the
    // idle-flip spacing.
    const double de34 = t.energies[3] - t.energies[2];
    const double de12 = t.energies[1] - t.energies[0];
    CHECK(std::abs(de34 - de12) > 10.0 * 1e-3);
    CHECK(t.drive_frequency() == doctest::Approx(de34));
  }

  SUBCASE("swapped-bias point swaps the inner computational pair") {
    // At x_e2 closer to half flux than x_e1 the role of the middle states
    // exchanges: map stays injective.
    const SpectroTable tb =
        solve_coupled(s, WorkingParams{0.499, 0.49897, 5e-4}, default_opts());
    REQUIRE(tb.comp.has_value());
    CHECK(tb.comp->index == std::array<int, 4>{0, 2, 1, 3});
  }
}

TEST_CASE("spectrum reflection and swap invariance") {
  const ModelScales s = paper_scales();
  SolveOptions opts = default_opts();
  opts.n_states = 12;
  const WorkingParams wp{0.4992, 0.4996, 1.2e-3};
  const SpectroTable base = solve_coupled(s, wp, opts);

  const SpectroTable refl = solve_coupled(
      s, WorkingParams{1.0 - wp.bias1, 1.0 - wp.bias2, wp.coupling}, opts);
  const SpectroTable swap =
      solve_coupled(s, WorkingParams{wp.bias2, wp.bias1, wp.coupling}, opts);
  for (int n = 0; n < 12; ++n) {
    CHECK(std::abs(base.energies[n] - refl.energies[n]) < 1e-8);
    CHECK(std::abs(base.energies[n] - swap.energies[n]) < 1e-8);
  }
}

TEST_CASE("product backend is stable under grid doubling") {
  const ModelScales s = paper_scales();
  SolveOptions a = default_opts();
  a.n_states = 10;
  SolveOptions b = a;
  b.grid = build_grid(0.05, 0.95, 128);
  const WorkingParams wp{0.499, 0.49985, 5e-4};
  const SpectroTable ta = solve_coupled(s, wp, a);
  const SpectroTable tb = solve_coupled(s, wp, b);
  for (int n = 0; n < 10; ++n) {
    CHECK(std::abs(ta.energies[n] - tb.energies[n]) < 1e-8);
  }
}

TEST_CASE("level spacing map") {
  const ModelScales s = paper_scales();
  SolveOptions opts = default_opts();
  opts.n_states = 6;
  WpGrid grid;
  grid.base = WorkingParams{0.499, 0.49985, 0.0};
  grid.axes = {WpGrid::Axis{WpAxis::Bias2, 0.4995, 0.5000, 3}};
  const auto rows = level_spacing_map(s, grid, opts, 2);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    REQUIRE(r.ok);
    CHECK(r.spacings[0] == doctest::Approx(r.energies[1] - r.energies[0]));
    CHECK(r.spacings[5] == doctest::Approx(r.energies[3] - r.energies[2]));
  }
  // kappa = 0 rows equal the separable prediction.
  const Spectrum1D s1 = solve_1d(s, 0.499, opts.grid, 4);
  const Spectrum1D s2 = solve_1d(s, rows[1].wp.bias2, opts.grid, 4);
  std::vector<double> sums;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) sums.push_back(s1.energies[i] + s2.energies[j]);
  }
  std::sort(sums.begin(), sums.end());
  for (int n = 0; n < 6; ++n) {
    CHECK(rows[1].energies[n] == doctest::Approx(sums[n]).epsilon(1e-9));
  }
}

TEST_CASE("narrow window is rejected by the containment check") {
  const ModelScales s = paper_scales();
  SolveOptions opts = default_opts();
  opts.grid = build_grid(0.30, 0.70, 64);
  CHECK_THROWS_AS(solve_coupled(s, WorkingParams{0.499, 0.49985, 5e-4}, opts),
                  ConfigError);
}
