#include <doctest.h>

#include <cmath>
#include <random>

#include "sqgate/ita.hpp"

using namespace sqgate;

namespace {

ModelScales paper_scales() {
  return derive_scales(DeviceParams::from_beta(100e-12, 40e-15, 1.2));
}

// Hand-built table: four computational states plus one spectator, diagonal
// drive entries chosen so every Bessel argument vanishes unless set.
SpectroTable synthetic_table() {
  SpectroTable t;
  t.wp = WorkingParams{0.499, 0.49985, 5e-4};
  t.scales = paper_scales();
  const int k = 5;
  t.energies.resize(k);
  t.energies << 0.0, 0.25, 1.0, 2.0, 2.6;
  t.x1 = Eigen::MatrixXd::Zero(k, k);
  t.x2 = Eigen::MatrixXd::Zero(k, k);
  t.drive = Eigen::MatrixXd::Zero(k, k);
  t.drive(2, 3) = t.drive(3, 2) = 1.0;   // intended controlled flip
  t.drive(0, 1) = t.drive(1, 0) = 0.7;   // idle-pair leak channel
  t.drive(0, 4) = t.drive(4, 0) = 0.2;   // spectator channel
  t.well_label = {WellLabel::LL, WellLabel::LH, WellLabel::HL, WellLabel::HH,
                  WellLabel::HH};
  t.well_weight = Eigen::VectorXd::Ones(k);
  t.comp = ComputationalMap{{0, 1, 2, 3}};
  return t;
}

DrivePulse pulse_for(const SpectroTable& t, double amp) {
  return DrivePulse{amp, t.drive_frequency(), 1.0};
}

}  // namespace

TEST_CASE("bessel rabi factor") {
  CHECK(bessel_rabi_factor(1, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bessel_rabi_factor(2, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bessel_rabi_factor(3, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  // Reference values from an independent special-function evaluation.
  CHECK(bessel_rabi_factor(1, 1.0) ==
        doctest::Approx(0.44005058574493355).epsilon(1e-12));
  CHECK(bessel_rabi_factor(2, 1.0) ==
        doctest::Approx(0.229806969863801).epsilon(1e-12));
  CHECK(bessel_rabi_factor(3, 1.0) ==
        doctest::Approx(0.058690061948005245).epsilon(1e-12));
  CHECK(bessel_rabi_factor(1, 2.5) ==
        doctest::Approx(0.19883764098570963).epsilon(1e-12));
  CHECK(bessel_rabi_factor(2, 0.5) ==
        doctest::Approx(0.12241609383473055).epsilon(1e-12));
  // Continuity across the series/library switch near 1e-3.
  CHECK(bessel_rabi_factor(1, 1e-3) ==
        doctest::Approx(0.49999993750000277).epsilon(1e-10));
  CHECK(bessel_rabi_factor(1, 0.999e-3) ==
        doctest::Approx(bessel_rabi_factor(1, 1.001e-3)).epsilon(1e-9));
  // Parity: even in y for odd N, odd for even N.
  CHECK(bessel_rabi_factor(1, -1.0) == bessel_rabi_factor(1, 1.0));
  CHECK(bessel_rabi_factor(3, -1.0) == bessel_rabi_factor(3, 1.0));
  CHECK(bessel_rabi_factor(2, -1.0) == -bessel_rabi_factor(2, 1.0));
}

TEST_CASE("transition probability") {
  const SpectroTable t = synthetic_table();

  SUBCASE("resonance gives unit probability") {
    // Drive at the 2-3 spacing: detuning zero, coupling nonzero.
    const DrivePulse p = pulse_for(t, 1e-3);
    const TransitionRecord r = transition_probability(t, p, 2, 3, 1);
    CHECK(r.detuning == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.probability == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("rabi equal to detuning gives one half") {
    const DrivePulse p = pulse_for(t, 1e-3);
    // 0 -> 1 spacing 0.25, drive 1.0: detuning -0.75... use a synthetic pair:
    // construct the record directly from the formula pieces instead.
    TransitionRecord r = transition_probability(t, p, 0, 1, 1);
    const double expected =
        r.rabi * r.rabi / (r.detuning * r.detuning + r.rabi * r.rabi);
    CHECK(r.probability == doctest::Approx(expected).epsilon(1e-14));
    // Now force |Omega| = |D| with a tuned amplitude: Omega = amp*0.7 and
    // D = 0.25 - 1.0 fixed, so amp = 0.75/0.7.
    const DrivePulse q{0.75 / 0.7, t.drive_frequency(), 1.0};
    r = transition_probability(t, q, 0, 1, 1);
    CHECK(std::abs(r.rabi) == doctest::Approx(std::abs(r.detuning)).epsilon(1e-12));
    CHECK(r.probability == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("forbidden transition on resonance stays empty") {
    SpectroTable t2 = synthetic_table();
    t2.drive(2, 3) = t2.drive(3, 2) = 0.0;
    const DrivePulse p{1e-3, 1.0, 1.0};
    const TransitionRecord r = transition_probability(t2, p, 2, 3, 1);
    CHECK(r.rabi == 0.0);
    CHECK(r.probability == 0.0);
  }

  SUBCASE("probability decreases with detuning at fixed coupling") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> da(1e-5, 1e-2);
    for (int i = 0; i < 100; ++i) {
      const double amp = da(rng);
      SpectroTable t2 = synthetic_table();
      const DrivePulse p{amp, 0.9, 1.0};  // off resonance from 0-1 etc.
      double prev = 1.1;
      // Increasing |D| through photon number on the same pair.
      const TransitionRecord r1 = transition_probability(t2, p, 0, 4, 1);
      CHECK(r1.probability >= 0.0);
      CHECK(r1.probability <= 1.0);
      (void)prev;
    }
    // Direct monotonicity on the closed form.
    const SpectroTable t3 = synthetic_table();
    const DrivePulse p{1e-3, 2.0, 1.0};
    double last = 1.0;
    for (double shift : {2.0, 2.1, 2.3, 2.6}) {
      SpectroTable t4 = t3;
      t4.energies[3] = t4.energies[2] + shift;
      const TransitionRecord r = transition_probability(t4, p, 2, 3, 1);
      CHECK(r.probability <= last + 1e-15);
      last = r.probability;
    }
  }

  SUBCASE("index validation") {
    const DrivePulse p = pulse_for(t, 1e-3);
    CHECK_THROWS_AS(transition_probability(t, p, 2, 2, 1),
                    InvalidParameterError);
    CHECK_THROWS_AS(transition_probability(t, p, 0, 9, 1),
                    InvalidParameterError);
  }
}

TEST_CASE("component leakage") {
  const SpectroTable t = synthetic_table();
  const DrivePulse p = pulse_for(t, 1e-4);

  SUBCASE("undesired sets") {
    CHECK(undesired_states(t, CompState::q00) == std::vector<int>{1, 2, 3, 4});
    CHECK(undesired_states(t, CompState::q10) == std::vector<int>{0, 1, 4});
    CHECK(undesired_states(t, CompState::q11) == std::vector<int>{0, 1, 4});
  }

  SUBCASE("breakdown sums to eta and identifies the dominant channel") {
    const ComponentLeakage c = component_leakage(t, p, CompState::q00);
    double sum = 0.0;
    for (const auto& [state, prob] : c.breakdown) sum += prob;
    CHECK(c.eta == doctest::Approx(sum).epsilon(1e-14));
    CHECK(c.dominant_channel == 1);  // only coupled undesired channel
  }

  SUBCASE("vanishing drive quenches leakage off resonance") {
    const ComponentLeakage weak =
        component_leakage(t, pulse_for(t, 1e-8), CompState::q00);
    const ComponentLeakage strong =
        component_leakage(t, pulse_for(t, 1e-3), CompState::q00);
    CHECK(weak.eta < 1e-12);
    CHECK(weak.eta < strong.eta);
  }

  SUBCASE("aggregation switch: sum dominates max") {
    ItaOptions mx, sm;
    sm.aggregation = PhotonAggregation::Sum;
    const double a = component_leakage(t, p, CompState::q00, mx).eta;
    const double b = component_leakage(t, p, CompState::q00, sm).eta;
    CHECK(b >= a);
  }
}

TEST_CASE("gate leakage aggregates the worst component") {
  const SpectroTable t = synthetic_table();
  const DrivePulse p = pulse_for(t, 1e-4);
  const GateLeakage g = gate_leakage(t, p);
  for (const auto& c : g.components) CHECK(g.eta >= c.eta);
  double mx = 0.0;
  for (const auto& c : g.components) mx = std::max(mx, c.eta);
  CHECK(g.eta == doctest::Approx(mx).epsilon(1e-14));
}

TEST_CASE("estimate depends on the pulse only through amplitude and frequency") {
  const SpectroTable t = synthetic_table();
  DrivePulse a{1e-4, t.drive_frequency(), 1.0};
  DrivePulse b{1e-4, t.drive_frequency(), 123.0};
  b.envelope = Envelope::Rectangular;
  const GateLeakage ga = gate_leakage(t, a);
  const GateLeakage gb = gate_leakage(t, b);
  CHECK(ga.eta == gb.eta);
  for (int c = 0; c < 4; ++c) {
    CHECK(ga.components[c].eta == gb.components[c].eta);
  }
}

TEST_CASE("leakage at the paper working points") {
  const ModelScales s = paper_scales();
  SolveOptions opts;

  const SpectroTable a = solve_coupled(s, WorkingParams{0.499, 0.49985, 5e-4}, opts);
  const SpectroTable b = solve_coupled(s, WorkingParams{0.499, 0.49897, 5e-4}, opts);
  const DrivePulse pa{2e-4, a.drive_frequency(), 1.0};
  const DrivePulse pb{2e-4, b.drive_frequency(), 1.0};

  // The intended flip is exactly resonant.
  const TransitionRecord intended = transition_probability(
      a, pa, a.comp_index(CompState::q10), a.comp_index(CompState::q11), 1);
  CHECK(intended.probability == doctest::Approx(1.0).epsilon(1e-12));

  const GateLeakage ga = gate_leakage(a, pa);
  const GateLeakage gb = gate_leakage(b, pb);
  CHECK(ga.eta < 1e-3);
  CHECK(gb.eta > 0.1);
  CHECK(ga.eta < gb.eta);
  // The bad point leaks through a two-photon channel out of state |00>.
  const ComponentLeakage& worst = gb.components[0];
  CHECK(worst.eta == doctest::Approx(gb.eta));
  CHECK(worst.dominant_channel == 5);
}

TEST_CASE("leakage map") {
  const ModelScales s = paper_scales();
  SolveOptions solve;

  SUBCASE("single-point map equals the direct evaluation") {
    WpGrid grid;
    grid.base = WorkingParams{0.499, 0.49985, 5e-4};
    grid.axes = {WpGrid::Axis{WpAxis::Coupling, 5e-4, 6e-4, 2}};
    const LeakageMap map = ita_leakage_map(s, grid, 2e-4, solve);
    REQUIRE(map.points.size() == 2);
    const SpectroTable t = solve_coupled(s, grid.at(0), solve);
    const GateLeakage g =
        gate_leakage(t, DrivePulse{2e-4, t.drive_frequency(), 1.0});
    CHECK(map.points[0].eta == doctest::Approx(g.eta).epsilon(1e-12));
    CHECK_FALSE(map.points[0].flagged);
  }

  SUBCASE("undefined basis points are flagged with eta = 1") {
    WpGrid grid;
    // Fully symmetric uncoupled point: every low state spreads over all
    // four wells, so no assignment passes the dominance threshold.
    grid.base = WorkingParams{0.5, 0.5, 0.0};
    grid.axes = {WpGrid::Axis{WpAxis::Coupling, 0.0, 1e-7, 2}};
    const LeakageMap map = ita_leakage_map(s, grid, 2e-4, solve);
    CHECK(map.points[0].flagged);
    CHECK(map.points[0].eta == 1.0);
    CHECK_FALSE(map.points[0].flag_reason.empty());
  }

  SUBCASE("map is reflection symmetric") {
    WpGrid grid;
    grid.base = WorkingParams{0.499, 0.49985, 5e-4};
    grid.axes = {WpGrid::Axis{WpAxis::Bias2, 0.4996, 0.4999, 2}};
    WpGrid mirror;
    mirror.base = WorkingParams{1.0 - 0.499, 1.0 - 0.49985, 5e-4};
    mirror.axes = {WpGrid::Axis{WpAxis::Bias2, 1.0 - 0.4996, 1.0 - 0.4999, 2}};
    const LeakageMap m1 = ita_leakage_map(s, grid, 2e-4, solve);
    const LeakageMap m2 = ita_leakage_map(s, mirror, 2e-4, solve);
    for (int i = 0; i < 2; ++i) {
      CHECK(m1.points[i].eta == doctest::Approx(m2.points[i].eta).epsilon(1e-6));
    }
  }
}

TEST_CASE("weak field guard") {
  const SpectroTable t = synthetic_table();
  CHECK(weak_field_ok(t, DrivePulse{1e-4, 1.0, 1.0}));
  CHECK_FALSE(weak_field_ok(t, DrivePulse{0.9, 1.0, 1.0}));
}
