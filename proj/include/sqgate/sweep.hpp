#pragma once

#include <functional>
#include <optional>

#include "sqgate/dynamics.hpp"
#include "sqgate/ita.hpp"

namespace sqgate {

enum class Method { Ita, Dm };

inline const char* to_string(Method m) { return m == Method::Ita ? "ita" : "dm"; }

struct SweepSpec {
  WpGrid grid;
  Method evaluator = Method::Ita;
  double drive_amplitude = 2e-4;
};

struct EvalContext {
  ModelScales scales{};
  SolveOptions solve{};
  ItaOptions ita{};
  EvolveOptions evolve{};
  double max_duration = 1e6;
};

// Leakage over the grid with the chosen evaluator; deterministic row order
// (outer axis ascending, inner ascending) for any worker count.
LeakageMap sweep(const SweepSpec& spec, const EvalContext& ctx,
                 int threads = 1);

// Single-point evaluation shared by sweep and refine.
LeakagePoint evaluate_point(const WorkingParams& wp, Method method,
                            double drive_amplitude, const EvalContext& ctx);

struct OptimalWP {
  WorkingParams wp{};
  double eta = 1.0;
  std::vector<std::pair<WorkingParams, double>> trajectory;
  bool converged = false;
};

// Derivative-free simplex descent over the grid's swept axes, started from
// the seed; never reports a point worse than the seed.
OptimalWP refine(const WorkingParams& seed, double seed_eta,
                 const std::vector<WpGrid::Axis>& axes, Method method,
                 double drive_amplitude, const EvalContext& ctx,
                 double radius, int max_evals = 200,
                 double diameter_tol = 1e-6);

// Same search over an arbitrary objective; evaluations returning a flagged
// point are modeled as +inf.
struct PointValue {
  double value = 0.0;
  bool flagged = false;
};
OptimalWP refine_objective(
    const WorkingParams& seed, double seed_eta,
    const std::vector<WpGrid::Axis>& axes,
    const std::function<PointValue(const WorkingParams&)>& objective,
    double radius, int max_evals = 200, double diameter_tol = 1e-6);

struct MapComparison {
  int common_points = 0;           // unflagged in both maps
  bool rank_defined = false;       // false when a map is constant
  double rank_correlation = 0.0;   // Spearman over unflagged points
  double max_log_ratio = 0.0;      // max |log10(eta_a/eta_b)|
  double median_log_ratio = 0.0;
  double ordering_agreement = 0.0;  // fraction of concordant point pairs
};

// Pointwise comparison of two leakage maps on identical grids.
MapComparison compare_maps(const LeakageMap& a, const LeakageMap& b);

}  // namespace sqgate
