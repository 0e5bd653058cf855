#include "sqgate/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "sqgate/detail/parallel.hpp"

namespace sqgate {

LeakagePoint evaluate_point(const WorkingParams& wp, Method method,
                            double drive_amplitude, const EvalContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  LeakagePoint pt;
  pt.wp = wp;
  try {
    const SpectroTable table = solve_coupled(ctx.scales, wp, ctx.solve);
    if (method == Method::Ita) {
      DrivePulse pulse{drive_amplitude, table.drive_frequency(),
                       2.0 * kPi / table.drive_frequency()};
      const GateLeakage g = gate_leakage(table, pulse, ctx.ita);
      pt.eta = g.eta;
      for (int c = 0; c < 4; ++c) pt.component_eta[c] = g.components[c].eta;
    } else {
      const DrivePulse pulse =
          make_cnot_pulse(table, drive_amplitude, ctx.max_duration);
      const DmGateLeakage g = dm_gate_leakage(table, pulse, ctx.evolve);
      pt.eta = g.eta;
      for (int c = 0; c < 4; ++c) pt.component_eta[c] = g.components[c].eta;
      if (pulse.capped) {
        pt.flagged = true;
        pt.flag_reason = "pulse duration capped at configured maximum";
      }
    }
  } catch (const std::exception& e) {
    pt.eta = 1.0;
    pt.component_eta = {1.0, 1.0, 1.0, 1.0};
    pt.flagged = true;
    pt.flag_reason = e.what();
  }
  pt.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return pt;
}

LeakageMap sweep(const SweepSpec& spec, const EvalContext& ctx, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  LeakageMap map;
  map.grid = spec.grid;
  map.method = to_string(spec.evaluator);
  map.drive_amplitude = spec.drive_amplitude;
  const int n = spec.grid.point_count();
  map.points.resize(n);
  detail::parallel_indexed(n, threads, [&](int i) {
    map.points[i] = evaluate_point(spec.grid.at(i), spec.evaluator,
                                   spec.drive_amplitude, ctx);
  });
  map.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return map;
}

namespace {

WorkingParams apply_axes(const WorkingParams& base,
                         const std::vector<WpGrid::Axis>& axes,
                         const Eigen::VectorXd& v) {
  WorkingParams wp = base;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    switch (axes[a].which) {
      case WpAxis::Bias1: wp.bias1 = v[a]; break;
      case WpAxis::Bias2: wp.bias2 = v[a]; break;
      case WpAxis::Coupling: wp.coupling = v[a]; break;
    }
  }
  return wp;
}

double axis_value(const WorkingParams& wp, WpAxis which) {
  switch (which) {
    case WpAxis::Bias1: return wp.bias1;
    case WpAxis::Bias2: return wp.bias2;
    default: return wp.coupling;
  }
}

}  // namespace

OptimalWP refine(const WorkingParams& seed, double seed_eta,
                 const std::vector<WpGrid::Axis>& axes, Method method,
                 double drive_amplitude, const EvalContext& ctx, double radius,
                 int max_evals, double diameter_tol) {
  return refine_objective(
      seed, seed_eta, axes,
      [&](const WorkingParams& wp) {
        const LeakagePoint pt = evaluate_point(wp, method, drive_amplitude, ctx);
        return PointValue{pt.eta, pt.flagged};
      },
      radius, max_evals, diameter_tol);
}

OptimalWP refine_objective(
    const WorkingParams& seed, double seed_eta,
    const std::vector<WpGrid::Axis>& axes,
    const std::function<PointValue(const WorkingParams&)>& call,
    double radius, int max_evals, double diameter_tol) {
  const int dim = static_cast<int>(axes.size());
  if (dim < 1 || dim > 2) {
    throw InvalidParameterError("refine needs 1 or 2 swept axes");
  }
  OptimalWP out;
  out.wp = seed;
  out.eta = seed_eta;

  int evals = 0;
  auto objective = [&](const Eigen::VectorXd& v) {
    const WorkingParams wp = apply_axes(seed, axes, v);
    const PointValue pt = call(wp);
    ++evals;
    if (pt.flagged) return 1e30;  // flagged neighborhoods repel the simplex
    out.trajectory.emplace_back(wp, pt.value);
    if (pt.value < out.eta) {
      out.eta = pt.value;
      out.wp = wp;
    }
    return pt.value;
  };

  // Nelder-Mead with standard coefficients.
  const int np = dim + 1;
  std::vector<Eigen::VectorXd> x(np, Eigen::VectorXd(dim));
  std::vector<double> f(np);
  for (int a = 0; a < dim; ++a) x[0][a] = axis_value(seed, axes[a].which);
  f[0] = seed_eta;
  for (int p = 1; p < np; ++p) {
    x[p] = x[0];
    x[p][p - 1] += radius;
    f[p] = objective(x[p]);
  }
  while (evals < max_evals) {
    std::vector<int> order(np);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> xs(np);
    std::vector<double> fs(np);
    for (int p = 0; p < np; ++p) {
      xs[p] = x[order[p]];
      fs[p] = f[order[p]];
    }
    x = xs;
    f = fs;
    double diameter = 0.0;
    for (int p = 1; p < np; ++p) {
      diameter = std::max(diameter, (x[p] - x[0]).cwiseAbs().maxCoeff());
    }
    if (diameter < diameter_tol) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int p = 0; p < np - 1; ++p) centroid += x[p];
    centroid /= (np - 1);

    const Eigen::VectorXd xr = centroid + (centroid - x[np - 1]);
    const double fr = objective(xr);
    if (fr < f[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - x[np - 1]);
      const double fe = objective(xe);
      if (fe < fr) {
        x[np - 1] = xe;
        f[np - 1] = fe;
      } else {
        x[np - 1] = xr;
        f[np - 1] = fr;
      }
    } else if (fr < f[np - 2]) {
      x[np - 1] = xr;
      f[np - 1] = fr;
    } else {
      const Eigen::VectorXd xc =
          centroid + 0.5 * (x[np - 1] - centroid);
      const double fc = objective(xc);
      if (fc < f[np - 1]) {
        x[np - 1] = xc;
        f[np - 1] = fc;
      } else {
        for (int p = 1; p < np; ++p) {
          x[p] = x[0] + 0.5 * (x[p] - x[0]);
          f[p] = objective(x[p]);
        }
      }
    }
  }
  return out;
}

MapComparison compare_maps(const LeakageMap& a, const LeakageMap& b) {
  if (a.points.size() != b.points.size()) {
    throw InvalidParameterError("map comparison needs identical grids");
  }
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& pa = a.points[i].wp;
    const auto& pb = b.points[i].wp;
    if (std::abs(pa.bias1 - pb.bias1) > 1e-12 ||
        std::abs(pa.bias2 - pb.bias2) > 1e-12 ||
        std::abs(pa.coupling - pb.coupling) > 1e-12) {
      throw InvalidParameterError("map comparison needs identical grids");
    }
  }
  std::vector<double> va, vb;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].flagged || b.points[i].flagged) continue;
    va.push_back(a.points[i].eta);
    vb.push_back(b.points[i].eta);
  }
  MapComparison out;
  out.common_points = static_cast<int>(va.size());
  if (va.empty()) return out;

  // Ranks with ties averaged.
  auto ranks = [](const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    int i = 0;
    while (i < n) {
      int j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;
      for (int t = i; t <= j; ++t) r[order[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(va);
  const std::vector<double> rb = ranks(vb);
  const int n = out.common_points;
  double ma = 0, mb = 0;
  for (int i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa > 0.0 && sbb > 0.0) {
    out.rank_defined = true;
    out.rank_correlation = sab / std::sqrt(saa * sbb);
  }

  std::vector<double> logr;
  logr.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (va[i] > 0.0 && vb[i] > 0.0) {
      logr.push_back(std::abs(std::log10(va[i] / vb[i])));
    }
  }
  if (!logr.empty()) {
    out.max_log_ratio = *std::max_element(logr.begin(), logr.end());
    std::sort(logr.begin(), logr.end());
    const std::size_t m = logr.size();
    out.median_log_ratio =
        m % 2 ? logr[m / 2] : 0.5 * (logr[m / 2 - 1] + logr[m / 2]);
  }

  long pairs = 0, agree = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double da = va[i] - va[j];
      const double db = vb[i] - vb[j];
      ++pairs;
      if ((da > 0 && db > 0) || (da < 0 && db < 0) || (da == 0 && db == 0)) {
        ++agree;
      }
    }
  }
  out.ordering_agreement = pairs ? static_cast<double>(agree) / pairs : 0.0;
  return out;
}

}  // namespace sqgate
