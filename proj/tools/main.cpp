#include <CLI11.hpp>

#include <chrono>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sqgate/config.hpp"
#include "sqgate/csv.hpp"
#include "sqgate/detail/parallel.hpp"

namespace {

using namespace sqgate;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::string backend;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
  cmd->add_option("--threads", args.threads, "worker count (default: all cores)");
  cmd->add_option("--backend", args.backend, "coupled solver backend")
      ->check(CLI::IsMember({"product", "full2d"}));
}

struct Run {
  RunConfig cfg;
  std::string out_dir;
  int threads;
  clock_type::time_point start = clock_type::now();
  std::vector<std::string> payload;

  Run(const CommonArgs& args) : cfg(parse_config(args.config_path)) {
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (!args.backend.empty()) cfg.backend = args.backend;
    out_dir = cfg.out_dir;
    threads = args.threads > 0 ? args.threads : detail::default_threads();
    fs::create_directories(out_dir);
  }

  std::string path(const std::string& name) {
    payload.push_back(name);
    return (fs::path(out_dir) / name).string();
  }

  void finish(const std::string& command, const std::string& method) {
    ResultEnvelope env;
    env.tool_version = kToolVersion;
    env.command = command;
    env.method = method;
    env.wall_seconds =
        std::chrono::duration<double>(clock_type::now() - start).count();
    env.config_hash = cfg.hash();
    env.payload = payload;
    env.config_echo = cfg.normalized();
    write_envelope(out_dir, env);
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::string fidelity_text(const FidelityReport& rep, const SpectroTable& table,
                          const DrivePulse& pulse) {
  std::ostringstream s;
  s << "fidelity: " << format_double(rep.fidelity) << "\n";
  s << "fidelity_raw: " << format_double(rep.fidelity_raw) << "\n";
  s << "pi_duration: " << format_double(rep.pi_duration) << "\n";
  s << "drive_frequency: " << format_double(pulse.frequency) << "\n";
  s << "drive_amplitude: " << format_double(pulse.amplitude) << "\n";
  const char* names[4] = {"00", "01", "10", "11"};
  for (int b = 0; b < 4; ++b) {
    s << "subspace_loss_" << names[b] << ": "
      << format_double(rep.subspace_loss[b]) << "\n";
  }
  s << "final subspace matrix M[b',b] as |M| (phase/pi):\n";
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const std::complex<double> v = rep.subspace_final(r, c);
      s << (c ? "  " : "") << format_double(std::abs(v)) << " ("
        << format_double(std::arg(v) / kPi) << ")";
    }
    s << "\n";
  }
  s << "computational map (state index of 00,01,10,11): ";
  for (int c = 0; c < 4; ++c) {
    s << table.computational().index[c] + 1 << (c < 3 ? " " : "\n");
  }
  return s.str();
}

int cmd_spectrum(Run& run) {
  const SpectroTable table =
      solve_coupled(run.cfg.scales(), run.cfg.fixed, run.cfg.solve_options());
  emit_csv(spectrum_csv(table), run.path("spectrum.csv"));
  emit_csv(drive_matrix_csv(table), run.path("drive_matrix.csv"));
  if (table.comp) {
    std::cout << "drive frequency dE_34 = "
              << format_double(table.drive_frequency()) << "\n";
  } else {
    std::cout << "computational basis undefined: " << table.comp_error << "\n";
  }
  run.finish("spectrum", "spectro");
  return 0;
}

int cmd_levels_map(Run& run) {
  if (run.cfg.axes.empty()) {
    throw ConfigError("levels-map needs sweep.axis1");
  }
  const auto rows = level_spacing_map(run.cfg.scales(), run.cfg.wp_grid(),
                                      run.cfg.solve_options(), run.threads);
  emit_csv(level_map_csv(rows, run.cfg.states), run.path("levels.csv"));
  run.finish("levels-map", "spectro");
  return 0;
}

int cmd_map(Run& run, Method method) {
  if (run.cfg.axes.empty()) throw ConfigError("map commands need sweep.axis1");
  SweepSpec spec{run.cfg.wp_grid(), method, run.cfg.drive_amplitude};
  const LeakageMap map = sweep(spec, run.cfg.eval_context(), run.threads);
  const std::string name =
      method == Method::Ita ? "leakage_ita.csv" : "leakage_dm.csv";
  emit_csv(leakage_map_csv(map), run.path(name));
  int flagged = 0;
  for (const auto& p : map.points) flagged += p.flagged ? 1 : 0;
  std::cout << map.points.size() << " points, " << flagged << " flagged, "
            << format_double(map.wall_seconds) << " s\n";
  run.finish(method == Method::Ita ? "ita-map" : "dm-map", to_string(method));
  return 0;
}

int cmd_evolve(Run& run) {
  const EvalContext ctx = run.cfg.eval_context();
  const SpectroTable table = solve_coupled(ctx.scales, run.cfg.fixed, ctx.solve);
  const DrivePulse pulse =
      make_cnot_pulse(table, run.cfg.drive_amplitude, ctx.max_duration);
  const int k = static_cast<int>(table.energies.size());
  for (int c = 0; c < 4; ++c) {
    const CompState comp = static_cast<CompState>(c);
    Eigen::VectorXcd init = Eigen::VectorXcd::Zero(k);
    init[table.comp_index(comp)] = 1.0;
    const TdseResult res = evolve(table, pulse, init, ctx.evolve);
    emit_csv(trace_csv(res),
             run.path(std::string("trace_") + to_string(comp) + ".csv"));
  }
  std::cout << "pi pulse duration " << format_double(pulse.duration)
            << (pulse.capped ? " (capped)" : "") << "\n";
  run.finish("evolve", "dm");
  return 0;
}

int cmd_fidelity(Run& run) {
  const EvalContext ctx = run.cfg.eval_context();
  const SpectroTable table = solve_coupled(ctx.scales, run.cfg.fixed, ctx.solve);
  const DrivePulse pulse =
      make_cnot_pulse(table, run.cfg.drive_amplitude, ctx.max_duration);
  const FidelityReport rep = cnot_fidelity(table, pulse, ctx.evolve);
  std::string text = fidelity_text(rep, table, pulse);
  if (run.cfg.truncation_check) {
    // Re-run with ten more retained states; computational-state populations
    // should move by less than 1e-4 if the truncation is adequate.
    SolveOptions wide = ctx.solve;
    wide.n_states = ctx.solve.n_states + 10;
    if (wide.backend == CoupledBackend::Product &&
        wide.n_states > wide.product_basis * wide.product_basis) {
      wide.product_basis += 2;
    }
    const SpectroTable table2 = solve_coupled(ctx.scales, run.cfg.fixed, wide);
    const DrivePulse pulse2 =
        make_cnot_pulse(table2, run.cfg.drive_amplitude, ctx.max_duration);
    const FidelityReport rep2 = cnot_fidelity(table2, pulse2, ctx.evolve);
    double delta = 0.0;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        delta = std::max(delta, std::abs(std::norm(rep2.subspace_final(r, c)) -
                                         std::norm(rep.subspace_final(r, c))));
      }
    }
    text += "truncation_check_delta_p: " + format_double(delta) + "\n";
    if (delta >= 1e-4) {
      std::cerr << "warning: computational populations moved by "
                << format_double(delta)
                << " when retaining 10 more states; increase grid.states\n";
    }
  }
  write_text(run.path("fidelity.txt"), text);
  std::cout << "F = " << format_double(rep.fidelity)
            << " (raw " << format_double(rep.fidelity_raw) << ")\n";
  run.finish("fidelity", "dm");
  return 0;
}

int cmd_optimize(Run& run) {
  if (run.cfg.axes.empty()) throw ConfigError("optimize needs sweep.axis1");
  const EvalContext ctx = run.cfg.eval_context();
  SweepSpec spec{run.cfg.wp_grid(), run.cfg.method(), run.cfg.drive_amplitude};
  const LeakageMap map = sweep(spec, ctx, run.threads);
  emit_csv(leakage_map_csv(map), run.path("seed_map.csv"));
  int best = -1;
  for (int i = 0; i < static_cast<int>(map.points.size()); ++i) {
    if (map.points[i].flagged) continue;
    if (best < 0 || map.points[i].eta < map.points[best].eta) best = i;
  }
  if (best < 0) throw NumericError("optimize: every grid point is flagged");
  double radius = 0.0;
  for (const auto& ax : run.cfg.axes) {
    radius = std::max(radius, (ax.hi - ax.lo) / (ax.count - 1));
  }
  const OptimalWP opt =
      refine(map.points[best].wp, map.points[best].eta, run.cfg.axes,
             run.cfg.method(), run.cfg.drive_amplitude, ctx, radius);
  emit_csv(trajectory_csv(opt.trajectory), run.path("refine_trajectory.csv"));
  std::ostringstream s;
  s << "x_e1: " << format_double(opt.wp.bias1) << "\n";
  s << "x_e2: " << format_double(opt.wp.bias2) << "\n";
  s << "kappa: " << format_double(opt.wp.coupling) << "\n";
  s << "eta: " << format_double(opt.eta) << "\n";
  s << "converged: " << (opt.converged ? "yes" : "no") << "\n";
  s << "evaluations: " << opt.trajectory.size() << "\n";
  write_text(run.path("optimal.txt"), s.str());
  std::cout << "optimal eta = " << format_double(opt.eta) << " at x_e2 = "
            << format_double(opt.wp.bias2) << ", kappa = "
            << format_double(opt.wp.coupling) << "\n";
  run.finish("optimize", to_string(run.cfg.method()));
  return 0;
}

int cmd_compare(Run& run) {
  if (run.cfg.axes.empty()) throw ConfigError("compare needs sweep.axis1");
  const EvalContext ctx = run.cfg.eval_context();
  const WpGrid grid = run.cfg.wp_grid();
  const LeakageMap ita =
      sweep(SweepSpec{grid, Method::Ita, run.cfg.drive_amplitude}, ctx,
            run.threads);
  const LeakageMap dm =
      sweep(SweepSpec{grid, Method::Dm, run.cfg.drive_amplitude}, ctx,
            run.threads);
  emit_csv(leakage_map_csv(ita), run.path("leakage_ita.csv"));
  emit_csv(leakage_map_csv(dm), run.path("leakage_dm.csv"));
  const MapComparison cmp = compare_maps(ita, dm);
  std::ostringstream s;
  s << "common_points: " << cmp.common_points << "\n";
  s << "rank_correlation: "
    << (cmp.rank_defined ? format_double(cmp.rank_correlation) : "undefined")
    << "\n";
  s << "ordering_agreement: " << format_double(cmp.ordering_agreement) << "\n";
  s << "max_log10_ratio: " << format_double(cmp.max_log_ratio) << "\n";
  s << "median_log10_ratio: " << format_double(cmp.median_log_ratio) << "\n";
  write_text(run.path("comparison.txt"), s.str());
  std::cout << s.str();
  run.finish("compare", "ita+dm");
  return 0;
}

int cmd_bench(Run& run) {
  const EvalContext ctx = run.cfg.eval_context();
  std::vector<WorkingParams> wps;
  const WpGrid grid = run.cfg.wp_grid();
  if (grid.point_count() >= 3) {
    wps = {grid.at(0), grid.at(grid.point_count() / 2),
           grid.at(grid.point_count() - 1)};
  } else {
    // No sweep axes: perturb the coupling around the fixed point.
    for (double f : {0.8, 1.0, 1.2}) {
      WorkingParams wp = run.cfg.fixed;
      wp.coupling *= f;
      wps.push_back(wp);
    }
  }
  const BenchmarkReport rep = benchmark_speedup(
      ctx.scales, wps, run.cfg.drive_amplitude, ctx.solve, ctx.evolve);
  emit_csv(benchmark_csv(rep), run.path("bench.csv"));
  std::ostringstream s;
  s << "tau_S_median: " << format_double(rep.tau_s_median) << "\n";
  s << "tau_T_median: " << format_double(rep.tau_t_median) << "\n";
  s << "zeta: " << format_double(rep.zeta) << "\n";
  s << "speed_ratio: " << format_double(rep.speed_ratio) << "\n";
  s << "environment: " << rep.environment << "\n";
  write_text(run.path("bench.txt"), s.str());
  std::cout << "speed ratio tau_D/tau_I = " << format_double(rep.speed_ratio)
            << " (zeta = " << format_double(rep.zeta) << ")\n";
  run.finish("bench", "bench");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"working-parameter optimizer for coupled flux-qubit gates"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    std::function<int(Run&)> fn;
  };
  const std::vector<Sub> subs = {
      {"spectrum", "eigenenergies and matrix elements at the fixed point",
       cmd_spectrum},
      {"levels-map", "energies and level spacings over a sweep", cmd_levels_map},
      {"ita-map", "leakage map from the independent-transition estimate",
       [](Run& r) { return cmd_map(r, Method::Ita); }},
      {"dm-map", "leakage map from direct time evolution",
       [](Run& r) { return cmd_map(r, Method::Dm); }},
      {"evolve", "population traces over the pi pulse", cmd_evolve},
      {"fidelity", "controlled-flip fidelity at the fixed point", cmd_fidelity},
      {"optimize", "grid seed plus simplex refinement of the leakage",
       cmd_optimize},
      {"compare", "leakage maps from both methods plus agreement statistics",
       cmd_compare},
      {"bench", "timing of spectroscopy versus one evolution", cmd_bench},
  };

  std::vector<CommonArgs> args(subs.size());
  std::vector<std::pair<CLI::App*, std::size_t>> cmds;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, args[i]);
    cmds.emplace_back(cmd, i);
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [cmd, i] : cmds) {
    if (!cmd->parsed()) continue;
    try {
      Run run(args[i]);
      return subs[i].fn(run);
    } catch (const ConfigError& e) {
      std::cerr << "configuration error: " << e.what() << "\n";
      return 1;
    } catch (const InvalidParameterError& e) {
      std::cerr << "configuration error: " << e.what() << "\n";
      return 1;
    } catch (const NumericError& e) {
      std::cerr << "numeric failure: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "numeric failure: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
