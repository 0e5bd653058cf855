#include "sqgate/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace sqgate {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void emit_csv(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw InvalidParameterError("csv row width differs from header");
    }
    line(row);
  }
  if (!out) throw ConfigError("write failed for " + path);
}

CsvTable leakage_map_csv(const LeakageMap& map) {
  CsvTable t;
  t.header = {"x_e1", "x_e2",   "kappa",  "eta",    "eta_00",
              "eta_01", "eta_10", "eta_11", "flag"};
  for (const auto& p : map.points) {
    t.rows.push_back({format_double(p.wp.bias1), format_double(p.wp.bias2),
                      format_double(p.wp.coupling), format_double(p.eta),
                      format_double(p.component_eta[0]),
                      format_double(p.component_eta[1]),
                      format_double(p.component_eta[2]),
                      format_double(p.component_eta[3]),
                      p.flagged ? "1" : "0"});
  }
  return t;
}

CsvTable level_map_csv(const std::vector<LevelRow>& rows, int k) {
  CsvTable t;
  t.header = {"x_e1", "x_e2", "kappa"};
  for (int i = 1; i <= k; ++i) t.header.push_back("E_" + std::to_string(i));
  for (const char* s : {"dE12", "dE13", "dE14", "dE23", "dE24", "dE34"}) {
    t.header.push_back(s);
  }
  const double nan = std::nan("");
  for (const auto& r : rows) {
    std::vector<std::string> row{format_double(r.wp.bias1),
                                 format_double(r.wp.bias2),
                                 format_double(r.wp.coupling)};
    for (int i = 0; i < k; ++i) {
      row.push_back(format_double(r.ok ? r.energies[i] : nan));
    }
    for (int i = 0; i < 6; ++i) {
      row.push_back(format_double(r.ok ? r.spacings[i] : nan));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable trace_csv(const TdseResult& result) {
  CsvTable t;
  const int k = static_cast<int>(result.amplitudes.rows());
  t.header = {"tau"};
  for (int i = 1; i <= k; ++i) t.header.push_back("p_" + std::to_string(i));
  for (long c = 0; c < result.times.size(); ++c) {
    std::vector<std::string> row{format_double(result.times[c])};
    for (int i = 0; i < k; ++i) {
      row.push_back(format_double(std::norm(result.amplitudes(i, c))));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable spectrum_csv(const SpectroTable& table) {
  CsvTable t;
  t.header = {"n", "E", "well", "dominance", "computational"};
  const int k = static_cast<int>(table.energies.size());
  for (int n = 0; n < k; ++n) {
    std::string comp;
    if (table.comp) {
      for (int c = 0; c < 4; ++c) {
        if (table.comp->index[c] == n) comp = to_string(static_cast<CompState>(c));
      }
    }
    t.rows.push_back({std::to_string(n + 1), format_double(table.energies[n]),
                      table.well_label.empty() ? ""
                                               : to_string(table.well_label[n]),
                      table.well_weight.size()
                          ? format_double(table.well_weight[n])
                          : "",
                      comp});
  }
  return t;
}

CsvTable drive_matrix_csv(const SpectroTable& table) {
  CsvTable t;
  t.header = {"m", "n", "X1", "X2", "O"};
  const int k = static_cast<int>(table.energies.size());
  for (int m = 0; m < k; ++m) {
    for (int n = 0; n < k; ++n) {
      t.rows.push_back({std::to_string(m + 1), std::to_string(n + 1),
                        format_double(table.x1(m, n)),
                        format_double(table.x2(m, n)),
                        format_double(table.drive(m, n))});
    }
  }
  return t;
}

CsvTable benchmark_csv(const BenchmarkReport& report) {
  CsvTable t;
  t.header = {"x_e1", "x_e2", "kappa", "tau_S_seconds", "tau_T_seconds"};
  for (const auto& r : report.rows) {
    t.rows.push_back({format_double(r.wp.bias1), format_double(r.wp.bias2),
                      format_double(r.wp.coupling),
                      format_double(r.spectroscopy_seconds),
                      format_double(r.evolve_seconds)});
  }
  return t;
}

CsvTable trajectory_csv(
    const std::vector<std::pair<WorkingParams, double>>& traj) {
  CsvTable t;
  t.header = {"x_e1", "x_e2", "kappa", "eta"};
  for (const auto& [wp, eta] : traj) {
    t.rows.push_back({format_double(wp.bias1), format_double(wp.bias2),
                      format_double(wp.coupling), format_double(eta)});
  }
  return t;
}

}  // namespace sqgate
