#pragma once

#include <string>
#include <vector>

#include "sqgate/dynamics.hpp"
#include "sqgate/ita.hpp"
#include "sqgate/spectro.hpp"

namespace sqgate {

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Header row, comma separators, one trailing newline, UTF-8. Rows must be
// homogeneous with the header.
void emit_csv(const CsvTable& table, const std::string& path);

// Pinned schema: x_e1,x_e2,kappa,eta,eta_00,eta_01,eta_10,eta_11,flag.
CsvTable leakage_map_csv(const LeakageMap& map);

// Pinned schema: x_e1,x_e2,kappa,E_1..E_K,dE12,dE13,dE14,dE23,dE24,dE34.
CsvTable level_map_csv(const std::vector<LevelRow>& rows, int k);

// Pinned schema: tau,p_1..p_K.
CsvTable trace_csv(const TdseResult& result);

CsvTable spectrum_csv(const SpectroTable& table);
CsvTable drive_matrix_csv(const SpectroTable& table);
CsvTable benchmark_csv(const BenchmarkReport& report);
CsvTable trajectory_csv(const std::vector<std::pair<WorkingParams, double>>& t);

}  // namespace sqgate
