#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqgate/sweep.hpp"

namespace sqgate {

// Flat-sectioned key = value run configuration. Unknown sections or keys are
// rejected with the offending path in the message.
struct RunConfig {
  // [device]
  double inductance = 0.0;
  double capacitance = 0.0;
  std::optional<double> beta_l;
  std::optional<double> critical_current;

  // [grid]
  double window_lo = 0.05;
  double window_hi = 0.95;
  int points = 64;
  int states = 20;
  std::string backend = "product";
  int product_basis = 10;
  double dominance_threshold = 0.5;

  // [drive]
  double drive_amplitude = 2e-4;
  std::string photon_aggregation = "max";
  double max_duration = 1e6;

  // [sweep]
  WorkingParams fixed{0.499, 0.49985, 5e-4};
  std::vector<WpGrid::Axis> axes;
  std::string evaluator = "ita";

  // [dm]
  int step_divisor = 64;
  bool truncation_check = false;

  // [output]
  std::string out_dir = "out";
  std::string precision = "shortest";

  DeviceParams device() const;
  ModelScales scales() const { return derive_scales(device()); }
  SolveOptions solve_options() const;
  WpGrid wp_grid() const;
  EvalContext eval_context() const;
  Method method() const {
    return evaluator == "dm" ? Method::Dm : Method::Ita;
  }

  // Canonical text form with defaults materialized; parsing it again is a
  // fixed point.
  std::string normalized() const;
  std::uint64_t hash() const;  // FNV-1a over normalized()
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

std::uint64_t fnv1a(const std::string& bytes);

struct ResultEnvelope {
  std::string tool_version;
  std::string command;
  std::string method;
  double wall_seconds = 0.0;
  std::uint64_t config_hash = 0;
  std::vector<std::string> payload;
  std::string config_echo;
};

// Writes envelope.txt and config_echo.cfg into the output directory.
void write_envelope(const std::string& dir, const ResultEnvelope& env);

inline constexpr const char* kToolVersion = "sqgate 1.0.0";

}  // namespace sqgate
