#include "sqgate/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sqgate/csv.hpp"

namespace sqgate {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

SectionMap read_sections(const std::string& text) {
  SectionMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      out[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": key outside any section");
    }
    const std::string key = trim(t.substr(0, eq));
    if (out[section].count(key)) {
      throw ConfigError("duplicate key " + section + "." + key);
    }
    out[section][key] = trim(t.substr(eq + 1));
  }
  return out;
}

// Pulls typed values out of a section; leftovers are reported as unknown.
class SectionReader {
 public:
  SectionReader(SectionMap& m, std::string name) : map_(m), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    auto sec = map_.find(name_);
    if (sec == map_.end()) return std::nullopt;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    std::string v = it->second;
    sec->second.erase(it);
    return v;
  }
  void number(const std::string& key, double& slot) {
    if (auto v = raw(key)) slot = parse_number(key, *v);
  }
  void number(const std::string& key, std::optional<double>& slot) {
    if (auto v = raw(key)) slot = parse_number(key, *v);
  }
  void integer(const std::string& key, int& slot) {
    if (auto v = raw(key)) {
      const double d = parse_number(key, *v);
      slot = static_cast<int>(d);
      if (slot != d) {
        throw ConfigError(name_ + "." + key + " must be an integer");
      }
    }
  }
  void word(const std::string& key, std::string& slot) {
    if (auto v = raw(key)) slot = *v;
  }
  void toggle(const std::string& key, bool& slot) {
    if (auto v = raw(key)) {
      if (*v == "on") slot = true;
      else if (*v == "off") slot = false;
      else throw ConfigError(name_ + "." + key + " must be on or off");
    }
  }

 private:
  double parse_number(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      throw ConfigError(name_ + "." + key + ": cannot parse number '" + v + "'");
    }
  }
  SectionMap& map_;
  std::string name_;
};

WpGrid::Axis parse_axis(const std::string& text) {
  std::istringstream in(text);
  std::string name;
  double lo = 0, hi = 0;
  int count = 0;
  if (!(in >> name >> lo >> hi >> count) || !(in >> std::ws).eof()) {
    throw ConfigError("axis must be '<name> <min> <max> <count>', got '" +
                      text + "'");
  }
  if (count < 2) throw ConfigError("axis count must be >= 2");
  if (!(hi > lo)) throw ConfigError("axis needs max > min");
  return WpGrid::Axis{wp_axis_from_string(name), lo, hi, count};
}

void reject_unknown(const SectionMap& m) {
  static const char* known[] = {"device", "grid", "drive", "sweep", "dm", "output"};
  for (const auto& [section, keys] : m) {
    bool ok = false;
    for (const char* k : known) ok = ok || section == k;
    if (!ok) throw ConfigError("unknown section [" + section + "]");
    if (!keys.empty()) {
      throw ConfigError("unknown key " + section + "." + keys.begin()->first);
    }
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  SectionMap sections = read_sections(text);
  RunConfig c;

  SectionReader device(sections, "device");
  device.number("L", c.inductance);
  device.number("C", c.capacitance);
  device.number("beta_L", c.beta_l);
  device.number("I_c", c.critical_current);

  SectionReader grid(sections, "grid");
  grid.number("window_min", c.window_lo);
  grid.number("window_max", c.window_hi);
  grid.integer("points", c.points);
  grid.integer("states", c.states);
  grid.word("backend", c.backend);
  grid.integer("product_basis", c.product_basis);
  grid.number("dominance_threshold", c.dominance_threshold);

  SectionReader drive(sections, "drive");
  drive.number("x_m0", c.drive_amplitude);
  drive.word("photon_aggregation", c.photon_aggregation);
  drive.number("max_duration", c.max_duration);

  SectionReader sweep(sections, "sweep");
  sweep.number("x_e1", c.fixed.bias1);
  sweep.number("x_e2", c.fixed.bias2);
  sweep.number("kappa", c.fixed.coupling);
  if (auto a = sweep.raw("axis1")) c.axes.push_back(parse_axis(*a));
  if (auto a = sweep.raw("axis2")) {
    if (c.axes.empty()) throw ConfigError("sweep.axis2 given without axis1");
    c.axes.push_back(parse_axis(*a));
  }
  sweep.word("evaluator", c.evaluator);

  SectionReader dm(sections, "dm");
  dm.integer("step_divisor", c.step_divisor);
  dm.toggle("truncation_check", c.truncation_check);

  SectionReader output(sections, "output");
  output.word("directory", c.out_dir);
  output.word("precision", c.precision);

  reject_unknown(sections);

  // Range checks with the key path in the message.
  if (!(c.inductance > 0)) throw ConfigError("device.L must be positive");
  if (!(c.capacitance > 0)) throw ConfigError("device.C must be positive");
  if (!c.beta_l && !c.critical_current) {
    throw ConfigError("device needs beta_L or I_c");
  }
  (void)c.device();  // validates and cross-checks beta_L vs I_c
  if (!(c.window_hi > c.window_lo)) {
    throw ConfigError("grid.window_max must exceed grid.window_min");
  }
  if (c.points < 16 || c.points % 2) {
    throw ConfigError("grid.points must be even and >= 16");
  }
  if (c.states < 4) throw ConfigError("grid.states must be >= 4");
  if (c.backend != "product" && c.backend != "full2d") {
    throw ConfigError("grid.backend must be product or full2d");
  }
  if (c.product_basis < 2) throw ConfigError("grid.product_basis must be >= 2");
  if (!(c.dominance_threshold > 0 && c.dominance_threshold <= 1)) {
    throw ConfigError("grid.dominance_threshold must be in (0, 1]");
  }
  if (!(c.drive_amplitude > 0)) throw ConfigError("drive.x_m0 must be positive");
  if (c.photon_aggregation != "max" && c.photon_aggregation != "sum") {
    throw ConfigError("drive.photon_aggregation must be max or sum");
  }
  if (!(c.max_duration > 0)) {
    throw ConfigError("drive.max_duration must be positive");
  }
  if (c.evaluator != "ita" && c.evaluator != "dm") {
    throw ConfigError("sweep.evaluator must be ita or dm");
  }
  if (c.step_divisor < 4) throw ConfigError("dm.step_divisor must be >= 4");
  if (c.precision != "shortest") {
    throw ConfigError("output.precision: only 'shortest' is supported");
  }
  validate(c.fixed);
  for (const auto& ax : c.axes) {
    WorkingParams lo = c.fixed, hi = c.fixed;
    WpGrid g{c.fixed, {ax}};
    lo = g.at(0);
    hi = g.at(ax.count - 1);
    validate(lo);
    validate(hi);
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

DeviceParams RunConfig::device() const {
  try {
    if (beta_l && critical_current) {
      return DeviceParams::from_both(inductance, capacitance, *beta_l,
                                     *critical_current);
    }
    if (beta_l) return DeviceParams::from_beta(inductance, capacitance, *beta_l);
    return DeviceParams::from_critical_current(inductance, capacitance,
                                               *critical_current);
  } catch (const InvalidParameterError& e) {
    throw ConfigError(std::string("device: ") + e.what());
  }
}

SolveOptions RunConfig::solve_options() const {
  SolveOptions o;
  o.grid = build_grid(window_lo, window_hi, points);
  o.n_states = states;
  o.backend =
      backend == "full2d" ? CoupledBackend::Full2d : CoupledBackend::Product;
  o.product_basis = product_basis;
  o.dominance_threshold = dominance_threshold;
  return o;
}

WpGrid RunConfig::wp_grid() const { return WpGrid{fixed, axes}; }

EvalContext RunConfig::eval_context() const {
  EvalContext ctx;
  ctx.scales = scales();
  ctx.solve = solve_options();
  ctx.ita.aggregation = photon_aggregation == "sum" ? PhotonAggregation::Sum
                                                    : PhotonAggregation::Max;
  ctx.evolve.step_divisor = step_divisor;
  ctx.max_duration = max_duration;
  return ctx;
}

std::string RunConfig::normalized() const {
  std::ostringstream out;
  const auto num = [](double v) { return format_double(v); };
  out << "[device]\n";
  out << "L = " << num(inductance) << "\n";
  out << "C = " << num(capacitance) << "\n";
  const DeviceParams dp = device();
  out << "beta_L = " << num(dp.beta_l) << "\n";
  out << "[grid]\n";
  out << "window_min = " << num(window_lo) << "\n";
  out << "window_max = " << num(window_hi) << "\n";
  out << "points = " << points << "\n";
  out << "states = " << states << "\n";
  out << "backend = " << backend << "\n";
  out << "product_basis = " << product_basis << "\n";
  out << "dominance_threshold = " << num(dominance_threshold) << "\n";
  out << "[drive]\n";
  out << "x_m0 = " << num(drive_amplitude) << "\n";
  out << "photon_aggregation = " << photon_aggregation << "\n";
  out << "max_duration = " << num(max_duration) << "\n";
  out << "[sweep]\n";
  out << "x_e1 = " << num(fixed.bias1) << "\n";
  out << "x_e2 = " << num(fixed.bias2) << "\n";
  out << "kappa = " << num(fixed.coupling) << "\n";
  for (std::size_t i = 0; i < axes.size(); ++i) {
    out << "axis" << (i + 1) << " = " << to_string(axes[i].which) << " "
        << num(axes[i].lo) << " " << num(axes[i].hi) << " " << axes[i].count
        << "\n";
  }
  out << "evaluator = " << evaluator << "\n";
  out << "[dm]\n";
  out << "step_divisor = " << step_divisor << "\n";
  out << "truncation_check = " << (truncation_check ? "on" : "off") << "\n";
  out << "[output]\n";
  out << "directory = " << out_dir << "\n";
  out << "precision = " << precision << "\n";
  return out.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a(normalized()); }

void write_envelope(const std::string& dir, const ResultEnvelope& env) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo(std::filesystem::path(dir) / "config_echo.cfg",
                       std::ios::binary);
    echo << env.config_echo;
  }
  std::ofstream out(std::filesystem::path(dir) / "envelope.txt",
                    std::ios::binary);
  if (!out) throw ConfigError("cannot write envelope in " + dir);
  out << "tool: " << env.tool_version << "\n";
  out << "command: " << env.command << "\n";
  out << "method: " << env.method << "\n";
  out << "wall_seconds: " << format_double(env.wall_seconds) << "\n";
  char hex[19];
  std::snprintf(hex, sizeof(hex), "0x%016llx",
                static_cast<unsigned long long>(env.config_hash));
  out << "config_hash: " << hex << "\n";
  for (const auto& p : env.payload) out << "payload: " << p << "\n";
  out << "--- config ---\n";
  out << env.config_echo;
}

}  // namespace sqgate
