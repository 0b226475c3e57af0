// Sectioned `key = value` run configuration: parsing with line-numbered
// errors, cross-field validation, canonical serialization and construction
// of the grid, physics, velocity and initial data it describes.
#ifndef MBPETD_CONFIG_HPP
#define MBPETD_CONFIG_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mbpetd/grid.hpp"
#include "mbpetd/operators.hpp"
#include "mbpetd/physics.hpp"
#include "mbpetd/stepper.hpp"

namespace mbpetd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MaskKind { None, LShape };
enum class BoundaryDataKind { Zero, Constant, BottomOne };
enum class VelocityKind { Zero, Constant, Rotating, Decaying };
enum class InitialKind { Zero, Constant, CosProduct, SinProduct, Random };
enum class SnapshotFormat { Csv, Vtk };

struct GridSection {
  std::vector<double> lower{-0.5, -0.5};
  std::vector<double> upper{0.5, 0.5};
  std::vector<int> cells{64, 64};
  BoundaryKind bc = BoundaryKind::Periodic;
  MaskKind mask = MaskKind::None;
  BoundaryDataKind boundary_data = BoundaryDataKind::Zero;
  double boundary_value = 0.0;
};

struct PhysicsSection {
  PotentialKind potential = PotentialKind::DoubleWell;
  double theta = 0.8;
  double theta_c = 1.6;
  double epsilon = 0.01;
  MobilityKind mobility = MobilityKind::Constant;
  double mobility_value = 1.0;
  std::optional<double> kappa;  // empty: computed bound
};

struct VelocitySection {
  VelocityKind kind = VelocityKind::Zero;
  std::vector<double> value{0.0, 0.0, 0.0};
};

struct InitialSection {
  InitialKind kind = InitialKind::Zero;
  double amplitude = 1.0;
  double frequency = 2.0;  // sin/cos(frequency * pi * x_k)
  std::uint64_t seed = 20230101;
  double value = 0.0;
};

struct TimeSection {
  Scheme scheme = Scheme::Etdrk2;
  double tau = 0.01;
  double final_time = 0.1;
  double start_time = 0.0;
};

struct ToleranceSection {
  double krylov_tol = 1e-12;
  int krylov_max_dim = 100;
  double mbp_slack = 1e-12;
  bool strict_mbp = true;
};

struct OutputSection {
  std::string dir = ".";
  std::string series = "series.csv";  // empty: no series file
  std::vector<double> snapshot_times;
  SnapshotFormat snapshot_format = SnapshotFormat::Vtk;
  std::string snapshot_prefix = "snapshot";
};

struct ConvergenceSection {
  std::vector<double> tau_list;
  double tau_ref = 0.0;
  std::vector<int> cells_list;
  int cells_ref = 0;
  double tau_fixed = 0.0;
};

struct RunConfig {
  std::string name = "custom";
  std::string description;
  GridSection grid;
  PhysicsSection physics;
  VelocitySection velocity;
  InitialSection initial;
  TimeSection time;
  ToleranceSection tolerances;
  OutputSection output;
  ConvergenceSection convergence;
};

namespace detail {

template <class E>
struct EnumNames;

template <>
struct EnumNames<BoundaryKind> {
  static constexpr std::array<std::pair<BoundaryKind, std::string_view>, 3> items{
      {{BoundaryKind::Periodic, "periodic"},
       {BoundaryKind::Neumann, "neumann"},
       {BoundaryKind::Dirichlet, "dirichlet"}}};
};
template <>
struct EnumNames<MaskKind> {
  static constexpr std::array<std::pair<MaskKind, std::string_view>, 2> items{
      {{MaskKind::None, "none"}, {MaskKind::LShape, "lshape"}}};
};
template <>
struct EnumNames<BoundaryDataKind> {
  static constexpr std::array<std::pair<BoundaryDataKind, std::string_view>, 3> items{
      {{BoundaryDataKind::Zero, "zero"},
       {BoundaryDataKind::Constant, "constant"},
       {BoundaryDataKind::BottomOne, "bottom_one"}}};
};
template <>
struct EnumNames<PotentialKind> {
  static constexpr std::array<std::pair<PotentialKind, std::string_view>, 2> items{
      {{PotentialKind::DoubleWell, "double_well"},
       {PotentialKind::FloryHuggins, "flory_huggins"}}};
};
template <>
struct EnumNames<MobilityKind> {
  static constexpr std::array<std::pair<MobilityKind, std::string_view>, 2> items{
      {{MobilityKind::Constant, "constant"}, {MobilityKind::Degenerate, "degenerate"}}};
};
template <>
struct EnumNames<VelocityKind> {
  static constexpr std::array<std::pair<VelocityKind, std::string_view>, 4> items{
      {{VelocityKind::Zero, "zero"},
       {VelocityKind::Constant, "constant"},
       {VelocityKind::Rotating, "rotating"},
       {VelocityKind::Decaying, "decaying"}}};
};
template <>
struct EnumNames<InitialKind> {
  static constexpr std::array<std::pair<InitialKind, std::string_view>, 5> items{
      {{InitialKind::Zero, "zero"},
       {InitialKind::Constant, "constant"},
       {InitialKind::CosProduct, "cos_product"},
       {InitialKind::SinProduct, "sin_product"},
       {InitialKind::Random, "random"}}};
};
template <>
struct EnumNames<SnapshotFormat> {
  static constexpr std::array<std::pair<SnapshotFormat, std::string_view>, 2> items{
      {{SnapshotFormat::Csv, "csv"}, {SnapshotFormat::Vtk, "vtk"}}};
};
template <>
struct EnumNames<Scheme> {
  static constexpr std::array<std::pair<Scheme, std::string_view>, 2> items{
      {{Scheme::Etd1, "etd1"}, {Scheme::Etdrk2, "etdrk2"}}};
};

template <class E>
std::string_view enum_name(E e) {
  for (const auto& [v, n] : EnumNames<E>::items) {
    if (v == e) return n;
  }
  return "?";
}

template <class E>
std::optional<E> enum_parse(std::string_view s) {
  for (const auto& [v, n] : EnumNames<E>::items) {
    if (n == s) return v;
  }
  return std::nullopt;
}

template <class E>
std::string enum_choices() {
  std::string out;
  for (const auto& [v, n] : EnumNames<E>::items) {
    if (!out.empty()) out += "|";
    out += n;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double x = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

namespace detail {

class Parser {
 public:
  explicit Parser(RunConfig& cfg) : cfg_(cfg) {}

  void handle(const std::string& section, std::string_view key, std::string_view value,
              int line) {
    line_ = line;
    const std::string k(key);
    if (section == "preset") {
      if (k == "name") return set_word(cfg_.name, value);
      if (k == "description") {
        cfg_.description = std::string(value);
        return;
      }
    } else if (section == "grid") {
      GridSection& g = cfg_.grid;
      if (k == "lower") return set_doubles(g.lower, value);
      if (k == "upper") return set_doubles(g.upper, value);
      if (k == "cells") return set_ints(g.cells, value);
      if (k == "bc") return set_enum(g.bc, value);
      if (k == "mask") return set_enum(g.mask, value);
      if (k == "boundary_data") return set_enum(g.boundary_data, value);
      if (k == "boundary_value") return set_double(g.boundary_value, value);
    } else if (section == "physics") {
      PhysicsSection& p = cfg_.physics;
      if (k == "potential") return set_enum(p.potential, value);
      if (k == "theta") return set_double(p.theta, value);
      if (k == "theta_c") return set_double(p.theta_c, value);
      if (k == "epsilon") return set_double(p.epsilon, value);
      if (k == "mobility") return set_enum(p.mobility, value);
      if (k == "mobility_value") return set_double(p.mobility_value, value);
      if (k == "kappa") {
        if (value == "auto") {
          p.kappa.reset();
          return;
        }
        double x = 0.0;
        set_double(x, value);
        p.kappa = x;
        return;
      }
    } else if (section == "velocity") {
      if (k == "kind") return set_enum(cfg_.velocity.kind, value);
      if (k == "value") return set_doubles(cfg_.velocity.value, value);
    } else if (section == "initial") {
      InitialSection& s = cfg_.initial;
      if (k == "kind") return set_enum(s.kind, value);
      if (k == "amplitude") return set_double(s.amplitude, value);
      if (k == "frequency") return set_double(s.frequency, value);
      if (k == "value") return set_double(s.value, value);
      if (k == "seed") {
        std::uint64_t x = 0;
        const auto r = std::from_chars(value.data(), value.data() + value.size(), x);
        if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
          fail("seed must be a non-negative integer, got '" + std::string(value) + "'");
        }
        s.seed = x;
        return;
      }
    } else if (section == "time") {
      TimeSection& t = cfg_.time;
      if (k == "scheme") return set_enum(t.scheme, value);
      if (k == "tau") return set_double(t.tau, value);
      if (k == "final_time") return set_double(t.final_time, value);
      if (k == "start_time") return set_double(t.start_time, value);
    } else if (section == "tolerances") {
      ToleranceSection& t = cfg_.tolerances;
      if (k == "krylov_tol") return set_double(t.krylov_tol, value);
      if (k == "krylov_max_dim") return set_int(t.krylov_max_dim, value);
      if (k == "mbp_slack") return set_double(t.mbp_slack, value);
      if (k == "strict_mbp") {
        if (value == "true") {
          t.strict_mbp = true;
        } else if (value == "false") {
          t.strict_mbp = false;
        } else {
          fail("strict_mbp must be true or false");
        }
        return;
      }
    } else if (section == "output") {
      OutputSection& o = cfg_.output;
      if (k == "dir") return set_word(o.dir, value);
      if (k == "series") {
        o.series = std::string(value);
        if (o.series == "none") o.series.clear();
        return;
      }
      if (k == "snapshot_times") return set_doubles(o.snapshot_times, value, true);
      if (k == "snapshot_format") return set_enum(o.snapshot_format, value);
      if (k == "snapshot_prefix") return set_word(o.snapshot_prefix, value);
    } else if (section == "convergence") {
      ConvergenceSection& c = cfg_.convergence;
      if (k == "tau_list") return set_doubles(c.tau_list, value, true);
      if (k == "tau_ref") return set_double(c.tau_ref, value);
      if (k == "cells_list") return set_ints(c.cells_list, value, true);
      if (k == "cells_ref") return set_int(c.cells_ref, value);
      if (k == "tau_fixed") return set_double(c.tau_fixed, value);
    }
    fail("unknown key '" + k + "' in section [" + section + "]");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + msg);
  }

 private:
  void set_word(std::string& out, std::string_view v) {
    if (v.empty() || v.find_first_of(" \t") != std::string_view::npos) {
      fail("expected a single word, got '" + std::string(v) + "'");
    }
    out = std::string(v);
  }
  void set_double(double& out, std::string_view v) {
    const auto x = parse_double(v);
    if (!x || !std::isfinite(*x)) fail("expected a finite number, got '" + std::string(v) + "'");
    out = *x;
  }
  void set_int(int& out, std::string_view v) {
    int x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
      fail("expected an integer, got '" + std::string(v) + "'");
    }
    out = x;
  }
  void set_doubles(std::vector<double>& out, std::string_view v, bool allow_empty = false) {
    std::vector<double> xs;
    for (auto tok : split_ws(v)) {
      double x = 0.0;
      set_double(x, tok);
      xs.push_back(x);
    }
    if (xs.empty() && !allow_empty) fail("expected at least one number");
    out = std::move(xs);
  }
  void set_ints(std::vector<int>& out, std::string_view v, bool allow_empty = false) {
    std::vector<int> xs;
    for (auto tok : split_ws(v)) {
      int x = 0;
      set_int(x, tok);
      xs.push_back(x);
    }
    if (xs.empty() && !allow_empty) fail("expected at least one integer");
    out = std::move(xs);
  }
  template <class E>
  void set_enum(E& out, std::string_view v) {
    const auto e = enum_parse<E>(v);
    if (!e) fail("'" + std::string(v) + "' is not one of " + enum_choices<E>());
    out = *e;
  }

  RunConfig& cfg_;
  int line_ = 0;
};

}  // namespace detail

/// Every cross-field violation, empty when the configuration is usable.
inline std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> errs;
  const GridSection& g = c.grid;
  const std::size_t dim = g.cells.size();
  if (dim < 1 || dim > 3) errs.push_back("grid.cells must list 1 to 3 values");
  if (g.lower.size() != dim || g.upper.size() != dim) {
    errs.push_back("grid.lower and grid.upper must have one value per axis");
  } else {
    for (std::size_t k = 0; k < dim; ++k) {
      if (!(g.upper[k] > g.lower[k])) errs.push_back("degenerate box on axis " + std::to_string(k));
    }
  }
  for (int n : g.cells) {
    if (n < 2) errs.push_back("grid.cells entries must be >= 2");
  }
  if (g.mask == MaskKind::LShape) {
    if (g.bc == BoundaryKind::Periodic) errs.push_back("mask = lshape conflicts with bc = periodic");
    if (g.bc == BoundaryKind::Neumann) errs.push_back("mask = lshape conflicts with bc = neumann");
    if (dim != 2) errs.push_back("mask = lshape needs a 2D grid");
    for (int n : g.cells) {
      if (n % 2 != 0) errs.push_back("mask = lshape needs even cell counts");
    }
  }
  if (g.bc == BoundaryKind::Dirichlet && g.boundary_data == BoundaryDataKind::BottomOne &&
      dim < 2) {
    errs.push_back("boundary_data = bottom_one needs at least 2 dimensions");
  }
  const PhysicsSection& p = c.physics;
  if (!(p.epsilon > 0.0)) errs.push_back("physics.epsilon must be positive");
  if (p.potential == PotentialKind::FloryHuggins && !(p.theta > 0.0 && p.theta_c > p.theta)) {
    errs.push_back("flory_huggins needs theta_c > theta > 0");
  }
  if (p.mobility == MobilityKind::Constant && !(p.mobility_value > 0.0)) {
    errs.push_back("physics.mobility_value must be positive");
  }
  if (p.kappa && errs.empty()) {
    try {
      const Potential pot = p.potential == PotentialKind::DoubleWell
                                ? Potential::double_well()
                                : Potential::flory_huggins(p.theta, p.theta_c);
      const Mobility mob = p.mobility == MobilityKind::Constant
                               ? Mobility::constant(p.mobility_value)
                               : Mobility::degenerate();
      make_physics(pot, mob, p.epsilon, p.kappa);
    } catch (const std::exception& e) {
      errs.push_back(std::string("physics.kappa: ") + e.what());
    }
  }
  const VelocitySection& v = c.velocity;
  if (v.kind == VelocityKind::Constant && v.value.size() < dim) {
    errs.push_back("velocity.value needs one component per axis");
  }
  if ((v.kind == VelocityKind::Rotating || v.kind == VelocityKind::Decaying) && dim < 2) {
    errs.push_back("rotating and decaying velocities need at least 2 dimensions");
  }
  const TimeSection& t = c.time;
  if (!(t.tau > 0.0)) errs.push_back("time.tau must be positive");
  if (!(t.final_time >= t.start_time)) errs.push_back("time.final_time precedes start_time");
  const ToleranceSection& tol = c.tolerances;
  if (!(tol.krylov_tol > 0.0 && tol.krylov_tol <= 1e-2)) {
    errs.push_back("tolerances.krylov_tol must lie in (0, 1e-2]");
  }
  if (tol.krylov_max_dim < 2) errs.push_back("tolerances.krylov_max_dim must be >= 2");
  if (!(tol.mbp_slack >= 0.0)) errs.push_back("tolerances.mbp_slack must be >= 0");
  const ConvergenceSection& cv = c.convergence;
  for (double x : cv.tau_list) {
    if (!(x > 0.0)) errs.push_back("convergence.tau_list entries must be positive");
  }
  if (!cv.tau_list.empty()) {
    double m = cv.tau_list.front();
    for (double x : cv.tau_list) m = std::min(m, x);
    if (!(cv.tau_ref > 0.0 && cv.tau_ref < m / 4.0 * (1.0 + 1e-12))) {
      errs.push_back("convergence.tau_ref must be positive and below min(tau_list)/4");
    }
  }
  for (int n : cv.cells_list) {
    if (n < 2) errs.push_back("convergence.cells_list entries must be >= 2");
    if (cv.cells_ref > 0 && n > 0 && cv.cells_ref % n != 0) {
      errs.push_back("convergence.cells_ref must be a multiple of every cells_list entry");
    }
  }
  if (!cv.cells_list.empty() && !(cv.tau_fixed > 0.0 && cv.cells_ref > 0)) {
    errs.push_back("convergence.cells_list needs cells_ref and tau_fixed");
  }
  return errs;
}

inline void validate(const RunConfig& c) {
  const auto errs = validation_errors(c);
  if (errs.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw ConfigError(msg);
}

/// Parses and validates. Later assignments to a key override earlier ones.
inline RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  detail::Parser parser(cfg);
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      static const std::array<std::string_view, 9> known{
          "preset", "grid",       "physics", "velocity",   "initial",
          "time",   "tolerances", "output",  "convergence"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section +
                          "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    parser.handle(section, key, value, line_no);
  }
  validate(cfg);
  return cfg;
}

/// Canonical text: every key, fixed order, shortest round-trip numbers.
inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  auto doubles = [](const std::vector<double>& xs) {
    std::string s;
    for (double x : xs) s += (s.empty() ? "" : " ") + format_double(x);
    return s;
  };
  auto ints = [](const std::vector<int>& xs) {
    std::string s;
    for (int x : xs) s += (s.empty() ? "" : " ") + std::to_string(x);
    return s;
  };
  using detail::enum_name;
  os << "[preset]\n";
  os << "name = " << c.name << "\n";
  os << "description = " << c.description << "\n";
  os << "\n[grid]\n";
  os << "lower = " << doubles(c.grid.lower) << "\n";
  os << "upper = " << doubles(c.grid.upper) << "\n";
  os << "cells = " << ints(c.grid.cells) << "\n";
  os << "bc = " << enum_name(c.grid.bc) << "\n";
  os << "mask = " << enum_name(c.grid.mask) << "\n";
  os << "boundary_data = " << enum_name(c.grid.boundary_data) << "\n";
  os << "boundary_value = " << format_double(c.grid.boundary_value) << "\n";
  os << "\n[physics]\n";
  os << "potential = " << enum_name(c.physics.potential) << "\n";
  os << "theta = " << format_double(c.physics.theta) << "\n";
  os << "theta_c = " << format_double(c.physics.theta_c) << "\n";
  os << "epsilon = " << format_double(c.physics.epsilon) << "\n";
  os << "mobility = " << enum_name(c.physics.mobility) << "\n";
  os << "mobility_value = " << format_double(c.physics.mobility_value) << "\n";
  os << "kappa = " << (c.physics.kappa ? format_double(*c.physics.kappa) : "auto") << "\n";
  os << "\n[velocity]\n";
  os << "kind = " << enum_name(c.velocity.kind) << "\n";
  os << "value = " << doubles(c.velocity.value) << "\n";
  os << "\n[initial]\n";
  os << "kind = " << enum_name(c.initial.kind) << "\n";
  os << "amplitude = " << format_double(c.initial.amplitude) << "\n";
  os << "frequency = " << format_double(c.initial.frequency) << "\n";
  os << "seed = " << c.initial.seed << "\n";
  os << "value = " << format_double(c.initial.value) << "\n";
  os << "\n[time]\n";
  os << "scheme = " << enum_name(c.time.scheme) << "\n";
  os << "tau = " << format_double(c.time.tau) << "\n";
  os << "final_time = " << format_double(c.time.final_time) << "\n";
  os << "start_time = " << format_double(c.time.start_time) << "\n";
  os << "\n[tolerances]\n";
  os << "krylov_tol = " << format_double(c.tolerances.krylov_tol) << "\n";
  os << "krylov_max_dim = " << c.tolerances.krylov_max_dim << "\n";
  os << "mbp_slack = " << format_double(c.tolerances.mbp_slack) << "\n";
  os << "strict_mbp = " << (c.tolerances.strict_mbp ? "true" : "false") << "\n";
  os << "\n[output]\n";
  os << "dir = " << c.output.dir << "\n";
  os << "series = " << (c.output.series.empty() ? "none" : c.output.series) << "\n";
  os << "snapshot_times = " << doubles(c.output.snapshot_times) << "\n";
  os << "snapshot_format = " << enum_name(c.output.snapshot_format) << "\n";
  os << "snapshot_prefix = " << c.output.snapshot_prefix << "\n";
  os << "\n[convergence]\n";
  os << "tau_list = " << doubles(c.convergence.tau_list) << "\n";
  os << "tau_ref = " << format_double(c.convergence.tau_ref) << "\n";
  os << "cells_list = " << ints(c.convergence.cells_list) << "\n";
  os << "cells_ref = " << c.convergence.cells_ref << "\n";
  os << "tau_fixed = " << format_double(c.convergence.tau_fixed) << "\n";
  return os.str();
}

/// Grid of the configuration, optionally with every axis refined to `cells`.
inline GridPtr make_grid(const RunConfig& c, std::optional<int> cells = std::nullopt) {
  std::vector<int> n = c.grid.cells;
  if (cells) {
    for (int& x : n) x = *cells;
  }
  BoundaryCondition bc;
  switch (c.grid.bc) {
    case BoundaryKind::Periodic:
      bc = BoundaryCondition::periodic();
      break;
    case BoundaryKind::Neumann:
      bc = BoundaryCondition::neumann();
      break;
    case BoundaryKind::Dirichlet: {
      switch (c.grid.boundary_data) {
        case BoundaryDataKind::Zero:
          bc = BoundaryCondition::homogeneous_dirichlet();
          break;
        case BoundaryDataKind::Constant: {
          const double g = c.grid.boundary_value;
          bc = BoundaryCondition::dirichlet([g](std::span<const double>, double) { return g; });
          break;
        }
        case BoundaryDataKind::BottomOne: {
          const double y0 = c.grid.lower[1];
          const double tol = 1e-9 * (c.grid.upper[1] - c.grid.lower[1]);
          bc = BoundaryCondition::dirichlet([y0, tol](std::span<const double> x, double) {
            return std::abs(x[1] - y0) <= tol ? 1.0 : 0.0;
          });
          break;
        }
      }
      break;
    }
  }
  std::optional<std::vector<bool>> mask;
  if (c.grid.mask == MaskKind::LShape) mask = lshape_mask(n);
  return build_grid(Box{c.grid.lower, c.grid.upper}, n, std::move(bc), std::move(mask));
}

inline PhysicsSpec make_physics(const RunConfig& c) {
  const PhysicsSection& p = c.physics;
  const Potential pot = p.potential == PotentialKind::DoubleWell
                            ? Potential::double_well()
                            : Potential::flory_huggins(p.theta, p.theta_c);
  const Mobility mob = p.mobility == MobilityKind::Constant ? Mobility::constant(p.mobility_value)
                                                            : Mobility::degenerate();
  return make_physics(pot, mob, p.epsilon, p.kappa);
}

inline VelocityField make_velocity(const RunConfig& c) {
  switch (c.velocity.kind) {
    case VelocityKind::Zero:
      return zero_velocity();
    case VelocityKind::Constant: {
      std::array<double, kMaxDim> v{};
      for (std::size_t k = 0; k < std::min<std::size_t>(kMaxDim, c.velocity.value.size()); ++k) {
        v[k] = c.velocity.value[k];
      }
      return constant_velocity(v);
    }
    case VelocityKind::Rotating:
      return [](std::span<const double> x, double) {
        return std::array<double, kMaxDim>{x[1], -x[0], 0.0};
      };
    case VelocityKind::Decaying:
      return [](std::span<const double> x, double t) {
        const double s = std::exp(-t);
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return std::array<double, kMaxDim>{s * std::sin(two_pi * x[0]),
                                           -s * std::cos(two_pi * x[1]), 0.0};
      };
  }
  return zero_velocity();
}

inline Field make_initial(const RunConfig& c, const GridPtr& grid) {
  const InitialSection& s = c.initial;
  const int dim = grid->dim();
  const double w = s.frequency * std::numbers::pi;
  switch (s.kind) {
    case InitialKind::Zero:
      return sample_function(grid, [](std::span<const double>) { return 0.0; });
    case InitialKind::Constant:
      return sample_function(grid, [v = s.value](std::span<const double>) { return v; });
    case InitialKind::CosProduct:
      return sample_function(grid, [&](std::span<const double> x) {
        double r = s.amplitude;
        for (int k = 0; k < dim; ++k) r *= std::cos(w * x[k]);
        return r;
      });
    case InitialKind::SinProduct:
      return sample_function(grid, [&](std::span<const double> x) {
        double r = s.amplitude;
        for (int k = 0; k < dim; ++k) r *= std::sin(w * x[k]);
        return r;
      });
    case InitialKind::Random:
      return sample_random(grid, s.amplitude, s.seed);
  }
  throw std::logic_error("unhandled initial kind");
}

inline StepOptions make_step_options(const RunConfig& c) {
  StepOptions o;
  o.krylov.tol = c.tolerances.krylov_tol;
  o.krylov.max_dim = c.tolerances.krylov_max_dim;
  o.mbp_slack = c.tolerances.mbp_slack;
  o.strict_mbp = c.tolerances.strict_mbp;
  return o;
}

/// Initial solver state of the configuration on its own grid or a refined one.
inline SolverState make_initial_state(const RunConfig& c,
                                      std::optional<int> cells = std::nullopt) {
  const GridPtr grid = make_grid(c, cells);
  return make_state(make_initial(c, grid), make_physics(c), make_velocity(c),
                    c.time.start_time);
}

}  // namespace mbpetd

#endif  // MBPETD_CONFIG_HPP
