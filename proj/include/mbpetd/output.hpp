// Time series CSV, field snapshots (CSV or legacy VTK), a structural VTK
// check and convergence table formatting.
#ifndef MBPETD_OUTPUT_HPP
#define MBPETD_OUTPUT_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbpetd/config.hpp"
#include "mbpetd/grid.hpp"
#include "mbpetd/harness.hpp"
#include "mbpetd/stepper.hpp"

namespace mbpetd {

inline constexpr std::string_view kSeriesHeader = "step,t,sup_norm,energy,matvecs,mbp_ok";
inline constexpr double kMaskedSentinel = -9999.0;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string timeseries_csv(const TimeSeries& series) {
  std::string out(kSeriesHeader);
  out += "\n";
  for (const auto& r : series) {
    out += std::to_string(r.step) + "," + format_double(r.t) + "," + format_double(r.sup_norm) +
           "," + format_double(r.energy) + "," + std::to_string(r.matvecs) + "," +
           (r.mbp_ok ? "1" : "0") + "\n";
  }
  return out;
}

inline void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path) {
  write_text_file(path, timeseries_csv(series));
}

inline TimeSeries parse_timeseries_csv(std::string_view text, const std::string& source = "csv") {
  TimeSeries out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw IoError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kSeriesHeader) fail("unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    if (cols.size() != 6) fail("expected 6 columns");
    SeriesRecord r;
    try {
      r.step = std::stoull(cols[0]);
      r.matvecs = std::stoull(cols[4]);
    } catch (const std::exception&) {
      fail("bad integer column");
    }
    const auto t = parse_double(cols[1]);
    const auto s = parse_double(cols[2]);
    const auto e = parse_double(cols[3]);
    if (!t || !s || !e) fail("bad numeric column");
    r.t = *t;
    r.sup_norm = *s;
    r.energy = *e;
    if (cols[5] != "0" && cols[5] != "1") fail("mbp_ok must be 0 or 1");
    r.mbp_ok = cols[5] == "1";
    out.push_back(r);
  }
  if (line_no == 0) fail("empty file");
  return out;
}

inline TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  return parse_timeseries_csv(read_text_file(path), path.string());
}

/// Lattice written for a snapshot: X* itself for periodic grids (indices
/// 1..N, origin a + h), the full node lattice otherwise.
struct SnapshotLayout {
  int dim = 1;
  std::array<std::size_t, kMaxDim> dims{1, 1, 1};
  std::array<double, kMaxDim> origin{0.0, 0.0, 0.0};
  std::array<double, kMaxDim> spacing{1.0, 1.0, 1.0};
  std::vector<double> values;  // x-fastest, masked nodes hold kMaskedSentinel
  std::vector<int> active;
};

inline SnapshotLayout snapshot_layout(const Grid& grid, std::span<const double> U, double t) {
  SnapshotLayout s;
  s.dim = grid.dim();
  const std::vector<double> lat = lattice_values(grid, U, t);
  const bool periodic = grid.bc_kind() == BoundaryKind::Periodic;
  std::size_t count = 1;
  for (int k = 0; k < grid.dim(); ++k) {
    s.dims[k] = periodic ? static_cast<std::size_t>(grid.cells(k)) : grid.extent(k);
    s.origin[k] = grid.lower(k) + (periodic ? grid.spacing(k) : 0.0);
    s.spacing[k] = grid.spacing(k);
    count *= s.dims[k];
  }
  s.values.resize(count);
  s.active.resize(count);
  const std::size_t off = periodic ? 1 : 0;
  for (std::size_t p = 0; p < count; ++p) {
    std::array<std::size_t, kMaxDim> idx{0, 0, 0};
    std::size_t rest = p;
    for (int k = 0; k < grid.dim(); ++k) {
      idx[k] = rest % s.dims[k] + off;
      rest /= s.dims[k];
    }
    const double v = lat[grid.node_of(idx)];
    s.active[p] = std::isnan(v) ? 0 : 1;
    s.values[p] = std::isnan(v) ? kMaskedSentinel : v;
  }
  return s;
}

inline std::string snapshot_csv(const Grid& grid, std::span<const double> U, double t) {
  const SnapshotLayout s = snapshot_layout(grid, U, t);
  static const char* axis_names[] = {"x", "y", "z"};
  std::string out;
  for (int k = 0; k < s.dim; ++k) out += std::string(axis_names[k]) + ",";
  out += "u,active\n";
  for (std::size_t p = 0; p < s.values.size(); ++p) {
    std::size_t rest = p;
    for (int k = 0; k < s.dim; ++k) {
      const std::size_t i = rest % s.dims[k];
      rest /= s.dims[k];
      out += format_double(s.origin[k] + static_cast<double>(i) * s.spacing[k]) + ",";
    }
    out += format_double(s.values[p]) + "," + std::to_string(s.active[p]) + "\n";
  }
  return out;
}

inline std::string snapshot_vtk(const Grid& grid, std::span<const double> U, double t) {
  const SnapshotLayout s = snapshot_layout(grid, U, t);
  std::string out = "# vtk DataFile Version 3.0\n";
  out += "u at t = " + format_double(t) + "\n";
  out += "ASCII\nDATASET STRUCTURED_POINTS\n";
  out += "DIMENSIONS " + std::to_string(s.dims[0]) + " " + std::to_string(s.dims[1]) + " " +
         std::to_string(s.dims[2]) + "\n";
  out += "ORIGIN " + format_double(s.origin[0]) + " " + format_double(s.origin[1]) + " " +
         format_double(s.origin[2]) + "\n";
  out += "SPACING " + format_double(s.spacing[0]) + " " + format_double(s.spacing[1]) + " " +
         format_double(s.spacing[2]) + "\n";
  out += "POINT_DATA " + std::to_string(s.values.size()) + "\n";
  out += "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (double v : s.values) out += format_double(v) + "\n";
  out += "SCALARS mask int 1\nLOOKUP_TABLE default\n";
  for (int a : s.active) out += std::to_string(a) + "\n";
  return out;
}

inline void write_snapshot(const Grid& grid, std::span<const double> U, double t,
                           const std::filesystem::path& path, SnapshotFormat format) {
  write_text_file(path, format == SnapshotFormat::Vtk ? snapshot_vtk(grid, U, t)
                                                      : snapshot_csv(grid, U, t));
}

struct VtkCheck {
  bool ok = false;
  std::string message;
  std::array<std::size_t, 3> dims{0, 0, 0};
  std::size_t points = 0;
  std::vector<std::string> arrays;
};

/// Structural check of a legacy ASCII STRUCTURED_POINTS file.
inline VtkCheck validate_vtk(std::string_view text) {
  VtkCheck r;
  std::istringstream in{std::string(text)};
  std::string line;
  auto bad = [&](std::string msg) {
    r.ok = false;
    r.message = std::move(msg);
    return r;
  };
  if (!std::getline(in, line) || line.rfind("# vtk DataFile Version", 0) != 0) {
    return bad("missing version line");
  }
  if (!std::getline(in, line)) return bad("missing title line");
  if (!std::getline(in, line) || line != "ASCII") return bad("only ASCII files are accepted");
  if (!std::getline(in, line) || line != "DATASET STRUCTURED_POINTS") {
    return bad("dataset is not STRUCTURED_POINTS");
  }
  std::string word;
  bool have_dims = false, have_origin = false, have_spacing = false;
  while (in >> word) {
    if (word == "DIMENSIONS") {
      if (!(in >> r.dims[0] >> r.dims[1] >> r.dims[2])) return bad("bad DIMENSIONS");
      have_dims = true;
    } else if (word == "ORIGIN" || word == "SPACING") {
      double a = 0, b = 0, c = 0;
      if (!(in >> a >> b >> c)) return bad("bad " + word);
      if (word == "SPACING" && !(a > 0 && b > 0 && c > 0)) return bad("non-positive spacing");
      (word == "ORIGIN" ? have_origin : have_spacing) = true;
    } else if (word == "POINT_DATA") {
      if (!(in >> r.points)) return bad("bad POINT_DATA");
      if (!have_dims || !have_origin || !have_spacing) {
        return bad("geometry incomplete before POINT_DATA");
      }
      if (r.points != r.dims[0] * r.dims[1] * r.dims[2]) {
        return bad("POINT_DATA does not match DIMENSIONS");
      }
    } else if (word == "SCALARS") {
      std::string name, type;
      if (!(in >> name >> type)) return bad("bad SCALARS line");
      std::getline(in, line);
      std::string lt, table;
      if (!(in >> lt >> table) || lt != "LOOKUP_TABLE") return bad("missing LOOKUP_TABLE");
      for (std::size_t i = 0; i < r.points; ++i) {
        double v = 0;
        if (!(in >> v)) return bad("array '" + name + "' has fewer than POINT_DATA values");
      }
      r.arrays.push_back(name);
    } else {
      return bad("unexpected token '" + word + "'");
    }
  }
  if (r.points == 0) return bad("no POINT_DATA section");
  if (r.arrays.empty()) return bad("no data arrays");
  r.ok = true;
  return r;
}

inline std::string format_rate(double r) {
  if (std::isnan(r)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r);
  return buf;
}

/// Aligned text rendering of a convergence table.
inline std::string format_table(const ConvergenceTable& t) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %-14s %-7s %-14s %-7s\n", t.parameter_name.c_str(),
                "Linf error", "rate", "L2 error", "rate");
  out += buf;
  for (const auto& r : t.rows) {
    std::string p = t.parameter_name == "tau" ? "1/" + format_double(1.0 / r.parameter)
                                              : format_double(r.parameter);
    std::snprintf(buf, sizeof buf, "%-12s %-14.4e %-7s %-14.4e %-7s\n", p.c_str(), r.l_inf,
                  format_rate(r.l_inf_rate).c_str(), r.l2, format_rate(r.l2_rate).c_str());
    out += buf;
  }
  return out;
}

inline std::string table_csv(const ConvergenceTable& t) {
  std::string out = (t.parameter_name == "tau" ? "tau" : "inv_h");
  out += ",l_inf,l_inf_rate,l2,l2_rate\n";
  auto num = [](double x) { return std::isnan(x) ? std::string() : format_double(x); };
  for (const auto& r : t.rows) {
    out += format_double(r.parameter) + "," + num(r.l_inf) + "," + num(r.l_inf_rate) + "," +
           num(r.l2) + "," + num(r.l2_rate) + "\n";
  }
  return out;
}

}  // namespace mbpetd

#endif  // MBPETD_OUTPUT_HPP
