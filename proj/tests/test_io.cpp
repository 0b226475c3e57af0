#include <gtest/gtest.h>

#include <filesystem>
#include <regex>

#include "mbpetd/config.hpp"
#include "mbpetd/output.hpp"
#include "mbpetd/presets.hpp"
#include "mbpetd/svg.hpp"

using namespace mbpetd;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("mbpetd_test_io_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

TimeSeries sample_series() {
  return {{0, 0.0, 0.9, 0.305341, 0, true},
          {1, 0.1, 0.95, 0.2, 31, true},
          {2, 0.2, 1.0000000001, 1.0 / 3.0, 42, false}};
}

}  // namespace

TEST(Config, MinimalFileUsesDefaults) {
  const RunConfig c = parse_config("[time]\ntau = 0.05\n");
  EXPECT_EQ(c.time.tau, 0.05);
  EXPECT_EQ(c.time.scheme, Scheme::Etdrk2);
  EXPECT_EQ(c.grid.bc, BoundaryKind::Periodic);
  EXPECT_EQ(c.grid.cells, (std::vector<int>{64, 64}));
  EXPECT_EQ(c.physics.epsilon, 0.01);
  EXPECT_FALSE(c.physics.kappa.has_value());
  EXPECT_EQ(c.tolerances.krylov_tol, 1e-12);
  EXPECT_TRUE(c.tolerances.strict_mbp);
  const RunConfig empty = parse_config("# nothing\n\n");
  EXPECT_EQ(empty.name, "custom");
}

TEST(Config, CommentsAndOverrides) {
  const RunConfig c = parse_config(
      "[grid]  # trailing comment\n"
      "cells = 8 8 8\nlower = 0 0 0\nupper = 1 1 1\n"
      "[physics]\npotential = flory_huggins\nkappa = 8.02\n"
      "[time]\ntau = 0.1\ntau = 0.2\n");
  EXPECT_EQ(c.grid.cells.size(), 3u);
  EXPECT_EQ(c.physics.potential, PotentialKind::FloryHuggins);
  EXPECT_EQ(c.physics.kappa.value(), 8.02);
  EXPECT_EQ(c.time.tau, 0.2);
}

TEST(Config, RejectsLShapeWithPeriodic) {
  try {
    parse_config("[grid]\nbc = periodic\nmask = lshape\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lshape"), std::string::npos);
  }
}

TEST(Config, UnknownKeyReportsLine) {
  try {
    parse_config("[grid]\ncells = 8 8\n\n[time]\ntua = 0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("tua"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_config("[gird]\n"), ConfigError);
  EXPECT_THROW(parse_config("tau = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[time]\ntau\n"), ConfigError);
  EXPECT_THROW(parse_config("[time]\ntau = fast\n"), ConfigError);
  EXPECT_THROW(parse_config("[time]\ntau = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[time]\nscheme = rk4\n"), ConfigError);
  EXPECT_THROW(parse_config("[physics]\npotential = flory_huggins\nmobility = constant\nkappa = 2\n"),
               ConfigError);
  EXPECT_THROW(parse_config("[convergence]\ntau_list = 0.1\ntau_ref = 0.05\n"), ConfigError);
}

TEST(Config, SerializationIsAFixpoint) {
  for (const auto& preset : builtin_presets()) {
    const std::string once = serialize_config(preset);
    const RunConfig back = parse_config(once);
    EXPECT_EQ(serialize_config(back), once) << preset.name;
  }
  RunConfig odd;
  odd.time.tau = 0.1 + 0.2;
  odd.physics.epsilon = 1.0 / 3.0;
  odd.output.series.clear();
  const RunConfig back = parse_config(serialize_config(odd));
  EXPECT_EQ(back.time.tau, odd.time.tau);
  EXPECT_EQ(back.physics.epsilon, odd.physics.epsilon);
  EXPECT_TRUE(back.output.series.empty());
}

TEST(Config, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-12, 6.02e23, -0.0, 5e-324}) {
    EXPECT_EQ(parse_double(format_double(x)).value(), x);
  }
  EXPECT_FALSE(parse_double("1.0x"));
  EXPECT_FALSE(parse_double(""));
}

TEST(Presets, ShippedFilesMatchBuiltins) {
  const std::filesystem::path dir = std::filesystem::path(MBPETD_SOURCE_DIR) / "presets";
  std::size_t n = 0;
  for (const auto& preset : builtin_presets()) {
    const auto path = dir / (preset.name + ".cfg");
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(read_text_file(path), serialize_config(preset)) << preset.name;
    ++n;
  }
  EXPECT_GE(n, 7u);
}

TEST(Presets, TemporalParameters) {
  const RunConfig c =
      parse_config(read_text_file(std::filesystem::path(MBPETD_SOURCE_DIR) / "presets/temporal_2d.cfg"));
  EXPECT_EQ(c.grid.cells, (std::vector<int>{1024, 1024}));
  EXPECT_EQ(c.grid.bc, BoundaryKind::Periodic);
  EXPECT_EQ(c.physics.epsilon, 0.01);
  EXPECT_EQ(c.physics.kappa.value(), 2.0);
  EXPECT_EQ(c.time.final_time, 0.1);
  EXPECT_EQ(c.convergence.tau_ref, 1.0 / 1024);
  ASSERT_EQ(c.convergence.tau_list.size(), 5u);
  EXPECT_EQ(c.convergence.tau_list.front(), 1.0 / 16);
  EXPECT_EQ(c.convergence.tau_list.back(), 1.0 / 256);
}

TEST(Presets, LookupAndNames) {
  EXPECT_THROW(find_preset("no_such_preset"), std::exception);
  for (const auto& p : builtin_presets()) {
    EXPECT_NO_THROW(validate(p)) << p.name;
    EXPECT_EQ(find_preset(p.name).name, p.name);
  }
  const RunConfig fh = find_preset("mbp_fh_2d");
  EXPECT_EQ(fh.physics.potential, PotentialKind::FloryHuggins);
  EXPECT_EQ(fh.physics.kappa.value(), 1.0);
  EXPECT_EQ(find_preset("fh_3d").physics.kappa.value(), 8.02);
}

TEST(TimeSeriesCsv, RoundTrip) {
  const TimeSeries s = sample_series();
  const std::string text = timeseries_csv(s);
  EXPECT_EQ(text.substr(0, text.find('\n')), kSeriesHeader);
  const TimeSeries back = parse_timeseries_csv(text);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].step, s[i].step);
    EXPECT_EQ(back[i].t, s[i].t);
    EXPECT_EQ(back[i].sup_norm, s[i].sup_norm);
    EXPECT_EQ(back[i].energy, s[i].energy);
    EXPECT_EQ(back[i].matvecs, s[i].matvecs);
    EXPECT_EQ(back[i].mbp_ok, s[i].mbp_ok);
  }
  const auto dir = temp_dir("csv");
  write_timeseries_csv(s, dir / "nested/series.csv");
  EXPECT_EQ(read_timeseries_csv(dir / "nested/series.csv").size(), 3u);
  EXPECT_THROW(parse_timeseries_csv("a,b\n"), IoError);
  EXPECT_THROW(parse_timeseries_csv(std::string(kSeriesHeader) + "\n1,2,3\n"), IoError);
  EXPECT_THROW(read_timeseries_csv(dir / "missing.csv"), IoError);
}

TEST(Snapshot, PeriodicTwoByTwoOrdering) {
  const auto g = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, {2, 2}, BoundaryCondition::periodic());
  ASSERT_EQ(g->size(), 4u);
  std::vector<double> U(4);
  for (std::size_t u = 0; u < 4; ++u) {
    const auto x = g->coordinates(g->unknown_nodes()[u]);
    U[u] = 10 * x[0] + x[1];  // encodes the node position
  }
  const std::string csv = snapshot_csv(*g, U, 0.0);
  EXPECT_EQ(csv,
            "x,y,u,active\n"
            "0.5,0.5,5.5,1\n"
            "1,0.5,10.5,1\n"
            "0.5,1,6,1\n"
            "1,1,11,1\n");
  const std::string vtk = snapshot_vtk(*g, U, 0.0);
  EXPECT_NE(vtk.find("DIMENSIONS 2 2 1"), std::string::npos);
  EXPECT_NE(vtk.find("ORIGIN 0.5 0.5 0"), std::string::npos);
  const VtkCheck check = validate_vtk(vtk);
  EXPECT_TRUE(check.ok) << check.message;
  EXPECT_EQ(check.points, 4u);
  EXPECT_EQ(check.arrays, (std::vector<std::string>{"u", "mask"}));
}

TEST(Snapshot, LShapeMarksMaskedNodes) {
  const std::vector<int> cells{4, 4};
  const auto g = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, cells,
                            BoundaryCondition::homogeneous_dirichlet(), lshape_mask(cells));
  const SnapshotLayout s = snapshot_layout(*g, std::vector<double>(g->size(), 0.5), 0.0);
  EXPECT_EQ(s.values.size(), 25u);
  EXPECT_EQ(s.active[0], 0);
  EXPECT_EQ(s.values[0], kMaskedSentinel);
  EXPECT_EQ(s.active[24], 1);
  EXPECT_EQ(s.values[24], 0.0);
  EXPECT_EQ(s.values[3 * 5 + 3], 0.5);
  EXPECT_TRUE(validate_vtk(snapshot_vtk(*g, std::vector<double>(g->size(), 0.5), 0.0)).ok);
}

TEST(Snapshot, ValidatorRejectsBrokenFiles) {
  const auto g = build_grid(Box{{0.0}, {1.0}}, {4}, BoundaryCondition::neumann());
  std::string vtk = snapshot_vtk(*g, std::vector<double>(5, 0.25), 0.0);
  EXPECT_TRUE(validate_vtk(vtk).ok);
  EXPECT_FALSE(validate_vtk("hello\n").ok);
  std::string truncated = vtk.substr(0, vtk.find("SCALARS mask") - 5);
  EXPECT_FALSE(validate_vtk(truncated).ok);
  std::string wrong = std::regex_replace(vtk, std::regex("POINT_DATA 5"), "POINT_DATA 6");
  EXPECT_FALSE(validate_vtk(wrong).ok);
}

TEST(Table, FormatsAndCsv) {
  ConvergenceTable t{"tau", {{1.0 / 16, 1e-3, 0, 2e-3, 0}, {1.0 / 32, 2.5e-4, 0, 5e-4, 0}}};
  compute_rates(t);
  const std::string text = format_table(t);
  EXPECT_NE(text.find("1/16"), std::string::npos);
  EXPECT_NE(text.find("2.00"), std::string::npos);
  EXPECT_NE(text.find(" - "), std::string::npos);
  const std::string csv = table_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,l_inf,l_inf_rate,l2,l2_rate");
  EXPECT_NE(csv.find("0.0625,0.001,,0.002,\n"), std::string::npos);
}

TEST(Svg, SupNormChartWithBetaLine) {
  TimeSeries a = sample_series();
  TimeSeries b = sample_series();
  for (auto& r : b) r.sup_norm *= 0.9;
  const std::string svg =
      plot_svg({{"tau=0.1", a}, {"tau=0.01 <fine>", b}}, PlotKind::SupNorm, 0.9575);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count(svg, "class=\"series\""), 2u);
  EXPECT_EQ(count(svg, "class=\"legend-entry\""), 2u);
  EXPECT_EQ(count(svg, "id=\"beta\""), 1u);
  EXPECT_NE(svg.find("&lt;fine&gt;"), std::string::npos);
  EXPECT_NE(svg.find("0.9575"), std::string::npos);
  const std::string energy = plot_svg({{"a", a}}, PlotKind::Energy);
  EXPECT_EQ(count(energy, "id=\"beta\""), 0u);
  EXPECT_THROW(plot_svg({}, PlotKind::Energy), std::invalid_argument);
}
