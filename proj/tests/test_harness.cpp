#include <gtest/gtest.h>

#include <cmath>

#include "mbpetd/harness.hpp"
#include "mbpetd/presets.hpp"

using namespace mbpetd;

namespace {

GridPtr periodic_square(int n) {
  return build_grid(Box{{-0.5, -0.5}, {0.5, 0.5}}, {n, n}, BoundaryCondition::periodic());
}

/// Temporal preset shrunk so a table takes well under a second.
RunConfig tiny_temporal() {
  RunConfig c = find_preset("temporal_2d_desk");
  c.grid.cells = {16, 16};
  c.time.final_time = 0.1;
  return c;
}

}  // namespace

TEST(ErrorNorms, Examples) {
  const auto g = periodic_square(4);
  const std::vector<double> zero(16, 0.0);
  std::vector<double> one_off(16, 0.0);
  one_off[5] = -0.25;
  const ErrorNorms e = error_norms(*g, one_off, zero);
  EXPECT_EQ(e.l_inf, 0.25);
  EXPECT_DOUBLE_EQ(e.l2, std::sqrt(1.0 / 16 * 0.0625));
  const std::vector<double> ones(16, 1.0);
  const ErrorNorms f = error_norms(*g, ones, zero);
  EXPECT_EQ(f.l_inf, 1.0);
  EXPECT_DOUBLE_EQ(f.l2, 1.0);
  EXPECT_THROW(error_norms(*g, std::vector<double>(3, 0.0), zero), std::invalid_argument);
}

TEST(Restriction, TakesEveryOtherNode) {
  const auto coarse = periodic_square(4);
  const auto fine = periodic_square(8);
  auto f = [](std::span<const double> x) { return 3 * x[0] - x[1] * x[1]; };
  const Field fv = sample_function(fine, f);
  const auto r = restrict_to(*coarse, *fine, fv.values());
  const Field cv = sample_function(coarse, f);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], cv[i]);
  const ErrorNorms e = error_norms(cv, fv);
  EXPECT_EQ(e.l_inf, 0.0);
}

TEST(Restriction, DirichletAndLShapeGrids) {
  const std::vector<int> c{8, 8}, f{16, 16};
  const auto bc = BoundaryCondition::homogeneous_dirichlet();
  const auto coarse = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, c, bc, lshape_mask(c));
  const auto fine = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, f, bc, lshape_mask(f));
  auto fn = [](std::span<const double> x) { return x[0] * x[1]; };
  const auto r = restrict_to(*coarse, *fine, sample_function(fine, fn).values());
  const Field cv = sample_function(coarse, fn);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], cv[i]);
}

TEST(Restriction, RejectsNonNestingGrids) {
  const auto a = periodic_square(6);
  const auto b = periodic_square(8);
  EXPECT_THROW(restrict_to(*a, *b, std::vector<double>(64, 0.0)), std::invalid_argument);
  const auto n = build_grid(Box{{-0.5, -0.5}, {0.5, 0.5}}, {8, 8}, BoundaryCondition::neumann());
  EXPECT_THROW(restrict_to(*periodic_square(4), *n, std::vector<double>(81, 0.0)),
               std::invalid_argument);
  const auto shifted = build_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, {8, 8}, BoundaryCondition::periodic());
  EXPECT_THROW(restrict_to(*periodic_square(4), *shifted, std::vector<double>(64, 0.0)),
               std::invalid_argument);
}

TEST(Rates, RecomputedFromErrors) {
  ConvergenceTable t{"tau", {{0.1, 4e-2, 0, 8e-2, 0}, {0.05, 1e-2, 0, 2e-2, 0}, {0.025, 2.5e-3, 0, 1e-2, 0}}};
  compute_rates(t);
  EXPECT_TRUE(std::isnan(t.rows[0].l_inf_rate));
  EXPECT_NEAR(t.rows[1].l_inf_rate, 2.0, 1e-12);
  EXPECT_NEAR(t.rows[2].l_inf_rate, 2.0, 1e-12);
  EXPECT_NEAR(t.rows[1].l2_rate, 2.0, 1e-12);
  EXPECT_NEAR(t.rows[2].l2_rate, 1.0, 1e-12);
  ConvergenceTable s{"1/h", {{8, 1e-1, 0, 1e-1, 0}, {16, 5e-2, 0, 2.5e-2, 0}}};
  compute_rates(s);
  EXPECT_NEAR(s.rows[1].l_inf_rate, 1.0, 1e-12);
  EXPECT_NEAR(s.rows[1].l2_rate, 2.0, 1e-12);
}

TEST(Rates, ErrorHalvingGivesRateOne) {
  ConvergenceTable t{"tau", {}};
  double e = 1.0;
  for (double tau = 0.5; tau > 0.01; tau /= 2, e /= 2) t.rows.push_back({tau, e, 0, e, 0});
  compute_rates(t);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_NEAR(t.rows[i].l_inf_rate, 1.0, 1e-12);
}

TEST(ThreadPool, ResultsIndependentOfJobs) {
  std::vector<double> a(17), b(17);
  for_each_row(a.size(), 1, [&](std::size_t i) { a[i] = std::sqrt(static_cast<double>(i)); });
  for_each_row(b.size(), 4, [&](std::size_t i) { b[i] = std::sqrt(static_cast<double>(i)); });
  EXPECT_EQ(a, b);
  EXPECT_THROW(for_each_row(5, 3,
                            [](std::size_t i) {
                              if (i == 3) throw std::runtime_error("row 3");
                            }),
               std::runtime_error);
}

TEST(TemporalConvergence, SmallGridRates) {
  const RunConfig c = tiny_temporal();
  const std::vector<double> taus{1.0 / 32, 1.0 / 64, 1.0 / 128};
  const auto t1 = temporal_convergence(c, Scheme::Etd1, taus, 1.0 / 1024);
  const auto t2 = temporal_convergence(c, Scheme::Etdrk2, taus, 1.0 / 1024, 2);
  ASSERT_EQ(t1.rows.size(), 3u);
  EXPECT_EQ(t1.parameter_name, "tau");
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_NEAR(t1.rows[i].l_inf_rate, 1.0, 0.2) << i;
    EXPECT_NEAR(t2.rows[i].l_inf_rate, 2.0, 0.2) << i;
  }
  EXPECT_THROW(temporal_convergence(c, Scheme::Etd1, taus, 1.0 / 128), std::invalid_argument);
}

TEST(TemporalConvergence, ReferenceHalvingChangesLittle) {
  const RunConfig c = tiny_temporal();
  const std::vector<double> taus{1.0 / 16, 1.0 / 32};
  const auto a = temporal_convergence(c, Scheme::Etdrk2, taus, 1.0 / 256);
  const auto b = temporal_convergence(c, Scheme::Etdrk2, taus, 1.0 / 512);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    EXPECT_LE(std::abs(a.rows[i].l_inf - b.rows[i].l_inf), 0.05 * b.rows[i].l_inf) << i;
  }
}

TEST(SpatialConvergence, SmallGridRates) {
  RunConfig c = find_preset("spatial_2d_desk");
  const auto t = spatial_convergence(c, {8, 16, 32}, 128, 1.0 / 256, Scheme::Etdrk2, 2);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.parameter_name, "1/h");
  EXPECT_GT(t.rows[2].l_inf_rate, 0.6);
  EXPECT_LT(t.rows[2].l_inf, t.rows[0].l_inf);
  EXPECT_THROW(spatial_convergence(c, {8, 12}, 64, 1.0 / 64), std::invalid_argument);
}

TEST(MbpExperiment, ShortRunOfPhaseSeparationPreset) {
  RunConfig c = find_preset("mbp_dw_2d");
  c.grid.cells = {32, 32};
  c.time.final_time = 2.0;
  const auto r = mbp_experiment(c, 0.1);
  ASSERT_FALSE(r.error);
  EXPECT_EQ(r.series.size(), 21u);
  EXPECT_LE(r.max_sup_norm, 1.0 + 1e-12);
  EXPECT_LT(r.series.back().energy, r.series.front().energy);
}

TEST(SolveToFinal, ReportsFailingRow) {
  RunConfig c = find_preset("temporal_2d_desk");
  c.grid.cells = {8, 8};
  c.initial.kind = InitialKind::Constant;
  c.initial.value = 1.5;
  EXPECT_THROW(solve_to_final(c, Scheme::Etd1, 0.05), ExperimentError);
}
