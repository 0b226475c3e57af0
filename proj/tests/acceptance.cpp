// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mbpetd/cli.hpp"
#include "mbpetd/mbpetd.hpp"

using namespace mbpetd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string rates(const ConvergenceTable& t) {
  std::string s;
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    s += (s.empty() ? "" : " ") + fmt("%.3f", t.rows[i].l_inf_rate);
  }
  return s;
}

double mean_rate(const ConvergenceTable& t) {
  double sum = 0.0;
  for (std::size_t i = 1; i < t.rows.size(); ++i) sum += t.rows[i].l_inf_rate;
  return sum / static_cast<double>(t.rows.size() - 1);
}

std::vector<std::pair<Potential, Mobility>> physics_pairs() {
  const Potential fh = Potential::flory_huggins(0.8, 1.6);
  return {{Potential::double_well(), Mobility::constant(1.0)},
          {Potential::double_well(), Mobility::degenerate()},
          {fh, Mobility::constant(1.0)},
          {fh, Mobility::degenerate()}};
}

/// Random coefficients: mobility in [0, 1], velocity components in [-2, 2].
OperatorContext random_context(const GridPtr& g, std::mt19937_64& rng, double eps, double kappa) {
  std::uniform_real_distribution<double> mob(0.0, 1.0), vel(-2.0, 2.0);
  std::vector<double> m(g->size()), v(g->size() * g->dim());
  for (double& x : m) x = mob(rng);
  for (double& x : v) x = vel(rng);
  return OperatorContext(g, m, v, eps, kappa, 0.0);
}

BoundaryCondition bc_of(BoundaryKind k, double beta) {
  switch (k) {
    case BoundaryKind::Periodic: return BoundaryCondition::periodic();
    case BoundaryKind::Neumann: return BoundaryCondition::neumann();
    case BoundaryKind::Dirichlet: break;
  }
  return BoundaryCondition::dirichlet([beta](std::span<const double> x, double t) {
    return beta * std::sin(3.0 * x[0] + 2.0 * t);
  });
}

GridPtr square(int n, BoundaryCondition bc) {
  return build_grid(Box{{-0.5, -0.5}, {0.5, 0.5}}, {n, n}, std::move(bc));
}

double sup_diff(const std::vector<double>& a, const Eigen::VectorXd& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[static_cast<Eigen::Index>(i)]));
  }
  return d;
}

Outcome temporal_order() {
  const RunConfig cfg = find_preset("temporal_2d_desk");
  const auto t1 = temporal_convergence(cfg, Scheme::Etd1);
  const auto t2 = temporal_convergence(cfg, Scheme::Etdrk2);
  const double m1 = mean_rate(t1), m2 = mean_rate(t2);
  const bool pass = m1 >= 0.85 && m1 <= 1.3 && m2 >= 1.8 && m2 <= 2.2;
  return {pass, "etd1 mean rate " + fmt("%.3f", m1) + " [" + rates(t1) + "], etdrk2 mean rate " +
                    fmt("%.3f", m2) + " [" + rates(t2) + "]"};
}

Outcome spatial_order() {
  const RunConfig cfg = find_preset("spatial_2d_desk");
  const auto t = spatial_convergence(cfg);
  bool increasing = true;
  for (std::size_t i = 2; i < t.rows.size(); ++i) {
    increasing = increasing && t.rows[i].l_inf_rate > t.rows[i - 1].l_inf_rate;
  }
  const double last = t.rows.back().l_inf_rate;
  return {increasing && last >= 0.9,
          "rates [" + rates(t) + "]" + (increasing ? ", increasing" : ", not increasing")};
}

Outcome mbp_property() {
  std::mt19937_64 rng(20230101);
  std::size_t cases = 0, failures = 0;
  double worst = 0.0;
  const double taus[] = {1e-3, 0.1, 10.0};
  for (Scheme scheme : {Scheme::Etd1, Scheme::Etdrk2}) {
    for (const auto& [p, m] : physics_pairs()) {
      const PhysicsSpec phys = make_physics(p, m, 0.01);
      for (BoundaryKind k : {BoundaryKind::Periodic, BoundaryKind::Neumann, BoundaryKind::Dirichlet}) {
        const GridPtr g = square(12, bc_of(k, phys.beta));
        for (int trial = 0; trial < 200; ++trial) {
          std::uniform_real_distribution<double> vel(-3.0, 3.0);
          const std::array<double, kMaxDim> v{vel(rng), vel(rng), 0.0};
          const VelocityField field = [v](std::span<const double> x, double t) {
            return std::array<double, kMaxDim>{v[0] * std::cos(2.0 * x[1] + t),
                                               v[1] * std::sin(3.0 * x[0]), 0.0};
          };
          const SolverState s = make_state(sample_random(g, phys.beta, rng()), phys, field);
          StepOptions opt;
          opt.strict_mbp = false;
          const auto [next, rep] = step(scheme, s, taus[trial % 3], opt);
          ++cases;
          worst = std::max(worst, rep.sup_norm - phys.beta);
          if (rep.sup_norm > phys.beta + 1e-12) ++failures;
        }
      }
    }
  }
  std::string detail = std::to_string(cases - failures) + "/" + std::to_string(cases) +
                       " single steps within beta (max excess " + fmt("%.2e", worst) + ")";
  bool pass = failures == 0;
  for (const char* name : {"mbp_dw_2d", "mbp_fh_2d"}) {
    const RunConfig cfg = find_preset(name);
    const RunResult r = mbp_experiment(cfg, cfg.time.tau);
    const double beta = make_physics(cfg).beta;
    const bool ok = !r.error && r.max_sup_norm <= beta + 1e-12 && r.state.t == cfg.time.final_time;
    pass = pass && ok;
    detail += std::string("; ") + name + " max sup-norm " + fmt("%.12f", r.max_sup_norm) +
              " vs beta " + fmt("%.12f", beta);
  }
  return {pass, detail};
}

Outcome contraction() {
  std::mt19937_64 rng(7);
  double worst = -1.0;
  int dense_checks = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + trial % 2;
    std::uniform_int_distribution<int> cells_dist(4, 32);
    const int n = cells_dist(rng);
    const BoundaryKind kinds[] = {BoundaryKind::Periodic, BoundaryKind::Neumann,
                                  BoundaryKind::Dirichlet};
    const BoundaryKind kind = kinds[trial % 3];
    const BoundaryCondition bc = kind == BoundaryKind::Dirichlet
                                     ? BoundaryCondition::homogeneous_dirichlet()
                                     : bc_of(kind, 1.0);
    const GridPtr g = build_grid(Box{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)},
                                 std::vector<int>(dim, n), bc);
    std::uniform_real_distribution<double> eps(0.01, 0.2), kap(0.5, 8.0), ltau(-3.0, 0.0);
    const OperatorContext ctx = random_context(g, rng, eps(rng), kap(rng));
    const double tau = std::pow(10.0, ltau(rng));
    std::vector<double> w(g->size());
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& x : w) x = d(rng);
    const double bound = std::exp(-ctx.kappa() * tau) * sup_norm(w) + 1e-10;
    const StencilOperator L = ctx.stabilized();
    const auto kry = phi_action(L, PhiActionRequest{0, tau, w, {1e-12, 100, 100000}});
    worst = std::max(worst, sup_norm(kry.y) - bound);
    if (g->size() <= 400) {
      const Eigen::VectorXd y = phi_dense(0, tau * assemble_dense(L)) *
                                Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      worst = std::max(worst, y.cwiseAbs().maxCoeff() - bound);
      ++dense_checks;
    }
  }
  return {worst <= 0.0, "50 contexts (" + std::to_string(dense_checks) +
                            " also dense), max of |phi0 w| - e^{-kappa tau}|w| - 1e-10 = " +
                            fmt("%.3e", worst)};
}

Outcome krylov_equivalence() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  int cases = 0;
  const std::vector<GridPtr> grids{
      build_grid(Box{{0.0}, {1.0}}, {64}, BoundaryCondition::periodic()),
      build_grid(Box{{0.0}, {1.0}}, {1025}, BoundaryCondition::homogeneous_dirichlet()),
      square(16, BoundaryCondition::neumann()), square(32, BoundaryCondition::periodic())};
  for (const GridPtr& g : grids) {
    const OperatorContext ctx = random_context(g, rng, 0.05, 2.0);
    const StencilOperator L = ctx.stabilized();
    const Eigen::MatrixXd A = assemble_dense(L);
    std::vector<double> b(g->size());
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& x : b) x = d(rng);
    const Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    for (double tau : {1e-3, 0.1, 1.0}) {
      const PhiVectors ref = phi_dense_vectors(tau * A, bv);
      const Eigen::VectorXd* oracle[] = {&ref.phi0, &ref.phi1, &ref.phi2};
      for (int k = 0; k <= 2; ++k) {
        const auto r = phi_action(L, PhiActionRequest{k, tau, b, {1e-10, 100, 100000}});
        worst = std::max(worst, sup_diff(r.y, *oracle[k]) / oracle[k]->cwiseAbs().maxCoeff());
        ++cases;
      }
    }
  }
  return {worst <= 1e-8, std::to_string(cases) + " cases up to 1024 unknowns, max relative Linf error " +
                             fmt("%.3e", worst)};
}

Outcome monotone() {
  std::mt19937_64 rng(13);
  int passed = 0, total = 0;
  for (BoundaryKind k : {BoundaryKind::Periodic, BoundaryKind::Neumann, BoundaryKind::Dirichlet}) {
    for (int trial = 0; trial < 100; ++trial) {
      const GridPtr g = square(10, bc_of(k, 1.0));
      passed += check_monotone_stencil(random_context(g, rng, 0.01, 1.0)).pass ? 1 : 0;
      ++total;
    }
  }
  const GridPtr g = build_grid(Box{{0.0}, {1.0}}, {8}, BoundaryCondition::homogeneous_dirichlet());
  const std::size_t n = g->size();
  const double h = 1.0 / 8, v = 10.0;
  const StencilOperator centered(g, std::vector<double>(n, 0.01), std::vector<double>(n, v / (2 * h)),
                                 std::vector<double>(n, -v / (2 * h)), 0.0);
  const bool counter_fails = !check_monotone_stencil(centered).pass;
  return {passed == total && counter_fails,
          std::to_string(passed) + "/" + std::to_string(total) + " random upwind stencils pass; centered " +
              (counter_fails ? "counterexample fails" : "counterexample passes")};
}

Outcome nonlinearity() {
  std::mt19937_64 rng(17);
  bool ok = true;
  std::string kappas;
  for (const auto& [p, m] : physics_pairs()) {
    const PhysicsSpec s = make_physics(p, m, 0.01);
    std::uniform_real_distribution<double> xi(-s.beta, s.beta);
    for (int i = 0; i < 10000; ++i) {
      const double a = xi(rng), b = xi(rng);
      const double Na = eval_N(s, a), Nb = eval_N(s, b);
      if (std::abs(Na) > s.kappa * s.beta * (1 + 1e-14)) ok = false;
      if (std::abs(Na - Nb) > 2 * s.kappa * std::abs(a - b) * (1 + 1e-12) + 1e-15) ok = false;
    }
    kappas += (kappas.empty() ? "" : ", ") + fmt("%.6f", s.kappa);
  }
  const auto k = [](const Potential& p, const Mobility& m) {
    return compute_kappa(p, m, compute_beta(p));
  };
  const Potential fh = Potential::flory_huggins(0.8, 1.6);
  const bool values = k(Potential::double_well(), Mobility::constant(1.0)) == 2.0 &&
                      std::abs(k(Potential::double_well(), Mobility::degenerate()) - 1.0) <= 1e-12 &&
                      std::abs(k(fh, Mobility::degenerate()) - 0.9801) <= 1e-3 &&
                      std::abs(k(fh, Mobility::constant(1.0)) - 8.02) <= 0.01;
  return {ok && values, "bounds on 4 x 10^4 samples " + std::string(ok ? "hold" : "fail") +
                            "; kappa = " + kappas};
}

Outcome lshape_range() {
  const RunConfig cfg = find_preset("lshape");
  const RunResult r = run(make_initial_state(cfg), cfg.time.scheme, cfg.time.tau,
                          cfg.time.final_time, make_step_options(cfg));
  double lo = 0.0, hi = 0.0;
  for (double x : r.state.U) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const bool pass = !r.error && r.state.t == 10.0 && lo >= -1e-12 && hi <= 1.0 + 1e-12;
  return {pass, std::to_string(r.series.size() - 1) + " steps to t = " + format_double(r.state.t) +
                    ", values in [" + fmt("%.3e", lo) + ", " + fmt("%.15f", hi) + "]" +
                    (r.error ? ", error: " + *r.error : "")};
}

Outcome energy() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"mbp_dw_2d", "mbp_fh_2d"}) {
    const RunConfig cfg = find_preset(name);
    const RunResult r = mbp_experiment(cfg, cfg.time.tau);
    std::size_t increases = 0;
    for (std::size_t i = 1; i < r.series.size(); ++i) {
      increases += r.series[i].energy > r.series[i - 1].energy ? 1 : 0;
    }
    const double e0 = r.series.front().energy, e1 = r.series.back().energy;
    pass = pass && !r.error && e1 < e0;
    detail += std::string(detail.empty() ? "" : "; ") + name + " " + fmt("%.6e", e0) + " -> " +
              fmt("%.6e", e1) + " (" + std::to_string(increases) + " step increases)";
  }
  return {pass, detail};
}

Outcome determinism() {
  const auto root = std::filesystem::temp_directory_path() / "mbpetd_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<std::string> files;
  for (const char* preset : {"mbp_fh_2d", "fh_3d_desk"}) {
    for (const char* run_name : {"a", "b"}) {
      const std::string dir = (root / run_name).string();
      std::vector<std::string> args{"mbpetd", "run", "--preset", preset, "--out", dir, "--jobs", "1"};
      if (std::string(preset) == "fh_3d_desk") args.insert(args.end(), {"--final", "0.5"});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream out, err;
      if (cli_main(static_cast<int>(argv.size()), argv.data(), out, err) != 0) {
        return {false, std::string(preset) + " run failed: " + err.str()};
      }
    }
    const std::string name = std::string(preset) + ".csv";
    const std::string a = read_text_file(root / "a" / name), b = read_text_file(root / "b" / name);
    if (a != b) return {false, name + " differs between runs"};
    files.push_back(name + " (" + std::to_string(a.size()) + " bytes)");
  }
  std::filesystem::remove_all(root);
  return {true, "byte-identical " + files[0] + " and " + files[1]};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"temporal order", temporal_order},
      {"spatial order", spatial_order},
      {"maximum bound principle", mbp_property},
      {"contraction", contraction},
      {"Krylov and dense oracle agree", krylov_equivalence},
      {"monotone stencil", monotone},
      {"nonlinearity bounds and kappa", nonlinearity},
      {"L-shape range", lshape_range},
      {"energy decrease", energy},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
