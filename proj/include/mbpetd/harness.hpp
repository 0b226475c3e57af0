// Error norms between nested grids, temporal and spatial convergence
// tables against numerical references, and the long MBP runs.
#ifndef MBPETD_HARNESS_HPP
#define MBPETD_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mbpetd/config.hpp"
#include "mbpetd/grid.hpp"
#include "mbpetd/stepper.hpp"

namespace mbpetd {

struct ErrorNorms {
  double l_inf = 0.0;
  double l2 = 0.0;
};

/// Values of a fine-grid solution at the unknowns of a coarse grid whose
/// lattice nests in the fine one (fine cells an integer multiple per axis).
inline std::vector<double> restrict_to(const Grid& coarse, const Grid& fine,
                                       std::span<const double> fine_values) {
  if (coarse.dim() != fine.dim() || coarse.bc_kind() != fine.bc_kind() ||
      coarse.has_mask() != fine.has_mask()) {
    throw std::invalid_argument("grids differ in dimension, boundary kind or mask");
  }
  if (fine_values.size() != fine.size()) throw std::invalid_argument("fine values length");
  std::array<std::size_t, kMaxDim> ratio{1, 1, 1};
  for (int k = 0; k < coarse.dim(); ++k) {
    const double scale = std::max(std::abs(coarse.lower(k)), std::abs(coarse.upper(k)));
    const double tol = 1e-12 * std::max(1.0, scale);
    if (std::abs(coarse.lower(k) - fine.lower(k)) > tol ||
        std::abs(coarse.upper(k) - fine.upper(k)) > tol) {
      throw std::invalid_argument("grids cover different boxes");
    }
    if (fine.cells(k) % coarse.cells(k) != 0) {
      throw std::invalid_argument("grids do not nest: " + std::to_string(fine.cells(k)) +
                                  " cells is not a multiple of " +
                                  std::to_string(coarse.cells(k)));
    }
    ratio[k] = static_cast<std::size_t>(fine.cells(k) / coarse.cells(k));
  }
  const auto nodes = coarse.unknown_nodes();
  std::vector<double> out(nodes.size());
  for (std::size_t u = 0; u < nodes.size(); ++u) {
    auto idx = coarse.lattice_index(nodes[u]);
    for (int k = 0; k < coarse.dim(); ++k) idx[k] *= ratio[k];
    const auto fu = fine.unknown_of(fine.node_of(idx));
    if (!fu) throw std::invalid_argument("coarse unknown is not an unknown of the fine grid");
    out[u] = fine_values[*fu];
  }
  return out;
}

/// l_inf = max |U - Uref|, l2 = sqrt(h^d sum (U - Uref)^2) over the grid of U.
inline ErrorNorms error_norms(const Grid& grid, std::span<const double> U,
                              std::span<const double> Uref) {
  if (U.size() != Uref.size() || U.size() != grid.size()) {
    throw std::invalid_argument("error norms of vectors with different lengths");
  }
  ErrorNorms e;
  double sum = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    const double d = std::abs(U[i] - Uref[i]);
    e.l_inf = std::max(e.l_inf, d);
    sum += d * d;
  }
  e.l2 = std::sqrt(grid.cell_volume() * sum);
  return e;
}

/// Norms after restricting the reference to the grid of U when they differ.
inline ErrorNorms error_norms(const Field& U, const Field& Uref) {
  if (U.grid() == Uref.grid() || U.grid()->lattice_size() == Uref.grid()->lattice_size()) {
    return error_norms(*U.grid(), U.values(), Uref.values());
  }
  const auto r = restrict_to(*U.grid(), *Uref.grid(), Uref.values());
  return error_norms(*U.grid(), U.values(), r);
}

struct ConvergenceRow {
  double parameter = 0.0;  // tau or 1/h
  double l_inf = 0.0;
  double l_inf_rate = std::numeric_limits<double>::quiet_NaN();
  double l2 = 0.0;
  double l2_rate = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::string parameter_name;  // "tau" or "1/h"
  std::vector<ConvergenceRow> rows;
};

/// Observed order between consecutive rows: log(e_{i-1}/e_i) / log(r), with r
/// the refinement ratio (2 for halvings, so the rate is log2 of the error ratio).
inline void compute_rates(ConvergenceTable& table) {
  const bool inverse = table.parameter_name == "1/h";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    ConvergenceRow& r = table.rows[i];
    if (i == 0) {
      r.l_inf_rate = r.l2_rate = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const ConvergenceRow& p = table.rows[i - 1];
    const double ratio = inverse ? r.parameter / p.parameter : p.parameter / r.parameter;
    r.l_inf_rate = std::log(p.l_inf / r.l_inf) / std::log(ratio);
    r.l2_rate = std::log(p.l2 / r.l2) / std::log(ratio);
  }
}

/// Runs task(i) for i in [0, count) on up to `jobs` threads. Results are
/// written by index, so the outcome does not depend on scheduling.
inline void for_each_row(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solution at the configured final time, or an exception naming the row.
inline SolverState solve_to_final(const RunConfig& cfg, Scheme scheme, double tau,
                                  std::optional<int> cells = std::nullopt) {
  RunResult r = run(make_initial_state(cfg, cells), scheme, tau, cfg.time.final_time,
                    make_step_options(cfg));
  if (r.error) {
    throw ExperimentError("run with tau = " + format_double(tau) +
                          (cells ? ", cells = " + std::to_string(*cells) : std::string()) +
                          " failed: " + *r.error);
  }
  return std::move(r.state);
}

/// Errors at T of `scheme` for each tau against ETDRK2 with tau_ref on the
/// configured grid.
inline ConvergenceTable temporal_convergence(const RunConfig& cfg, Scheme scheme,
                                             const std::vector<double>& tau_list, double tau_ref,
                                             int jobs = 1) {
  if (tau_list.empty()) throw std::invalid_argument("empty tau list");
  const double tmin = *std::min_element(tau_list.begin(), tau_list.end());
  if (!(tau_ref > 0.0 && tau_ref < tmin / 4.0 * (1.0 + 1e-12))) {
    throw std::invalid_argument("tau_ref must be below min(tau_list)/4");
  }
  std::vector<SolverState> states(tau_list.size() + 1);
  for_each_row(states.size(), jobs, [&](std::size_t i) {
    states[i] = i == 0 ? solve_to_final(cfg, Scheme::Etdrk2, tau_ref)
                       : solve_to_final(cfg, scheme, tau_list[i - 1]);
  });
  ConvergenceTable table{"tau", {}};
  for (std::size_t i = 0; i < tau_list.size(); ++i) {
    const SolverState& s = states[i + 1];
    const ErrorNorms e = error_norms(*s.grid, s.U, states[0].U);
    table.rows.push_back({tau_list[i], e.l_inf, 0.0, e.l2, 0.0});
  }
  compute_rates(table);
  return table;
}

inline ConvergenceTable temporal_convergence(const RunConfig& cfg, Scheme scheme, int jobs = 1) {
  return temporal_convergence(cfg, scheme, cfg.convergence.tau_list, cfg.convergence.tau_ref,
                              jobs);
}

/// Errors at T with fixed tau for each coarse grid against the cells_ref
/// solution, compared at the coarse nodes.
inline ConvergenceTable spatial_convergence(const RunConfig& cfg,
                                            const std::vector<int>& cells_list, int cells_ref,
                                            double tau_fixed, Scheme scheme = Scheme::Etdrk2,
                                            int jobs = 1) {
  if (cells_list.empty()) throw std::invalid_argument("empty cells list");
  for (int n : cells_list) {
    if (n <= 0 || cells_ref % n != 0) {
      throw std::invalid_argument("grid with " + std::to_string(n) +
                                  " cells does not nest in the reference grid");
    }
  }
  std::vector<SolverState> states(cells_list.size() + 1);
  for_each_row(states.size(), jobs, [&](std::size_t i) {
    states[i] = solve_to_final(cfg, scheme, tau_fixed, i == 0 ? cells_ref : cells_list[i - 1]);
  });
  ConvergenceTable table{"1/h", {}};
  for (std::size_t i = 0; i < cells_list.size(); ++i) {
    const SolverState& s = states[i + 1];
    const auto ref = restrict_to(*s.grid, *states[0].grid, states[0].U);
    const ErrorNorms e = error_norms(*s.grid, s.U, ref);
    table.rows.push_back({static_cast<double>(cells_list[i]), e.l_inf, 0.0, e.l2, 0.0});
  }
  compute_rates(table);
  return table;
}

inline ConvergenceTable spatial_convergence(const RunConfig& cfg, int jobs = 1) {
  return spatial_convergence(cfg, cfg.convergence.cells_list, cfg.convergence.cells_ref,
                             cfg.convergence.tau_fixed, Scheme::Etdrk2, jobs);
}

/// Long run of an MBP preset with the given step; the series records the
/// sup-norm and energy of every step.
inline RunResult mbp_experiment(const RunConfig& cfg, double tau,
                                const RunCallbacks& callbacks = {}) {
  return run(make_initial_state(cfg), cfg.time.scheme, tau, cfg.time.final_time,
             make_step_options(cfg), callbacks);
}

}  // namespace mbpetd

#endif  // MBPETD_HARNESS_HPP
