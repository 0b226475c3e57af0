// Fully discrete ETD1 and ETDRK2 steps, maximum bound monitoring, the
// discrete energy and the fixed-step time loop.
#ifndef MBPETD_STEPPER_HPP
#define MBPETD_STEPPER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mbpetd/expmv.hpp"
#include "mbpetd/grid.hpp"
#include "mbpetd/operators.hpp"
#include "mbpetd/physics.hpp"

namespace mbpetd {

enum class Scheme { Etd1, Etdrk2 };

inline const char* to_string(Scheme s) { return s == Scheme::Etd1 ? "etd1" : "etdrk2"; }

struct SolverState {
  GridPtr grid;
  PhysicsSpec physics;
  VelocityField velocity;
  double t = 0.0;
  std::vector<double> U;  // values on X*
  std::size_t step = 0;
};

inline SolverState make_state(const Field& u0, PhysicsSpec physics, VelocityField velocity,
                              double t0 = 0.0) {
  return SolverState{u0.grid(), std::move(physics), std::move(velocity), t0,
                     std::vector<double>(u0.values().begin(), u0.values().end()), 0};
}

struct StepOptions {
  KrylovOptions krylov{1e-12, 100, 100000};
  double mbp_slack = 1e-12;
  bool strict_mbp = true;  // throw on a bound violation instead of flagging it
};

struct StepReport {
  double sup_norm = 0.0;
  double energy = 0.0;
  std::size_t matvecs = 0;
  int krylov_dim = 0;
  bool mbp_violated = false;
  std::size_t worst_node = 0;  // unknown index of the largest |U|
  double worst_value = 0.0;
};

class MbpViolation : public std::runtime_error {
 public:
  MbpViolation(const std::string& what, StepReport report)
      : std::runtime_error(what), report_(report) {}
  const StepReport& report() const { return report_; }

 private:
  StepReport report_;
};

/// Trapezoidal discrete energy over the active lattice cells:
///   sum_cells h^d [ eps^2/2 sum_k mean_edges ((U_{+e_k} - U)/h_k)^2 + mean_corners F(U) ].
/// Dirichlet data at time t fills boundary nodes and periodic images close the torus.
inline double discrete_energy(const Grid& grid, const PhysicsSpec& physics,
                              std::span<const double> U, double t) {
  const std::vector<double> lat = lattice_values(grid, U, t);
  const int dim = grid.dim();
  const int corners = 1 << dim;
  std::vector<double> Fv(lat.size(), 0.0);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (!std::isnan(lat[i])) Fv[i] = eval_F(physics.potential, physics.clamp(lat[i]));
  }
  std::array<std::size_t, kMaxDim> cells{1, 1, 1};
  std::size_t n_cells = 1;
  for (int k = 0; k < dim; ++k) {
    cells[k] = static_cast<std::size_t>(grid.cells(k));
    n_cells *= cells[k];
  }
  const double e2 = physics.epsilon * physics.epsilon;
  const double edge_weight = 1.0 / static_cast<double>(corners / 2);
  double total = 0.0;
  std::vector<std::size_t> corner(static_cast<std::size_t>(corners));
  for (std::size_t c = 0; c < n_cells; ++c) {
    std::size_t base = 0;
    std::size_t rest = c;
    for (int k = 0; k < dim; ++k) {
      base += (rest % cells[k]) * grid.stride(k);
      rest /= cells[k];
    }
    bool active = true;
    for (int m = 0; m < corners; ++m) {
      std::size_t node = base;
      for (int k = 0; k < dim; ++k) {
        if (m & (1 << k)) node += grid.stride(k);
      }
      corner[static_cast<std::size_t>(m)] = node;
      if (std::isnan(lat[node])) active = false;
    }
    if (!active) continue;
    double pot = 0.0;
    double grad = 0.0;
    for (int m = 0; m < corners; ++m) {
      const std::size_t node = corner[static_cast<std::size_t>(m)];
      pot += Fv[node];
      for (int k = 0; k < dim; ++k) {
        if (m & (1 << k)) continue;
        const double d = (lat[corner[static_cast<std::size_t>(m | (1 << k))]] - lat[node]) /
                         grid.spacing(k);
        grad += d * d;
      }
    }
    total += 0.5 * e2 * grad * edge_weight + pot / corners;
  }
  return total * grid.cell_volume();
}

inline double discrete_energy(const SolverState& s) {
  return discrete_energy(*s.grid, s.physics, s.U, s.t);
}

namespace detail {

inline StepReport assess(const SolverState& s, const StepOptions& opt) {
  StepReport r;
  for (std::size_t i = 0; i < s.U.size(); ++i) {
    const double a = std::abs(s.U[i]);
    if (!std::isfinite(s.U[i])) throw std::runtime_error("non-finite value in the solution");
    if (a > r.sup_norm) {
      r.sup_norm = a;
      r.worst_node = i;
    }
  }
  r.worst_value = s.U.empty() ? 0.0 : s.U[r.worst_node];
  r.mbp_violated = r.sup_norm > s.physics.beta + opt.mbp_slack;
  r.energy = discrete_energy(s);
  return r;
}

inline void finish(SolverState& s, StepReport& r, const StepOptions& opt) {
  const std::size_t matvecs = r.matvecs;
  const int dim = r.krylov_dim;
  r = assess(s, opt);
  r.matvecs = matvecs;
  r.krylov_dim = dim;
  if (r.mbp_violated && opt.strict_mbp) {
    throw MbpViolation("maximum bound violated at step " + std::to_string(s.step) +
                           ": |U| = " + std::to_string(r.sup_norm) +
                           " > beta = " + std::to_string(s.physics.beta),
                       r);
  }
}

inline void check_step(const SolverState& s, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!s.grid) throw std::invalid_argument("state has no grid");
  if (s.U.size() != s.grid->size()) throw std::invalid_argument("state length mismatch");
}

/// U + tau phi_1(tau L) (L U + N~(U)) for the context frozen at U.
inline std::vector<double> etd1_update(const SolverState& s, const StencilOperator& L,
                                       std::span<const double> Ntil, double tau,
                                       const KrylovOptions& kopt, StepReport& r) {
  std::vector<double> b = L.apply(s.U);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += Ntil[i];
  const PhiActionResult res = phi_action(L, PhiActionRequest{1, tau, b, kopt});
  r.matvecs += res.matvec_count + 1;
  r.krylov_dim = std::max(r.krylov_dim, res.krylov_dim);
  std::vector<double> out(s.U);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tau * res.y[i];
  return out;
}

}  // namespace detail

/// U^{n+1} = phi_0(tau L) U^n + tau phi_1(tau L) N~(U^n), evaluated as
/// U^n + tau phi_1(tau L)(L U^n + N~(U^n)).
inline std::pair<SolverState, StepReport> etd1_step(const SolverState& state, double tau,
                                                     const StepOptions& opt = {}) {
  detail::check_step(state, tau);
  const OperatorContext ctx =
      OperatorContext::build(state.grid, state.U, state.physics, state.velocity, state.t);
  const StencilOperator L = ctx.stabilized();
  const std::vector<double> Ntil = eval_N_tilde(state.physics, ctx, state.U);
  StepReport r;
  SolverState next = state;
  next.U = detail::etd1_update(state, L, Ntil, tau, opt.krylov, r);
  next.t = state.t + tau;
  next.step = state.step + 1;
  detail::finish(next, r, opt);
  return {std::move(next), r};
}

/// Predictor U^ from ETD1, then with L~ = (L[U^n] at t^n + L[U^] at t^{n+1}) / 2
///   U^{n+1} = phi_0(tau L~) U^n + tau phi_1(tau L~) N~_0 + tau phi_2(tau L~) (N~_1 - N~_0),
/// N~_0 = N(U^n) + B~ g(t^n), N~_1 = N(U^) + B~ g(t^{n+1}), where B~ g is the
/// coupling of L~ to the Dirichlet data (boundary values enter through the
/// same averaged operator as the interior). Evaluated as U^n + [phi_1 w_1 +
/// phi_2 w_2] with w_1 = tau (L~ U^n + N~_0), w_2 = tau (N~_1 - N~_0) in one
/// augmented Krylov process.
inline std::pair<SolverState, StepReport> etdrk2_step(const SolverState& state, double tau,
                                                       const StepOptions& opt = {}) {
  detail::check_step(state, tau);
  const OperatorContext ctx0 =
      OperatorContext::build(state.grid, state.U, state.physics, state.velocity, state.t);
  const StencilOperator L0 = ctx0.stabilized();
  const std::vector<double> N0 = eval_N_tilde(state.physics, ctx0, state.U);
  StepReport r;
  const std::vector<double> Uhat = detail::etd1_update(state, L0, N0, tau, opt.krylov, r);
  const double t1 = state.t + tau;
  const OperatorContext ctx1 =
      OperatorContext::build(state.grid, Uhat, state.physics, state.velocity, t1);
  const StencilOperator Lbar = StencilOperator::average(L0, ctx1.stabilized());
  const std::size_t n = state.U.size();
  std::vector<double> w1 = Lbar.apply(state.U);
  std::vector<double> w2(n);
  const std::vector<double> g0 = boundary_forcing(Lbar, state.t);
  const std::vector<double> g1 = boundary_forcing(Lbar, t1);
  for (std::size_t i = 0; i < n; ++i) {
    const double n0 = eval_N(state.physics, state.U[i]) + g0[i];
    const double n1 = eval_N(state.physics, Uhat[i]) + g1[i];
    w1[i] = tau * (w1[i] + n0);
    w2[i] = tau * (n1 - n0);
  }
  const PhiActionResult res = phi_combination(
      Lbar, tau, {}, {std::span<const double>(w1), std::span<const double>(w2)}, opt.krylov);
  r.matvecs += res.matvec_count + 1;
  r.krylov_dim = std::max(r.krylov_dim, res.krylov_dim);
  SolverState next = state;
  for (std::size_t i = 0; i < n; ++i) next.U[i] += res.y[i];
  next.t = t1;
  next.step = state.step + 1;
  detail::finish(next, r, opt);
  return {std::move(next), r};
}

inline std::pair<SolverState, StepReport> step(Scheme scheme, const SolverState& state,
                                               double tau, const StepOptions& opt = {}) {
  return scheme == Scheme::Etd1 ? etd1_step(state, tau, opt) : etdrk2_step(state, tau, opt);
}

struct SeriesRecord {
  std::size_t step = 0;
  double t = 0.0;
  double sup_norm = 0.0;
  double energy = 0.0;
  std::size_t matvecs = 0;
  bool mbp_ok = true;
};

using TimeSeries = std::vector<SeriesRecord>;

struct RunCallbacks {
  std::function<void(const SolverState&, const StepReport&)> on_step;
};

struct RunResult {
  TimeSeries series;
  SolverState state;
  std::optional<std::string> error;  // set when the run stopped early
  double max_sup_norm = 0.0;
};

/// Step times t0 + j tau, j = 1..K, with the last one replaced by T when tau
/// does not divide T - t0.
inline std::vector<double> step_times(double t0, double tau, double T) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(T >= t0)) throw std::invalid_argument("final time precedes the initial time");
  std::vector<double> times;
  const double q = (T - t0) / tau;
  const double nearest = std::round(q);
  const auto full = static_cast<std::size_t>(std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)
                                                  ? nearest
                                                  : std::floor(q));
  for (std::size_t j = 1; j <= full; ++j) times.push_back(t0 + static_cast<double>(j) * tau);
  if (times.empty()) {
    if (T > t0) times.push_back(T);
  } else if (T - times.back() > 1e-9 * tau) {
    times.push_back(T);
  } else {
    times.back() = T;
  }
  return times;
}

/// Advances to T with step tau. Errors stop the loop and are reported in the
/// result together with the partial series.
inline RunResult run(SolverState state, Scheme scheme, double tau, double T,
                     const StepOptions& opt = {}, const RunCallbacks& callbacks = {}) {
  RunResult out;
  const StepReport r0 = detail::assess(state, opt);
  out.series.push_back({state.step, state.t, r0.sup_norm, r0.energy, 0, !r0.mbp_violated});
  out.max_sup_norm = r0.sup_norm;
  if (callbacks.on_step) callbacks.on_step(state, r0);
  const std::vector<double> times = step_times(state.t, tau, T);
  double tn = state.t;
  try {
    for (double next_t : times) {
      tn = next_t;
      auto [next, rep] = step(scheme, state, tn - state.t, opt);
      next.t = tn;
      state = std::move(next);
      out.series.push_back(
          {state.step, state.t, rep.sup_norm, rep.energy, rep.matvecs, !rep.mbp_violated});
      out.max_sup_norm = std::max(out.max_sup_norm, rep.sup_norm);
      if (callbacks.on_step) callbacks.on_step(state, rep);
    }
  } catch (const MbpViolation& e) {
    const StepReport& rep = e.report();
    out.series.push_back({state.step + 1, tn, rep.sup_norm, rep.energy, rep.matvecs,
                          false});
    out.max_sup_norm = std::max(out.max_sup_norm, rep.sup_norm);
    out.error = e.what();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.state = std::move(state);
  return out;
}

}  // namespace mbpetd

#endif  // MBPETD_STEPPER_HPP
