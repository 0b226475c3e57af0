// Potentials, mobilities, the maximum bound beta, the stabilizing constant
// kappa and the stabilized nonlinearity N(u) = kappa u + M(u) f(u).
#ifndef MBPETD_PHYSICS_HPP
#define MBPETD_PHYSICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbpetd {

enum class PotentialKind { DoubleWell, FloryHuggins };
enum class MobilityKind { Constant, Degenerate };

inline const char* to_string(PotentialKind k) {
  return k == PotentialKind::DoubleWell ? "double_well" : "flory_huggins";
}
inline const char* to_string(MobilityKind k) {
  return k == MobilityKind::Constant ? "constant" : "degenerate";
}

struct Potential {
  PotentialKind kind = PotentialKind::DoubleWell;
  double theta = 0.0;
  double theta_c = 0.0;

  static Potential double_well() { return {}; }
  static Potential flory_huggins(double theta, double theta_c) {
    if (!(theta > 0.0) || !(theta_c > theta)) {
      throw std::invalid_argument("Flory-Huggins potential needs theta_c > theta > 0");
    }
    return {PotentialKind::FloryHuggins, theta, theta_c};
  }
};

struct Mobility {
  MobilityKind kind = MobilityKind::Constant;
  double value = 1.0;

  static Mobility constant(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("constant mobility must be positive");
    return {MobilityKind::Constant, c};
  }
  static Mobility degenerate() { return {MobilityKind::Degenerate, 1.0}; }
};

namespace detail {
inline void check_fh_domain(double u) {
  if (!(std::abs(u) < 1.0)) {
    throw std::domain_error("Flory-Huggins potential evaluated at |u| >= 1 (u = " +
                            std::to_string(u) + ")");
  }
}
}  // namespace detail

inline double eval_F(const Potential& p, double u) {
  if (p.kind == PotentialKind::DoubleWell) {
    const double s = u * u - 1.0;
    return 0.25 * s * s;
  }
  detail::check_fh_domain(u);
  return 0.5 * p.theta * ((1.0 + u) * std::log1p(u) + (1.0 - u) * std::log1p(-u)) -
         0.5 * p.theta_c * u * u;
}

/// Reaction f = -F'.
inline double eval_f(const Potential& p, double u) {
  if (p.kind == PotentialKind::DoubleWell) return u - u * u * u;
  detail::check_fh_domain(u);
  return p.theta_c * u - p.theta * std::atanh(u);
}

inline double eval_df(const Potential& p, double u) {
  if (p.kind == PotentialKind::DoubleWell) return 1.0 - 3.0 * u * u;
  detail::check_fh_domain(u);
  return p.theta_c - p.theta / (1.0 - u * u);
}

inline double eval_M(const Mobility& m, double u) {
  return m.kind == MobilityKind::Constant ? m.value : 1.0 - u * u;
}

inline double eval_dM(const Mobility& m, double u) {
  return m.kind == MobilityKind::Constant ? 0.0 : -2.0 * u;
}

/// f~(u) = M(u) f(u)
inline double eval_f_tilde(const Potential& p, const Mobility& m, double u) {
  return eval_M(m, u) * eval_f(p, u);
}

inline double eval_df_tilde(const Potential& p, const Mobility& m, double u) {
  return eval_dM(m, u) * eval_f(p, u) + eval_M(m, u) * eval_df(p, u);
}

/// Smallest admissible maximum bound: 1 for the double well, the positive root
/// of f for Flory-Huggins (bisection to 1e-12, upper end of the bracket so
/// that f(beta) <= 0 holds exactly).
inline double compute_beta(const Potential& p) {
  if (p.kind == PotentialKind::DoubleWell) return 1.0;
  double lo = 0.0;
  double hi = 1.0 - 1e-15;
  // f > 0 just right of 0 because theta_c > theta; f -> -inf as u -> 1.
  if (!(eval_f(p, hi) < 0.0)) throw std::runtime_error("cannot bracket the Flory-Huggins root");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (eval_f(p, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

/// max_{|xi| <= beta} |f~'(xi)| by dense sampling plus golden-section
/// refinement of the best bracket.
inline double compute_kappa(const Potential& p, const Mobility& m, double beta) {
  constexpr int kSamples = 200001;
  auto g = [&](double x) {
    const double v = std::abs(eval_df_tilde(p, m, x));
    if (!std::isfinite(v)) throw std::domain_error("f~' is not finite on [-beta, beta]");
    return v;
  };
  const double step = 2.0 * beta / (kSamples - 1);
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < kSamples; ++i) {
    const double x = i == kSamples - 1 ? beta : -beta + i * step;
    const double v = g(x);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = -beta + std::max(0, best - 1) * step;
  double b = std::min(beta, -beta + std::min(kSamples - 1, best + 1) * step);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (std::abs(b - a) > 1e-10 * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  return std::max({best_val, gc, gd});
}

/// Model parameters shared by the operator and the nonlinearity.
struct PhysicsSpec {
  Potential potential;
  Mobility mobility;
  double epsilon = 0.01;
  double beta = 1.0;
  double kappa = 0.0;
  /// Hypotheses of the analysis that this configuration relaxes.
  std::vector<std::string> notices;

  /// Arguments are clamped to [-beta, beta] before nonlinear evaluation; the
  /// scheme keeps |U| <= beta so this only absorbs round-off.
  double clamp(double u) const { return std::clamp(u, -beta, beta); }
  double mobility_at(double u) const { return eval_M(mobility, clamp(u)); }
};

/// Builds a spec with computed beta and kappa. A kappa override must not be
/// below the computed bound.
inline PhysicsSpec make_physics(const Potential& potential, const Mobility& mobility,
                                double epsilon, std::optional<double> kappa_override = {}) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  PhysicsSpec spec{potential, mobility, epsilon, compute_beta(potential), 0.0, {}};
  const double bound = compute_kappa(potential, mobility, spec.beta);
  if (kappa_override) {
    if (*kappa_override < bound * (1.0 - 1e-12)) {
      throw std::invalid_argument("kappa = " + std::to_string(*kappa_override) +
                                  " is below the stabilization bound " + std::to_string(bound));
    }
    spec.kappa = *kappa_override;
  } else {
    spec.kappa = bound;
  }
  if (!(eval_f(potential, spec.beta) <= 0.0 && eval_f(potential, -spec.beta) >= 0.0)) {
    throw std::logic_error("f(beta) <= 0 <= f(-beta) violated");
  }
  if (mobility.kind == MobilityKind::Degenerate && eval_M(mobility, spec.beta) <= 0.0) {
    spec.notices.push_back(
        "degenerate mobility vanishes at |u| = beta; the positive lower bound on M is relaxed");
  }
  return spec;
}

inline double eval_N(const PhysicsSpec& spec, double u) {
  const double x = spec.clamp(u);
  return spec.kappa * x + eval_f_tilde(spec.potential, spec.mobility, x);
}

}  // namespace mbpetd

#endif  // MBPETD_PHYSICS_HPP
