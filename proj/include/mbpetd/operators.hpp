// Matrix-free discrete operators on X*: central-difference diffusion, upwind
// convection, mobility scaling, Dirichlet boundary loads and the stabilized
// operator eps^2 Lambda_U D_h + Lambda_v A_v - kappa I.
#ifndef MBPETD_OPERATORS_HPP
#define MBPETD_OPERATORS_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mbpetd/grid.hpp"
#include "mbpetd/physics.hpp"

namespace mbpetd {

/// v(x, t); components beyond the grid dimension are ignored.
using VelocityField = std::function<std::array<double, kMaxDim>(std::span<const double>, double)>;

inline VelocityField zero_velocity() {
  return [](std::span<const double>, double) { return std::array<double, kMaxDim>{}; };
}

inline VelocityField constant_velocity(std::array<double, kMaxDim> v) {
  return [v](std::span<const double>, double) { return v; };
}

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// A (2d+1)-point operator on X* of the form
///
///   (Kw)_i = diffusion_i * sum_k (w_{i-e_k} - 2 w_i + w_{i+e_k}) / h_k^2
///          + sum_k [ left_{ik} (w_{i-e_k} - w_i) + right_{ik} (w_{i+e_k} - w_i) ]
///          - shift * w_i
///
/// Dirichlet boundary neighbours enter as zero; their data is carried by the
/// boundary load. Written in difference form so constants are annihilated
/// exactly when shift = 0 and no Dirichlet neighbour is present.
class StencilOperator {
 public:
  StencilOperator(GridPtr grid, std::vector<double> diffusion, std::vector<double> left,
                  std::vector<double> right, double shift)
      : grid_(std::move(grid)),
        diffusion_(std::move(diffusion)),
        left_(std::move(left)),
        right_(std::move(right)),
        shift_(shift) {
    const std::size_t n = grid_->size();
    const std::size_t nd = n * static_cast<std::size_t>(grid_->dim());
    if (diffusion_.size() != n || left_.size() != nd || right_.size() != nd) {
      throw std::invalid_argument("stencil coefficient arrays do not match the grid");
    }
    for (int k = 0; k < grid_->dim(); ++k) {
      inv_h2_[k] = 1.0 / (grid_->spacing(k) * grid_->spacing(k));
    }
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return diffusion_.size(); }
  double shift() const { return shift_; }
  double diffusion(std::size_t i) const { return diffusion_[i]; }
  double left(std::size_t i, int axis) const { return left_[i * grid_->dim() + axis]; }
  double right(std::size_t i, int axis) const { return right_[i * grid_->dim() + axis]; }

  /// Coefficient of the lower (side -1) or upper (side +1) neighbour.
  double neighbor_coefficient(std::size_t i, int axis, int side) const {
    return diffusion_[i] * inv_h2_[axis] + (side < 0 ? left(i, axis) : right(i, axis));
  }

  /// Diagonal entry of the matrix.
  double diagonal(std::size_t i) const {
    double d = -shift_;
    for (int k = 0; k < grid_->dim(); ++k) {
      d -= 2.0 * diffusion_[i] * inv_h2_[k] + left(i, k) + right(i, k);
    }
    return d;
  }

  void apply(std::span<const double> w, std::span<double> out) const {
    const Grid& g = *grid_;
    const int dim = g.dim();
    const std::size_t n = size();
    if (w.size() != n || out.size() != n) {
      throw std::invalid_argument("operator applied to a vector of the wrong length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w[i];
      double lap = 0.0;
      double adv = 0.0;
      for (int k = 0; k < dim; ++k) {
        const Neighbor lo = g.neighbor(i, k, -1);
        const Neighbor hi = g.neighbor(i, k, +1);
        const double wl = lo.is_unknown ? w[lo.index] : 0.0;
        const double wr = hi.is_unknown ? w[hi.index] : 0.0;
        lap += (wl - 2.0 * wi + wr) * inv_h2_[k];
        const std::size_t ik = i * dim + k;
        adv += left_[ik] * (wl - wi) + right_[ik] * (wr - wi);
      }
      out[i] = diffusion_[i] * lap + adv - shift_ * wi;
    }
  }

  std::vector<double> apply(std::span<const double> w) const {
    std::vector<double> out(size());
    apply(w, out);
    return out;
  }

  /// (a + b) / 2, coefficient-wise; exact in action since K is linear in its
  /// coefficients.
  static StencilOperator average(const StencilOperator& a, const StencilOperator& b) {
    if (a.grid_ != b.grid_) throw std::invalid_argument("averaging operators on different grids");
    auto mid = [](const std::vector<double>& x, const std::vector<double>& y) {
      std::vector<double> r(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) r[i] = 0.5 * (x[i] + y[i]);
      return r;
    };
    return StencilOperator(a.grid_, mid(a.diffusion_, b.diffusion_), mid(a.left_, b.left_),
                           mid(a.right_, b.right_), 0.5 * (a.shift_ + b.shift_));
  }

 private:
  GridPtr grid_;
  std::vector<double> diffusion_;
  std::vector<double> left_;
  std::vector<double> right_;
  double shift_;
  std::array<double, kMaxDim> inv_h2_{};
};

/// Frozen coefficients defining one linear operator L^kappa_{v,h}[U]: the
/// mobility diagonal M(U_i), velocity samples v(x_i, t), eps, kappa and the
/// time at which Dirichlet data is read.
class OperatorContext {
 public:
  OperatorContext(GridPtr grid, std::vector<double> mobility, std::vector<double> velocity,
                  double epsilon, double kappa, double time)
      : grid_(std::move(grid)),
        mobility_(std::move(mobility)),
        velocity_(std::move(velocity)),
        epsilon_(epsilon),
        kappa_(kappa),
        time_(time) {
    const std::size_t n = grid_->size();
    if (mobility_.size() != n || velocity_.size() != n * grid_->dim()) {
      throw std::invalid_argument("operator context arrays do not match the grid");
    }
    for (double m : mobility_) {
      if (!(m >= 0.0) || !std::isfinite(m)) throw std::domain_error("mobility must be >= 0");
    }
    for (double v : velocity_) {
      if (!std::isfinite(v)) throw std::domain_error("non-finite velocity sample");
    }
    if (!(kappa_ >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
  }

  /// Samples M(U) and v(., t) on X*.
  static OperatorContext build(const GridPtr& grid, std::span<const double> U,
                               const PhysicsSpec& physics, const VelocityField& velocity,
                               double t) {
    const std::size_t n = grid->size();
    if (U.size() != n) throw std::invalid_argument("state length does not match the grid");
    const int dim = grid->dim();
    std::vector<double> mob(n);
    std::vector<double> vel(n * dim);
    const auto nodes = grid->unknown_nodes();
    for (std::size_t i = 0; i < n; ++i) {
      mob[i] = physics.mobility_at(U[i]);
      const auto x = grid->coordinates(nodes[i]);
      const auto v = velocity(std::span<const double>(x.data(), dim), t);
      for (int k = 0; k < dim; ++k) vel[i * dim + k] = v[k];
    }
    return OperatorContext(grid, std::move(mob), std::move(vel), physics.epsilon, physics.kappa,
                           t);
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return mobility_.size(); }
  double epsilon() const { return epsilon_; }
  double kappa() const { return kappa_; }
  double time() const { return time_; }
  double mobility(std::size_t i) const { return mobility_[i]; }
  double velocity(std::size_t i, int axis) const { return velocity_[i * grid_->dim() + axis]; }

  /// Lambda_v A_v split into lower/upper weights |v|(1 + sign v)/(2h) and
  /// |v|(1 - sign v)/(2h) per node and axis.
  std::pair<std::vector<double>, std::vector<double>> upwind_weights() const {
    const int dim = grid_->dim();
    std::vector<double> left(velocity_.size());
    std::vector<double> right(velocity_.size());
    for (std::size_t i = 0; i < size(); ++i) {
      for (int k = 0; k < dim; ++k) {
        const double v = velocity_[i * dim + k];
        const double s = sign_of(v);
        const double scale = std::abs(v) / (2.0 * grid_->spacing(k));
        left[i * dim + k] = scale * (1.0 + s);
        right[i * dim + k] = scale * (1.0 - s);
      }
    }
    return {std::move(left), std::move(right)};
  }

  /// eps^2 Lambda_U D_h + Lambda_v A_v - kappa I
  StencilOperator stabilized() const {
    std::vector<double> diff(size());
    const double e2 = epsilon_ * epsilon_;
    for (std::size_t i = 0; i < size(); ++i) diff[i] = e2 * mobility_[i];
    auto [left, right] = upwind_weights();
    return StencilOperator(grid_, std::move(diff), std::move(left), std::move(right), kappa_);
  }

  StencilOperator upwind() const {
    auto [left, right] = upwind_weights();
    return StencilOperator(grid_, std::vector<double>(size(), 0.0), std::move(left),
                           std::move(right), 0.0);
  }

 private:
  GridPtr grid_;
  std::vector<double> mobility_;
  std::vector<double> velocity_;
  double epsilon_;
  double kappa_;
  double time_;
};

inline StencilOperator laplacian_operator(const GridPtr& grid) {
  const std::size_t n = grid->size();
  const std::size_t nd = n * grid->dim();
  return StencilOperator(grid, std::vector<double>(n, 1.0), std::vector<double>(nd, 0.0),
                         std::vector<double>(nd, 0.0), 0.0);
}

namespace detail {
inline void check_length(const OperatorContext& ctx, std::span<const double> w) {
  if (w.size() != ctx.size()) {
    throw std::invalid_argument("vector length " + std::to_string(w.size()) +
                                " does not match |X*| = " + std::to_string(ctx.size()));
  }
}
}  // namespace detail

/// D_h w with homogeneous boundary treatment.
inline std::vector<double> apply_laplacian(const OperatorContext& ctx, std::span<const double> w) {
  detail::check_length(ctx, w);
  return laplacian_operator(ctx.grid()).apply(w);
}

/// Lambda_v A_v w, the upwind approximation of -v . grad w.
inline std::vector<double> apply_upwind(const OperatorContext& ctx, std::span<const double> w) {
  detail::check_length(ctx, w);
  return ctx.upwind().apply(w);
}

inline std::vector<double> apply_stabilized(const OperatorContext& ctx,
                                            std::span<const double> w) {
  detail::check_length(ctx, w);
  return ctx.stabilized().apply(w);
}

/// Dirichlet contributions on X*: gd = G_D (unscaled, g/h^2 summed over
/// boundary neighbours) and gc = Lambda_v G_C (already weighted by |v|).
struct BoundaryLoad {
  std::vector<double> gd;
  std::vector<double> gc;
};

inline BoundaryLoad boundary_load(const OperatorContext& ctx) {
  const GridPtr& grid = ctx.grid();
  const std::size_t n = ctx.size();
  BoundaryLoad load{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (grid->bc_kind() != BoundaryKind::Dirichlet) return load;
  const int dim = grid->dim();
  const auto [left, right] = ctx.upwind_weights();
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      const double inv_h2 = 1.0 / (grid->spacing(k) * grid->spacing(k));
      for (int side : {-1, 1}) {
        const Neighbor nb = grid->neighbor(i, k, side);
        if (nb.is_unknown) continue;
        const double g = grid->boundary_value(nb.index, ctx.time());
        load.gd[i] += g * inv_h2;
        load.gc[i] += (side < 0 ? left[i * dim + k] : right[i * dim + k]) * g;
      }
    }
  }
  return load;
}

/// N~(U) = N(U) + eps^2 Lambda_U G_D + Lambda_v G_C, with the context built
/// from the same U.
inline std::vector<double> eval_N_tilde(const PhysicsSpec& spec, const OperatorContext& ctx,
                                        std::span<const double> U) {
  detail::check_length(ctx, U);
  std::vector<double> out(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) out[i] = eval_N(spec, U[i]);
  if (ctx.grid()->bc_kind() == BoundaryKind::Dirichlet) {
    const BoundaryLoad load = boundary_load(ctx);
    const double e2 = ctx.epsilon() * ctx.epsilon();
    for (std::size_t i = 0; i < U.size(); ++i) {
      out[i] += e2 * ctx.mobility(i) * load.gd[i] + load.gc[i];
    }
  }
  return out;
}

/// Coupling of an operator to Dirichlet data at time t: for each unknown, the
/// neighbour coefficients of `op` at boundary neighbours times g. Equals
/// eps^2 Lambda_U G_D + Lambda_v G_C when `op` is the stabilized operator of
/// the context.
inline std::vector<double> boundary_forcing(const StencilOperator& op, double t) {
  const Grid& g = *op.grid();
  std::vector<double> out(op.size(), 0.0);
  if (g.bc_kind() != BoundaryKind::Dirichlet) return out;
  for (std::size_t i = 0; i < op.size(); ++i) {
    for (int k = 0; k < g.dim(); ++k) {
      for (int side : {-1, 1}) {
        const Neighbor nb = g.neighbor(i, k, side);
        if (nb.is_unknown) continue;
        out[i] += op.neighbor_coefficient(i, k, side) * g.boundary_value(nb.index, t);
      }
    }
  }
  return out;
}

inline constexpr std::size_t kDenseCap = 4096;

/// Explicit matrix of a stencil operator; test oracle only.
inline Eigen::MatrixXd assemble_dense(const StencilOperator& op, std::size_t cap = kDenseCap) {
  const std::size_t n = op.size();
  if (n > cap) {
    throw std::length_error("dense assembly of " + std::to_string(n) +
                            " unknowns exceeds the cap of " + std::to_string(cap));
  }
  const Grid& g = *op.grid();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    A(r, r) += op.diagonal(i);
    for (int k = 0; k < g.dim(); ++k) {
      for (int side : {-1, 1}) {
        const Neighbor nb = g.neighbor(i, k, side);
        if (nb.is_unknown) {
          A(r, static_cast<Eigen::Index>(nb.index)) += op.neighbor_coefficient(i, k, side);
        }
      }
    }
  }
  return A;
}

inline Eigen::MatrixXd assemble_dense(const OperatorContext& ctx, std::size_t cap = kDenseCap) {
  return assemble_dense(ctx.stabilized(), cap);
}

struct MonotoneReport {
  bool pass = true;
  std::optional<std::size_t> node;  // first offending unknown
  std::string reason;
};

/// Discrete maximum property of the unshifted part: off-diagonal coefficients
/// >= 0, diagonal <= 0 and row sums <= 0 (boundary couplings included).
inline MonotoneReport check_monotone_stencil(const StencilOperator& op) {
  const Grid& g = *op.grid();
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double diag = op.diagonal(i) + op.shift();
    double row = diag;
    double scale = std::abs(diag);
    for (int k = 0; k < g.dim(); ++k) {
      for (int side : {-1, 1}) {
        const double c = op.neighbor_coefficient(i, k, side);
        if (c < 0.0) {
          return {false, i,
                  "negative off-diagonal coefficient " + std::to_string(c) + " on axis " +
                      std::to_string(k)};
        }
        row += c;
        scale += std::abs(c);
      }
    }
    if (diag > 0.0) return {false, i, "positive diagonal " + std::to_string(diag)};
    if (row > 1e-12 * scale) return {false, i, "positive row sum " + std::to_string(row)};
  }
  return {};
}

inline MonotoneReport check_monotone_stencil(const OperatorContext& ctx) {
  return check_monotone_stencil(ctx.stabilized());
}

}  // namespace mbpetd

#endif  // MBPETD_OPERATORS_HPP
