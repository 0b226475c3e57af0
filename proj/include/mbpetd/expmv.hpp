// phi-functions phi_0(s) = e^s, phi_1(s) = (e^s - 1)/s, phi_2(s) = (e^s - s - 1)/s^2:
// scalar evaluation, dense matrix functions (scaling and squaring) and
// matrix-free Krylov actions phi_k(tau A) b.
#ifndef MBPETD_EXPMV_HPP
#define MBPETD_EXPMV_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbpetd {

/// Anything that maps a vector of length size() to another one.
template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.size() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

/// Dense matrix wrapped as a LinearOperator.
class DenseOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd A) : A_(std::move(A)) {
    if (A_.rows() != A_.cols()) throw std::invalid_argument("dense operator must be square");
  }
  std::size_t size() const { return static_cast<std::size_t>(A_.rows()); }
  void apply(std::span<const double> x, std::span<double> y) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), A_.cols());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), A_.rows());
    yv.noalias() = A_ * xv;
  }
  const Eigen::MatrixXd& matrix() const { return A_; }

 private:
  Eigen::MatrixXd A_;
};

inline double phi_scalar(int k, double s) {
  if (k < 0 || k > 2) throw std::invalid_argument("phi index must be 0, 1 or 2");
  if (k == 0) return std::exp(s);
  if (std::abs(s) < 0.5) {
    // phi_k(s) = sum_j s^j / (j + k)!
    double term = 1.0;
    for (int j = 1; j <= k; ++j) term /= j;
    double sum = term;
    for (int j = 1; j < 25; ++j) {
      term *= s / (j + k);
      sum += term;
    }
    return sum;
  }
  const double em1 = std::expm1(s);
  if (k == 1) return em1 / s;
  return (em1 - s) / (s * s);
}

inline constexpr std::size_t kDenseExpmCap = 4096;

/// e^A by scaling and squaring with a truncated Taylor series; the scaled
/// matrix has infinity norm <= 1/2.
inline Eigen::MatrixXd expm_dense(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("expm of a non-square matrix");
  if (static_cast<std::size_t>(A.rows()) > kDenseExpmCap + 8) {
    throw std::length_error("dense exponential above the size cap");
  }
  if (!A.allFinite()) throw std::domain_error("expm of a matrix with non-finite entries");
  const Eigen::Index n = A.rows();
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd X = A / std::ldexp(1.0, squarings);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int j = 1; j <= 40; ++j) {
    term = (term * X) / static_cast<double>(j);
    sum += term;
    const double tn = term.cwiseAbs().rowwise().sum().maxCoeff();
    if (tn <= 1e-17 * sum.cwiseAbs().rowwise().sum().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// phi_k(A) read off the exponential of the block matrix
/// [[A, I, 0], [0, 0, I], [0, 0, 0]] (k + 1 blocks).
inline Eigen::MatrixXd phi_dense(int k, const Eigen::MatrixXd& A) {
  if (k < 0 || k > 2) throw std::invalid_argument("phi index must be 0, 1 or 2");
  if (A.rows() != A.cols()) throw std::invalid_argument("phi of a non-square matrix");
  const Eigen::Index n = A.rows();
  if (k == 0) return expm_dense(A);
  const Eigen::Index N = n * (k + 1);
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(N, N);
  big.topLeftCorner(n, n) = A;
  for (int b = 0; b < k; ++b) {
    big.block(b * n, (b + 1) * n, n, n) = Eigen::MatrixXd::Identity(n, n);
  }
  const Eigen::MatrixXd E = expm_dense(big);
  return E.block(0, k * n, n, n);
}

struct PhiVectors {
  Eigen::VectorXd phi0;
  Eigen::VectorXd phi1;
  Eigen::VectorXd phi2;
};

/// phi_0(A) b, phi_1(A) b, phi_2(A) b from one exponential of the (n+2)
/// matrix [[A, b, 0], [0, 0, 1], [0, 0, 0]]. Dense oracle for vectors.
inline PhiVectors phi_dense_vectors(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + 2, n + 2);
  big.topLeftCorner(n, n) = A;
  big.block(0, n, n, 1) = b;
  big(n, n + 1) = 1.0;
  const Eigen::MatrixXd E = expm_dense(big);
  return {E.topLeftCorner(n, n) * b, E.block(0, n, n, 1), E.block(0, n + 1, n, 1)};
}

struct KrylovOptions {
  double tol = 1e-10;       // relative to the 2-norm of the input
  int max_dim = 100;        // Krylov dimension before sub-stepping
  int max_substeps = 100000;
};

struct PhiActionRequest {
  int k = 0;
  double tau = 1.0;
  std::span<const double> b;
  KrylovOptions options{};
};

struct PhiActionResult {
  std::vector<double> y;
  double est_error = 0.0;
  int krylov_dim = 0;          // largest dimension used
  std::size_t matvec_count = 0;
  int substeps = 0;            // 0 when the direct projection converged
};

class KrylovError : public std::runtime_error {
 public:
  KrylovError(const std::string& what, double est_error)
      : std::runtime_error(what), est_error_(est_error) {}
  double est_error() const { return est_error_; }

 private:
  double est_error_;
};

namespace detail {

inline double norm2(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())).norm();
}

/// Arnoldi process with classical Gram-Schmidt and a second pass when the
/// largest remaining projection exceeds 1e-8 of the new vector's norm.
class Arnoldi {
 public:
  Arnoldi(std::size_t n, int max_dim)
      : V_(static_cast<Eigen::Index>(n), max_dim + 1),
        H_(Eigen::MatrixXd::Zero(max_dim + 1, max_dim)),
        max_dim_(max_dim) {}

  void start(std::span<const double> v, double beta) {
    m_ = 0;
    breakdown_ = false;
    H_.setZero();
    V_.col(0) = Eigen::Map<const Eigen::VectorXd>(v.data(), V_.rows()) / beta;
  }

  template <class Apply>
  void extend(Apply&& apply) {
    const Eigen::Index j = m_;
    Eigen::VectorXd w(V_.rows());
    apply(std::span<const double>(V_.col(j).data(), static_cast<std::size_t>(V_.rows())),
          std::span<double>(w.data(), static_cast<std::size_t>(w.size())));
    const auto basis = V_.leftCols(j + 1);
    Eigen::VectorXd h = basis.transpose() * w;
    w.noalias() -= basis * h;
    Eigen::VectorXd c = basis.transpose() * w;
    double wn = w.norm();
    if (c.cwiseAbs().maxCoeff() > 1e-8 * wn) {
      w.noalias() -= basis * c;
      h += c;
      wn = w.norm();
    }
    H_.col(j).head(j + 1) = h;
    H_(j + 1, j) = wn;
    scale_ = std::max(scale_, h.cwiseAbs().maxCoeff());
    scale_ = std::max(scale_, wn);
    ++m_;
    if (wn <= 1e-13 * scale_ || wn == 0.0) {
      breakdown_ = true;
    } else {
      V_.col(j + 1) = w / wn;
    }
  }

  int dim() const { return m_; }
  bool breakdown() const { return breakdown_; }
  bool full() const { return m_ >= max_dim_; }
  double subdiagonal() const { return H_(m_, m_ - 1); }
  Eigen::MatrixXd hessenberg() const { return H_.topLeftCorner(m_, m_); }
  auto basis() const { return V_.leftCols(m_); }

 private:
  Eigen::MatrixXd V_;
  Eigen::MatrixXd H_;
  int max_dim_;
  int m_ = 0;
  bool breakdown_ = false;
  double scale_ = 0.0;
};

/// exp of [[S, e1 0 .. 0], [0, J]] with p augmented rows; column 0 gives
/// e^S e1 and column m + i - 1 gives phi_i(S) e1 for i = 1..p.
inline Eigen::MatrixXd phi_columns(const Eigen::MatrixXd& S, int p) {
  const Eigen::Index m = S.rows();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(m + p, m + p);
  aug.topLeftCorner(m, m) = S;
  aug(0, m) = 1.0;
  for (int i = 0; i + 1 < p; ++i) aug(m + i, m + i + 1) = 1.0;
  const Eigen::MatrixXd E = expm_dense(aug);
  Eigen::MatrixXd cols(m, p + 1);
  cols.col(0) = E.col(0).head(m);
  for (int i = 1; i <= p; ++i) cols.col(i) = E.col(m + i - 1).head(m);
  return cols;
}

inline bool is_checkpoint(int m) {
  if (m <= 4) return true;
  if (m < 20) return m % 2 == 0;
  if (m < 50) return m % 5 == 0;
  return m % 10 == 0;
}

/// exp(B) x0 for a LinearOperator-like callable B over unit time, split into
/// sub-steps whenever the Krylov space of max_dim does not resolve the
/// remaining interval. Local error per sub-step of length s is held below
/// tol * |x0| * s.
template <class Apply>
PhiActionResult expv_substepped(Apply&& apply, std::size_t n, std::vector<double> x,
                                const KrylovOptions& opt) {
  PhiActionResult res;
  const double beta0 = norm2(x);
  if (beta0 == 0.0) {
    res.y = std::move(x);
    return res;
  }
  Arnoldi arnoldi(n, opt.max_dim);
  double t = 0.0;
  double s_next = 1.0;
  while (t < 1.0) {
    if (res.substeps >= opt.max_substeps) {
      throw KrylovError("Krylov sub-stepping exceeded the step limit", res.est_error);
    }
    const double beta = norm2(x);
    if (beta == 0.0) break;
    arnoldi.start(x, beta);
    double s = std::min(s_next, 1.0 - t);
    double err = 0.0;
    Eigen::VectorXd coef;
    bool accepted = false;
    auto estimate = [&](double step, const Eigen::MatrixXd& Hm) {
      const Eigen::MatrixXd cols = phi_columns(step * Hm, 1);
      const Eigen::Index last = Hm.rows() - 1;
      const double h = step * arnoldi.subdiagonal();
      const double e = arnoldi.breakdown()
                           ? 0.0
                           : beta * h * std::max(std::abs(cols(last, 0)), std::abs(cols(last, 1)));
      return std::pair<double, Eigen::VectorXd>(e, beta * cols.col(0));
    };
    while (!accepted) {
      arnoldi.extend(apply);
      ++res.matvec_count;
      const int m = arnoldi.dim();
      if (!(is_checkpoint(m) || arnoldi.breakdown() || arnoldi.full())) continue;
      const Eigen::MatrixXd Hm = arnoldi.hessenberg();
      auto [e, c] = estimate(s, Hm);
      if (e <= opt.tol * beta0 * s) {
        err = e;
        coef = std::move(c);
        accepted = true;
      } else if (arnoldi.full()) {
        while (!accepted) {
          s *= 0.5;
          if (s < 1e-14) throw KrylovError("Krylov step size underflow", res.est_error + e);
          std::tie(e, c) = estimate(s, Hm);
          if (e <= opt.tol * beta0 * s) {
            err = e;
            coef = std::move(c);
            accepted = true;
          }
        }
      }
    }
    const int m = arnoldi.dim();
    res.krylov_dim = std::max(res.krylov_dim, m);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n));
    xv.noalias() = arnoldi.basis() * coef;
    t = (1.0 - t - s <= 1e-15) ? 1.0 : t + s;
    res.est_error += err;
    ++res.substeps;
    s_next = m < opt.max_dim ? 2.0 * s : s;
  }
  res.y = std::move(x);
  return res;
}

}  // namespace detail

/// phi_0(tau A) v + sum_j phi_j(tau A) w_j (j = 1..p) as the exponential of
/// the augmented operator [[tau A, W / eta], [0, J]] applied to [v; eta e_p],
/// W = [w_p, ..., w_1]. One Krylov process serves the whole combination.
/// An empty v means zero.
template <LinearOperator Op>
PhiActionResult phi_combination(const Op& op, double tau, std::span<const double> v,
                                const std::vector<std::span<const double>>& w,
                                const KrylovOptions& opt = {}) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const std::size_t n = op.size();
  if (!v.empty() && v.size() != n) throw std::invalid_argument("v has the wrong length");
  for (const auto& wj : w) {
    if (wj.size() != n) throw std::invalid_argument("w_j has the wrong length");
  }
  double eta = 0.0;
  for (const auto& wj : w) eta = std::max(eta, detail::norm2(wj));
  const std::size_t p = eta > 0.0 ? w.size() : 0;
  std::vector<double> start(n + p, 0.0);
  if (!v.empty()) std::copy(v.begin(), v.end(), start.begin());
  if (p > 0) start[n + p - 1] = eta;
  std::size_t matvecs = 0;
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    op.apply(x.first(n), y.first(n));
    ++matvecs;
    for (std::size_t i = 0; i < n; ++i) y[i] *= tau;
    for (std::size_t c = 0; c < p; ++c) {
      // augmented column c holds w_{p - c}
      const double a = x[n + c] / eta;
      if (a == 0.0) continue;
      const auto& wj = w[p - c - 1];
      for (std::size_t i = 0; i < n; ++i) y[i] += a * wj[i];
    }
    for (std::size_t c = 0; c + 1 < p; ++c) y[n + c] = x[n + c + 1];
    if (p > 0) y[n + p - 1] = 0.0;
  };
  PhiActionResult res = detail::expv_substepped(apply, n + p, std::move(start), opt);
  res.y.resize(n);
  res.matvec_count = matvecs;
  return res;
}

/// phi_k(tau A) b. Arnoldi on A from b; y = |b| V_m phi_k(tau H_m) e_1, the
/// dimension grown until the error estimate
///   |b| tau h_{m+1,m} max(|e_m' phi_k(tau H_m) e_1|, |e_m' phi_{k+1}(tau H_m) e_1|)
/// falls below tol |b|. If max_dim is reached first, falls back to the
/// sub-stepped augmented exponential.
template <LinearOperator Op>
PhiActionResult phi_action(const Op& op, const PhiActionRequest& req) {
  const int k = req.k;
  if (k < 0 || k > 2) throw std::invalid_argument("phi index must be 0, 1 or 2");
  if (!(req.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(req.options.tol > 0.0 && req.options.tol <= 1e-2)) {
    throw std::invalid_argument("Krylov tolerance must lie in (0, 1e-2]");
  }
  const std::size_t n = op.size();
  if (req.b.size() != n) throw std::invalid_argument("b has the wrong length");
  for (double x : req.b) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite entry in b");
  }
  PhiActionResult res;
  const double beta = detail::norm2(req.b);
  if (beta == 0.0) {
    res.y.assign(n, 0.0);
    return res;
  }
  const KrylovOptions& opt = req.options;
  detail::Arnoldi arnoldi(n, opt.max_dim);
  arnoldi.start(req.b, beta);
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    op.apply(x, y);
    ++res.matvec_count;
  };
  while (!arnoldi.full()) {
    arnoldi.extend(apply);
    const int m = arnoldi.dim();
    if (!(detail::is_checkpoint(m) || arnoldi.breakdown() || arnoldi.full())) continue;
    const Eigen::MatrixXd S = req.tau * arnoldi.hessenberg();
    const Eigen::MatrixXd cols = detail::phi_columns(S, k + 1);
    const double h = req.tau * arnoldi.subdiagonal();
    const double est =
        arnoldi.breakdown()
            ? 0.0
            : beta * h * std::max(std::abs(cols(m - 1, k)), std::abs(cols(m - 1, k + 1)));
    if (est <= opt.tol * beta) {
      res.y.resize(n);
      Eigen::Map<Eigen::VectorXd> y(res.y.data(), static_cast<Eigen::Index>(n));
      y.noalias() = arnoldi.basis() * (beta * cols.col(k));
      res.est_error = est;
      res.krylov_dim = m;
      return res;
    }
    if (arnoldi.breakdown()) break;
  }
  // Direct projection did not converge: sub-step the augmented exponential.
  std::vector<std::span<const double>> w;
  std::vector<double> zeros;
  if (k > 0) {
    zeros.assign(n, 0.0);
    for (int j = 1; j <= k; ++j) w.push_back(j == k ? req.b : std::span<const double>(zeros));
  }
  const std::size_t direct = res.matvec_count;
  PhiActionResult sub = phi_combination(op, req.tau, k == 0 ? req.b : std::span<const double>{},
                                        w, opt);
  sub.matvec_count += direct;
  sub.krylov_dim = std::max(sub.krylov_dim, opt.max_dim);
  if (sub.est_error > opt.tol * beta * (1.0 + 1e-12)) {
    throw KrylovError("phi action did not reach the requested tolerance", sub.est_error);
  }
  return sub;
}

}  // namespace mbpetd

#endif  // MBPETD_EXPMV_HPP
