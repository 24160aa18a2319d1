#pragma once

/// Seeded random quadratic minimax test instances on unit boxes, with exact
/// smoothness/curvature constants, adapters into the solver-facing problem
/// types, a hyper-objective oracle Φ(x) = max_y {f(x,y) : d(x,y) ≤ 0, y ∈ Y},
/// and JSON persistence.
///
/// Instance family.  f(x,y) = xᵀAx + xᵀBy + yᵀCy + cᵀx + dᵀy over
/// X = [−1,1]ⁿ, Y = [−1,1]ᵐ, with A = U·diag(a)·Uᵀ (U orthonormal, a entrywise
/// Gaussian) and C = −V·diag(e)·Vᵀ (e entrywise uniform in a positive range),
/// so f(x,·) is strongly concave with modulus 2·min(e) while f(·,y) is an
/// indefinite quadratic.  Constrained instances add affine maps
/// c(x) = Âx − b̂ and d(x,y) = Ãx + B̃y − b̃, where b̂ is constructed so that a
/// designated point x_nf is nearly feasible: ‖[c(x_nf)]₊‖ = 0.1 exactly.
///
/// Determinism.  Every instance is a pure function of (dims, seed).  The draw
/// order is part of the format: A (square Gaussian block row-major, then its
/// diagonal), C (same), B, c, d, then for constrained instances Â, Ã, B̃, b̃
/// (each row-major), x_nf, and the slack direction v.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <json.hpp>

#include "minimax_al/alm.hpp"
#include "minimax_al/core.hpp"
#include "minimax_al/foam.hpp"
#include "minimax_al/ppa.hpp"

namespace minimax_al {

// ---------------------------------------------------------------------------
// Deterministic random stream
// ---------------------------------------------------------------------------

/// Deterministic random stream with a fixed draw discipline so a seed pins
/// every instance bit-for-bit across platforms:
///   * uniform():  one raw 64-bit draw, mapped to [0,1) as (x >> 11)·2⁻⁵³;
///   * gaussian(): Box–Muller *without caching* — exactly two raw draws per
///                 normal, with u₁ = ((x >> 11) + 1)·2⁻⁵³ ∈ (0,1].
struct Rng {
  std::mt19937_64 g;

  explicit Rng(std::uint64_t seed) : g(seed) {}

  double uniform() { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

  /// Uniform draw from [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal; every call consumes exactly two raw draws.
  double gaussian() {
    const double u1 = (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Normal with mean 0 and standard deviation sd.
  double gaussian(double sd) { return sd * gaussian(); }
};

namespace detail {

/// Row-major Gaussian fill: entries drawn (0,0), (0,1), …, (1,0), … — the
/// order is part of the instance format.
inline Mat fill_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sd) {
  Mat M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = rng.gaussian(sd);
  return M;
}

inline Vec fill_gaussian_vec(Rng& rng, Eigen::Index n, double sd) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.gaussian(sd);
  return v;
}

/// Column-wise Gram–Schmidt with one reorthogonalization pass: deterministic
/// and orthonormal to machine precision for generic (random) inputs.
inline Mat orthonormalize_columns(Mat G) {
  for (Eigen::Index j = 0; j < G.cols(); ++j) {
    Vec v = G.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i) v -= G.col(i).dot(v) * G.col(i);
    const double nv = v.norm();
    require(nv > 1e-12, "orthonormalize_columns: rank-deficient draw");
    G.col(j) = v / nv;
  }
  return G;
}

/// Largest |eigenvalue| of a symmetric matrix.
inline double sym_spectral_radius(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, "sym_spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Spectral norm ‖M‖₂ (largest singular value) for a general matrix.
inline double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  const Mat S = M.cols() <= M.rows() ? Mat(M.transpose() * M) : Mat(M * M.transpose());
  const Mat Ssym = 0.5 * (S + Mat(S.transpose()));
  return std::sqrt(std::max(0.0, sym_spectral_radius(Ssym)));
}

/// Draw U·diag(e)·Uᵀ with U orthonormalized from a standard-Gaussian square
/// block (row-major) and e drawn entrywise by `edraw` afterwards.  Returns the
/// exactly symmetric matrix together with e.
template <class EDraw>
std::pair<Mat, Vec> random_sym_factor(Rng& rng, int dim, EDraw edraw) {
  const Mat U = orthonormalize_columns(fill_gaussian(rng, dim, dim, 1.0));
  Vec e(dim);
  for (int i = 0; i < dim; ++i) e[i] = edraw(rng);
  const Mat S = U * e.asDiagonal() * U.transpose();
  return {Mat(0.5 * (S + Mat(S.transpose()))), e};
}

/// Maximize the piecewise-linear concave margin s(x) = min_i(rhs_i − rows_i·x)
/// over a box by projected supergradient ascent with diminishing steps.
/// Returns the best exactly-evaluated margin encountered, so a positive return
/// value is a certificate.
inline double best_margin(const Mat& rows, const Vec& rhs, const Box& box, Vec x,
                          int iters = 4000) {
  require(rows.rows() == rhs.size() && rows.cols() == box.dim(),
          "best_margin: dimension mismatch");
  x = box.clamp(x);
  double grad_scale = 1e-12;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    grad_scale = std::max(grad_scale, rows.row(i).norm());
  const double diam = box_diameter(box);
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < iters; ++t) {
    const Vec r = rhs - rows * x;
    Eigen::Index imin = 0;
    best = std::max(best, r.minCoeff(&imin));
    const double step = diam / (grad_scale * std::sqrt(t + 1.0));
    x = box.clamp(x - step * rows.row(imin).transpose());
  }
  best = std::max(best, (rhs - rows * x).minCoeff());
  return best;
}

/// Sum of |entries| — the interval-arithmetic bound of a bilinear/quadratic
/// form over unit boxes.
inline double abs_sum(const Mat& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().sum(); }
inline double abs_sum(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().sum(); }

/// Euclidean projection onto the ℓ1 ball of radius r (sort-based).
inline Vec project_l1_ball(Vec z, double r) {
  require(r >= 0, "project_l1_ball: negative radius");
  if (z.cwiseAbs().sum() <= r) return z;
  std::vector<double> mag(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) mag[i] = std::abs(z[i]);
  std::sort(mag.begin(), mag.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    cum += mag[k];
    const double t = (cum - r) / static_cast<double>(k + 1);
    if (k + 1 == mag.size() || t >= mag[k + 1]) {
      tau = t;
      break;
    }
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = std::max(std::abs(z[i]) - tau, 0.0);
    z[i] = z[i] >= 0 ? s : -s;
  }
  return z;
}

/// Affine response policy ŷ(x) = y0 + Wx certifying a uniform margin for an
/// affine map over unit boxes: for every x ∈ [−1,1]ⁿ the policy point stays in
/// [−1,1]ᵐ (per-row budget |y0_k| + Σ_j|W_kj| ≤ 1) and satisfies
///   rows_A·x + rows_B·ŷ(x) − rhs ≤ −margin  componentwise,
/// where the x-dependence is absorbed by the interval bound Σ_j|A + B·W|_ij.
/// The certified margin is concave in (y0, W), so projected supergradient
/// ascent reaches the best affine certificate; `margin` is exact at the
/// returned policy (a positive value is a proof).
struct AffineMargin {
  double margin = -std::numeric_limits<double>::infinity();
  Vec y0;
  Mat W;
};

inline double affine_margin_value(const Mat& rows_A, const Mat& rows_B, const Vec& rhs,
                                  const Vec& y0, const Mat& W) {
  const Mat M = rows_A + rows_B * W;
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rhs.size(); ++i)
    worst = std::min(worst, rhs[i] - rows_B.row(i).dot(y0) - M.row(i).cwiseAbs().sum());
  return worst;
}

inline AffineMargin best_affine_margin(const Mat& rows_A, const Mat& rows_B,
                                       const Vec& rhs, int iters = 20000) {
  const Eigen::Index n = rows_A.cols(), m = rows_B.cols();
  require(rows_A.rows() == rhs.size() && rows_B.rows() == rhs.size(),
          "best_affine_margin: dimension mismatch");
  AffineMargin out;
  out.y0 = Vec::Zero(m);
  out.W = Mat::Zero(m, n);
  Vec y0 = out.y0;
  Mat W = out.W;
  double grad_scale = 1e-12;
  for (Eigen::Index i = 0; i < rows_B.rows(); ++i)
    grad_scale = std::max(grad_scale,
                          rows_B.row(i).norm() * std::sqrt(static_cast<double>(n) + 1.0));
  const double diam = 2.0 * std::sqrt(static_cast<double>(m));
  for (int t = 0; t < iters; ++t) {
    const Mat M = rows_A + rows_B * W;
    Eigen::Index imin = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rhs.size(); ++i) {
      const double vi = rhs[i] - rows_B.row(i).dot(y0) - M.row(i).cwiseAbs().sum();
      if (vi < worst) {
        worst = vi;
        imin = i;
      }
    }
    if (worst > out.margin) {
      out.margin = worst;
      out.y0 = y0;
      out.W = W;
    }
    const double step = diam / (grad_scale * std::sqrt(t + 1.0));
    y0 -= step * rows_B.row(imin).transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sgn = M(imin, j) >= 0 ? 1.0 : -1.0;
      W.col(j) -= (step * sgn) * rows_B.row(imin).transpose();
    }
    // re-impose ŷ(x) ∈ [−1,1]ᵐ for all x: per-row ℓ1 budget on (y0_k, W_k·)
    for (Eigen::Index k = 0; k < m; ++k) {
      Vec row(n + 1);
      row[0] = y0[k];
      row.tail(n) = W.row(k).transpose();
      row = project_l1_ball(std::move(row), 1.0);
      y0[k] = row[0];
      W.row(k) = row.tail(n).transpose();
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instance type
// ---------------------------------------------------------------------------

/// Constants shipped with every instance.  Exact where a closed form exists
/// (spectral norms, curvature moduli), interval-arithmetic upper/lower bounds
/// for the box suprema, and certified-but-conservative estimates for the
/// constraint-qualification margins (NaN when no positive margin was found).
struct InstanceConstants {
  double L_grad_f = 0;  ///< ‖∇²f‖₂ = ‖[[2A, B], [Bᵀ, 2C]]‖₂
  double sigma = 0;     ///< strong-concavity modulus of f(x,·): 2·min(e)
  double L_c = 0;       ///< ‖Â‖₂ (0 when unconstrained)
  double L_grad_c = 0;  ///< 0: affine map
  double c_hi = 0;      ///< sup over X of ‖c(x)‖ (interval bound)
  double L_d = 0;       ///< ‖[Ã B̃]‖₂
  double L_grad_d = 0;  ///< 0: affine map
  double d_hi = 0;      ///< sup over X×Y of ‖d(x,y)‖ (interval bound)
  double L_F = 0;       ///< Lipschitz bound on f(·,y) over the boxes
  double Delta = 0;     ///< F_hi − F_low
  double F_hi = 0;      ///< sup of f over the boxes (interval bound)
  double F_low = 0;     ///< inf of f over the boxes (interval bound)
  double H_low = 0;     ///< inf over the boxes of the unconstrained objective
  double delta_c = std::numeric_limits<double>::quiet_NaN();  ///< x-margin slope
  double delta_d = std::numeric_limits<double>::quiet_NaN();  ///< y-Slater margin
  double theta = std::numeric_limits<double>::quiet_NaN();    ///< near-active radius
};

/// A generated quadratic minimax instance.  `c_lin`/`d_lin` are the linear
/// terms of f (the names c and d belong to the constraint maps).
struct QuadraticInstance {
  bool constrained = false;
  int n = 0, m = 0;    ///< primal/dual dimensions
  int nt = 0, mt = 0;  ///< constraint counts (0 when unconstrained)
  std::uint64_t seed = 0;
  Mat A, B, C;
  Vec c_lin, d_lin;
  Mat Ahat, Atil, Btil;  ///< empty when unconstrained
  Vec bhat, btil, x_nf;
  InstanceConstants consts;

  Box x_box() const { return Box::centered(n, 1.0); }
  Box y_box() const { return Box::centered(m, 1.0); }

  double f_value(const Vec& x, const Vec& y) const {
    return x.dot(A * x) + x.dot(B * y) + y.dot(C * y) + c_lin.dot(x) + d_lin.dot(y);
  }
  Vec f_grad_x(const Vec& x, const Vec& y) const { return 2.0 * (A * x) + B * y + c_lin; }
  Vec f_grad_y(const Vec& x, const Vec& y) const {
    return B.transpose() * x + 2.0 * (C * y) + d_lin;
  }

  Vec c_value(const Vec& x) const { return Ahat * x - bhat; }
  Vec d_value(const Vec& x, const Vec& y) const { return Atil * x + Btil * y - btil; }

  /// Canonical identifier, also used as the file stem and the run id:
  /// "unconstrained_n20_m20_s3" / "constrained_n20_m40_nt2_mt4_s11".
  std::string id() const {
    std::ostringstream os;
    if (constrained)
      os << "constrained_n" << n << "_m" << m << "_nt" << nt << "_mt" << mt << "_s" << seed;
    else
      os << "unconstrained_n" << n << "_m" << m << "_s" << seed;
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace detail {

/// Fills the shared quadratic part (A, C, B, c, d) and the constants that only
/// depend on it.  `c_diag_lo/hi` is the uniform range for the diagonal of −C.
inline void gen_quadratic_part(QuadraticInstance& q, Rng& rng, double c_diag_lo,
                               double c_diag_hi) {
  auto [A, a_diag] = random_sym_factor(rng, q.n, [](Rng& r) { return r.gaussian(0.1); });
  auto [Cpos, e_diag] = random_sym_factor(
      rng, q.m, [=](Rng& r) { return r.uniform(c_diag_lo, c_diag_hi); });
  q.A = std::move(A);
  q.C = -Cpos;
  q.B = fill_gaussian(rng, q.n, q.m, 0.1);
  q.c_lin = fill_gaussian_vec(rng, q.n, 0.1);
  q.d_lin = fill_gaussian_vec(rng, q.m, 0.1);

  Mat H(q.n + q.m, q.n + q.m);
  H.topLeftCorner(q.n, q.n) = 2.0 * q.A;
  H.topRightCorner(q.n, q.m) = q.B;
  H.bottomLeftCorner(q.m, q.n) = q.B.transpose();
  H.bottomRightCorner(q.m, q.m) = 2.0 * q.C;
  q.consts.L_grad_f = sym_spectral_radius(H) * (1.0 + 1e-12);
  q.consts.sigma = 2.0 * e_diag.minCoeff();

  // Interval bounds over the unit boxes: |xᵀMy| ≤ Σ|M_ij| etc.
  Vec grad_x_bound(q.n);
  for (int i = 0; i < q.n; ++i)
    grad_x_bound[i] = 2.0 * q.A.row(i).cwiseAbs().sum() + q.B.row(i).cwiseAbs().sum() +
                      std::abs(q.c_lin[i]);
  q.consts.L_F = grad_x_bound.norm();
  q.consts.F_hi = abs_sum(q.A) + abs_sum(q.B) + abs_sum(q.C) + abs_sum(q.c_lin) +
                  abs_sum(q.d_lin);
  q.consts.F_low = -q.consts.F_hi;
  q.consts.Delta = q.consts.F_hi - q.consts.F_low;
  q.consts.H_low = q.consts.F_low;
}

}  // namespace detail

/// Unconstrained instance: nonconvex–strongly-concave f on unit boxes, with
/// the diagonal of −C drawn from [2, 3] so σ ∈ [4, 6].
inline QuadraticInstance gen_unconstrained(int n, int m, std::uint64_t seed) {
  detail::require(n > 0 && m > 0, "gen_unconstrained: dimensions must be positive");
  QuadraticInstance q;
  q.constrained = false;
  q.n = n;
  q.m = m;
  q.seed = seed;
  Rng rng(seed);
  detail::gen_quadratic_part(q, rng, 2.0, 3.0);
  return q;
}

/// Constrained instance: the quadratic part with the diagonal of −C drawn from
/// [10, 11], plus affine maps c(x) = Âx − b̂ (nt rows) and
/// d(x,y) = Ãx + B̃y − b̃ (mt rows).  b̂ is constructed from a designated point
/// x_nf so that c(x_nf) = v ≥ 0 with ‖v‖ = 0.1 exactly (x_nf is 0.1-nearly
/// feasible); all other entries are Gaussian with standard deviation 0.1.
inline QuadraticInstance gen_constrained(int n, int m, int nt, int mt, std::uint64_t seed) {
  detail::require(n > 0 && m > 0 && nt > 0 && mt > 0,
                  "gen_constrained: dimensions must be positive");
  QuadraticInstance q;
  q.constrained = true;
  q.n = n;
  q.m = m;
  q.nt = nt;
  q.mt = mt;
  q.seed = seed;
  Rng rng(seed);
  detail::gen_quadratic_part(q, rng, 10.0, 11.0);

  q.Ahat = detail::fill_gaussian(rng, nt, n, 0.1);
  q.Atil = detail::fill_gaussian(rng, mt, n, 0.1);
  q.Btil = detail::fill_gaussian(rng, mt, m, 0.1);
  q.btil = detail::fill_gaussian_vec(rng, mt, 0.1);
  q.x_nf = q.x_box().clamp(detail::fill_gaussian_vec(rng, n, 0.1));
  Vec v(nt);
  for (int i = 0; i < nt; ++i) v[i] = rng.uniform();
  const double vn = v.norm();
  detail::require(vn > 0, "gen_constrained: degenerate slack draw");
  v *= 0.1 / vn;
  q.bhat = q.Ahat * q.x_nf - v;

  q.consts.L_c = detail::spectral_norm(q.Ahat);
  q.consts.L_grad_c = 0.0;
  Mat AtBt(mt, n + m);
  AtBt.leftCols(n) = q.Atil;
  AtBt.rightCols(m) = q.Btil;
  q.consts.L_d = detail::spectral_norm(AtBt);
  q.consts.L_grad_d = 0.0;

  Vec c_bound(nt), d_bound(mt);
  for (int i = 0; i < nt; ++i)
    c_bound[i] = q.Ahat.row(i).cwiseAbs().sum() + std::abs(q.bhat[i]);
  for (int i = 0; i < mt; ++i)
    d_bound[i] = q.Atil.row(i).cwiseAbs().sum() + q.Btil.row(i).cwiseAbs().sum() +
                 std::abs(q.btil[i]);
  q.consts.c_hi = c_bound.norm();
  q.consts.d_hi = d_bound.norm();

  // Constraint-qualification margins.  A strictly feasible x with margin s
  // certifies: every unit tangent direction toward it decreases each
  // near-active (c_i ≥ −θ) constraint at rate ≥ (s − θ)/diam, so with
  // θ = s/2 the pair (θ, δ_c = s/(2·diam)) is valid.  For the y-side an
  // affine policy ŷ(x) with d(x, ŷ(x)) ≤ −s·1 for *all* x in the box gives a
  // uniform Slater margin δ_d = s.
  const double s_c = detail::best_margin(q.Ahat, q.bhat, q.x_box(), q.x_nf);
  if (s_c > 0) {
    q.consts.theta = 0.5 * s_c;
    q.consts.delta_c = 0.5 * s_c / box_diameter(q.x_box());
  }
  const double s_d = detail::best_affine_margin(q.Atil, q.Btil, q.btil).margin;
  if (s_d > 0) q.consts.delta_d = s_d;

  return q;
}

// ---------------------------------------------------------------------------
// Solver-facing adapters
// ---------------------------------------------------------------------------

/// Strong-convexity modulus of f(·,y): 2·λmin(A) — positive only for the
/// (rare) draws that are strongly convex–strongly concave.
inline double x_curvature(const QuadraticInstance& q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q.A, Eigen::EigenvaluesOnly);
  detail::require(es.info() == Eigen::Success, "x_curvature: eigensolver failed");
  return 2.0 * es.eigenvalues().minCoeff();
}

/// Nonconvex–strongly-concave view for the proximal-point solver.  The joint
/// gradient closure bumps `counters->grad_f` once per call when given.
inline NcscProblem make_ncsc(const QuadraticInstance& q, EvalCounters* counters = nullptr) {
  NcscProblem prob;
  prob.grad = [A = q.A, B = q.B, C = q.C, cl = q.c_lin, dl = q.d_lin, counters](
                  const Vec& x, const Vec& y, Vec& gx, Vec& gy) {
    if (counters) ++counters->grad_f;
    gx = 2.0 * (A * x) + B * y + cl;
    gy = B.transpose() * x + 2.0 * (C * y) + dl;
  };
  prob.value = [q](const Vec& x, const Vec& y) { return q.f_value(x, y); };
  prob.L_grad = q.consts.L_grad_f;
  prob.sigma_y = q.consts.sigma;
  prob.p.domain = q.x_box();
  prob.q.domain = q.y_box();
  return prob;
}

/// Strongly convex–strongly concave view for the direct inner solver; throws
/// unless 2·λmin(A) > 0.
inline SaddleSubproblem make_saddle(const QuadraticInstance& q,
                                    EvalCounters* counters = nullptr) {
  const double sx = x_curvature(q);
  detail::require(sx > 0, "make_saddle: instance is not strongly convex in x");
  const NcscProblem base = make_ncsc(q, counters);
  SaddleSubproblem sub;
  sub.grad = base.grad;
  sub.value = base.value;
  sub.sigma_x = sx;
  sub.sigma_y = q.consts.sigma;
  sub.L_grad = q.consts.L_grad_f;
  sub.p = base.p;
  sub.q = base.q;
  return sub;
}

/// Constrained view for the augmented-Lagrangian solver.  Base closures are
/// pure: that solver wraps them with its own counting.
inline ConstrainedProblem make_constrained(const QuadraticInstance& q) {
  detail::require(q.constrained, "make_constrained: instance has no constraints");
  ConstrainedProblem P;
  P.base.f.value = [q](const Vec& x, const Vec& y) { return q.f_value(x, y); };
  P.base.f.grad_x = [A = q.A, B = q.B, cl = q.c_lin](const Vec& x, const Vec& y) {
    return Vec(2.0 * (A * x) + B * y + cl);
  };
  P.base.f.grad_y = [B = q.B, C = q.C, dl = q.d_lin](const Vec& x, const Vec& y) {
    return Vec(B.transpose() * x + 2.0 * (C * y) + dl);
  };
  P.base.f.L_grad = q.consts.L_grad_f;
  P.base.f.sigma_y = q.consts.sigma;
  P.base.p.domain = q.x_box();
  P.base.q.domain = q.y_box();

  ConstraintMap cm;
  cm.dim = q.nt;
  cm.value = [Ahat = q.Ahat, bhat = q.bhat](const Vec& x, const Vec&) {
    return Vec(Ahat * x - bhat);
  };
  cm.jt_x = [Ahat = q.Ahat](const Vec&, const Vec&, const Vec& u) {
    return Vec(Ahat.transpose() * u);
  };
  cm.L = q.consts.L_c;
  cm.L_grad = 0.0;
  cm.hi = q.consts.c_hi;
  P.base.c = std::move(cm);

  ConstraintMap dm;
  dm.dim = q.mt;
  dm.value = [Atil = q.Atil, Btil = q.Btil, btil = q.btil](const Vec& x, const Vec& y) {
    return Vec(Atil * x + Btil * y - btil);
  };
  dm.jt_x = [Atil = q.Atil](const Vec&, const Vec&, const Vec& u) {
    return Vec(Atil.transpose() * u);
  };
  dm.jt_y = [Btil = q.Btil](const Vec&, const Vec&, const Vec& u) {
    return Vec(Btil.transpose() * u);
  };
  dm.L = q.consts.L_d;
  dm.L_grad = 0.0;
  dm.hi = q.consts.d_hi;
  P.base.d = std::move(dm);

  P.L_F = q.consts.L_F;
  P.Delta = q.consts.Delta;
  P.F_hi = q.consts.F_hi;
  P.F_low = q.consts.F_low;
  P.delta_c = q.consts.delta_c;
  P.delta_d = q.consts.delta_d;
  P.theta = q.consts.theta;
  return P;
}

// ---------------------------------------------------------------------------
// Hyper-objective oracle
// ---------------------------------------------------------------------------

/// Result of evaluating Φ(x) = max_y {f(x,y) : d(x,y) ≤ 0, y ∈ Y}.
/// `achieved` is the attained accuracy indicator: for box-only instances a
/// rigorous bound on Φ(x) − value; for constrained ones the sum of the final
/// stationarity-gap, feasibility, and complementarity terms.
struct HyperResult {
  double value = std::numeric_limits<double>::quiet_NaN();
  double achieved = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

/// Evaluates the hyper-objective at x to accuracy ~tol.  Box-only instances
/// use accelerated projected ascent, stopping once the gradient-mapping norm
/// is ≤ tol·σ/2; constrained ones wrap the same ascent in a multiplier loop
/// with doubling penalty until feasibility, complementarity, and the
/// stationarity gap all fall below tol.  Never throws on non-convergence: the
/// flag and `achieved` report what was reached.  Diagnostic oracle — does not
/// count evaluations.
inline HyperResult hyper_objective(const QuadraticInstance& q, const Vec& x,
                                   double tol = 1e-8) {
  detail::require(x.size() == q.n, "hyper_objective: x dimension mismatch");
  detail::require(tol > 0, "hyper_objective: tol must be positive");
  const Box ybox = q.y_box();
  const double sigma = q.consts.sigma;
  const double L_yy = detail::sym_spectral_radius(2.0 * q.C);
  const double dy = box_diameter(ybox);
  HyperResult out;

  if (!q.constrained) {
    const Vec bx = q.B.transpose() * x + q.d_lin;
    auto grad = [&](const Vec& y) { return Vec(bx + 2.0 * (q.C * y)); };
    const long long cap =
        2000 + 80 * static_cast<long long>(std::sqrt(L_yy / sigma) + 1.0);
    const auto r = detail::maximize_concave_box(grad, sigma, std::max(L_yy, sigma), ybox,
                                                Vec::Zero(q.m), 0.5 * tol * sigma, cap);
    out.value = q.f_value(x, r.y);
    out.achieved = std::min(r.residual * dy, r.residual * r.residual / (2.0 * sigma));
    out.converged = r.converged;
    return out;
  }

  // Multiplier loop on the y-side constraints.  The ascent gradient at the
  // inner optimum equals the Lagrangian gradient with the *updated*
  // multiplier, so the inner residual doubles as the stationarity gap.
  const Vec bx = q.B.transpose() * x + q.d_lin;
  const Vec dx_part = q.Atil * x - q.btil;  // d(x,y) = dx_part + B̃y
  const double L_B = detail::spectral_norm(q.Btil);
  Vec mu = Vec::Zero(q.mt);
  Vec y = ybox.clamp(Vec::Zero(q.m));
  double rho = 1.0;
  double feas = std::numeric_limits<double>::infinity();
  double comp = feas, stat_gap = feas;
  for (int round = 0; round < 64 && rho < 1e13; ++round) {
    auto grad = [&](const Vec& yy) {
      const Vec act = (mu + rho * (dx_part + q.Btil * yy)).cwiseMax(0.0);
      return Vec(bx + 2.0 * (q.C * yy) - q.Btil.transpose() * act);
    };
    const double L_pen = std::max(L_yy + rho * L_B * L_B, sigma);
    const long long cap =
        2000 + 80 * static_cast<long long>(std::sqrt(L_pen / sigma) + 1.0);
    const auto r =
        detail::maximize_concave_box(grad, sigma, L_pen, ybox, y, 0.5 * tol * sigma, cap);
    y = r.y;
    const Vec dv = dx_part + q.Btil * y;
    const Vec mu_next = (mu + rho * dv).cwiseMax(0.0);
    feas = dv.cwiseMax(0.0).norm();
    comp = std::abs(mu_next.dot(dv));
    stat_gap = std::min(r.residual * dy, r.residual * r.residual / (2.0 * sigma));
    mu = mu_next;
    if (feas <= tol && comp <= tol && stat_gap <= tol) {
      out.converged = true;
      break;
    }
    rho *= 2.0;
  }
  out.value = q.f_value(x, y);
  out.achieved = feas + comp + stat_gap;
  return out;
}

// ---------------------------------------------------------------------------
// JSON persistence (format "v1")
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json mat_to_json(const Mat& M) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) a.push_back(M(i, j));
  return a;
}

inline nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Mat mat_from_json(const nlohmann::json& a, Eigen::Index rows, Eigen::Index cols,
                         const char* key) {
  require(a.is_array() && a.size() == static_cast<std::size_t>(rows * cols),
          std::string("instance load: bad array size for ") + key);
  Mat M(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = a[k++].get<double>();
  return M;
}

inline Vec vec_from_json(const nlohmann::json& a, Eigen::Index n, const char* key) {
  require(a.is_array() && a.size() == static_cast<std::size_t>(n),
          std::string("instance load: bad array size for ") + key);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = a[i].get<double>();
  return v;
}

/// NaN round-trips as JSON null.
inline nlohmann::json num_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

inline double num_from(const nlohmann::json& j, const char* key, bool allow_null) {
  require(j.contains(key), std::string("instance load: missing constant ") + key);
  const auto& v = j.at(key);
  if (v.is_null()) {
    require(allow_null, std::string("instance load: constant must be numeric: ") + key);
    return std::numeric_limits<double>::quiet_NaN();
  }
  require(v.is_number(), std::string("instance load: constant must be numeric: ") + key);
  return v.get<double>();
}

}  // namespace detail

inline void save_instance(const QuadraticInstance& q, const std::string& path) {
  nlohmann::json j;
  j["version"] = "v1";
  j["kind"] = q.constrained ? "constrained" : "unconstrained";
  j["n"] = q.n;
  j["m"] = q.m;
  j["nt"] = q.nt;
  j["mt"] = q.mt;
  j["seed"] = q.seed;
  j["A"] = detail::mat_to_json(q.A);
  j["B"] = detail::mat_to_json(q.B);
  j["C"] = detail::mat_to_json(q.C);
  j["c"] = detail::vec_to_json(q.c_lin);
  j["d"] = detail::vec_to_json(q.d_lin);
  if (q.constrained) {
    j["Ahat"] = detail::mat_to_json(q.Ahat);
    j["bhat"] = detail::vec_to_json(q.bhat);
    j["Atil"] = detail::mat_to_json(q.Atil);
    j["Btil"] = detail::mat_to_json(q.Btil);
    j["btil"] = detail::vec_to_json(q.btil);
    j["x_nf"] = detail::vec_to_json(q.x_nf);
  }
  nlohmann::json cj;
  cj["L_grad_f"] = q.consts.L_grad_f;
  cj["sigma"] = q.consts.sigma;
  cj["L_c"] = q.consts.L_c;
  cj["L_grad_c"] = q.consts.L_grad_c;
  cj["c_hi"] = q.consts.c_hi;
  cj["L_d"] = q.consts.L_d;
  cj["L_grad_d"] = q.consts.L_grad_d;
  cj["d_hi"] = q.consts.d_hi;
  cj["L_F"] = q.consts.L_F;
  cj["Delta"] = q.consts.Delta;
  cj["F_hi"] = q.consts.F_hi;
  cj["F_low"] = q.consts.F_low;
  cj["H_low"] = q.consts.H_low;
  cj["delta_c"] = detail::num_or_null(q.consts.delta_c);
  cj["delta_d"] = detail::num_or_null(q.consts.delta_d);
  cj["theta"] = detail::num_or_null(q.consts.theta);
  j["constants"] = std::move(cj);

  std::ofstream out(path);
  detail::require(out.good(), "save_instance: cannot open " + path);
  out << j.dump(1) << '\n';
  detail::require(out.good(), "save_instance: write failed for " + path);
}

/// Loads an instance written by save_instance.  Malformed JSON raises with the
/// parser's location info; structural problems raise with the offending key.
/// Non-fatal oddities (a near-feasibility margin that is not 0.1 within 1e-6)
/// are appended to `warnings` when given.
inline QuadraticInstance load_instance(const std::string& path,
                                       std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  detail::require(in.good(), "load_instance: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("load_instance: " + path + ": " + e.what());
  }
  detail::require(j.contains("version") && j["version"].is_string() &&
                      j["version"].get<std::string>() == "v1",
                  "load_instance: unsupported or missing version (want \"v1\")");
  const std::string kind = j.value("kind", std::string());
  detail::require(kind == "unconstrained" || kind == "constrained",
                  "load_instance: unknown kind \"" + kind + "\"");

  QuadraticInstance q;
  q.constrained = kind == "constrained";
  q.n = j.at("n").get<int>();
  q.m = j.at("m").get<int>();
  q.nt = j.at("nt").get<int>();
  q.mt = j.at("mt").get<int>();
  q.seed = j.at("seed").get<std::uint64_t>();
  detail::require(q.n > 0 && q.m > 0, "load_instance: dimensions must be positive");
  detail::require(q.constrained ? (q.nt > 0 && q.mt > 0) : (q.nt == 0 && q.mt == 0),
                  "load_instance: constraint counts inconsistent with kind");

  q.A = detail::mat_from_json(j.at("A"), q.n, q.n, "A");
  q.B = detail::mat_from_json(j.at("B"), q.n, q.m, "B");
  q.C = detail::mat_from_json(j.at("C"), q.m, q.m, "C");
  q.c_lin = detail::vec_from_json(j.at("c"), q.n, "c");
  q.d_lin = detail::vec_from_json(j.at("d"), q.m, "d");
  if (q.constrained) {
    q.Ahat = detail::mat_from_json(j.at("Ahat"), q.nt, q.n, "Ahat");
    q.bhat = detail::vec_from_json(j.at("bhat"), q.nt, "bhat");
    q.Atil = detail::mat_from_json(j.at("Atil"), q.mt, q.n, "Atil");
    q.Btil = detail::mat_from_json(j.at("Btil"), q.mt, q.m, "Btil");
    q.btil = detail::vec_from_json(j.at("btil"), q.mt, "btil");
    q.x_nf = detail::vec_from_json(j.at("x_nf"), q.n, "x_nf");
  }

  detail::require(j.contains("constants") && j["constants"].is_object(),
                  "load_instance: missing constants object");
  const auto& cj = j["constants"];
  q.consts.L_grad_f = detail::num_from(cj, "L_grad_f", false);
  q.consts.sigma = detail::num_from(cj, "sigma", false);
  q.consts.L_c = detail::num_from(cj, "L_c", false);
  q.consts.L_grad_c = detail::num_from(cj, "L_grad_c", false);
  q.consts.c_hi = detail::num_from(cj, "c_hi", false);
  q.consts.L_d = detail::num_from(cj, "L_d", false);
  q.consts.L_grad_d = detail::num_from(cj, "L_grad_d", false);
  q.consts.d_hi = detail::num_from(cj, "d_hi", false);
  q.consts.L_F = detail::num_from(cj, "L_F", false);
  q.consts.Delta = detail::num_from(cj, "Delta", false);
  q.consts.F_hi = detail::num_from(cj, "F_hi", false);
  q.consts.F_low = detail::num_from(cj, "F_low", false);
  q.consts.H_low = detail::num_from(cj, "H_low", false);
  q.consts.delta_c = detail::num_from(cj, "delta_c", true);
  q.consts.delta_d = detail::num_from(cj, "delta_d", true);
  q.consts.theta = detail::num_from(cj, "theta", true);

  detail::require(q.consts.L_grad_f > 0 && q.consts.sigma > 0,
                  "load_instance: smoothness constants must be positive");
  if (q.constrained && warnings) {
    const double margin = (q.Ahat * q.x_nf - q.bhat).cwiseMax(0.0).norm();
    if (std::abs(margin - 0.1) > 1e-6)
      warnings->push_back(path + ": near-feasibility margin of x_nf is " +
                          std::to_string(margin) + ", expected 0.1");
  }
  return q;
}

}  // namespace minimax_al
