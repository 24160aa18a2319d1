#pragma once
// Independent ε-KKT certification: exact subdifferential distances for box
// regularizers (prox-residual surrogate otherwise), constraint feasibility,
// and complementarity residuals. Deliberately shares no logic with the
// solvers' internal stopping tests.

#include <minimax_al/core.hpp>

#include <cmath>

namespace minimax_al {

/// Exact Euclidean distance dist(0, g + N_X(x)) for the normal cone N_X of a
/// box at x ∈ X, computed componentwise: the cone absorbs the gradient sign
/// pointing out of the box (at a lower bound only g_i < 0 contributes, at an
/// upper bound only g_i > 0; a pinned coordinate lower==upper contributes 0).
inline double dist_subdiff_box(const Vec& g, const Vec& x, const Box& box) {
  detail::require(g.size() == box.dim() && x.size() == box.dim(),
                  "dist_subdiff_box: size mismatch");
  detail::require(box.contains(x, 1e-9), "dist_subdiff_box: x outside the box");
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (box.lower[i] == box.upper[i]) continue;  // normal cone is all of R
    double contrib;
    if (x[i] <= box.lower[i]) {
      contrib = std::max(-g[i], 0.0);
    } else if (x[i] >= box.upper[i]) {
      contrib = std::max(g[i], 0.0);
    } else {
      contrib = std::abs(g[i]);
    }
    s2 += contrib * contrib;
  }
  return std::sqrt(s2);
}

/// Stationarity, feasibility, and complementarity residuals at (x, y) with
/// multipliers (λx for c, λy for d). All entries are nonnegative; a point is
/// ε-KKT when every entry is below its (scaled) tolerance.
struct KKTReport {
  double stat_x = 0;  ///< dist(0, ∇x f + Jcᵀλx − Jx dᵀλy + ∂p(x))
  double stat_y = 0;  ///< dist(0, ∇y f − Jy dᵀλy − ∂q(y))
  double feas_c = 0;  ///< ‖[c(x)]₊‖
  double comp_c = 0;  ///< |⟨λx, c(x)⟩|
  double feas_d = 0;  ///< ‖[d(x,y)]₊‖
  double comp_d = 0;  ///< |⟨λy, d(x,y)⟩|
  bool surrogate = false;  ///< prox-residual surrogate used (non-box regularizer)
};

inline KKTReport kkt_report(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                            const Vec& lambda_x, const Vec& lambda_y) {
  KKTReport r;

  // full primal gradients including multiplier terms, reusable at shifted points
  const auto grad_x_full = [&](const Vec& xx, const Vec& yy) {
    Vec g = prob.f.grad_x(xx, yy);
    if (prob.c) g += prob.c->jt_x(xx, yy, lambda_x);
    if (prob.d) g -= prob.d->jt_x(xx, yy, lambda_y);
    return g;
  };
  const auto grad_y_full = [&](const Vec& xx, const Vec& yy) {
    Vec g = prob.f.grad_y(xx, yy);
    if (prob.d) g -= prob.d->jt_y(xx, yy, lambda_y);
    return g;
  };

  if (prob.c) {
    detail::require(lambda_x.size() == prob.c->dim, "kkt_report: lambda_x size mismatch");
    const Vec cv = prob.c->value(x, y);
    r.feas_c = cv.cwiseMax(0.0).norm();
    r.comp_c = std::abs(lambda_x.dot(cv));
  }
  if (prob.d) {
    detail::require(lambda_y.size() == prob.d->dim, "kkt_report: lambda_y size mismatch");
    const Vec dv = prob.d->value(x, y);
    r.feas_d = dv.cwiseMax(0.0).norm();
    r.comp_d = std::abs(lambda_y.dot(dv));
  }

  const Vec gx = grad_x_full(x, y);
  const Vec gy = grad_y_full(x, y);

  if (prob.p.is_box_indicator()) {
    r.stat_x = dist_subdiff_box(gx, x, prob.p.domain);
  } else {
    // prox-residual surrogate with curvature correction
    r.surrogate = true;
    const double zeta = 1.0 / (1.0 + prob.f.L_grad);
    const Vec xh = prob.p.prox(zeta, x - zeta * gx);
    r.stat_x = ((x - xh) / zeta - (gx - grad_x_full(xh, y))).norm();
  }
  if (prob.q.is_box_indicator()) {
    // maximization side: dist(0, g − N_Y(y)) = dist(0, (−g) + N_Y(y))
    r.stat_y = dist_subdiff_box(-gy, y, prob.q.domain);
  } else {
    r.surrogate = true;
    const double zeta = 1.0 / (1.0 + prob.f.L_grad);
    const Vec yh = prob.q.prox(zeta, y + zeta * gy);
    r.stat_y = ((yh - y) / zeta - (gy - grad_y_full(x, yh))).norm();
  }
  return r;
}

/// Per-entry tolerance multiples of ε (all 1 by default; the outer-layer
/// guarantee supplies larger constraint factors).
struct KKTSlack {
  double stat_x = 1, stat_y = 1;
  double feas_c = 1, comp_c = 1;
  double feas_d = 1, comp_d = 1;
};

/// Inclusive comparison of every residual against its scaled tolerance.
inline bool is_eps_kkt(const KKTReport& r, double eps, const KKTSlack& s = {}) {
  detail::require(eps > 0, "is_eps_kkt: eps must be positive");
  return r.stat_x <= eps * s.stat_x && r.stat_y <= eps * s.stat_y &&
         r.feas_c <= eps * s.feas_c && r.comp_c <= eps * s.comp_c &&
         r.feas_d <= eps * s.feas_d && r.comp_d <= eps * s.comp_d;
}

}  // namespace minimax_al
