#pragma once
// Inexact proximal-point wrapper for nonconvex–strongly-concave problems
//   min_x max_y  h(x,y) + p(x) − q(y).
// Each step anchors a strongly convex quadratic at the current x, solves the
// resulting SCSC subproblem to a geometrically tightening certificate, and
// stops when consecutive anchors stall.

#include <minimax_al/budget.hpp>
#include <minimax_al/foam.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace minimax_al {

/// Smooth coupling h with a weakly-convex x-part and strongly concave y-part.
/// Constants are caller-supplied and trusted.
struct NcscProblem {
  std::function<void(const Vec& x, const Vec& y, Vec& gx, Vec& gy)> grad;  ///< joint ∇h
  std::function<double(const Vec&, const Vec&)> value;  ///< optional, diagnostics only
  double L_grad = 0;   ///< smoothness of ∇h (also the weak-convexity modulus bound)
  double sigma_y = 0;  ///< strong-concavity modulus of h(x,·)
  ProxFriendly p, q;
};

inline void validate(const NcscProblem& prob) {
  detail::require(static_cast<bool>(prob.grad), "NcscProblem: missing gradient oracle");
  detail::require(prob.L_grad > 0 && prob.sigma_y > 0,
                  "NcscProblem: constants must be positive");
  detail::require(prob.sigma_y <= prob.L_grad, "NcscProblem: sigma_y must not exceed L_grad");
}

/// Anchored subproblem h̄(x,y) = h(x,y) + L‖x − anchor‖²: strongly convex in x
/// with modulus L, same strong concavity in y, joint smoothness 3L.
inline SaddleSubproblem shifted_subproblem(const NcscProblem& prob, const Vec& anchor) {
  SaddleSubproblem sub;
  const double L = prob.L_grad;
  sub.grad = [grad = prob.grad, L, anchor](const Vec& x, const Vec& y, Vec& gx, Vec& gy) {
    grad(x, y, gx, gy);
    gx += 2.0 * L * (x - anchor);
  };
  if (prob.value) {
    sub.value = [value = prob.value, L, anchor](const Vec& x, const Vec& y) {
      return value(x, y) + L * (x - anchor).squaredNorm();
    };
  }
  sub.sigma_x = L;
  sub.sigma_y = prob.sigma_y;
  sub.L_grad = 3.0 * L;
  sub.p = prob.p;
  sub.q = prob.q;
  return sub;
}

/// Iteration caps; negative/NaN entries select defaults. Supplying the value
/// bounds switches the outer cap to 10× the certified step budget and derives
/// per-call saddle-solver caps from it.
struct PpaCaps {
  long long max_outer = -1;
  long long foam_max_outer = -1;
  long long foam_max_inner = -1;
  double H0_max = std::numeric_limits<double>::quiet_NaN();      ///< ≥ max_y H(x⁰,y)
  double H_star_low = std::numeric_limits<double>::quiet_NaN();  ///< ≤ H*
  double H_low = std::numeric_limits<double>::quiet_NaN();       ///< ≤ inf H
};

struct PpaTraceEntry {
  long long k = 0;
  double eps_hat = 0;        ///< certificate tolerance used at step k
  double step_norm = 0;      ///< ‖x^{k+1} − x^k‖
  double cert_residual = 0;
  long long foam_outer = 0;
};

struct PpaResult {
  Vec x, y;
  std::vector<PpaTraceEntry> trace;  ///< one entry per proximal step taken
  Certificate last_cert;             ///< certificate of the final subproblem
  long long outer_iters = 0;
};

/// Run to stationarity level eps with certificate schedule ε̂_k = eps_hat0/(k+1),
/// 0 < eps_hat0 ≤ eps/2. Iterates are the certified subproblem outputs; stops
/// once ‖x^{k+1} − x^k‖ ≤ eps/(4L).
inline PpaResult solve_ncsc(const NcscProblem& prob, double eps, double eps_hat0,
                            Vec x0, Vec y0, const PpaCaps& caps, EvalCounters& counters) {
  validate(prob);
  detail::require(eps > 0, "solve_ncsc: eps must be positive");
  detail::require(eps_hat0 > 0 && eps_hat0 <= eps / 2.0 + 1e-15,
                  "solve_ncsc: need 0 < eps_hat0 ≤ eps/2");
  detail::require(prob.p.domain.contains(x0, 1e-9), "solve_ncsc: x0 must lie in dom p");
  detail::require(prob.q.domain.contains(y0, 1e-9), "solve_ncsc: y0 must lie in dom q");

  const double L = prob.L_grad;
  const bool have_bounds = std::isfinite(caps.H0_max) && std::isfinite(caps.H_star_low) &&
                           std::isfinite(caps.H_low);

  long long max_outer = caps.max_outer;
  double value_growth = 0.0;
  if (have_bounds) {
    PpaBudgetInputs bi;
    bi.L_grad = L;
    bi.sigma_y = prob.sigma_y;
    bi.D_x = box_diameter(prob.p.domain);
    bi.D_y = box_diameter(prob.q.domain);
    bi.eps = eps;
    bi.eps_hat0 = eps_hat0;
    bi.H0_max = caps.H0_max;
    bi.H_star_low = caps.H_star_low;
    bi.H_low = caps.H_low;
    const PpaBudget b = ppa_budget(bi);
    value_growth = b.value_growth;
    if (max_outer < 0) max_outer = 10 * (b.outer + 1);
  } else if (max_outer < 0) {
    max_outer = 100000;
  }

  PpaResult res;
  Vec x = std::move(x0), y = std::move(y0);
  for (long long k = 0; k < max_outer; ++k) {
    const double eps_hat = eps_hat0 / static_cast<double>(k + 1);
    const SaddleSubproblem sub = shifted_subproblem(prob, x);

    FoamCaps fcaps;
    fcaps.max_outer = caps.foam_max_outer;
    fcaps.max_inner = caps.foam_max_inner;
    if (have_bounds && fcaps.max_outer < 0) {
      // anchored value gap: the running hyper-objective never exceeds its
      // start value plus the certified growth allowance
      fcaps.value_gap_bound =
          detail::pos_part(caps.H0_max + value_growth - caps.H_low);
    }

    Certificate cert = solve_sccsc(sub, eps_hat, Vec(-L * x), y, fcaps, counters);
    const double step = (cert.x - x).norm();
    res.trace.push_back({k, eps_hat, step, cert.residual, cert.outer_iters});
    x = cert.x;
    y = cert.y;
    res.last_cert = std::move(cert);
    if (step <= eps / (4.0 * L)) {
      res.x = std::move(x);
      res.y = std::move(y);
      res.outer_iters = static_cast<long long>(res.trace.size());
      return res;
    }
  }
  throw SolveFailure("proximal-point wrapper exceeded its step cap (" +
                     std::to_string(max_outer) + ")");
}

}  // namespace minimax_al
