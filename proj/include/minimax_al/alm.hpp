#pragma once
// First-order augmented Lagrangian method with safeguarded multipliers for
//   min_x max_y  f(x,y) + p(x) − q(y)   s.t.  c(x) ≤ 0,  d(x,y) ≤ 0.
// Outer iterations follow a geometric accuracy/penalty schedule ε_k = τ^k,
// ρ_k = ε_k⁻¹; each subproblem goes to the proximal-point layer. Optional
// runtime monitors verify the multiplier-drift and feasibility envelopes the
// schedule is designed around (they never consume the caller's oracle budget).

#include <minimax_al/budget.hpp>
#include <minimax_al/kkt.hpp>
#include <minimax_al/ppa.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace minimax_al {

/// Constrained problem plus optional scalar metadata (NaN when unknown).
/// Metadata unlocks budget-derived iteration caps, the solvability check, and
/// the value monitors; the solver itself runs without it.
struct ConstrainedProblem {
  MinimaxProblem base;
  double L_F = std::numeric_limits<double>::quiet_NaN();    ///< Lipschitz bound on F(·,y)
  double Delta = std::numeric_limits<double>::quiet_NaN();  ///< F_hi − F_low
  double F_hi = std::numeric_limits<double>::quiet_NaN();
  double F_low = std::numeric_limits<double>::quiet_NaN();
  double delta_c = std::numeric_limits<double>::quiet_NaN();  ///< x-constraint margin slope
  double delta_d = std::numeric_limits<double>::quiet_NaN();  ///< y-constraint Slater margin
  double theta = std::numeric_limits<double>::quiet_NaN();    ///< x-constraint qualification radius
};

// ---------------------------------------------------------------------------
// Augmented-Lagrangian value/gradient oracles (pure; callers do the counting)
// ---------------------------------------------------------------------------

/// Smooth part of the AL function:
///   f(x,y) + (1/2ρ)(‖[λx+ρc(x)]₊‖² − ‖λx‖²) − (1/2ρ)(‖[λy+ρd(x,y)]₊‖² − ‖λy‖²).
inline double al_smooth_value(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                              const Vec& lambda_x, const Vec& lambda_y, double rho) {
  double v = prob.f.value(x, y);
  if (prob.c) {
    const Vec u = (lambda_x + rho * prob.c->value(x, y)).cwiseMax(0.0);
    v += (u.squaredNorm() - lambda_x.squaredNorm()) / (2.0 * rho);
  }
  if (prob.d) {
    const Vec u = (lambda_y + rho * prob.d->value(x, y)).cwiseMax(0.0);
    v -= (u.squaredNorm() - lambda_y.squaredNorm()) / (2.0 * rho);
  }
  return v;
}

/// Full AL value including the regularizers p and −q.
inline double al_value(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                       const Vec& lambda_x, const Vec& lambda_y, double rho) {
  return al_smooth_value(prob, x, y, lambda_x, lambda_y, rho) + prob.p.value(x) -
         prob.q.value(y);
}

/// Minimization-side AL value (only the x-constraint penalty):
///   F(x,y) + (1/2ρ)(‖[λx+ρc(x)]₊‖² − ‖λx‖²).
inline double al_value_x(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                         const Vec& lambda_x, double rho) {
  double v = prob.f.value(x, y) + prob.p.value(x) - prob.q.value(y);
  if (prob.c) {
    const Vec u = (lambda_x + rho * prob.c->value(x, y)).cwiseMax(0.0);
    v += (u.squaredNorm() - lambda_x.squaredNorm()) / (2.0 * rho);
  }
  return v;
}

/// Joint gradient of the smooth AL part. One call evaluates ∇f once and each
/// present constraint map (value + Jacobian product) once.
inline void al_grads(const MinimaxProblem& prob, const Vec& x, const Vec& y,
                     const Vec& lambda_x, const Vec& lambda_y, double rho, Vec& gx,
                     Vec& gy) {
  gx = prob.f.grad_x(x, y);
  gy = prob.f.grad_y(x, y);
  if (prob.c) {
    const Vec u = (lambda_x + rho * prob.c->value(x, y)).cwiseMax(0.0);
    gx += prob.c->jt_x(x, y, u);
  }
  if (prob.d) {
    const Vec u = (lambda_y + rho * prob.d->value(x, y)).cwiseMax(0.0);
    gx -= prob.d->jt_x(x, y, u);
    gy -= prob.d->jt_y(x, y, u);
  }
}

/// Smoothness envelope of the AL gradient at penalty ρ and multiplier norms:
///   L∇f + ρLc² + ρ·c_hi·L∇c + ‖λx‖L∇c + ρLd² + ρ·d_hi·L∇d + ‖λy‖L∇d.
inline double al_smoothness(const MinimaxProblem& prob, double rho, double norm_lx,
                            double norm_ly) {
  double L = prob.f.L_grad;
  if (prob.c) {
    L += rho * prob.c->L * prob.c->L + rho * prob.c->hi * prob.c->L_grad +
         norm_lx * prob.c->L_grad;
  }
  if (prob.d) {
    L += rho * prob.d->L * prob.d->L + rho * prob.d->hi * prob.d->L_grad +
         norm_ly * prob.d->L_grad;
  }
  return L;
}

// ---------------------------------------------------------------------------
// Helpers: box-constrained concave maximization, nearly feasible points
// ---------------------------------------------------------------------------

namespace detail {

struct ConcaveMaxResult {
  Vec y;
  double residual = 0;  ///< stationarity residual at y (certifies the value gap)
  long long iters = 0;
  bool converged = false;
};

/// Maximize a σ-strongly-concave, L-smooth function over a box by accelerated
/// projected ascent with constant momentum. The returned residual r bounds the
/// value gap: max − value(y) ≤ r · diam(box).
inline ConcaveMaxResult maximize_concave_box(const std::function<Vec(const Vec&)>& grad,
                                             double sigma, double L, const Box& box,
                                             Vec y0, double gtol, long long max_iter) {
  require(sigma > 0 && L >= sigma, "maximize_concave_box: need 0 < sigma ≤ L");
  ConcaveMaxResult res;
  Vec y = box.clamp(y0), y_prev = y;
  const double beta = (std::sqrt(L) - std::sqrt(sigma)) / (std::sqrt(L) + std::sqrt(sigma));
  for (long long it = 0; it < max_iter; ++it) {
    const Vec v = y + beta * (y - y_prev);
    const Vec step = box.clamp(v + grad(v) / L);
    const double gm = L * (step - v).norm();
    y_prev = y;
    y = step;
    res.iters = it + 1;
    if (gm <= gtol) {
      res.converged = true;
      break;
    }
  }
  // exact residual at the final point (dist of the ascent direction to the
  // normal cone), the certificate callers use for slack
  const Vec g = grad(y);
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    double contrib;
    if (box.lower[i] == box.upper[i]) {
      contrib = 0.0;  // pinned coordinate, nothing to improve
    } else if (y[i] <= box.lower[i]) {
      contrib = std::max(g[i], 0.0);  // only an inward (ascending) push survives
    } else if (y[i] >= box.upper[i]) {
      contrib = std::min(g[i], 0.0);
    } else {
      contrib = g[i];
    }
    s2 += contrib * contrib;
  }
  res.residual = std::sqrt(s2);
  res.y = std::move(y);
  return res;
}

}  // namespace detail

/// Projected gradient descent on ½‖[c(x)]₊‖² until the violation drops to
/// `target`. Each iteration costs one constraint-gradient evaluation (counted
/// when `counters` is given). Returns the best iterate found.
inline Vec find_nearly_feasible(const ConstraintMap& c, const Box& domain, Vec x0,
                                double target, long long max_iter = 100000,
                                EvalCounters* counters = nullptr) {
  detail::require(c.value && c.jt_x, "find_nearly_feasible: incomplete constraint map");
  const double L_phi = c.L * c.L + c.hi * c.L_grad;
  detail::require(L_phi > 0, "find_nearly_feasible: need positive constraint constants");
  Vec x = domain.clamp(std::move(x0));
  const Vec no_y;
  Vec best = x;
  double best_violation = std::numeric_limits<double>::infinity();
  for (long long it = 0; it < max_iter; ++it) {
    const Vec pos = c.value(x, no_y).cwiseMax(0.0);
    const double violation = pos.norm();
    if (violation < best_violation) {
      best_violation = violation;
      best = x;
    }
    if (violation <= target) break;
    if (counters) ++counters->grad_c;
    x = domain.clamp(x - c.jt_x(x, no_y, pos) / L_phi);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Outer solver
// ---------------------------------------------------------------------------

struct AlmOptions {
  double eps = 1e-2;    ///< target accuracy; schedule stops once ε_k ≤ eps
  double tau = 0.5;     ///< geometric decay of ε_k
  double Lambda = 10.0; ///< radius of the safeguard ball for the x-multiplier
  Vec lambda_x0, lambda_y0;  ///< empty → zeros
  bool monitors = false;     ///< run the envelope checks (diagnostics only)
  long long ppa_max_outer = -1;   ///< per-subproblem override, −1 → derived/default
  long long foam_max_outer = -1;
  long long foam_max_inner = -1;
};

struct AlmTraceEntry {
  long long k = 0;
  double eps_k = 0, rho_k = 0;
  double L_k = 0;            ///< subproblem smoothness handed to the inner layer
  bool from_nf = false;      ///< start reset to the nearly feasible anchor
  long long ppa_steps = 0;
  double norm_lambda_x = 0, norm_lambda_y = 0;  ///< after the update
};

/// Aggregated monitor outcomes. A check only *fires* (counts as a violation)
/// when the measured quantity exceeds its envelope beyond the measurement
/// slack, so oracle inexactness cannot produce false alarms.
struct MonitorReport {
  bool enabled = false;
  long long multiplier_drift_checks = 0, multiplier_drift_violations = 0;
  long long y_feasibility_checks = 0, y_feasibility_violations = 0;
  long long start_value_checks = 0, start_value_violations = 0;
  long long subproblem_value_checks = 0, subproblem_value_violations = 0;

  bool clean() const {
    return multiplier_drift_violations == 0 && y_feasibility_violations == 0 &&
           start_value_violations == 0 && subproblem_value_violations == 0;
  }
};

struct AlmResult {
  Vec x, y;
  Vec lambda_x;        ///< safeguarded x-multiplier (inside the Λ-ball)
  Vec lambda_x_tilde;  ///< pre-projection candidate from the final iteration
  Vec lambda_y;
  std::vector<AlmTraceEntry> trace;
  long long outer_iters = 0;  ///< always K+1 for the geometric schedule
  MonitorReport monitors;
};

namespace detail {

/// max_y of the AL function at fixed x via the accelerated ascent helper.
/// Returns the achieved value and the slack term residual·diam(dom q);
/// `ok` is false when the ascent did not reach its tolerance.
struct MaxOverY {
  double value = 0, slack = 0;
  bool ok = false;
};

inline MaxOverY al_max_over_y(const MinimaxProblem& prob, const Vec& x, const Vec& lx,
                              const Vec& ly, double rho, double L_k) {
  const double sigma = prob.f.sigma_y;
  const auto grad = [&](const Vec& yy) {
    Vec gx, gy;
    al_grads(prob, x, yy, lx, ly, rho, gx, gy);
    return gy;
  };
  const double gtol = 1e-9 * (1.0 + L_k);
  const long long cap =
      200 + 60 * static_cast<long long>(std::ceil(std::sqrt(L_k / sigma)) + 1);
  ConcaveMaxResult r = maximize_concave_box(grad, sigma, L_k, prob.q.domain,
                                            Vec(Vec::Zero(prob.q.domain.dim())), gtol, cap);
  MaxOverY out;
  out.ok = r.converged;
  out.value = al_value(prob, x, r.y, lx, ly, rho);
  out.slack = r.residual * box_diameter(prob.q.domain) + 1e-9 * (1.0 + std::abs(out.value));
  return out;
}

}  // namespace detail

inline AlmResult solve_constrained(const ConstrainedProblem& prob, const AlmOptions& opt,
                                   Vec x0, Vec y0, Vec x_nf, EvalCounters& counters) {
  const MinimaxProblem& base = prob.base;
  detail::require(base.f.grad_x && base.f.grad_y && base.f.value,
                  "solve_constrained: missing coupling oracles");
  detail::require(base.f.sigma_y > 0 && base.f.L_grad >= base.f.sigma_y,
                  "solve_constrained: need 0 < sigma_y ≤ L_grad");
  detail::require(opt.eps > 0 && opt.eps < 1 && opt.tau > 0 && opt.tau < 1,
                  "solve_constrained: need eps, tau in (0,1)");
  detail::require(opt.Lambda > 0, "solve_constrained: need a positive multiplier cap");
  detail::require(base.p.domain.contains(x0, 1e-9), "solve_constrained: x0 outside dom p");
  detail::require(base.q.domain.contains(y0, 1e-9), "solve_constrained: y0 outside dom q");
  if (base.c) {
    detail::require(x_nf.size() == x0.size() && base.p.domain.contains(x_nf, 1e-9),
                    "solve_constrained: x_nf outside dom p");
  }

  const double sigma = base.f.sigma_y;
  const long long K =
      detail::ceil_pos(std::log(opt.eps) / std::log(opt.tau));  // last outer index

  Vec x = std::move(x0), y = std::move(y0);
  Vec lx = opt.lambda_x0.size() ? opt.lambda_x0
                                : Vec(Vec::Zero(base.c ? base.c->dim : 0));
  Vec ly = opt.lambda_y0.size() ? opt.lambda_y0
                                : Vec(Vec::Zero(base.d ? base.d->dim : 0));
  if (base.c) {
    detail::require(lx.size() == base.c->dim && lx.minCoeff() >= 0.0 &&
                        lx.norm() <= opt.Lambda + 1e-12,
                    "solve_constrained: lambda_x0 outside the safeguard ball");
  }
  if (base.d) {
    detail::require(ly.size() == base.d->dim && ly.minCoeff() >= 0.0,
                    "solve_constrained: lambda_y0 must be nonnegative");
  }
  const double norm_ly0 = ly.norm();

  const double D_y = box_diameter(base.q.domain);
  const bool have_value_meta =
      std::isfinite(prob.Delta) && std::isfinite(prob.F_hi) && std::isfinite(prob.F_low);
  // fixed start-value envelope: Δ + F_hi + Λ + ½(τ⁻¹+‖λy⁰‖²) + (Δ+D_y)/(1−τ)
  const double start_envelope =
      have_value_meta
          ? prob.Delta + prob.F_hi + opt.Lambda +
                0.5 * (1.0 / opt.tau + norm_ly0 * norm_ly0) +
                (prob.Delta + D_y) / (1.0 - opt.tau)
          : std::numeric_limits<double>::quiet_NaN();
  const double drift_allowance =
      std::isfinite(prob.Delta)
          ? norm_ly0 * norm_ly0 + 2.0 * (prob.Delta + D_y) / (1.0 - opt.tau)
          : std::numeric_limits<double>::quiet_NaN();

  AlmResult res;
  res.monitors.enabled = opt.monitors;

  for (long long k = 0; k <= K; ++k) {
    const double eps_k = std::pow(opt.tau, static_cast<double>(k));
    const double rho_k = 1.0 / eps_k;

    // multiplier-drift envelope at loop entry: ρ_k⁻¹‖λy^k‖² within allowance
    if (opt.monitors && base.d && std::isfinite(drift_allowance)) {
      ++res.monitors.multiplier_drift_checks;
      if (ly.squaredNorm() / rho_k > drift_allowance + 1e-9 * (1.0 + drift_allowance)) {
        ++res.monitors.multiplier_drift_violations;
      }
    }

    // start selection: keep the incumbent unless the nearly feasible anchor
    // strictly improves the minimization-side AL value (ties keep x^k)
    Vec x_init = x;
    bool from_nf = false;
    if (base.c) {
      const double v_cur = al_value_x(base, x, y, lx, rho_k);
      const double v_nf = al_value_x(base, x_nf, y, lx, rho_k);
      if (v_cur > v_nf) {
        x_init = x_nf;
        from_nf = true;
      }
    }

    const double L_k = al_smoothness(base, rho_k, lx.norm(), ly.norm());

    if (opt.monitors && have_value_meta) {
      ++res.monitors.start_value_checks;
      const detail::MaxOverY m = detail::al_max_over_y(base, x_init, lx, ly, rho_k, L_k);
      if (m.ok && m.value > start_envelope + m.slack) {
        ++res.monitors.start_value_violations;
      }
    }

    // subproblem oracles: one joint-gradient call counts one evaluation of
    // ∇f and of each present constraint map
    NcscProblem sub;
    sub.grad = [&base, &counters, lx, ly, rho_k](const Vec& xx, const Vec& yy, Vec& gx,
                                                 Vec& gy) {
      ++counters.grad_f;
      if (base.c) ++counters.grad_c;
      if (base.d) ++counters.grad_d;
      al_grads(base, xx, yy, lx, ly, rho_k, gx, gy);
    };
    sub.value = [&base, lx, ly, rho_k](const Vec& xx, const Vec& yy) {
      return al_smooth_value(base, xx, yy, lx, ly, rho_k);
    };
    sub.L_grad = L_k;
    sub.sigma_y = sigma;
    sub.p = base.p;
    sub.q = base.q;

    PpaCaps caps;
    caps.max_outer = opt.ppa_max_outer;
    caps.foam_max_outer = opt.foam_max_outer;
    caps.foam_max_inner = opt.foam_max_inner;
    if (have_value_meta) {
      const double d_hi = base.d ? base.d->hi : 0.0;
      caps.H0_max = start_envelope;
      caps.H_star_low = prob.F_low - opt.Lambda * opt.Lambda / (2.0 * rho_k);
      caps.H_low = caps.H_star_low - norm_ly0 * norm_ly0 -
                   2.0 * (prob.Delta + D_y) / (1.0 - opt.tau) - rho_k * d_hi * d_hi;
    }

    const PpaResult step = solve_ncsc(sub, eps_k, eps_k / 2.0, x_init, y, caps, counters);
    x = step.x;
    y = step.y;

    // subproblem value envelope: the certified output cannot exceed the start
    // envelope by more than the allowed growth ½(L_k⁻¹+σ⁻²L_k)ε_k²
    if (opt.monitors && have_value_meta) {
      ++res.monitors.subproblem_value_checks;
      const double growth = 0.5 * (1.0 / L_k + L_k / (sigma * sigma)) * eps_k * eps_k;
      const detail::MaxOverY m = detail::al_max_over_y(base, x, lx, ly, rho_k, L_k);
      if (m.ok && m.value > start_envelope + growth + m.slack) {
        ++res.monitors.subproblem_value_violations;
      }
    }

    // safeguarded multiplier updates
    Vec lx_tilde;
    if (base.c) {
      const Vec cv = base.c->value(x, Vec());
      lx_tilde = (lx + rho_k * cv).cwiseMax(0.0);
      lx = project_nonneg_ball(opt.Lambda, lx + rho_k * cv);
    }
    if (base.d) {
      const Vec dv = base.d->value(x, y);
      ly = (ly + rho_k * dv).cwiseMax(0.0);

      // once the penalty clears the Slater threshold, the y-constraint
      // violation obeys the multiplier-scaled feasibility envelope
      if (opt.monitors && std::isfinite(prob.Delta) && std::isfinite(prob.delta_d) &&
          prob.delta_d > 0) {
        const double dd2 = prob.delta_d * prob.delta_d;
        const double threshold = 4.0 * norm_ly0 * norm_ly0 / dd2 +
                                 8.0 * (prob.Delta + D_y) / (dd2 * (1.0 - opt.tau));
        if (rho_k >= threshold) {
          ++res.monitors.y_feasibility_checks;
          const double viol = dv.cwiseMax(0.0).norm();
          const double bound = 2.0 * (prob.Delta + D_y) / (rho_k * prob.delta_d);
          const double slack = 1e-9 * (1.0 + bound);
          if (viol > ly.norm() / rho_k + slack || ly.norm() / rho_k > bound + slack) {
            ++res.monitors.y_feasibility_violations;
          }
        }
      }
    }

    res.trace.push_back(
        {k, eps_k, rho_k, L_k, from_nf, step.outer_iters, lx.norm(), ly.norm()});

    if (eps_k <= opt.eps) {
      res.x = std::move(x);
      res.y = std::move(y);
      res.lambda_x = std::move(lx);
      res.lambda_x_tilde = std::move(lx_tilde);
      res.lambda_y = std::move(ly);
      res.outer_iters = k + 1;
      return res;
    }
  }
  // unreachable: ε_K ≤ eps by the definition of K
  throw SolveFailure("constrained solver failed to reach its terminal accuracy");
}

}  // namespace minimax_al
