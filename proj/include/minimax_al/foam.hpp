#pragma once
// Certified solver for strongly-convex–strongly-concave saddle problems
//   min_x max_y  h̄(x,y) + p(x) − q(y)
// with prox-friendly p, q. An accelerated dual sequence drives a
// self-terminating corrector loop; termination is certified by a
// forward–backward residual whose witness is returned with the point.

#include <minimax_al/budget.hpp>
#include <minimax_al/core.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace minimax_al {

/// Smooth saddle term with its moduli. The gradient oracle is joint: one call
/// evaluates both partials (and is where callers hook eval counting).
struct SaddleSubproblem {
  std::function<void(const Vec& x, const Vec& y, Vec& gx, Vec& gy)> grad;
  std::function<double(const Vec&, const Vec&)> value;  ///< optional, diagnostics only
  double sigma_x = 0;  ///< strong-convexity modulus of h̄(·,y)
  double sigma_y = 0;  ///< strong-concavity modulus of h̄(x,·)
  double L_grad = 0;   ///< joint smoothness of ∇h̄
  ProxFriendly p, q;
};

inline void validate(const SaddleSubproblem& sub) {
  detail::require(static_cast<bool>(sub.grad), "SaddleSubproblem: missing gradient oracle");
  detail::require(sub.sigma_x > 0 && sub.sigma_y > 0, "SaddleSubproblem: moduli must be positive");
  detail::require(sub.L_grad >= std::max(sub.sigma_x, sub.sigma_y),
                  "SaddleSubproblem: L_grad must dominate both moduli");
}

/// Step sizes derived from the subproblem constants.
struct FoamParams {
  double alpha_bar = 0;  ///< momentum mix, min{1, √(8σy/σx)}
  double eta_z = 0;      ///< dual step in z, σx/2
  double eta_y = 0;      ///< dual step in y, min{1/(2σy), 4/(ᾱσx)}
  double zeta = 0;       ///< corrector step, (2√5(1 + 8L/σx))⁻¹
  double gamma_x = 0;    ///< corrector scaling, 8/σx
  double gamma_y = 0;    ///< corrector scaling, 8/σx
  double zeta_bar = 0;   ///< certificate prox step, min{σx,σy}/L²

  static FoamParams from(const SaddleSubproblem& sub) {
    const double sx = sub.sigma_x, sy = sub.sigma_y, L = sub.L_grad;
    FoamParams pr;
    pr.alpha_bar = std::min(1.0, std::sqrt(8.0 * sy / sx));
    pr.eta_z = sx / 2.0;
    pr.eta_y = std::min(1.0 / (2.0 * sy), 4.0 / (pr.alpha_bar * sx));
    pr.zeta = 1.0 / (2.0 * std::sqrt(5.0) * (1.0 + 8.0 * L / sx));
    pr.gamma_x = 8.0 / sx;
    pr.gamma_y = 8.0 / sx;
    pr.zeta_bar = std::min(sx, sy) / (L * L);
    return pr;
  }

  /// corrector extrapolation weight at trip t (t = 0, 1, …)
  static double beta(long long t) { return 2.0 / static_cast<double>(t + 3); }
};

/// ∇ĥ of the tilted term ĥ(x,y) = h̄(x,y) − (σx/2)‖x‖² + (σy/2)‖y‖².
/// Costs one joint gradient evaluation.
inline void hat_h_grads(const SaddleSubproblem& sub, const Vec& x, const Vec& y,
                        Vec& gx, Vec& gy) {
  sub.grad(x, y, gx, gy);
  gx -= sub.sigma_x * x;
  gy += sub.sigma_y * y;
}

/// Monotone corrector field around the running anchors (z_g, y_g):
///   a_x(x,y) = ∇x ĥ(x,y) + (σx/2)(x − z_g/σx)
///   a_y(x,y) = −∇y ĥ(x,y) + σy·y + (σx/8)(y − y_g)
/// Costs one joint gradient evaluation.
inline void a_field(const SaddleSubproblem& sub, const Vec& x, const Vec& y,
                    const Vec& z_g, const Vec& y_g, Vec& ax, Vec& ay) {
  hat_h_grads(sub, x, y, ax, ay);
  const double sx = sub.sigma_x;
  ax += 0.5 * sx * (x - z_g / sx);
  ay = -ay + sub.sigma_y * y + (sx / 8.0) * (y - y_g);
}

/// Output of a certified solve. (x, y) are prox outputs (inside the domains);
/// the witness is a concrete element of the saddle subdifferential at (x, y)
/// with ‖(witness_x, witness_y)‖ = residual ≤ the requested tolerance.
struct Certificate {
  Vec x, y;
  double residual = std::numeric_limits<double>::infinity();
  Vec witness_x, witness_y;
  long long outer_iters = 0;
  std::vector<int> inner_trips;  ///< corrector trips per outer iteration
};

/// Diagnostic failure: an iteration cap was exceeded.
class SolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration caps. Negative entries select defaults: the corrector cap
/// 10·⌈96√2(1+8L/σx)⌉+20, and the outer cap 10× the certified budget when
/// a value-gap bound is supplied (else a defensive constant).
struct FoamCaps {
  long long max_outer = -1;
  long long max_inner = -1;
  double value_gap_bound = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct InnerResult {
  Vec x, y;      ///< corrector point (x_f, y_f); prox outputs
  Vec b_x, b_y;  ///< implicit regularizer subgradients at (x, y)
  Vec hat_gx, hat_gy;  ///< ∇ĥ(x, y), cached from the final acceptance check
  int trips = 0;
};

/// Self-terminating corrector loop at anchors (z_g, y_g). Exits when the
/// field-plus-subgradient norm is dominated by the distance to the
/// extrapolation base point.
inline InnerResult inner_loop(const SaddleSubproblem& sub, const FoamParams& pr,
                              const Vec& z_g, const Vec& y_g, long long max_inner,
                              EvalCounters& counters) {
  const double sx = sub.sigma_x;
  const double sgx = pr.zeta * pr.gamma_x;
  const double sgy = pr.zeta * pr.gamma_y;

  const Vec x_base = -z_g / sx;
  const Vec& y_base = y_g;

  Vec hgx, hgy, ax, ay;
  const auto eval_a = [&](const Vec& x, const Vec& y) {
    sub.grad(x, y, hgx, hgy);
    hgx -= sx * x;
    hgy += sub.sigma_y * y;
    ax = hgx + 0.5 * sx * (x - z_g / sx);
    ay = -hgy + sub.sigma_y * y + (sx / 8.0) * (y - y_g);
  };

  eval_a(x_base, y_base);
  Vec u = x_base - sgx * ax;
  const Vec x0 = sub.p.prox(sgx, u);
  ++counters.prox_p;
  const Vec bx0 = (u - x0) / sgx;
  u = y_base - sgy * ay;
  const Vec y0 = sub.q.prox(sgy, u);
  ++counters.prox_q;
  const Vec by0 = (u - y0) / sgy;

  InnerResult r;
  r.x = x0;
  r.y = y0;
  r.b_x = bx0;
  r.b_y = by0;

  for (long long t = 0;; ++t) {
    eval_a(r.x, r.y);
    const double lhs = pr.gamma_x * (ax + r.b_x).squaredNorm() +
                       pr.gamma_y * (ay + r.b_y).squaredNorm();
    const double rhs = (r.x - x_base).squaredNorm() / pr.gamma_x +
                       (r.y - y_base).squaredNorm() / pr.gamma_y;
    // Floating-point tie-break: exact-arithmetic ties (e.g. anchored at the
    // saddle, 0 ≤ 0) leave both sides at rounding-noise scale, so allow an
    // absolute slack at squared machine noise. Inert at any practical target.
    const double noise = 1e-13 * (1.0 + hgx.norm() + hgy.norm() +
                                  sx * (r.x.norm() + x_base.norm()) +
                                  sub.sigma_y * (r.y.norm() + y_base.norm()));
    if (lhs <= rhs + (pr.gamma_x + pr.gamma_y) * noise * noise) {
      r.hat_gx = hgx;
      r.hat_gy = hgy;
      r.trips = static_cast<int>(t);
      return r;
    }
    if (t >= max_inner)
      throw SolveFailure("corrector loop exceeded its trip cap (" +
                         std::to_string(max_inner) + ")");
    const double bt = FoamParams::beta(t);
    const Vec xh = r.x + bt * (x0 - r.x) - sgx * (ax + r.b_x);
    const Vec yh = r.y + bt * (y0 - r.y) - sgy * (ay + r.b_y);
    eval_a(xh, yh);
    u = r.x + bt * (x0 - r.x) - sgx * ax;
    r.x = sub.p.prox(sgx, u);
    ++counters.prox_p;
    r.b_x = (u - r.x) / sgx;
    u = r.y + bt * (y0 - r.y) - sgy * ay;
    r.y = sub.q.prox(sgy, u);
    ++counters.prox_q;
    r.b_y = (u - r.y) / sgy;
  }
}

}  // namespace detail

/// Solve to certificate residual ≤ eps_bar from the dual start z0 ∈ −σx·dom p,
/// y0 ∈ dom q. Throws SolveFailure when a cap is exceeded.
inline Certificate solve_sccsc(const SaddleSubproblem& sub, double eps_bar, Vec z0,
                               Vec y0, const FoamCaps& caps, EvalCounters& counters) {
  validate(sub);
  detail::require(eps_bar > 0, "solve_sccsc: eps_bar must be positive");
  const double sx = sub.sigma_x, sy = sub.sigma_y;
  detail::require(sub.p.domain.contains(-z0 / sx, 1e-9),
                  "solve_sccsc: z0 must lie in −σx·dom p");
  detail::require(sub.q.domain.contains(y0, 1e-9), "solve_sccsc: y0 must lie in dom q");

  const FoamParams pr = FoamParams::from(sub);

  long long max_inner = caps.max_inner;
  if (max_inner < 0) max_inner = 10 * foam_inner_trip_cap(sx, sub.L_grad) + 20;
  long long max_outer = caps.max_outer;
  if (max_outer < 0) {
    if (std::isfinite(caps.value_gap_bound)) {
      FoamBudgetInputs bi;
      bi.sigma_x = sx;
      bi.sigma_y = sy;
      bi.L_grad = sub.L_grad;
      bi.eps_bar = eps_bar;
      bi.D_x = box_diameter(sub.p.domain);
      bi.D_y = box_diameter(sub.q.domain);
      bi.value_gap = caps.value_gap_bound;
      max_outer = 10 * std::max(foam_budget(bi).outer, 1LL);
    } else {
      max_outer = 1000000;
    }
  }

  Vec z = std::move(z0), y = std::move(y0);
  Vec z_f = z, y_f = y;
  Certificate cert;
  Vec gx1, gy1, gx2, gy2;

  for (long long k = 0; k < max_outer; ++k) {
    const Vec z_g = pr.alpha_bar * z + (1.0 - pr.alpha_bar) * z_f;
    const Vec y_g = pr.alpha_bar * y + (1.0 - pr.alpha_bar) * y_f;

    detail::InnerResult in = detail::inner_loop(sub, pr, z_g, y_g, max_inner, counters);
    cert.inner_trips.push_back(in.trips);

    // dual targets from the corrector point and its implicit subgradients
    const Vec z_f_next = in.hat_gx + in.b_x;
    const Vec w_f_next = -in.hat_gy + in.b_y;

    const Vec z_next =
        z + (pr.eta_z / sx) * (z_f_next - z) - pr.eta_z * (in.x + z_f_next / sx);
    const Vec y_next =
        y + pr.eta_y * sy * (in.y - y) - pr.eta_y * (w_f_next + sy * in.y);
    const Vec x_next = -z_next / sx;

    // certified stopping test: forward–backward residual with curvature correction
    sub.grad(x_next, y_next, gx1, gy1);
    const Vec x_t = sub.p.prox(pr.zeta_bar, x_next - pr.zeta_bar * gx1);
    ++counters.prox_p;
    const Vec y_t = sub.q.prox(pr.zeta_bar, y_next + pr.zeta_bar * gy1);
    ++counters.prox_q;
    sub.grad(x_t, y_t, gx2, gy2);
    cert.witness_x = (x_next - x_t) / pr.zeta_bar - (gx1 - gx2);
    cert.witness_y = (y_t - y_next) / pr.zeta_bar - (gy1 - gy2);
    cert.residual =
        std::sqrt(cert.witness_x.squaredNorm() + cert.witness_y.squaredNorm());
    cert.x = x_t;
    cert.y = y_t;
    cert.outer_iters = k + 1;
    if (cert.residual <= eps_bar) return cert;

    z = z_next;
    y = y_next;
    z_f = z_f_next;
    y_f = in.y;
  }
  throw SolveFailure("outer iteration cap exceeded (" + std::to_string(max_outer) +
                     "), last residual " + std::to_string(cert.residual));
}

}  // namespace minimax_al
