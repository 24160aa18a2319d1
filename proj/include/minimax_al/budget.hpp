#pragma once
// Closed-form worst-case iteration/oracle budgets for the three solver layers,
// plus the solvability condition on the target accuracy. Pure arithmetic on
// caller-supplied constants; used for reporting and for safety-capped loops.

#include <minimax_al/core.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace minimax_al {

namespace detail {

inline double pos_part(double v) { return v > 0.0 ? v : 0.0; }

/// ⌈v⌉ clamped to [0, ~9e17] so downstream arithmetic (×10 safety factors)
/// stays inside long long.
inline long long ceil_pos(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  const double c = std::ceil(v);
  if (c >= 9.0e17) return 900000000000000000LL;
  return static_cast<long long>(c);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Saddle-solver budget (strongly-convex–strongly-concave layer)
// ---------------------------------------------------------------------------

/// Corrector-trip cap per outer iteration: ⌈96·√2·(1 + 8·L/σx)⌉ + 2.
inline long long foam_inner_trip_cap(double sigma_x, double L_grad) {
  return detail::ceil_pos(96.0 * std::sqrt(2.0) * (1.0 + 8.0 * L_grad / sigma_x)) + 2;
}

struct FoamBudgetInputs {
  double sigma_x = 0, sigma_y = 0, L_grad = 0;
  double eps_bar = 0;      ///< target certificate residual
  double D_x = 0, D_y = 0; ///< domain diameters
  double value_gap = 0;    ///< upper bound on (saddle value − global lower bound)
  /// optional potential bound; NaN → default δ̄ + (2/ᾱ)·value_gap (the distance
  /// terms are absorbed by δ̄ because η_z⁻¹σx²D_x² = 2σxD_x² and η_y⁻¹ equals
  /// the δ̄ coefficient max{2σy, ᾱσx/4})
  double theta0 = std::numeric_limits<double>::quiet_NaN();
};

struct FoamBudget {
  double alpha_bar = 0;
  double delta_bar = 0;
  double theta0 = 0;
  long long outer = 0;          ///< certified-termination outer-iteration bound
  long long inner_per_call = 0; ///< corrector trips per outer iteration
  double total_oracle = 0;      ///< gradient/prox evaluation bound
};

inline FoamBudget foam_budget(const FoamBudgetInputs& in) {
  detail::require(in.sigma_x > 0 && in.sigma_y > 0 && in.L_grad >= std::max(in.sigma_x, in.sigma_y),
                  "foam_budget: need 0 < sigma ≤ L_grad");
  detail::require(in.eps_bar > 0, "foam_budget: eps_bar must be positive");
  const double sx = in.sigma_x, sy = in.sigma_y, L = in.L_grad;

  FoamBudget out;
  out.alpha_bar = std::min(1.0, std::sqrt(8.0 * sy / sx));
  const double a = out.alpha_bar;
  out.delta_bar = (2.0 + 1.0 / a) * sx * in.D_x * in.D_x +
                  std::max(2.0 * sy, a * sx / 4.0) * in.D_y * in.D_y;
  out.theta0 = std::isfinite(in.theta0) ? in.theta0
                                        : out.delta_bar + (2.0 / a) * detail::pos_part(in.value_gap);
  out.inner_per_call = foam_inner_trip_cap(sx, L);

  const double eta_y = std::min(1.0 / (2.0 * sy), 4.0 / (a * sx));
  const double zeta_bar = std::min(sx, sy) / (L * L);
  const double outer_rate = std::max(2.0 / a, a * sx / (4.0 * sy));
  const double outer_log = std::log(4.0 * std::max(0.5 / sx, eta_y) * out.theta0 *
                                    std::pow(1.0 / zeta_bar + L, 2.0) /
                                    (in.eps_bar * in.eps_bar));
  out.outer = detail::ceil_pos(outer_rate * outer_log);

  const double inner_gap = out.delta_bar + (2.0 / a) * detail::pos_part(in.value_gap);
  const double inner_log =
      std::log(4.0 * std::max(1.0 / (2.0 * sx), eta_y) * inner_gap *
               std::pow(L * L / std::min(sx, sy) + L, 2.0) / (in.eps_bar * in.eps_bar));
  out.total_oracle = static_cast<double>(detail::ceil_pos(
                         std::max(2.0, std::sqrt(sx / (2.0 * sy))) * inner_log)) *
                     static_cast<double>(out.inner_per_call);
  return out;
}

// ---------------------------------------------------------------------------
// Proximal-point wrapper budget (nonconvex–strongly-concave layer)
// ---------------------------------------------------------------------------

struct PpaBudgetInputs {
  double L_grad = 0, sigma_y = 0; ///< constants of the smooth coupling h
  double D_x = 0, D_y = 0;
  double eps = 0, eps_hat0 = 0;
  double H0_max = 0;     ///< upper bound on max_y H(x⁰, y)
  double H_star_low = 0; ///< lower bound on the optimal value H*
  double H_low = 0;      ///< lower bound on H over the domains
};

struct PpaBudget {
  double alpha_hat = 0;
  double delta_hat = 0;
  long long outer = 0;     ///< proximal-step bound T̂
  double total_oracle = 0; ///< gradient/prox evaluation bound N̂
  /// allowed growth of the hyper-objective from x⁰ to the output:
  /// 2·ε̂₀²·(L⁻¹ + σ⁻²L)
  double value_growth = 0;
};

inline PpaBudget ppa_budget(const PpaBudgetInputs& in) {
  detail::require(in.L_grad > 0 && in.sigma_y > 0, "ppa_budget: need positive constants");
  detail::require(in.eps > 0 && in.eps_hat0 > 0 && in.eps_hat0 <= in.eps / 2.0 + 1e-15,
                  "ppa_budget: need 0 < eps_hat0 ≤ eps/2");
  const double L = in.L_grad, s = in.sigma_y;

  PpaBudget out;
  out.alpha_hat = std::min(1.0, std::sqrt(8.0 * s / L));
  const double a = out.alpha_hat;
  out.delta_hat = (2.0 + 1.0 / a) * L * in.D_x * in.D_x +
                  std::max(2.0 * s, a * L / 4.0) * in.D_y * in.D_y;
  out.value_growth = 2.0 * in.eps_hat0 * in.eps_hat0 * (1.0 / L + L / (s * s));

  const double eps2 = in.eps * in.eps;
  out.outer = detail::ceil_pos(16.0 * detail::pos_part(in.H0_max - in.H_star_low) * L / eps2 +
                               32.0 * in.eps_hat0 * in.eps_hat0 * (1.0 + L * L / (s * s)) / eps2 -
                               1.0);

  const double gap2 = detail::pos_part(in.H0_max - in.H_low);
  const double log_arg =
      4.0 * std::max(1.0 / (2.0 * L), std::min(1.0 / (2.0 * s), 4.0 / (a * L))) *
      (out.delta_hat + (2.0 / a) * (gap2 + L * in.D_x * in.D_x)) *
      std::pow(9.0 * L * L / std::min(L, s) + 3.0 * L, 2.0) /
      (in.eps_hat0 * in.eps_hat0);
  const double T = static_cast<double>(out.outer);
  out.total_oracle = 3397.0 * std::max(2.0, std::sqrt(L / (2.0 * s))) *
                     ((T + 1.0) * detail::pos_part(std::log(log_arg)) + T + 1.0 +
                      2.0 * T * std::log(T + 1.0));
  return out;
}

// ---------------------------------------------------------------------------
// Augmented-Lagrangian outer-layer budget and solvability condition
// ---------------------------------------------------------------------------

struct AlmBudgetInputs {
  double L_grad_f = 0;
  double L_c = 0, L_grad_c = 0, c_hi = 0;
  double L_d = 0, L_grad_d = 0, d_hi = 0;
  double sigma = 0;
  double Delta = 0; ///< upper bound on (sup F − inf F) over the boxes
  double D_x = 0, D_y = 0;
  double Lambda = 0;   ///< cap on ‖λ_x‖
  double norm_ly0 = 0; ///< ‖λ_y⁰‖
  double eps = 0, tau = 0;
  // optional regularity metadata (NaN when unavailable)
  double delta_c = std::numeric_limits<double>::quiet_NaN();
  double delta_d = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  double L_F = std::numeric_limits<double>::quiet_NaN();
};

struct AlmBudget {
  double L = 0;     ///< smoothness envelope valid for every outer iteration
  double alpha = 0;
  double delta = 0;
  double M = 0;     ///< inner log-argument constant (final-penalty reading, see flag)
  long long T = 0;  ///< per-outer proximal-step bound
  long long K = 0;  ///< last outer index; the run makes K+1 outer iterations
  double N = 0;     ///< total gradient/prox evaluation bound
  /// the penalty appearing inside M is read as the final (largest) one ρ_K
  bool M_uses_final_penalty = true;
  int cond_ok = -1;            ///< 1 satisfied, 0 violated, −1 not checkable
  double cond_required = std::numeric_limits<double>::quiet_NaN(); ///< threshold on ε⁻¹
  // ε-KKT right-hand-side factors (multiples of ε); NaN when metadata missing
  double feas_c_factor = std::numeric_limits<double>::quiet_NaN();
  double comp_c_factor = std::numeric_limits<double>::quiet_NaN();
  double feas_d_factor = std::numeric_limits<double>::quiet_NaN();
  double comp_d_factor = std::numeric_limits<double>::quiet_NaN();
};

inline AlmBudget alm_budget(const AlmBudgetInputs& in) {
  detail::require(in.sigma > 0 && in.L_grad_f > 0, "alm_budget: need positive constants");
  detail::require(in.eps > 0 && in.eps < 1 && in.tau > 0 && in.tau < 1,
                  "alm_budget: need eps, tau in (0,1)");
  AlmBudget out;

  const double carry = in.norm_ly0 * in.norm_ly0 + 2.0 * (in.Delta + in.D_y) / (1.0 - in.tau);
  out.L = in.L_grad_f + in.L_c * in.L_c + in.c_hi * in.L_grad_c + in.Lambda * in.L_grad_c +
          in.L_d * in.L_d + in.d_hi * in.L_grad_d + in.L_grad_d * std::sqrt(carry);
  const double L = out.L, s = in.sigma;

  out.alpha = std::min(1.0, std::sqrt(8.0 * s / L));
  const double a = out.alpha;
  out.delta = (2.0 + 1.0 / a) * L * in.D_x * in.D_x +
              std::max(2.0 * s, L / 4.0) * in.D_y * in.D_y;

  out.K = detail::ceil_pos(std::log(in.eps) / std::log(in.tau));
  const double rho_K = std::pow(in.tau, -static_cast<double>(out.K));

  if (in.L_c > 0) {
    out.M = 16.0 * std::max(1.0 / (2.0 * in.L_c * in.L_c), 4.0 / (a * in.L_c * in.L_c)) *
            std::pow(81.0 / std::min(in.L_c * in.L_c, s) + 3.0 * L, 2.0) *
            (out.delta +
             (2.0 / a) * (in.Delta + in.Lambda * in.Lambda / 2.0 +
                          1.5 * in.norm_ly0 * in.norm_ly0 +
                          3.0 * (in.Delta + in.D_y) / (1.0 - in.tau) +
                          rho_K * in.d_hi * in.d_hi + L * in.D_x * in.D_x));
  } else {
    out.M = std::numeric_limits<double>::quiet_NaN();
  }

  out.T = detail::ceil_pos(
      16.0 *
          (2.0 * in.Delta + in.Lambda + 0.5 * (1.0 / in.tau + in.norm_ly0 * in.norm_ly0) +
           (in.Delta + in.D_y) / (1.0 - in.tau) + in.Lambda * in.Lambda / 2.0) *
          L +
      8.0 * (1.0 + L * L / (s * s)));

  const double T = static_cast<double>(out.T);
  out.N = 3397.0 * std::max(2.0, std::sqrt(L / (2.0 * s))) * T /
          (1.0 - std::pow(in.tau, 3.5)) * std::pow(in.tau * in.eps, -3.5) *
          (20.0 * static_cast<double>(out.K) * std::log(1.0 / in.tau) +
           2.0 * detail::pos_part(std::log(out.M)) + 2.0 + 2.0 * std::log(2.0 * T));

  if (std::isfinite(in.theta) && std::isfinite(in.delta_d) && in.theta > 0 &&
      in.delta_d > 0 && in.L_c > 0) {
    const double th2 = in.theta * in.theta;
    const double dd2 = in.delta_d * in.delta_d;
    out.cond_required = std::max(
        {1.0, in.Lambda / in.theta,
         (4.0 * in.Delta + 2.0 * in.Lambda + 1.0 / in.tau + in.norm_ly0 * in.norm_ly0 +
          2.0 * (in.Delta + in.D_y) / (1.0 - in.tau) + 1.0 / (in.L_c * in.L_c) + L / (s * s) +
          in.Lambda * in.Lambda) /
             th2,
         4.0 * in.norm_ly0 * in.norm_ly0 / (dd2 * in.tau) +
             8.0 * (in.Delta + in.D_y) / (dd2 * in.tau * (1.0 - in.tau))});
    out.cond_ok = (1.0 / in.eps >= out.cond_required) ? 1 : 0;
  }

  if (std::isfinite(in.delta_c) && std::isfinite(in.delta_d) && std::isfinite(in.L_F) &&
      in.delta_c > 0 && in.delta_d > 0) {
    const double fd = 2.0 * (in.Delta + in.D_y) / in.delta_d;
    const double fc = (in.L_F + in.L_d * fd + 1.0) / in.delta_c;
    out.feas_c_factor = fc;
    out.comp_c_factor = fc * std::max(fc, in.Lambda);
    out.feas_d_factor = fd;
    out.comp_d_factor = fd * std::max(fd, in.norm_ly0);
  }
  return out;
}

}  // namespace minimax_al
