#pragma once
// Core problem abstraction: boxes, prox-friendly regularizers, smooth couplings,
// functional constraint maps, and oracle-evaluation counters.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace minimax_al {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace detail

/// Extended-real scalar with explicit ±∞ states. Indicator terms can put a
/// point off-domain; an explicit three-state value keeps comparisons total
/// instead of relying on IEEE infinity edge cases.
class ExtReal {
 public:
  static ExtReal finite(double v) {
    detail::require(std::isfinite(v), "ExtReal: finite() needs a finite payload");
    return ExtReal(0, v);
  }
  static ExtReal pos_inf() { return ExtReal(+1, 0.0); }
  static ExtReal neg_inf() { return ExtReal(-1, 0.0); }

  bool is_finite() const { return state_ == 0; }
  bool is_pos_inf() const { return state_ > 0; }
  bool is_neg_inf() const { return state_ < 0; }

  /// Finite payload; calling this on an infinite value is a caller error.
  double value() const {
    detail::require(state_ == 0, "ExtReal: value() called on an infinite value");
    return v_;
  }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    return a.state_ == b.state_ && (a.state_ != 0 || a.v_ == b.v_);
  }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.state_ != b.state_) return a.state_ < b.state_;
    return a.state_ == 0 && a.v_ < b.v_;
  }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return a < b || a == b; }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return b <= a; }

 private:
  ExtReal(int state, double v) : state_(state), v_(v) {}
  int state_;
  double v_;
};

/// Axis-aligned compact box {v : lower ≤ v ≤ upper}, all bounds finite.
struct Box {
  Vec lower, upper;

  Box() = default;
  Box(Vec lo, Vec up) : lower(std::move(lo)), upper(std::move(up)) {
    detail::require(lower.size() == upper.size(), "Box: bound size mismatch");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      detail::require(std::isfinite(lower[i]) && std::isfinite(upper[i]),
                      "Box: bounds must be finite");
      detail::require(lower[i] <= upper[i], "Box: lower > upper");
    }
  }

  /// [-radius, radius]^dim
  static Box centered(Eigen::Index dim, double radius) {
    return Box(Vec::Constant(dim, -radius), Vec::Constant(dim, radius));
  }

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const Vec& v, double tol = 0.0) const {
    detail::require(v.size() == dim(), "Box::contains: size mismatch");
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v[i] < lower[i] - tol || v[i] > upper[i] + tol) return false;
    return true;
  }

  Vec clamp(const Vec& v) const {
    detail::require(v.size() == dim(), "Box::clamp: size mismatch");
    return v.cwiseMax(lower).cwiseMin(upper);
  }
};

inline double box_diameter(const Box& b) { return (b.upper - b.lower).norm(); }

/// Proximal step of a box indicator: the Euclidean projection, for every step
/// size gamma > 0.
inline Vec prox_box(const Box& b, double gamma, const Vec& v) {
  detail::require(gamma > 0.0, "prox_box: gamma must be positive");
  return b.clamp(v);
}

/// Euclidean projection onto {w ≥ 0, ‖w‖ ≤ cap}. Clipping to the orthant and
/// then scaling radially into the ball is the exact projection onto the
/// intersection (the ball is centered at the cone's apex).
inline Vec project_nonneg_ball(double cap, const Vec& v) {
  detail::require(cap >= 0.0, "project_nonneg_ball: cap must be nonnegative");
  Vec w = v.cwiseMax(0.0);
  const double n = w.norm();
  if (n > cap) {
    w *= cap / n;
    // rounding in the rescale may overshoot by a few ulps; the cap is a hard
    // invariant for callers, so nudge back inside
    while (w.norm() > cap) w *= 1.0 - std::numeric_limits<double>::epsilon();
  }
  return w;
}

/// Oracle-evaluation counters, owned by a per-solve context (no global state).
/// A proximal step of p counts as one prox_p evaluation regardless of the step
/// size; one augmented-Lagrangian gradient costs one each of grad_f/grad_c/grad_d.
struct EvalCounters {
  std::uint64_t grad_f = 0;
  std::uint64_t grad_c = 0;
  std::uint64_t grad_d = 0;
  std::uint64_t prox_p = 0;
  std::uint64_t prox_q = 0;

  friend bool operator==(const EvalCounters&, const EvalCounters&) = default;
};

/// Convex regularizer with an easy proximal operator and a compact box domain.
/// With both closures empty it is the plain box indicator (value 0 on the box,
/// prox = projection), which is the case all shipped instances use.
struct ProxFriendly {
  Box domain;
  /// Finite part of the value on the domain; empty means identically 0.
  std::function<double(const Vec&)> value_fn;
  /// prox_{gamma*r}(v); empty means projection onto `domain`.
  std::function<Vec(double, const Vec&)> prox_fn;

  bool is_box_indicator() const { return !value_fn && !prox_fn; }

  double value(const Vec& v) const { return value_fn ? value_fn(v) : 0.0; }

  Vec prox(double gamma, const Vec& v) const {
    return prox_fn ? prox_fn(gamma, v) : prox_box(domain, gamma, v);
  }
};

/// Smooth coupling f(x,y): value and partial-gradient oracles plus the two
/// constants the solvers consume. Constants are caller-supplied and trusted.
struct SmoothCoupling {
  std::function<double(const Vec&, const Vec&)> value;
  std::function<Vec(const Vec&, const Vec&)> grad_x;
  std::function<Vec(const Vec&, const Vec&)> grad_y;
  double L_grad = 0.0;   ///< Lipschitz constant of ∇f (joint)
  double sigma_y = 0.0;  ///< strong-concavity modulus of f(x,·)
};

/// Vector-valued smooth constraint map with Jacobian-transpose products.
/// x-only maps (c) ignore the y argument and leave jt_y empty; coupled maps
/// (d) provide both products.
struct ConstraintMap {
  int dim = 0;  ///< number of scalar component constraints
  std::function<Vec(const Vec& x, const Vec& y)> value;
  std::function<Vec(const Vec& x, const Vec& y, const Vec& u)> jt_x;  ///< J_x(·)ᵀ u
  std::function<Vec(const Vec& x, const Vec& y, const Vec& u)> jt_y;  ///< J_y(·)ᵀ u
  double L = 0.0;       ///< Lipschitz constant of the map itself
  double L_grad = 0.0;  ///< Lipschitz constant of its Jacobian (0 if affine)
  double hi = 0.0;      ///< upper bound on ‖value‖ over the box domains

  bool depends_on_y() const { return static_cast<bool>(jt_y); }
};

/// min_x max_y F(x,y) = f(x,y) + p(x) − q(y), optionally with functional
/// constraints c(x) ≤ 0 and d(x,y) ≤ 0.
struct MinimaxProblem {
  SmoothCoupling f;
  ProxFriendly p, q;
  std::optional<ConstraintMap> c;
  std::optional<ConstraintMap> d;
};

/// F(x,y) as an extended real: +∞ off dom p, −∞ off dom q (x on-domain).
/// Both arguments off-domain at once is a caller error.
inline ExtReal eval_F(const MinimaxProblem& prob, const Vec& x, const Vec& y) {
  const bool x_in = prob.p.domain.contains(x);
  const bool y_in = prob.q.domain.contains(y);
  detail::require(x_in || y_in, "eval_F: x and y are both off-domain");
  if (!x_in) return ExtReal::pos_inf();
  if (!y_in) return ExtReal::neg_inf();
  return ExtReal::finite(prob.f.value(x, y) + prob.p.value(x) - prob.q.value(y));
}

}  // namespace minimax_al
