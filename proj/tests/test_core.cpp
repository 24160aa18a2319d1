// Core types: boxes, prox/projection primitives, extended reals, counters.
#include <catch2/catch_amalgamated.hpp>

#include <minimax_al/core.hpp>

#include <random>

using namespace minimax_al;

namespace {
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("prox_box clamps componentwise and ignores the step size") {
  const Box box = Box::centered(2, 1.0);
  CHECK(prox_box(box, 0.7, vec2(2.0, -0.3)) == vec2(1.0, -0.3));
  CHECK(prox_box(box, 1e-9, vec2(2.0, -0.3)) == vec2(1.0, -0.3));
  CHECK(prox_box(box, 1e9, vec2(-5.0, 5.0)) == vec2(-1.0, 1.0));
  // interior points are fixed points
  CHECK(prox_box(box, 3.0, vec2(0.25, -0.75)) == vec2(0.25, -0.75));
  CHECK_THROWS_AS(prox_box(box, 0.0, vec2(0, 0)), std::invalid_argument);
}

TEST_CASE("prox_box is idempotent and nonexpansive on sampled points") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const Box box = Box::centered(4, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec v(4), w(4);
    for (int i = 0; i < 4; ++i) {
      v[i] = u(gen);
      w[i] = u(gen);
    }
    const Vec pv = prox_box(box, 1.0, v);
    const Vec pw = prox_box(box, 1.0, w);
    CHECK(box.contains(pv));
    CHECK(prox_box(box, 1.0, pv) == pv);
    CHECK((pv - pw).norm() <= (v - w).norm() + 1e-15);
  }
}

TEST_CASE("project_nonneg_ball") {
  SECTION("already feasible points are fixed") {
    CHECK(project_nonneg_ball(5.0, vec2(3.0, 4.0)) == vec2(3.0, 4.0));
    CHECK(project_nonneg_ball(0.0, vec2(-1.0, -2.0)) == vec2(0.0, 0.0));
  }
  SECTION("negative parts are clipped before the radial scaling") {
    CHECK(project_nonneg_ball(1.0, vec2(-1.0, 2.0)) == vec2(0.0, 1.0));
  }
  SECTION("radial scaling matches a brute-force grid search") {
    const Vec v = vec2(3.0, 4.0);
    const Vec w = project_nonneg_ball(1.0, v);
    CHECK(w[0] == Catch::Approx(0.6).margin(1e-15));
    CHECK(w[1] == Catch::Approx(0.8).margin(1e-15));
    // independent oracle: dense grid over the feasible set
    double best = 1e100;
    Vec best_w = vec2(0, 0);
    for (double a = 0.0; a <= 1.0; a += 1e-3) {
      for (double b = 0.0; b * b + a * a <= 1.0; b += 1e-3) {
        const double dist2 = (a - 3.0) * (a - 3.0) + (b - 4.0) * (b - 4.0);
        if (dist2 < best) {
          best = dist2;
          best_w = vec2(a, b);
        }
      }
    }
    CHECK((w - best_w).norm() < 2e-3);
    CHECK_THROWS_AS(project_nonneg_ball(-1.0, v), std::invalid_argument);
  }
}

TEST_CASE("box_diameter") {
  CHECK(box_diameter(Box::centered(9, 1.0)) == Catch::Approx(6.0));
  CHECK(box_diameter(Box(vec2(0, 0), vec2(0, 0))) == 0.0);
}

TEST_CASE("ExtReal ordering is total") {
  const ExtReal a = ExtReal::finite(1.5);
  const ExtReal b = ExtReal::finite(2.0);
  CHECK(a < b);
  CHECK(ExtReal::neg_inf() < a);
  CHECK(a < ExtReal::pos_inf());
  CHECK(ExtReal::neg_inf() < ExtReal::pos_inf());
  CHECK(ExtReal::pos_inf() == ExtReal::pos_inf());
  CHECK(ExtReal::pos_inf() <= ExtReal::pos_inf());
  CHECK_FALSE(ExtReal::pos_inf() < ExtReal::pos_inf());
  CHECK(a.value() == 1.5);
  CHECK_THROWS_AS(ExtReal::pos_inf().value(), std::invalid_argument);
  CHECK_THROWS_AS(ExtReal::finite(std::nan("")), std::invalid_argument);
}

namespace {
MinimaxProblem tiny_problem() {
  MinimaxProblem prob;
  prob.f.value = [](const Vec& x, const Vec& y) { return x[0] * y[0]; };
  prob.f.grad_x = [](const Vec&, const Vec& y) { return y; };
  prob.f.grad_y = [](const Vec& x, const Vec&) { return x; };
  prob.f.L_grad = 1.0;
  prob.f.sigma_y = 0.0;
  prob.p.domain = Box::centered(1, 1.0);
  prob.q.domain = Box::centered(1, 1.0);
  return prob;
}
}  // namespace

TEST_CASE("eval_F returns the coupling on-domain and signed infinities off-domain") {
  const MinimaxProblem prob = tiny_problem();
  Vec in(1), out(1);
  in << 0.5;
  out << 2.0;
  CHECK(eval_F(prob, in, in).value() == Catch::Approx(0.25));
  CHECK(eval_F(prob, out, in).is_pos_inf());
  CHECK(eval_F(prob, in, out).is_neg_inf());
  CHECK_THROWS_AS(eval_F(prob, out, out), std::invalid_argument);
}

TEST_CASE("EvalCounters start at zero and compare by value") {
  EvalCounters a, b;
  CHECK(a == b);
  CHECK(a.grad_f == 0);
  b.prox_q = 3;
  CHECK_FALSE(a == b);
}
