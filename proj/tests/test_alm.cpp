// Outer augmented-Lagrangian layer: penalty-function algebra, start
// selection, safeguarded multiplier updates, schedule length, convergence to
// a KKT point, and the runtime monitors.
#include <catch2/catch_amalgamated.hpp>

#include <minimax_al/alm.hpp>

#include <random>

using namespace minimax_al;

namespace {
Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

// f(x,y) = xy with c(x) = x − 1, d(x,y) = x + y − 1 on [−2,2]².
MinimaxProblem bilinear_constrained() {
  MinimaxProblem prob;
  prob.f.value = [](const Vec& x, const Vec& y) { return x[0] * y[0]; };
  prob.f.grad_x = [](const Vec&, const Vec& y) { return y; };
  prob.f.grad_y = [](const Vec& x, const Vec&) { return x; };
  prob.f.L_grad = 1.0;
  prob.f.sigma_y = 1.0;  // not SC in y; only the algebra helpers use this fixture
  prob.p.domain = Box::centered(1, 2.0);
  prob.q.domain = Box::centered(1, 2.0);
  ConstraintMap c;
  c.dim = 1;
  c.value = [](const Vec& x, const Vec&) { return vec1(x[0] - 1.0); };
  c.jt_x = [](const Vec&, const Vec&, const Vec& u) { return u; };
  c.L = 1.0;
  c.hi = 3.0;
  prob.c = c;
  ConstraintMap d;
  d.dim = 1;
  d.value = [](const Vec& x, const Vec& y) { return vec1(x[0] + y[0] - 1.0); };
  d.jt_x = [](const Vec&, const Vec&, const Vec& u) { return u; };
  d.jt_y = [](const Vec&, const Vec&, const Vec& u) { return u; };
  d.L = std::sqrt(2.0);
  d.hi = 5.0;
  prob.d = d;
  return prob;
}
}  // namespace

TEST_CASE("penalty value and gradient algebra") {
  const MinimaxProblem prob = bilinear_constrained();
  const Vec x = vec1(2.0), y = vec1(0.0), l0 = vec1(0.0);
  const double rho = 2.0;

  // f = 0; c = 1 adds (1/4)‖[2]₊‖² = 1; d = 1 subtracts the same
  CHECK(al_smooth_value(prob, x, y, l0, l0, rho) == Catch::Approx(0.0));
  CHECK(al_value(prob, x, y, l0, l0, rho) == Catch::Approx(0.0));
  // x-side only: 0 + 1
  CHECK(al_value_x(prob, x, y, l0, rho) == Catch::Approx(1.0));

  // ∇x = y + [ρc]₊ − [ρd]₊ = 0 + 2 − 2; ∇y = x − [ρd]₊ = 2 − 2
  Vec gx, gy;
  al_grads(prob, x, y, l0, l0, rho, gx, gy);
  CHECK(gx[0] == Catch::Approx(0.0));
  CHECK(gy[0] == Catch::Approx(0.0));

  SECTION("inactive penalties vanish") {
    const Vec xf = vec1(-1.0);  // c = −2, d = −2 at y = 0
    CHECK(al_smooth_value(prob, xf, y, l0, l0, rho) ==
          Catch::Approx(prob.f.value(xf, y)));
    al_grads(prob, xf, y, l0, l0, rho, gx, gy);
    CHECK(gx[0] == Catch::Approx(0.0));  // ∇x f = y = 0
    CHECK(gy[0] == Catch::Approx(-1.0));
  }
  SECTION("multipliers shift the kink") {
    // λx = 3 makes [λx+ρc]₊ = 3 at c = 0 (x = 1): value contribution cancels,
    // gradient contribution survives
    const Vec lx = vec1(3.0);
    CHECK(al_value_x(prob, vec1(1.0), y, lx, rho) == Catch::Approx(0.0));
    al_grads(prob, vec1(1.0), y, lx, l0, rho, gx, gy);
    CHECK(gx[0] == Catch::Approx(3.0));  // y + [λx+ρc]₊ − [λy+ρd]₊ = 0 + 3 − 0
  }
}

TEST_CASE("penalty gradients match central finite differences away from kinks") {
  const MinimaxProblem prob = bilinear_constrained();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  const double rho = 3.0, fd = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 60 && checked < 25; ++trial) {
    const Vec x = vec1(u(gen)), y = vec1(u(gen));
    const Vec lx = vec1(std::abs(u(gen))), ly = vec1(std::abs(u(gen)));
    // skip points near the max(0,·) kinks where the derivative jumps
    const double kc = lx[0] + rho * (x[0] - 1.0);
    const double kd = ly[0] + rho * (x[0] + y[0] - 1.0);
    if (std::abs(kc) < 1e-2 || std::abs(kd) < 1e-2) continue;
    ++checked;
    Vec gx, gy;
    al_grads(prob, x, y, lx, ly, rho, gx, gy);
    const double fdx = (al_smooth_value(prob, vec1(x[0] + fd), y, lx, ly, rho) -
                        al_smooth_value(prob, vec1(x[0] - fd), y, lx, ly, rho)) /
                       (2.0 * fd);
    const double fdy = (al_smooth_value(prob, x, vec1(y[0] + fd), lx, ly, rho) -
                        al_smooth_value(prob, x, vec1(y[0] - fd), lx, ly, rho)) /
                       (2.0 * fd);
    CHECK(gx[0] == Catch::Approx(fdx).margin(1e-5));
    CHECK(gy[0] == Catch::Approx(fdy).margin(1e-5));
  }
  CHECK(checked >= 25);
}

TEST_CASE("smoothness envelope arithmetic") {
  MinimaxProblem prob = bilinear_constrained();
  prob.c->L = 2.0;
  prob.c->L_grad = 0.5;
  prob.c->hi = 3.0;
  prob.d->L = 1.0;
  prob.d->L_grad = 1.0;
  prob.d->hi = 1.0;
  // 1 + 2·4 + 2·3·0.5 + 2·0.5 + 2·1 + 2·1·1 + 1·1 = 18
  CHECK(al_smoothness(prob, 2.0, 2.0, 1.0) == Catch::Approx(18.0));
  // affine maps (zero curvature) drop the multiplier terms
  prob.c->L_grad = 0.0;
  prob.d->L_grad = 0.0;
  CHECK(al_smoothness(prob, 2.0, 2.0, 1.0) == Catch::Approx(1.0 + 8.0 + 2.0));
}

TEST_CASE("concave box maximization helper") {
  // g(y) = −(y₀−0.3)² − 2(y₁+2)²: caps at y₁ = −1 on [−1,1]²
  const Box box = Box::centered(2, 1.0);
  const auto grad = [](const Vec& y) {
    Vec g(2);
    g << -2.0 * (y[0] - 0.3), -4.0 * (y[1] + 2.0);
    return g;
  };
  const auto r = detail::maximize_concave_box(grad, 2.0, 4.0, box,
                                              Vec(Vec::Zero(2)), 1e-10, 10000);
  CHECK(r.converged);
  CHECK(r.y[0] == Catch::Approx(0.3).margin(1e-8));
  CHECK(r.y[1] == Catch::Approx(-1.0).margin(1e-8));
  CHECK(r.residual < 1e-8);  // outward push at the bound does not count
}

TEST_CASE("find_nearly_feasible reduces the violation") {
  ConstraintMap c;
  c.dim = 2;
  c.value = [](const Vec& x, const Vec&) {
    Vec v(2);
    v << x[0] + x[1] - 1.0, x[0] - x[1] - 1.0;
    return v;
  };
  c.jt_x = [](const Vec&, const Vec&, const Vec& u) {
    Vec g(2);
    g << u[0] + u[1], u[0] - u[1];
    return g;
  };
  c.L = 2.0;
  c.hi = 9.0;
  EvalCounters counters;
  const Vec x = find_nearly_feasible(c, Box::centered(2, 2.0), Vec(Vec::Constant(2, 2.0)),
                                     1e-8, 100000, &counters);
  CHECK(c.value(x, Vec()).cwiseMax(0.0).norm() <= 1e-8);
  CHECK(counters.grad_c > 0);
}

namespace {
// min (x−1)² + xy − y² over [−2,2]², subject to x ≤ 0.5 and y ≤ 0.05 imposed
// as functional constraints. KKT point: x* = 0.5, y* = 0.05, multipliers
// λx* = 0.95 (from 2(x−1) + y + λ = 0) and λy* = x − 2y = 0.4.
ConstrainedProblem capped_quadratic() {
  ConstrainedProblem prob;
  prob.base.f.value = [](const Vec& x, const Vec& y) {
    return (x[0] - 1.0) * (x[0] - 1.0) + x[0] * y[0] - y[0] * y[0];
  };
  prob.base.f.grad_x = [](const Vec& x, const Vec& y) {
    return vec1(2.0 * (x[0] - 1.0) + y[0]);
  };
  prob.base.f.grad_y = [](const Vec& x, const Vec& y) {
    return vec1(x[0] - 2.0 * y[0]);
  };
  prob.base.f.L_grad = std::sqrt(5.0);  // ‖[[2,1],[1,−2]]‖₂
  prob.base.f.sigma_y = 2.0;
  prob.base.p.domain = Box::centered(1, 2.0);
  prob.base.q.domain = Box::centered(1, 2.0);
  ConstraintMap c;
  c.dim = 1;
  c.value = [](const Vec& x, const Vec&) { return vec1(x[0] - 0.5); };
  c.jt_x = [](const Vec&, const Vec&, const Vec& u) { return u; };
  c.L = 1.0;
  c.hi = 2.5;
  prob.base.c = c;
  ConstraintMap d;
  d.dim = 1;
  d.value = [](const Vec&, const Vec& y) { return vec1(y[0] - 0.05); };
  d.jt_x = [](const Vec&, const Vec&, const Vec& u) { return Vec(0.0 * u); };
  d.jt_y = [](const Vec&, const Vec&, const Vec& u) { return u; };
  d.L = 1.0;
  d.hi = 2.05;
  prob.base.d = d;
  // generous interval bounds over the boxes
  prob.L_F = 8.0;
  prob.F_hi = 13.0;
  prob.F_low = -8.0;
  prob.Delta = 21.0;
  prob.delta_c = 1.0;
  prob.delta_d = 2.0;
  prob.theta = 0.5;
  return prob;
}
}  // namespace

TEST_CASE("solve_constrained reaches the KKT point of a capped quadratic") {
  const ConstrainedProblem prob = capped_quadratic();
  AlmOptions opt;
  opt.eps = 1e-2;
  opt.tau = 0.5;
  opt.Lambda = 10.0;
  EvalCounters counters;

  const AlmResult res =
      solve_constrained(prob, opt, vec1(-1.5), vec1(1.0), vec1(0.0), counters);

  // geometric schedule: K = ⌈log(1e−2)/log(0.5)⌉ = 7, so 8 outer iterations
  CHECK(res.outer_iters == 8);
  CHECK(res.trace.size() == 8);
  CHECK(res.trace.front().rho_k == 1.0);
  CHECK(res.trace.back().rho_k == Catch::Approx(128.0));

  CHECK(res.x[0] == Catch::Approx(0.5).margin(2e-2));
  CHECK(res.y[0] == Catch::Approx(0.05).margin(2e-2));
  CHECK(res.lambda_x_tilde[0] == Catch::Approx(0.95).margin(0.1));
  CHECK(res.lambda_y[0] == Catch::Approx(0.4).margin(0.1));

  // multiplier invariants: safeguarded λx inside the ball, λy nonnegative
  CHECK(res.lambda_x.norm() <= opt.Lambda);
  CHECK(res.lambda_y.minCoeff() >= 0.0);
  CHECK(res.lambda_x_tilde.minCoeff() >= 0.0);
  // projection inactive here (‖λ̃x‖ ≪ Λ), so the two coincide
  CHECK(res.lambda_x[0] == res.lambda_x_tilde[0]);

  // independent certification with the certifying multiplier pair
  const KKTReport r =
      kkt_report(prob.base, res.x, res.y, res.lambda_x_tilde, res.lambda_y);
  CHECK(r.stat_x <= opt.eps);
  CHECK(r.stat_y <= opt.eps);
  CHECK(r.feas_c <= opt.eps);
  CHECK(r.feas_d <= opt.eps);
  CHECK(r.comp_c <= 10 * opt.eps);
  CHECK(r.comp_d <= 10 * opt.eps);

  CHECK(counters.grad_f == counters.grad_c);
  CHECK(counters.grad_f == counters.grad_d);
  CHECK(counters.grad_f > 0);
}

TEST_CASE("start selection prefers the nearly feasible anchor when it helps") {
  const ConstrainedProblem prob = capped_quadratic();
  AlmOptions opt;
  opt.eps = 0.26;  // K = 2: three outer iterations
  opt.tau = 0.5;
  EvalCounters counters;

  SECTION("violating incumbent with a feasible anchor switches") {
    const AlmResult res =
        solve_constrained(prob, opt, vec1(2.0), vec1(0.0), vec1(0.0), counters);
    CHECK(res.outer_iters == 3);
    CHECK(res.trace.front().from_nf);
  }
  SECTION("anchor equal to the incumbent is a tie and keeps the incumbent") {
    const AlmResult res =
        solve_constrained(prob, opt, vec1(0.0), vec1(0.0), vec1(0.0), counters);
    CHECK_FALSE(res.trace.front().from_nf);
  }
}

TEST_CASE("solve_constrained without functional constraints reduces to the inner layers") {
  ConstrainedProblem prob;
  prob.base.f.value = [](const Vec& x, const Vec& y) {
    return x[0] * y[0] - 0.5 * y.squaredNorm();
  };
  prob.base.f.grad_x = [](const Vec&, const Vec& y) { return y; };
  prob.base.f.grad_y = [](const Vec& x, const Vec& y) { return Vec(x - y); };
  prob.base.f.L_grad = 1.0;
  prob.base.f.sigma_y = 1.0;
  prob.base.p.domain = Box::centered(1, 1.0);
  prob.base.q.domain = Box::centered(1, 1.0);

  AlmOptions opt;
  opt.eps = 1e-2;
  opt.tau = 0.5;
  EvalCounters counters;
  const AlmResult res =
      solve_constrained(prob, opt, vec1(0.8), vec1(-0.3), Vec(), counters);
  CHECK(std::abs(res.x[0]) < 1e-2);
  CHECK(res.lambda_x.size() == 0);
  CHECK(res.lambda_y.size() == 0);
  CHECK(counters.grad_c == 0);
  CHECK(counters.grad_d == 0);
  CHECK(counters.grad_f > 0);
}

TEST_CASE("monitors run clean on a well-posed instance and cost no oracle budget") {
  const ConstrainedProblem prob = capped_quadratic();
  AlmOptions opt;
  opt.eps = 1e-2;
  opt.tau = 0.5;

  EvalCounters plain, monitored;
  const AlmResult base =
      solve_constrained(prob, opt, vec1(-1.5), vec1(1.0), vec1(0.0), plain);
  opt.monitors = true;
  const AlmResult mon =
      solve_constrained(prob, opt, vec1(-1.5), vec1(1.0), vec1(0.0), monitored);

  CHECK(mon.monitors.enabled);
  CHECK(mon.monitors.multiplier_drift_checks == 8);
  CHECK(mon.monitors.start_value_checks == 8);
  CHECK(mon.monitors.subproblem_value_checks == 8);
  CHECK(mon.monitors.y_feasibility_checks > 0);
  CHECK(mon.monitors.clean());

  // diagnostics must not perturb the run or its accounting
  CHECK(mon.x[0] == base.x[0]);
  CHECK(mon.y[0] == base.y[0]);
  CHECK(plain == monitored);
}

TEST_CASE("solve_constrained input validation") {
  const ConstrainedProblem prob = capped_quadratic();
  EvalCounters counters;
  AlmOptions opt;
  SECTION("accuracy outside (0,1)") {
    opt.eps = 1.0;
    CHECK_THROWS_AS(solve_constrained(prob, opt, vec1(0.0), vec1(0.0), vec1(0.0), counters),
                    std::invalid_argument);
  }
  SECTION("decay outside (0,1)") {
    opt.tau = 1.0;
    CHECK_THROWS_AS(solve_constrained(prob, opt, vec1(0.0), vec1(0.0), vec1(0.0), counters),
                    std::invalid_argument);
  }
  SECTION("x-multiplier seed outside the safeguard ball") {
    opt.lambda_x0 = vec1(11.0);
    CHECK_THROWS_AS(solve_constrained(prob, opt, vec1(0.0), vec1(0.0), vec1(0.0), counters),
                    std::invalid_argument);
  }
  SECTION("start outside the domain") {
    CHECK_THROWS_AS(solve_constrained(prob, opt, vec1(3.0), vec1(0.0), vec1(0.0), counters),
                    std::invalid_argument);
  }
}

TEST_CASE("solve_constrained is deterministic") {
  const ConstrainedProblem prob = capped_quadratic();
  AlmOptions opt;
  opt.eps = 1e-2;
  opt.tau = 0.5;
  EvalCounters c1, c2;
  const AlmResult r1 = solve_constrained(prob, opt, vec1(-1.5), vec1(1.0), vec1(0.0), c1);
  const AlmResult r2 = solve_constrained(prob, opt, vec1(-1.5), vec1(1.0), vec1(0.0), c2);
  CHECK(r1.x[0] == r2.x[0]);
  CHECK(r1.y[0] == r2.y[0]);
  CHECK(r1.lambda_y[0] == r2.lambda_y[0]);
  CHECK(c1 == c2);
}
