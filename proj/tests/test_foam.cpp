// Certified SCSC saddle solver: step-size derivation, corrector field algebra,
// inner-loop self-termination, and end-to-end solves on quadratics with
// analytically known saddle points.
#include <catch2/catch_amalgamated.hpp>

#include <minimax_al/foam.hpp>

#include <Eigen/Dense>

#include <random>

using namespace minimax_al;

namespace {

// h̄(x,y) = ½xᵀP x + xᵀB y − ½yᵀQ y + uᵀx + vᵀy  with P, Q positive definite.
struct QuadSaddle {
  Mat P, B, Q;
  Vec u, v;

  SaddleSubproblem subproblem(double box_radius = 1.0) const {
    SaddleSubproblem sub;
    sub.grad = [*this](const Vec& x, const Vec& y, Vec& gx, Vec& gy) {
      gx = P * x + B * y + u;
      gy = B.transpose() * x - Q * y + v;
    };
    sub.value = [*this](const Vec& x, const Vec& y) {
      return 0.5 * x.dot(P * x) + x.dot(B * y) - 0.5 * y.dot(Q * y) + u.dot(x) + v.dot(y);
    };
    sub.sigma_x = Eigen::SelfAdjointEigenSolver<Mat>(P).eigenvalues().minCoeff();
    sub.sigma_y = Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues().minCoeff();
    Mat H(P.rows() + Q.rows(), P.cols() + Q.cols());
    H << P, B, B.transpose(), -Q;
    sub.L_grad = Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().cwiseAbs().maxCoeff();
    sub.p.domain = Box::centered(P.rows(), box_radius);
    sub.q.domain = Box::centered(Q.rows(), box_radius);
    return sub;
  }

  /// unconstrained saddle: ∇x = 0, ∇y = 0
  std::pair<Vec, Vec> saddle() const {
    const Eigen::Index n = P.rows(), m = Q.rows();
    Mat H(n + m, n + m);
    H << P, B, B.transpose(), -Q;
    Vec rhs(n + m);
    rhs << -u, -v;
    const Vec s = H.colPivHouseholderQr().solve(rhs);
    return {s.head(n), s.tail(m)};
  }
};

QuadSaddle random_quad(std::uint64_t seed, int n, int m, double quad_lo, double quad_hi) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::uniform_real_distribution<double> uni(quad_lo, quad_hi);
  const auto rand_mat = [&](int r, int c) {
    Mat g(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) g(i, j) = nrm(gen);
    return g;
  };
  const auto rand_spd = [&](int dim) {
    const Mat g = rand_mat(dim, dim);
    const Mat orth = Eigen::HouseholderQR<Mat>(g).householderQ();
    Vec eigs(dim);
    for (int i = 0; i < dim; ++i) eigs[i] = uni(gen);
    return Mat(orth * eigs.asDiagonal() * orth.transpose());
  };
  QuadSaddle q;
  q.P = rand_spd(n);
  q.Q = rand_spd(m);
  q.B = 0.1 * rand_mat(n, m);
  q.u = 0.05 * rand_mat(n, 1);
  q.v = 0.05 * rand_mat(m, 1);
  return q;
}

}  // namespace

TEST_CASE("FoamParams derive from the subproblem constants") {
  SaddleSubproblem sub;
  sub.grad = [](const Vec&, const Vec&, Vec&, Vec&) {};
  sub.sigma_x = 2.0;
  sub.sigma_y = 1.0;
  sub.L_grad = 6.0;
  sub.p.domain = Box::centered(1, 1.0);
  sub.q.domain = Box::centered(1, 1.0);
  const FoamParams pr = FoamParams::from(sub);
  CHECK(pr.alpha_bar == Catch::Approx(std::min(1.0, std::sqrt(8.0 * 1.0 / 2.0))));
  CHECK(pr.alpha_bar == 1.0);  // √4 ≥ 1
  CHECK(pr.eta_z == Catch::Approx(1.0));
  CHECK(pr.eta_y == Catch::Approx(std::min(0.5, 4.0 / 2.0)));
  CHECK(pr.zeta == Catch::Approx(1.0 / (2.0 * std::sqrt(5.0) * 25.0)));
  CHECK(pr.gamma_x == Catch::Approx(4.0));
  CHECK(pr.gamma_y == Catch::Approx(4.0));
  CHECK(pr.zeta_bar == Catch::Approx(1.0 / 36.0));
  CHECK(FoamParams::beta(0) == Catch::Approx(2.0 / 3.0));
  CHECK(FoamParams::beta(7) == Catch::Approx(0.2));
}

TEST_CASE("hat_h_grads removes exactly the strong-curvature tilt") {
  // h̄(x,y) = ½σx‖x‖² − ½σy‖y‖²  ⟹  ĥ ≡ 0
  SaddleSubproblem sub;
  sub.sigma_x = 2.0;
  sub.sigma_y = 3.0;
  sub.L_grad = 3.0;
  sub.grad = [&](const Vec& x, const Vec& y, Vec& gx, Vec& gy) {
    gx = 2.0 * x;
    gy = -3.0 * y;
  };
  Vec x(2), y(2), gx, gy;
  x << 0.3, -1.7;
  y << 2.0, 0.5;
  hat_h_grads(sub, x, y, gx, gy);
  CHECK(gx.norm() == 0.0);
  CHECK(gy.norm() == 0.0);
}

TEST_CASE("a_field equals the full saddle gradient at a self-anchored point") {
  const QuadSaddle q = random_quad(11, 3, 2, 1.0, 3.0);
  const SaddleSubproblem sub = q.subproblem();
  Vec x(3), y(2);
  x << 0.2, -0.4, 0.6;
  y << -0.1, 0.3;
  const Vec z_g = -sub.sigma_x * x;  // anchor the field at (x, y) itself
  const Vec y_g = y;
  Vec ax, ay, gx, gy;
  a_field(sub, x, y, z_g, y_g, ax, ay);
  sub.grad(x, y, gx, gy);
  CHECK((ax - gx).norm() < 1e-14);
  CHECK((ay + gy).norm() < 1e-14);  // a_y = −∇y h̄ at the anchor
}

TEST_CASE("corrector loop exits immediately when anchored at an interior saddle") {
  const QuadSaddle q = random_quad(5, 3, 3, 1.0, 2.0);
  const auto [xs, ys] = q.saddle();
  REQUIRE(xs.cwiseAbs().maxCoeff() < 0.9);
  REQUIRE(ys.cwiseAbs().maxCoeff() < 0.9);
  const SaddleSubproblem sub = q.subproblem();
  const FoamParams pr = FoamParams::from(sub);
  EvalCounters counters;
  const auto r = detail::inner_loop(sub, pr, Vec(-sub.sigma_x * xs), ys, 100, counters);
  CHECK(r.trips == 0);
  CHECK((r.x - xs).norm() < 1e-12);
  CHECK((r.y - ys).norm() < 1e-12);
  CHECK(r.b_x.norm() < 1e-12);
  CHECK(r.b_y.norm() < 1e-12);
}

TEST_CASE("corrector subgradient reconstruction lies in the box normal cone") {
  const QuadSaddle q = random_quad(17, 4, 4, 1.0, 3.0);
  const SaddleSubproblem sub = q.subproblem(0.25);  // small box forces active bounds
  const FoamParams pr = FoamParams::from(sub);
  EvalCounters counters;
  Vec x0 = Vec::Constant(4, 0.25), y0 = Vec::Constant(4, -0.25);
  const auto r =
      detail::inner_loop(sub, pr, Vec(-sub.sigma_x * x0), y0, 100000, counters);
  REQUIRE(sub.p.domain.contains(r.x));
  REQUIRE(sub.q.domain.contains(r.y));
  for (int i = 0; i < 4; ++i) {
    if (r.x[i] > -0.25 && r.x[i] < 0.25) CHECK(std::abs(r.b_x[i]) < 1e-12);
    if (r.x[i] == 0.25) CHECK(r.b_x[i] >= -1e-12);
    if (r.x[i] == -0.25) CHECK(r.b_x[i] <= 1e-12);
  }
}

TEST_CASE("solve_sccsc drives a 2x2 quadratic to its interior saddle") {
  // h̄(x,y) = ½x² + xy − ½y²; saddle at the origin
  QuadSaddle q;
  q.P = Mat::Identity(1, 1);
  q.Q = Mat::Identity(1, 1);
  q.B = Mat::Identity(1, 1);
  q.u = Vec::Zero(1);
  q.v = Vec::Zero(1);
  const SaddleSubproblem sub = q.subproblem();
  EvalCounters counters;
  Vec z0(1), y0(1);
  z0 << -sub.sigma_x * 0.8;
  y0 << -0.6;
  const Certificate cert = solve_sccsc(sub, 1e-8, z0, y0, {}, counters);
  CHECK(cert.residual <= 1e-8);
  CHECK(cert.x.cwiseAbs().maxCoeff() < 1e-7);
  CHECK(cert.y.cwiseAbs().maxCoeff() < 1e-7);
  CHECK(counters.grad_f == 0);  // this oracle had no counting hook
  CHECK(counters.prox_p > 0);
  CHECK(counters.prox_p == counters.prox_q);
}

TEST_CASE("solve_sccsc certificates on random SCSC quadratics") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const QuadSaddle q = random_quad(seed, 8, 8, 1.0, 3.0);
    const auto [xs, ys] = q.saddle();
    REQUIRE(xs.cwiseAbs().maxCoeff() < 0.9);  // interior saddle by construction
    const SaddleSubproblem sub = q.subproblem();
    const double eps_bar = 1e-6;
    EvalCounters counters;
    FoamCaps caps;
    caps.value_gap_bound = 100.0;
    const Certificate cert =
        solve_sccsc(sub, eps_bar, Vec(Vec::Constant(8, -sub.sigma_x)),
                    Vec(Vec::Constant(8, 1.0)), caps, counters);

    CHECK(cert.residual <= eps_bar);
    // strong monotonicity: distance to the saddle is at most residual / min modulus
    const double mod = std::min(sub.sigma_x, sub.sigma_y);
    const double dist = std::sqrt((cert.x - xs).squaredNorm() + (cert.y - ys).squaredNorm());
    CHECK(dist <= cert.residual / mod + 1e-12);

    // the witness is a concrete subdifferential element: w − ∇h̄ ∈ N_box
    Vec gx, gy;
    sub.grad(cert.x, cert.y, gx, gy);
    const Vec sx_ = cert.witness_x - gx;  // element of ∂p(x̃)
    const Vec sy_ = gy - cert.witness_y;  // element of ∂q(ỹ)
    for (int i = 0; i < 8; ++i) {
      if (cert.x[i] > -1.0 && cert.x[i] < 1.0) CHECK(std::abs(sx_[i]) < 1e-9);
      if (cert.y[i] > -1.0 && cert.y[i] < 1.0) CHECK(std::abs(sy_[i]) < 1e-9);
    }

    // every corrector trip count observes the closed-form cap
    const long long cap = foam_inner_trip_cap(sub.sigma_x, sub.L_grad);
    for (int trips : cert.inner_trips) CHECK(trips <= cap);
  }
}

TEST_CASE("solve_sccsc respects caps and reports failure") {
  const QuadSaddle q = random_quad(23, 4, 4, 1.0, 2.0);
  const SaddleSubproblem sub = q.subproblem();
  EvalCounters counters;
  FoamCaps caps;
  caps.max_outer = 1;
  CHECK_THROWS_AS(solve_sccsc(sub, 1e-14, Vec(Vec::Constant(4, sub.sigma_x * 0.5)),
                              Vec(Vec::Constant(4, 0.5)), caps, counters),
                  SolveFailure);
}

TEST_CASE("solve_sccsc validates its inputs") {
  SaddleSubproblem sub;
  sub.grad = [](const Vec&, const Vec&, Vec&, Vec&) {};
  sub.sigma_x = 1.0;
  sub.sigma_y = 1.0;
  sub.L_grad = 0.5;  // smaller than the moduli: invalid
  sub.p.domain = Box::centered(1, 1.0);
  sub.q.domain = Box::centered(1, 1.0);
  EvalCounters counters;
  CHECK_THROWS_AS(solve_sccsc(sub, 1e-3, Vec::Zero(1), Vec::Zero(1), {}, counters),
                  std::invalid_argument);
  sub.L_grad = 2.0;
  Vec z_far(1);
  z_far << 10.0;  // −z/σx = −10 is far outside dom p
  CHECK_THROWS_AS(solve_sccsc(sub, 1e-3, z_far, Vec::Zero(1), {}, counters),
                  std::invalid_argument);
}
