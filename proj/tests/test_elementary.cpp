#include "doctest.h"
#include "ghzrep/analysis.hpp"
#include "ghzrep/elementary.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace ghzrep;

namespace {

ImperfectionSet gate_loss_setup() {
  ImperfectionSet p;
  p.f = 0.05;
  p.v = 0.05;
  p.d = 0.001;
  p.eta = 0.6;
  return p;
}

double q1_formula(double eps) {
  // 2 (sech r tanh r)^2 with tanh r = eps
  return 2 * (1 - eps * eps) * eps * eps;
}

// Brute-force ideal 2D pipeline on plain amplitude arrays: sources at A and
// C, the node-B gate integrated from its generator, a trace over a and the
// projection of (b, c) onto one photon in a symmetric or antisymmetric mode.
// Returns (state on A, B, C; probability of the two click outcomes).
std::pair<Mat, double> brute_force_2d(double eps, int n) {
  const int D = n + 1;
  auto idx3 = [&](int x, int y, int z) { return (x * D + y) * D + z; };
  // gate generator on (a, B, b): a B^dag b^dag - h.c.
  Mat G = Mat::Zero(D * D * D, D * D * D);
  for (int x = 1; x <= n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        double amp = std::sqrt(double(x) * (y + 1) * (z + 1));
        G(idx3(x - 1, y + 1, z + 1), idx3(x, y, z)) += amp;
        G(idx3(x, y, z), idx3(x - 1, y + 1, z + 1)) -= amp;
      }
  std::vector<double> t(D);
  for (int k = 0; k < D; ++k) t[k] = std::sqrt(1 - eps * eps) * std::pow(eps, k);
  // amplitudes psi[A][a][B][b][C][c] = t_A t_C delta(A=a) delta(C=c) before the gate
  std::vector<Vec> after(D);  // indexed by A: vector over (a, B, b)
  for (int A = 0; A < D; ++A) {
    Vec in = Vec::Zero(D * D * D);
    in(idx3(A, 0, 0)) = t[A];
    after[A] = oracle::rk4_vec(std::numbers::pi / 2 * G, in, 1.0, 2000);
  }
  Mat best;
  double prob = 0, best_overlap = -1;
  for (int sign : {1, -1}) {
    // amplitude on (A, B, C) for each value of the traced mode a
    Mat rho = Mat::Zero(D * D * D, D * D * D);
    for (int a = 0; a < D; ++a) {
      Vec out = Vec::Zero(D * D * D);
      for (int A = 0; A < D; ++A)
        for (int B = 0; B < D; ++B)
          for (int C = 0; C < D; ++C) {
            // (b, c) = (1, 0): needs C = c = 0; (0, 1): needs C = c = 1
            cplx v = 0;
            if (C == 0) v += after[A](idx3(a, B, 1)) * t[0];
            if (C == 1) v += double(sign) * after[A](idx3(a, B, 0)) * t[1];
            out(idx3(A, B, C)) = v / std::sqrt(2.0);
          }
      rho += out * out.adjoint();
    }
    double p = 2 * rho.trace().real();
    Mat r = rho / rho.trace();
    double ov = (ghz_state(n).amp.adjoint() * r * ghz_state(n).amp)(0, 0).real();
    if (ov > best_overlap) {
      best_overlap = ov;
      best = r;
      prob = p;
    }
  }
  return {best, prob};
}

}  // namespace

TEST_CASE("two-mode squeezed vacuum") {
  auto z = two_mode_squeezed(0.0, 3);
  CHECK(std::abs(z.amp(0) - 1.0) < 1e-15);
  CHECK(z.amp.norm() == doctest::Approx(1.0));

  const double eps = 0.3;
  auto s = two_mode_squeezed(eps, 6);
  for (int n = 0; n < 6; ++n)
    CHECK(std::abs(s.amp(s.space.index({n + 1, n + 1})) / s.amp(s.space.index({n, n})) - eps) < 1e-14);
  CHECK(std::abs(s.amp(s.space.index({1, 0}))) == 0.0);

  auto big = two_mode_squeezed(eps, 40);
  double mean = 0;
  for (int n = 0; n <= 40; ++n) mean += n * std::norm(big.amp(big.space.index({n, n})));
  const double r = std::atanh(eps);
  CHECK(mean == doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-12));

  CHECK_THROWS_AS(two_mode_squeezed(1.0, 3), ParameterError);
  CHECK_THROWS_AS(two_mode_squeezed(-0.1, 3), ParameterError);
}

TEST_CASE("attempt duration") {
  ImperfectionSet p;
  CHECK(attempt_duration(Scheme::TwoD, p, 10) == doctest::Approx(2 * 10 / 2e5 + 1e-4));
  CHECK(attempt_duration(Scheme::OneD, p, 10) == doctest::Approx(10 / 2e5 + 1e-4));
  auto e = generate_elementary(Scheme::TwoD, p, 10, 3);
  CHECK(e.attempt_duration == doctest::Approx(2 * 10 / 2e5 + 1e-4));
}

TEST_CASE("ideal limit of the elementary pipeline") {
  auto p = ImperfectionSet::ideal();
  p.eps_a = 1e-4;
  auto e = generate_elementary(Scheme::TwoD, p, 0.0, 3);
  CHECK(fidelity(e.rho_e, ghz_state(3)) >= 1 - 1e-9);
  CHECK(std::abs(e.q1 - q1_formula(p.eps_a)) < 1e-9);
  CHECK(e.rho_e.trace() == doctest::Approx(1.0).epsilon(1e-12));

  auto l = generate_elementary(Scheme::OneD, p, 0.0, 3);
  Vec bell = Vec::Zero(l.rho_e.space.dim());
  bell(l.rho_e.space.index({1, 0})) = bell(l.rho_e.space.index({0, 1})) = 1 / std::sqrt(2.0);
  CHECK((bell.adjoint() * l.rho_e.m * bell)(0, 0).real() >= 1 - 1e-7);
  CHECK(l.rho_e.num_modes() == 2);
}

TEST_CASE("2D pipeline matches a brute-force amplitude computation") {
  auto p = ImperfectionSet::ideal();
  p.eps_a = 0.2;
  for (int n : {2, 3}) {
    auto e = generate_elementary(Scheme::TwoD, p, 0.0, n);
    auto [ref, prob] = brute_force_2d(0.2, n);
    CHECK(e.q1 == doctest::Approx(prob).epsilon(1e-8));
    CHECK((e.rho_e.m - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("dark counts dominate at vanishing squeezing") {
  auto p = gate_loss_setup();
  p.eps_a = 1e-5;
  auto e = generate_elementary(Scheme::TwoD, p, 22.0, 3);
  CHECK(e.rho_e.m(0, 0).real() > 1 - 1e-6);
  CHECK(fidelity(e.rho_e, ghz_state(3)) < 1e-2);
  CHECK(e.q1 == doctest::Approx(2 * p.d).epsilon(1e-2));
}

TEST_CASE("truncation warning") {
  auto p = gate_loss_setup();
  p.eps_a = 0.45;
  auto e = generate_elementary(Scheme::TwoD, p, 22.0, 2);
  CHECK_FALSE(e.warnings.empty());
  p.eps_a = 0.1;
  CHECK(generate_elementary(Scheme::TwoD, p, 22.0, 5).warnings.empty());
}

TEST_CASE("analytic coefficients") {
  auto p = gate_loss_setup();
  p.eps_a = 0.1;
  auto a = analytic_elementary(p, 22.0);
  CHECK(a.q_ghz == doctest::Approx(4.124e-3).epsilon(1e-3));
  CHECK(a.q_L == doctest::Approx(5.160e-5).epsilon(1e-3));
  CHECK(a.q1 == doctest::Approx(2 * p.d + a.q_ghz + a.q_L + a.q_R).epsilon(1e-14));
  CHECK(a.rho_e.trace() == doctest::Approx(1.0).epsilon(1e-12));

  p.eps_a = 0;
  auto z = analytic_elementary(p, 22.0);
  CHECK(z.q_ghz == 0.0);
  CHECK(z.q_L == 0.0);
  CHECK(z.q_R == 0.0);
  CHECK(z.q1 == doctest::Approx(2 * p.d));
}

TEST_CASE("analytic and numeric elementary states agree in the small-parameter regime") {
  auto p = gate_loss_setup();
  for (double eps : {0.05, 0.1, 0.15, 0.2, 0.25}) {
    p.eps_a = eps;
    auto a = analytic_elementary(p, 22.0);
    auto e = generate_elementary(Scheme::TwoD, p, 22.0, 7);
    double fa = fidelity(a.rho_e, ghz_state(2));
    double fn = fidelity(e.rho_e, ghz_state(7));
    CAPTURE(eps);
    CHECK(std::abs(fa - fn) <= 2e-2);
    CHECK(std::abs(e.q1 - a.q1) / a.q1 <= 0.10);
  }
}

TEST_CASE("closed-form optimum") {
  auto p = gate_loss_setup();
  auto o = optimal_epsilon(p, 22.0);
  CHECK(o.in_domain);
  CHECK(o.eps_op == doctest::Approx(0.226).epsilon(2e-3));
  CHECK(o.F_max == doctest::Approx(0.918).epsilon(1e-3));

  p.d = 1e-14;
  auto small = optimal_epsilon(p, 22.0);
  CHECK(small.eps_op < 1e-3);
  CHECK(small.F_max > 1 - 1e-5);

  auto q = gate_loss_setup();
  q.eta = 1.0;
  CHECK_FALSE(optimal_epsilon(q, 0.0).in_domain);
}

TEST_CASE("numeric epsilon scan") {
  auto ideal = ImperfectionSet::ideal();
  auto flat = optimize_epsilon_numeric(ideal, 0.0, EpsilonObjective::Elementary, 2);
  CHECK(flat.degenerate);

  auto p = gate_loss_setup();
  auto el = optimize_epsilon_numeric(p, 22.0, EpsilonObjective::Elementary, 6);
  CHECK_FALSE(el.degenerate);
  CHECK(el.eps == doctest::Approx(0.226).epsilon(0.10));

  auto lvl = optimize_epsilon_numeric(p, 22.0, EpsilonObjective::LevelOne, 5);
  CHECK_FALSE(lvl.degenerate);
  CHECK(lvl.eps < 0.226);
}

TEST_CASE("maximize_scan on a known parabola") {
  auto r = maximize_scan([](double x) { return -(x - 0.1234) * (x - 0.1234); });
  CHECK(r.eps == doctest::Approx(0.1234).epsilon(1e-4));
  CHECK_FALSE(r.degenerate);
  CHECK(maximize_scan([](double x) { return x; }).degenerate);
}

TEST_CASE("source relation sqrt(eta) beats equal squeezing without dark counts") {
  // with d > 0 a brighter C source can win by outshining dark counts
  auto p = gate_loss_setup();
  p.d = 0;
  for (double eps : {0.05, 0.15, 0.25}) {
    p.eps_a = eps;
    p.eps_c = -1;
    auto tuned = generate_elementary(Scheme::TwoD, p, 22.0, 5);
    p.eps_c = p.eps_a;
    auto equal = generate_elementary(Scheme::TwoD, p, 22.0, 5);
    CAPTURE(eps);
    CHECK(fidelity(tuned.rho_e, ghz_state(5)) >= fidelity(equal.rho_e, ghz_state(5)));
  }
}

TEST_CASE("efficiency from cooperativity") {
  CHECK(efficiency_from_cooperativity(1.5) == doctest::Approx(0.6));
  CHECK(efficiency_from_cooperativity(0.0) == 0.0);
  CHECK(efficiency_from_cooperativity(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(efficiency_from_cooperativity(1e12) < 1.0);
  CHECK(efficiency_from_cooperativity(2.0) > efficiency_from_cooperativity(1.0));
  CHECK_THROWS_AS(efficiency_from_cooperativity(-1), ParameterError);
}
