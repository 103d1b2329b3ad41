#include "doctest.h"
#include "ghzrep/analysis.hpp"
#include "ghzrep/laplace.hpp"
#include "ghzrep/monte_carlo.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace ghzrep;

namespace {

PureState random_pure(const ModeSpace& s, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(s.dim());
  for (long i = 0; i < v.size(); ++i) v(i) = {g(rng), g(rng)};
  return PureState(s, v.normalized());
}

Mat sum_projectors(const std::vector<Vec>& b) {
  Mat m = Mat::Zero(b[0].size(), b[0].size());
  for (const auto& v : b) m += v * v.adjoint();
  return m;
}

ImperfectionSet noisy() {
  ImperfectionSet p;
  p.f = 0.1;
  p.v = 0.05;
  p.d = 0.02;
  return p;
}

bool within(double a, double sa, double b, double sb, double k = 3.0) {
  return std::abs(a - b) <= k * std::sqrt(sa * sa + sb * sb);
}

}  // namespace

TEST_CASE("elementary sampling") {
  ElementaryResult e;
  e.rho_e = rho_ghz(2);
  e.q1 = 1.0;
  e.attempt_duration = 2e-4;
  Rng rng = trajectory_rng(5, 0);
  for (int k = 0; k < 50; ++k) {
    auto s = sample_elementary(e, rng);
    CHECK(s.attempts == 1);
    CHECK(s.birth_age == doctest::Approx(2e-4));
    // a pure state has a single eigenvector to draw
    CHECK(fidelity(DensityOperator(s.state), ghz_state(2)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  e.q1 = 0.05;
  const int N = 40000;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < N; ++k) {
    const double a = sample_elementary(e, rng).birth_age;
    sum += a;
    sum2 += a * a;
  }
  const double mean = sum / N, se = std::sqrt((sum2 / N - mean * mean) / N);
  CHECK(std::abs(mean - e.attempt_duration / e.q1) < 4 * se);

  e.q1 = 0;
  CHECK_THROWS_AS(sample_elementary(e, rng), ParameterError);
}

TEST_CASE("merge branches reproduce the merge channel") {
  auto imp = noisy();
  ModeSpace s3(3, 2);
  auto x = random_pure(s3, 1), y = random_pure(s3, 2);
  auto xy = tensor(x, y);

  ModeSpace out;
  auto b1 = merge_branches(xy, {{1, 5}}, imp, &out);
  auto ref1 = merge_across(DensityOperator(x), DensityOperator(y), {{1, 2}}, imp);
  CHECK((sum_projectors(b1) - ref1.rho.m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(out.num_modes() == 4);

  auto b2 = merge_branches(xy, {{2, 4}, {0, 3}}, imp);
  auto ref2 = merge_across(DensityOperator(x), DensityOperator(y), {{2, 1}, {0, 0}}, imp);
  CHECK((sum_projectors(b2) - ref2.rho.m).cwiseAbs().maxCoeff() < 1e-12);

  // within one state
  auto b3 = merge_branches(x, {{0, 2}}, imp);
  CHECK((sum_projectors(b3) - merge(DensityOperator(x), 0, 2, imp).rho.m).cwiseAbs().maxCoeff() < 1e-12);
  double total = 0;
  for (const auto& v : b3) total += v.squaredNorm();
  CHECK(total <= 1 + 1e-12);
}

TEST_CASE("decay branches are complete") {
  ModeSpace s(3, 2);
  auto x = random_pure(s, 4);
  for (int m = 0; m < 3; ++m) {
    auto b = decay_branches(x, m, 0.03, 0.1);
    double total = 0;
    for (const auto& v : b) total += v.squaredNorm();
    CHECK(std::abs(total - 1) < 1e-12);
    auto ref = loss_channel(s, m, 0.3).apply(DensityOperator(x));
    CHECK((sum_projectors(b) - ref.m).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(decay_branches(x, 0, 0.03, std::numeric_limits<double>::infinity()).size() == 1);
}

TEST_CASE("ideal elementary segments") {
  NetworkSpec s;
  s.n = 0;
  s.imp = ImperfectionSet::ideal();
  s.imp.eps_a = 1e-4;
  auto p = build_protocol(s);
  TrajectoryConfig c;
  c.n_trajectories = 4000;
  auto e = estimate(p, c);
  CHECK(e.fidelity >= 1 - 1e-9);
  CHECK(within(e.T, e.T_stderr, p.elementary.attempt_duration / p.elementary.q1, 0));
}

TEST_CASE("two-link merge with success one half") {
  NetworkSpec s;
  s.scheme = Scheme::OneD;
  s.n = 2;
  s.imp = ImperfectionSet::ideal();
  s.imp.eps_a = 0.0224;
  s.imp.pulse_s = 0;
  s.imp.v_c_km_per_s = 1e30;  // no heralding delay
  auto p = build_protocol(s);
  // keep only the first doubling
  p.nodes.resize(2);
  p.root = 1;
  CHECK(doubling_merge(p.born, p.born, s.imp).probability == doctest::Approx(0.5).epsilon(1e-3));
  TrajectoryConfig c;
  c.n_trajectories = 10000;
  auto e = estimate(p, c);
  const double nu = p.nu0();
  CHECK(within(e.T, e.T_stderr, 3 / nu, 0));
  CHECK(p.elementary.q1 < 0.002);
}

TEST_CASE("reproducibility") {
  NetworkSpec s;
  s.n = 1;
  s.imp.T_coh_s = 0.1;
  auto p = build_protocol(s);
  TrajectoryConfig c;
  c.n_trajectories = 300;
  c.threads = 1;
  auto a = estimate(p, c);
  c.threads = 3;
  auto b = estimate(p, c);
  CHECK(a.T == b.T);
  CHECK(a.fidelity == b.fidelity);
  CHECK(a.rho.m == b.rho.m);
  auto t1 = run_trajectory(p, c, 17), t2 = run_trajectory(p, c, 17);
  CHECK(t1.time == t2.time);
  CHECK(t1.rho.m == t2.rho.m);
  c.seed = 2;
  CHECK(estimate(p, c).T != a.T);
}

TEST_CASE("very wide filter window changes nothing") {
  NetworkSpec s;
  s.n = 1;
  s.imp.T_coh_s = 0.05;
  TrajectoryConfig c;
  c.n_trajectories = 300;
  auto plain = estimate(s, c);
  s.imp.filter_window_s = 1e9;
  auto wide = estimate(s, c);
  CHECK(plain.T == wide.T);
  CHECK(plain.fidelity == wide.fidelity);
}

TEST_CASE("pure and mixed trajectories agree; mixed reproduces the static state") {
  NetworkSpec s;
  s.n = 1;
  auto p = build_protocol(s);
  auto st = run_static(s, p.elementary.rho_e, p.plan2d);
  TrajectoryConfig c;
  c.n_trajectories = 1500;
  c.representation = Representation::Mixed;
  auto mixed = estimate(p, c);
  CHECK((mixed.rho.m - st.final_state().m).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(mixed.fidelity_stderr < 1e-9);
  c.representation = Representation::Pure;
  auto pure = estimate(p, c);
  CHECK(within(pure.fidelity, pure.fidelity_stderr, mixed.fidelity, 0));
  CHECK(pure.clamped == 0);
}

TEST_CASE("roulette keeps the estimates unbiased") {
  NetworkSpec s;
  s.n = 1;
  s.imp.T_coh_s = 0.1;
  auto p = build_protocol(s);
  TrajectoryConfig c;
  c.n_trajectories = 3000;
  auto plain = estimate(p, c);
  c.roulette_budget_s = 0.5 * plain.T;
  c.roulette_survival = 0.7;
  c.seed = 99;
  auto rr = estimate(p, c);
  CHECK(rr.n_killed > 0);
  CHECK(within(rr.T, rr.T_stderr, plain.T, plain.T_stderr));
  CHECK(within(rr.fidelity, rr.fidelity_stderr, plain.fidelity, plain.fidelity_stderr));

  c.roulette_budget_s = 1e-6;
  c.roulette_survival = 1e-3;
  c.n_trajectories = 20;
  auto none = estimate(p, c);
  CHECK_FALSE(none.has_result());
  CHECK(std::isnan(none.fidelity));
}

TEST_CASE("configuration checks") {
  TrajectoryConfig c;
  c.n_trajectories = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.n_trajectories = 1;
  c.roulette_survival = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("trajectories against the Laplace engine at level one") {
  NetworkSpec s;
  s.n = 1;
  s.imp.T_coh_s = 0.1;
  auto p = build_protocol(s);
  auto lap = run_laplace(p);
  TrajectoryConfig c;
  c.n_trajectories = 3000;
  auto e = estimate(p, c);
  CHECK(within(e.fidelity, e.fidelity_stderr, fidelity(lap.final_state(), ghz_state(2)), 0));
  CHECK(within(e.T, e.T_stderr, lap.T(), 0));
}

TEST_CASE("discrete attempts approach the exponential limit") {
  NetworkSpec s;
  s.scheme = Scheme::OneD;
  s.n = 2;
  s.imp = ImperfectionSet::ideal();
  s.imp.eps_a = 0.0224;
  s.imp.pulse_s = 0;
  s.imp.v_c_km_per_s = 1e30;
  auto p = build_protocol(s);
  p.nodes.resize(2);
  p.root = 1;
  const double nu = 50.0;
  TrajectoryConfig c;
  c.n_trajectories = 40000;
  c.representation = Representation::Mixed;
  std::vector<double> gap;
  for (double q : {0.1, 0.01, 0.001}) {
    p.elementary.q1 = q;
    p.elementary.attempt_duration = q / nu;
    auto l = run_laplace(p);
    const double lap = l.T(), succ = l.levels.back().success;
    CHECK(succ == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(lap == doctest::Approx(1.5 / nu / succ).epsilon(1e-9));
    auto e = estimate(p, c);
    // later of two geometric attempt counts, 1/succ rounds on average
    const double exact = (2 / q - 1 / (2 * q - q * q)) * p.elementary.attempt_duration / succ;
    CHECK(within(e.T, e.T_stderr, exact, 0));
    gap.push_back(std::abs(e.T - lap) / lap);
  }
  CHECK(gap[0] > gap[2]);
}
