// Acceptance checks. Prints one PASS/FAIL line per criterion, with detail
// lines above it. Exit status is the number of failed criteria.
#include "ghzrep/analysis.hpp"
#include "ghzrep/laplace.hpp"
#include "ghzrep/monte_carlo.hpp"
#include "ghzrep/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

using namespace ghzrep;

namespace {

// Pinned tolerances.
constexpr double kEpsOp = 0.226, kFMax = 0.918;
constexpr double kEpsTol = 0.03, kFTol = 0.01;
constexpr double kIdealTol = 1e-9;
constexpr double kScalingTol = 0.30, kRatioTol = 0.15;
constexpr double kClosedFormTol = 1e-9;
constexpr double kSigmas = 3.0;
constexpr double kStaticTol = 1e-6;
constexpr double kThresholdTol = 0.01;
constexpr double kTarget = 0.8;
constexpr int kAutoMax = 6;
constexpr long kCrossTrajectories = 10000;
constexpr long kFilterTrajectories = 1000;
constexpr std::uint64_t kSeed = 20240611;

const double kInf = std::numeric_limits<double>::infinity();

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::printf("    ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
  std::fflush(stdout);
}

ImperfectionSet gate_loss_setup() {
  ImperfectionSet p;
  p.f = 0.05;
  p.v = 0.05;
  p.d = 0.001;
  p.eta = 0.6;
  return p;
}

double infid(const DensityOperator& rho) { return 1 - fidelity(rho, ghz_state(rho.space.n_max())); }

bool c1_elementary_optimum() {
  const auto p = gate_loss_setup();
  const double L0 = p.L_att_km;
  const auto closed = optimal_epsilon(p, L0);
  detail("closed form: eps_op=%.4f F_max=%.4f", closed.eps_op, closed.F_max);
  const auto num = optimize_epsilon_numeric(p, L0, EpsilonObjective::Elementary, 7);
  detail("numeric scan (n_max=7): eps=%.4f F=%.4f", num.eps, num.value);
  return !num.degenerate && std::abs(num.eps - kEpsOp) <= kEpsTol && std::abs(num.value - kFMax) <= kFTol;
}

bool c2_ideal_exactness() {
  bool ok = true;
  for (double eps : {1e-4, 0.1}) {
    auto p = ImperfectionSet::ideal();
    p.eps_a = eps;
    auto e = generate_elementary(Scheme::TwoD, p, 0.0, 3);
    const double q_ref = 2 * (1 - eps * eps) * eps * eps;
    detail("eps=%g: q1=%.12g formula=%.12g |diff|=%.2e, 1-F=%.2e", eps, e.q1, q_ref, std::abs(e.q1 - q_ref),
           infid(e.rho_e));
    // the closed form counts single pairs only; at eps=0.1 multi-pair
    // clicks and the sech^4 weight move q1 by O(eps^4), shown for reference
    if (eps == 1e-4) ok = ok && std::abs(e.q1 - q_ref) <= kIdealTol && infid(e.rho_e) <= kIdealTol;
  }
  const auto g = rho_ghz(2);
  double worst = 0;
  for (const auto& plan : cycle_candidates())
    worst = std::max(worst, std::abs(cycle_sequential_probabilities(g, g, g, plan, ImperfectionSet::ideal()).p3 - 1));
  detail("third merge: max |p3-1| over %zu orientations = %.2e", cycle_candidates().size(), worst);
  return ok && worst <= kIdealTol;
}

bool c3_scaling() {
  ImperfectionSet p;
  p.f = p.v = 0.025;
  p.d = 0.001;
  bool within = true, ratios = true;
  for (auto sch : {Scheme::TwoD, Scheme::OneD}) {
    NetworkSpec s;
    s.scheme = sch;
    s.n = 3;
    s.imp = p;
    s.n_max = 3;
    s.n_max_elementary = 3;
    auto st = run_static(s, sch == Scheme::TwoD ? rho_ghz(3) : ideal_bell(3));
    // 1D levels below n are two-party links; the GHZ output exists only at
    // the top, so each 1D level is its own run
    std::vector<double> num;
    for (int n = 1; n <= 3; ++n) {
      double v;
      if (sch == Scheme::TwoD) {
        v = infid(st.levels[n].rho);
      } else {
        NetworkSpec t = s;
        t.n = n;
        v = infid(run_static(t, ideal_bell(3)).final_state());
      }
      num.push_back(v);
      const double ref = analytic_infidelity(sch, n, p.f, p.v, p.d);
      const double rel = std::abs(v - ref) / ref;
      detail("%s n=%d: 1-F numeric=%.4e closed form=%.4e rel=%.3f", to_string(sch).c_str(), n, v, ref, rel);
      within = within && rel <= kScalingTol;
    }
    // least-squares slope of log(1-F) against n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int n = 1; n <= 3; ++n) {
      const double y = std::log(num[n - 1]);
      sx += n;
      sy += y;
      sxx += n * n;
      sxy += n * y;
    }
    const double ratio = std::exp((3 * sxy - sx * sy) / (3 * sxx - sx * sx));
    const double want = sch == Scheme::TwoD ? 3.0 : 4.0;
    detail("%s fitted growth ratio %.3f (target %.0f, successive %.3f %.3f)", to_string(sch).c_str(), ratio, want,
           num[1] / num[0], num[2] / num[1]);
    ratios = ratios && std::abs(ratio - want) / want <= kRatioTol;
  }
  detail("closed-form agreement: %s, growth ratios: %s", within ? "ok" : "off", ratios ? "ok" : "off");
  return within && ratios;
}

bool c4_closed_form() {
  const double nu = 4.2;
  const auto bell = ideal_bell(2);
  auto prep = pair_image({nu, bell}, {nu, bell}, kInf);
  const double t_prep = prep.trace_deriv() / prep.trace_value();
  auto ideal = ImperfectionSet::ideal();
  double succ = 0;
  auto out = close_geometric(
      prep, [&](const DensityOperator& a, const DensityOperator& b) { return doubling_merge(a, b, ideal); }, 0.0, kInf,
      &succ);
  detail("T_prep*nu=%.15g  success=%.15g  T*nu=%.15g", t_prep * nu, succ, out.mean_time() * nu);
  return std::abs(t_prep - 1.5 / nu) <= kClosedFormTol && std::abs(succ - 0.5) <= kClosedFormTol &&
         std::abs(out.mean_time() - 3 / nu) <= kClosedFormTol;
}

bool c5_cross_engine() {
  struct Cfg {
    int n;
    double T;
  };
  const Cfg grid[] = {{0, kInf}, {0, 0.1}, {0, 0.01}, {1, kInf}, {1, 0.1}, {1, 0.01}, {2, kInf}};
  bool ok = true;
  for (const auto& g : grid) {
    NetworkSpec s;
    s.n = g.n;
    s.L_total_km = 50;
    s.imp.T_coh_s = g.T;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = build_protocol(s);
    const auto lap = run_laplace(p);
    const double FL = fidelity(lap.final_state(), ghz_state(s.n_max));
    TrajectoryConfig c;
    c.seed = kSeed;
    c.n_trajectories = kCrossTrajectories;
    const auto mc = estimate(p, c);
    const double zF = std::abs(mc.fidelity - FL) / mc.fidelity_stderr;
    const double zT = std::abs(mc.T - lap.T()) / mc.T_stderr;
    bool pass = zF <= kSigmas && zT <= kSigmas;
    detail("n=%d T_coh=%g: Laplace F=%.5f T=%.5g | MC F=%.5f+-%.5f T=%.5g+-%.3g | z_F=%.2f z_T=%.2f", g.n, g.T, FL,
           lap.T(), mc.fidelity, mc.fidelity_stderr, mc.T, mc.T_stderr, zF, zT);
    if (std::isinf(g.T)) {
      const double FS = fidelity(run_static(s, p.elementary.rho_e, p.plan2d).final_state(), ghz_state(s.n_max));
      c.representation = Representation::Mixed;
      const auto mixed = estimate(p, c);
      detail("  static F=%.9f  |Laplace-static|=%.1e  |mixed MC-static|=%.1e", FS, std::abs(FL - FS),
             std::abs(mixed.fidelity - FS));
      pass = pass && std::abs(FL - FS) <= kStaticTol && std::abs(mixed.fidelity - FS) <= kStaticTol;
    }
    detail("  %s (%.0f s)", pass ? "ok" : "off",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    ok = ok && pass;
  }
  return ok;
}

bool c6_distillability() {
  const auto g = distillable(rho_ghz(1));
  const auto d = distillable(rho_classical(1));
  auto mix = [](double a) { return DensityOperator{rho_ghz(1).space, (1 - a) * rho_ghz(1).m + a * rho_white(1).m}; };
  double lo = 0, hi = 1;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (distillable(mix(mid)).distillable ? lo : hi) = mid;
  }
  detail("GHZ margin=%.12g, classical distillable=%d margin=%.3g, threshold alpha=%.6f", g.margin, d.distillable,
         d.margin, lo);
  return g.distillable && std::abs(g.margin - 1) < 1e-12 && !d.distillable && std::abs(lo - 0.8) <= kThresholdTol;
}

bool c7_filtering() {
  NetworkSpec s;
  s.n = 1;
  s.L_total_km = 50;
  s.imp.T_coh_s = 0.01;
  TrajectoryConfig c;
  c.seed = kSeed;
  c.n_trajectories = kFilterTrajectories;
  c.representation = Representation::Mixed;
  const auto plain = estimate(s, c);
  detail("unfiltered: F=%.5f+-%.5f T=%.4g+-%.3g", plain.fidelity, plain.fidelity_stderr, plain.T, plain.T_stderr);
  bool found = false;
  for (double tau : {0.003, 0.002, 0.005, 0.001}) {
    s.imp.filter_window_s = tau;
    const auto f = estimate(s, c);
    const double sig = std::hypot(f.fidelity_stderr, plain.fidelity_stderr);
    const bool better = f.fidelity - plain.fidelity >= kSigmas * sig && f.T > plain.T;
    detail("tau=%g s: F=%.5f+-%.5f T=%.4g+-%.3g  gain=%.1f sigma %s", tau, f.fidelity, f.fidelity_stderr, f.T,
           f.T_stderr, (f.fidelity - plain.fidelity) / sig, better ? "(F up, T up)" : "");
    if (better) {
      found = true;
      break;
    }
  }
  s.imp.filter_window_s = 1e6;
  const auto wide = estimate(s, c);
  const double zF = std::abs(wide.fidelity - plain.fidelity) / std::hypot(wide.fidelity_stderr, plain.fidelity_stderr);
  const double zT = std::abs(wide.T - plain.T) / std::hypot(wide.T_stderr, plain.T_stderr);
  detail("tau=1e6 s: F=%.5f T=%.4g  z_F=%.2f z_T=%.2f", wide.fidelity, wide.T, zF, zT);
  return found && zF <= kSigmas && zT <= kSigmas;
}

bool c8_nesting_structure() {
  RunConfig cfg;
  cfg.engine = Engine::Laplace;
  cfg.auto_n = true;
  cfg.auto_n_max = kAutoMax;
  const std::vector<double> Ts = {1.0, 10.0, 100.0, kInf};
  std::vector<double> Ls;
  for (double L = 50; L <= 800; L += 50) Ls.push_back(L);
  bool monotone = true, advantage = false;
  for (double T : Ts) {
    for (auto sch : {Scheme::TwoD, Scheme::OneD}) {
      std::string row;
      int prev = -1;
      for (double L : Ls) {
        NetworkSpec s;
        s.scheme = sch;
        s.L_total_km = L;
        s.imp.T_coh_s = T;
        cfg.base = s;
        auto r = evaluate_point(cfg, s, 1);
        if (!r.ok()) {
          detail("T_coh=%g L=%g %s: evaluation failed: %s", T, L, to_string(sch).c_str(), r.error.c_str());
          return false;
        }
        // the level boundary only means something while the output is
        // still distillable; beyond that every level is noise
        const bool live = r.distill_margin && *r.distill_margin > 0;
        char b[64];
        std::snprintf(b, sizeof b, " %g:%s%d/%.3f", L, live ? "n" : "x", r.spec.n, *r.fidelity);
        row += b;
        if (live) {
          if (r.spec.n < prev) monotone = false;
          prev = r.spec.n;
        }
        if (sch == Scheme::OneD) {
          NetworkSpec s2 = s;
          s2.scheme = Scheme::TwoD;
          cfg.base = s2;
          const auto r2 = evaluate_point(cfg, s2, 1);
          if (r2.ok() && *r2.fidelity >= kTarget && *r.fidelity < kTarget) advantage = true;
        }
      }
      detail("T_coh=%g %s:%s", T, to_string(sch).c_str(), row.c_str());
    }
  }
  detail("(x: not distillable, excluded from the level check)");
  detail("optimal level non-decreasing in L: %s; 2D keeps F>=%.1f where 1D does not: %s", monotone ? "yes" : "no",
         kTarget, advantage ? "yes" : "no");
  return monotone && advantage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<bool()>>> all = {
      {"elementary optimum", c1_elementary_optimum},   {"ideal-case exactness", c2_ideal_exactness},
      {"scaling reproduction", c3_scaling},            {"Laplace closed form", c4_closed_form},
      {"cross-engine agreement", c5_cross_engine},     {"distillability", c6_distillability},
      {"temporal filtering", c7_filtering},            {"nesting structure", c8_nesting_structure}};
  const std::set<int> pick(only.begin(), only.end());
  int failed = 0;
  for (size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    bool pass = false;
    std::string why;
    try {
      pass = all[i].second();
    } catch (const std::exception& e) {
      why = std::string(" (exception: ") + e.what() + ")";
    }
    std::printf("criterion %d: %s  %s%s\n", id, pass ? "PASS" : "FAIL", all[i].first, why.c_str());
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  return failed;
}
