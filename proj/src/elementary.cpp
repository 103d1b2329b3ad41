#include "ghzrep/elementary.hpp"

#include "ghzrep/analysis.hpp"
#include "ghzrep/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ghzrep {

std::string to_string(Scheme s) { return s == Scheme::TwoD ? "2D" : "1D"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "2D" || s == "2d") return Scheme::TwoD;
  if (s == "1D" || s == "1d" || s == "1D-benchmark") return Scheme::OneD;
  throw ConfigError("unknown scheme '" + s + "'");
}

PureState two_mode_squeezed(double eps, int n_max, const ModeLabel& mem, const ModeLabel& photon) {
  if (!(eps >= 0 && eps < 1)) throw ParameterError("squeezing parameter must lie in [0,1)");
  ModeSpace s(n_max, {mem, photon});
  Vec v = Vec::Zero(s.dim());
  const double norm = std::sqrt(1 - eps * eps);
  double amp = norm;
  for (int n = 0; n <= n_max; ++n) {
    v(s.index({n, n})) = amp;
    amp *= eps;
  }
  return {s, v};
}

double attempt_duration(Scheme scheme, const ImperfectionSet& imp, double L0_km) {
  // photon flight to the station plus the classical answer back
  const double arm = scheme == Scheme::TwoD ? L0_km : 0.5 * L0_km;
  return 2 * arm / imp.v_c_km_per_s + imp.pulse_s;
}

namespace {

// Branches of amplitude damping on the photon mode (mode 1) of a pure state.
std::vector<Vec> damp_photon(const PureState& psi, double transmissivity) {
  std::vector<Vec> out;
  for (const Mat& k : amplitude_damping_kraus(psi.space.n_max(), transmissivity))
    out.push_back(apply_local(psi, {1}, k).amp);
  return out;
}

DensityOperator mix(const ModeSpace& s, const std::vector<Vec>& branches) {
  Mat m = Mat::Zero(s.dim(), s.dim());
  for (const Vec& b : branches) m += b * b.adjoint();
  return {s, m};
}

}  // namespace

ElementaryResult generate_elementary(Scheme scheme, const ImperfectionSet& imp, double L0_km, int n_max) {
  imp.validate();
  if (!(L0_km >= 0)) throw ParameterError("segment length must be non-negative");
  ElementaryResult res;
  res.attempt_duration = attempt_duration(scheme, imp, L0_km);
  ImperfectionSet det = imp;
  det.v = 0;  // photons go straight to the detectors

  const double eps_a = imp.eps_a;
  const double eps_c = scheme == Scheme::TwoD ? imp.eps_c_effective() : imp.eps_a;
  const double emax = std::max(eps_a, eps_c);
  res.truncation_deficit = std::pow(emax, 2 * (n_max + 1)) / (1 - emax * emax);
  if (res.truncation_deficit > 1e-3)
    res.warnings.push_back("truncation n_max=" + std::to_string(n_max) + " too small for eps=" +
                           std::to_string(emax));

  const double arm = scheme == Scheme::TwoD ? L0_km : 0.5 * L0_km;
  const double fiber = std::exp(-arm / imp.L_att_km);

  PureState cc = two_mode_squeezed(eps_c, n_max, {"C", "mem"}, {"C", "photon"});
  DensityOperator rho_c = mix(cc.space, damp_photon(cc, fiber));
  PureState aa = two_mode_squeezed(eps_a, n_max, {"A", "mem"}, {"A", "photon"});

  MergeResult m;
  if (scheme == Scheme::OneD) {
    DensityOperator rho_a = mix(aa.space, damp_photon(aa, fiber));
    m = merge_across(rho_a, rho_c, {{1, 1}}, det);
  } else {
    // fiber and gate loss compose into one amplitude damping; then the gate
    // unitary on (a, B, b) and a trace over a, done branch by branch
    auto branches = damp_photon(aa, fiber * imp.eta);
    ModeSpace s4(n_max, {{"A", "mem"}, {"A", "photon"}, {"B", "mem"}, {"B", "photon"}});
    const Mat U = node_b_unitary(n_max);
    const long dl = n_max + 1;
    const long d3 = dl * dl * dl;
    Mat W(d3, static_cast<long>(branches.size()) * dl);
    long col = 0;
    for (const Vec& b : branches) {
      Vec full = Vec::Zero(s4.dim());
      for (long i = 0; i < b.size(); ++i) full(i * dl * dl) = b(i);  // B, b in vacuum
      PureState g = apply_local(PureState(s4, full), {1, 2, 3}, U);
      // reorder to (A, B, b, a) and split off a
      g = permute_modes(g, {0, 2, 3, 1});
      for (long a = 0; a < dl; ++a) W.col(col++) = g.amp(Eigen::seqN(a, d3, dl));
    }
    ModeSpace s3(n_max, {{"A", "mem"}, {"B", "mem"}, {"B", "photon"}});
    DensityOperator rho_abb{s3, W * W.adjoint()};
    m = merge_across(rho_abb, rho_c, {{2, 1}}, det);
  }
  res.q1 = m.probability;
  if (!(res.q1 > 0)) throw std::runtime_error("elementary generation has zero success probability");
  res.rho_e = m.rho.normalized();
  return res;
}

DensityOperator restrict_cutoff(const DensityOperator& rho, int n_max, double* discarded) {
  if (rho.space.n_max() == n_max) {
    if (discarded) *discarded = 0;
    return rho;
  }
  DensityOperator t = rho.space.n_max() > n_max ? truncate(rho, n_max) : embed(rho, n_max);
  const double kept = t.trace();
  if (discarded) *discarded = 1 - kept / rho.trace();
  return {t.space, t.m / kept};
}

AnalyticElementary analytic_elementary(const ImperfectionSet& imp, double L0_km) {
  AnalyticElementary a;
  const double e = std::exp(-L0_km / imp.L_att_km);
  const double eta = imp.eta, x2 = imp.eps_a * imp.eps_a;
  a.q_ghz = 2 * eta * e * (1 - imp.f - (1 + eta) * x2) * x2;
  a.q_L = 3 * eta * e * (1 - eta * e) * x2 * x2;
  a.q_R = 3 * eta * eta * e * (1 - e) * x2 * x2;
  a.q1 = 2 * imp.d + a.q_ghz + a.q_L + a.q_R;

  ModeSpace s(2, {{"A", "mem"}, {"B", "mem"}, {"C", "mem"}});
  Vec vac = PureState::basis(s, {0, 0, 0}).amp;
  Vec ghz = ghz_state(2).amp;
  Vec psiL = (std::sqrt(2.0) * PureState::basis(s, {2, 1, 0}).amp + PureState::basis(s, {1, 0, 1}).amp) / std::sqrt(3.0);
  Vec psiR = (PureState::basis(s, {1, 1, 1}).amp + std::sqrt(2.0) * PureState::basis(s, {0, 0, 2}).amp) / std::sqrt(3.0);
  Mat m = 2 * imp.d * vac * vac.adjoint() + a.q_ghz * ghz * ghz.adjoint() + a.q_L * psiL * psiL.adjoint() +
          a.q_R * psiR * psiR.adjoint();
  a.rho_e = DensityOperator{s, a.q1 > 0 ? Mat(m / a.q1) : m};
  return a;
}

EpsilonOptimum optimal_epsilon(const ImperfectionSet& imp, double L0_km) {
  EpsilonOptimum o;
  const double e = std::exp(-L0_km / imp.L_att_km);
  const double eta = imp.eta;
  const double bracket = (1 + eta) / 2 - eta * e;
  const double root = 1 / e * (1 / eta + 1) - 2;
  if (!(bracket > 0) || !(root >= 0)) {
    o.in_domain = false;
    o.eps_op = std::numeric_limits<double>::quiet_NaN();
    o.F_max = std::numeric_limits<double>::quiet_NaN();
    return o;
  }
  o.eps_op = std::pow(imp.d / e / (3 * eta * bracket), 0.25);
  o.F_max = 1 / std::sqrt(1 + std::sqrt(6 * imp.d) / (1 - imp.f) * std::sqrt(root));
  return o;
}

NumericOptimum maximize_scan(const std::function<double(double)>& objective, double eps_hi, int grid) {
  std::vector<double> xs, ys;
  for (int i = 1; i <= grid; ++i) {
    xs.push_back(eps_hi * i / grid);
    ys.push_back(objective(xs.back()));
  }
  const auto best = std::max_element(ys.begin(), ys.end()) - ys.begin();
  const double lo_v = *std::min_element(ys.begin(), ys.end());
  NumericOptimum r;
  r.eps = xs[best];
  r.value = ys[best];
  // flat objectives and optima pinned to the scan boundary carry no information
  if (ys[best] - lo_v < 1e-9 || best == 0 || best == grid - 1) {
    r.degenerate = true;
    return r;
  }
  double a = xs[best - 1], b = xs[best + 1];
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > 1e-5) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = objective(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = objective(x);
  if (fx >= r.value) {
    r.eps = x;
    r.value = fx;
  }
  return r;
}

NumericOptimum optimize_epsilon_numeric(const ImperfectionSet& imp, double L0_km, EpsilonObjective objective,
                                        int n_max) {
  auto f = [&](double eps) {
    ImperfectionSet p = imp;
    p.eps_a = eps;
    auto e = generate_elementary(Scheme::TwoD, p, L0_km, n_max);
    if (objective == EpsilonObjective::Elementary) return fidelity(e.rho_e, ghz_state(n_max));
    return level_one_fidelity(e.rho_e, p, 2);
  };
  return maximize_scan(f);
}

double efficiency_from_cooperativity(double C) {
  if (!(C >= 0)) throw ParameterError("cooperativity must be non-negative");
  if (std::isinf(C)) return 1.0;
  return C / (1 + C);
}

}  // namespace ghzrep
