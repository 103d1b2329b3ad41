#include "ghzrep/network.hpp"

#include "ghzrep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <sstream>

namespace ghzrep {

double NetworkSpec::L0_km() const { return L_total_km / std::pow(2.0, n); }

void NetworkSpec::validate() const {
  imp.validate();
  if (scheme == Scheme::TwoD && n < 0) throw ParameterError("2D nesting level must be >= 0");
  if (scheme == Scheme::OneD && n < 1) throw ParameterError("1D nesting level must be >= 1");
  if (!(L_total_km > 0)) throw ParameterError("distance must be positive");
  if (n_max < 1) throw ParameterError("network n_max must be >= 1");
  if (n_max_elementary < n_max) throw ParameterError("elementary truncation below network truncation");
}

long swap_count(Scheme scheme, int n) {
  if (scheme == Scheme::OneD) {
    if (n < 1) throw ParameterError("1D nesting level must be >= 1");
    return 3 * ((1L << (n - 1)) - 1) + 6;
  }
  if (n < 0) throw ParameterError("2D nesting level must be >= 0");
  long p = 1;
  for (int k = 0; k < n; ++k) p *= 3;
  return 3 * (p - 1) / 2;
}

long memory_count(Scheme scheme, int n) {
  if (scheme == Scheme::OneD) {
    if (n < 1) throw ParameterError("1D nesting level must be >= 1");
    return 3 * (1L << n) + 9;
  }
  if (n < 0) throw ParameterError("2D nesting level must be >= 0");
  long p = 3;
  for (int k = 0; k < n; ++k) p *= 3;
  return p;
}

double merge_delay(const ImperfectionSet& imp, double span_km) { return 2 * span_km / imp.v_c_km_per_s + imp.pulse_s; }

double event_span(const NetworkSpec& spec, int level) {
  const double L0 = spec.L0_km();
  if (spec.scheme == Scheme::OneD && level >= spec.n) return spec.span_factor * std::pow(2.0, spec.n - 1) * L0;
  return spec.span_factor * std::pow(2.0, level) * L0;
}

std::vector<MergeEvent> build_schedule(const NetworkSpec& spec) {
  std::vector<MergeEvent> ev;
  auto name = [](int level, long seg, int child, const char* role) {
    std::ostringstream o;
    o << "L" << level << ".s" << seg << ".c" << child << "." << role;
    return o.str();
  };
  if (spec.scheme == Scheme::TwoD) {
    for (int k = 1; k <= spec.n; ++k) {
      long segs = 1;
      for (int q = k; q < spec.n; ++q) segs *= 3;
      const double span = event_span(spec, k);
      for (long s = 0; s < segs; ++s) {
        ev.push_back({k, "cycle", name(k, s, 1, "next"), name(k, s, 2, "prev"), span});
        ev.push_back({k, "cycle", name(k, s, 2, "next"), name(k, s, 3, "prev"), span});
        ev.push_back({k, "cycle", name(k, s, 3, "next"), name(k, s, 1, "prev"), span});
      }
    }
    return ev;
  }
  for (int k = 1; k < spec.n; ++k) {
    const long per_branch = 1L << (spec.n - 1 - k);
    for (int b = 0; b < 3; ++b)
      for (long s = 0; s < per_branch; ++s)
        ev.push_back({k, "doubling", name(k, b * per_branch + s, 1, "R"), name(k, b * per_branch + s, 2, "L"),
                      event_span(spec, k)});
  }
  const double span = event_span(spec, spec.n);
  for (int b = 1; b <= 3; ++b) ev.push_back({spec.n, "ghz-attach", name(spec.n, b, 0, "near"), name(spec.n, b, 0, "ghz"), span});
  ev.push_back({spec.n, "cycle", name(spec.n, 0, 1, "next"), name(spec.n, 0, 2, "prev"), span});
  ev.push_back({spec.n, "cycle", name(spec.n, 0, 2, "next"), name(spec.n, 0, 3, "prev"), span});
  ev.push_back({spec.n, "cycle", name(spec.n, 0, 3, "next"), name(spec.n, 0, 1, "prev"), span});
  return ev;
}

std::string CyclePlan::describe() const {
  std::ostringstream o;
  for (int c = 0; c < 3; ++c) o << (c ? " " : "") << roles[c][0] << roles[c][1] << roles[c][2];
  o << " -> " << out_order[0] << out_order[1] << out_order[2] << (flip_c ? " Z" : "");
  return o.str();
}

DensityOperator phase_flip(const DensityOperator& rho, int mode) {
  Mat z = Mat::Zero(rho.space.local_dim(), rho.space.local_dim());
  for (int n = 0; n <= rho.space.n_max(); ++n) z(n, n) = (n % 2) ? -1.0 : 1.0;
  return conjugate_local(rho, {mode}, z);
}

namespace {

std::vector<int> as_vec(const std::array<int, 3>& a) { return {a[0], a[1], a[2]}; }

DensityOperator finish_cycle(const DensityOperator& o123, const CyclePlan& plan) {
  DensityOperator r = permute_modes(o123, as_vec(plan.out_order));
  if (plan.flip_c) r = phase_flip(r, 2);
  r.space = ModeSpace(r.space.n_max(), {{"A", "mem"}, {"B", "mem"}, {"C", "mem"}});
  return r;
}

}  // namespace

MergeResult cycle_first(const DensityOperator& c1, const DensityOperator& c2, const CyclePlan& plan,
                        const ImperfectionSet& imp) {
  auto a = permute_modes(c1, as_vec(plan.roles[0]));  // (o1, n1, p1)
  auto b = permute_modes(c2, as_vec(plan.roles[1]));  // (o2, n2, p2)
  return merge_across(a, b, {{1, 2}}, imp);            // (o1, p1, o2, n2)
}

MergeResult cycle_rest(const DensityOperator& xy, const DensityOperator& c3, const CyclePlan& plan,
                       const ImperfectionSet& imp) {
  auto c = permute_modes(c3, as_vec(plan.roles[2]));  // (o3, n3, p3)
  auto m = merge_across(xy, c, {{3, 2}, {1, 1}}, imp);  // (o1, o2, o3)
  m.rho = finish_cycle(m.rho, plan);
  return m;
}

CycleStatic cycle_merge_static(const DensityOperator& c1, const DensityOperator& c2, const DensityOperator& c3,
                               const CyclePlan& plan, const ImperfectionSet& imp) {
  CycleStatic out;
  auto first = cycle_first(c1, c2, plan, imp);
  out.p_first = first.probability;
  if (!(first.probability > 0)) return out;
  auto rest = cycle_rest(first.rho.normalized(), c3, plan, imp);
  out.p_rest = rest.probability;
  out.probability = out.p_first * out.p_rest;
  if (rest.probability > 0) out.rho = rest.rho.normalized();
  return out;
}

SequentialProbabilities cycle_sequential_probabilities(const DensityOperator& c1, const DensityOperator& c2,
                                                       const DensityOperator& c3, const CyclePlan& plan,
                                                       const ImperfectionSet& imp) {
  SequentialProbabilities p;
  auto first = cycle_first(c1, c2, plan, imp);
  p.p1 = first.probability;
  auto c = permute_modes(c3, as_vec(plan.roles[2]));
  auto second = merge_across(first.rho.normalized(), c, {{3, 2}}, imp);  // (o1, p1, o2, o3, n3)
  p.p2 = second.probability;
  auto third = merge(second.rho.normalized(), 1, 4, imp);
  p.p3 = third.probability;
  return p;
}

namespace {

std::vector<std::array<int, 3>> all_perms(bool far_connector) {
  std::vector<std::array<int, 3>> ps;
  std::array<int, 3> p{0, 1, 2};
  do {
    if (!far_connector || p[0] != 0) ps.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return ps;
}

// Finds the relabeling of (o1, o2, o3) and the phase fix that turn an ideal
// output into the target GHZ state.
bool assign_output(const DensityOperator& o123, CyclePlan& plan) {
  for (const auto& perm : all_perms(false))
    for (bool flip : {false, true}) {
      plan.out_order = perm;
      plan.flip_c = flip;
      auto r = finish_cycle(o123, plan);
      if (fidelity(r, ghz_state(r.space.n_max())) > 1 - 1e-9) return true;
    }
  return false;
}

// 1D: every merge joins the far end of one link with a local GHZ mode.
bool link_meets_ghz(const std::array<std::array<int, 3>, 3>& r) {
  for (int c = 0; c < 3; ++c)
    if ((r[c][1] == 0) == (r[(c + 1) % 3][2] == 0)) return false;
  return true;
}

using Roles = std::array<std::array<int, 3>, 3>;
using Tagged = std::pair<std::array<int, 3>, Roles>;

Tagged rotate(const Tagged& t) {
  const auto& [g, r] = t;
  return {{g[1], g[2], g[0]}, {r[1], r[2], r[0]}};
}

// Scans all role assignments for three (possibly different) ideal children.
// tag identifies the children so that cyclic relabelings can be dropped.
void scan_candidates(const std::array<DensityOperator, 3>& kids, const std::array<int, 3>& tag, bool far_connector,
                     std::set<Tagged>& seen, std::vector<CyclePlan>& out) {
  const auto ideal = ImperfectionSet::ideal();
  const auto perms = all_perms(far_connector);
  for (const auto& r1 : perms)
    for (const auto& r2 : perms)
      for (const auto& r3 : perms) {
        Roles roles{r1, r2, r3};
        Tagged t{tag, roles};
        Tagged t2 = rotate(t), t3 = rotate(t2);
        if (seen.count(std::min({t, t2, t3}))) continue;
        if (far_connector && !link_meets_ghz(roles)) continue;
        CyclePlan plan;
        plan.roles = roles;
        auto sp = cycle_sequential_probabilities(kids[0], kids[1], kids[2], plan, ideal);
        if (std::abs(sp.p1 - 0.5) > 1e-9 || std::abs(sp.p2 - 0.5) > 1e-9 || std::abs(sp.p3 - 1) > 1e-9) continue;
        auto first = cycle_first(kids[0], kids[1], plan, ideal);
        auto c = permute_modes(kids[2], as_vec(plan.roles[2]));
        auto m = merge_across(first.rho.normalized(), c, {{3, 2}, {1, 1}}, ideal);
        if (!assign_output(m.rho.normalized(), plan)) continue;
        seen.insert(std::min({t, t2, t3}));
        out.push_back(plan);
      }
}

}  // namespace

const std::vector<CyclePlan>& cycle_candidates() {
  static const std::vector<CyclePlan> c2d = [] {
    std::set<Tagged> seen;
    std::vector<CyclePlan> out;
    const auto g = rho_ghz(1);
    scan_candidates({g, g, g}, {0, 0, 0}, false, seen, out);
    return out;
  }();
  return c2d;
}

CyclePlan optimize_orientation(const DensityOperator& child, const ImperfectionSet& imp,
                               const std::vector<CyclePlan>& candidates) {
  if (candidates.empty()) throw ParameterError("no orientation candidates");
  if (candidates.size() == 1) return candidates.front();
  const auto target = ghz_state(child.space.n_max());
  double best = -1;
  size_t arg = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto r = cycle_merge_static(child, child, child, candidates[i], imp);
    if (!(r.probability > 0)) continue;
    double f = fidelity(r.rho, target);
    if (f > best + 1e-12) {
      best = f;
      arg = i;
    }
  }
  return candidates[arg];
}

DensityOperator ideal_bell(int n_max) {
  ModeSpace s(n_max, {{"L", "mem"}, {"R", "mem"}});
  Vec v = Vec::Zero(s.dim());
  v(s.index({1, 0})) = v(s.index({0, 1})) = 1 / std::sqrt(2.0);
  return DensityOperator(PureState(s, v));
}

MergeResult doubling_merge(const DensityOperator& left, const DensityOperator& right, const ImperfectionSet& imp) {
  auto m = merge_across(left, right, {{1, 0}}, imp);
  m.rho.space = ModeSpace(m.rho.space.n_max(), {{"L", "mem"}, {"R", "mem"}});
  return m;
}

MergeResult attach_ghz(const DensityOperator& link, int ghz_mode, const ImperfectionSet& imp) {
  auto g = rho_ghz(link.space.n_max());
  return merge_across(link, g, {{1, ghz_mode}}, imp);
}

const std::vector<OneDPlan>& one_d_candidates() {
  static const std::vector<OneDPlan> plans = [] {
    std::array<DensityOperator, 3> t;
    for (int g = 0; g < 3; ++g) t[g] = attach_ghz(ideal_bell(1), g, ImperfectionSet::ideal()).rho.normalized();
    std::set<Tagged> seen;
    std::vector<OneDPlan> out;
    for (int g1 = 0; g1 < 3; ++g1)
      for (int g2 = 0; g2 < 3; ++g2)
        for (int g3 = 0; g3 < 3; ++g3) {
          std::vector<CyclePlan> found;
          scan_candidates({t[g1], t[g2], t[g3]}, {g1, g2, g3}, true, seen, found);
          for (const auto& c : found) out.push_back({{g1, g2, g3}, c});
        }
    return out;
  }();
  return plans;
}

LevelRecord merge_level_static(const DensityOperator& child, const NetworkSpec& spec, int level,
                               const CyclePlan& plan) {
  LevelRecord r;
  if (spec.scheme == Scheme::TwoD) {
    auto c = cycle_merge_static(child, child, child, plan, spec.imp);
    if (!(c.probability > 0)) throw std::runtime_error("level merge has zero success probability");
    r.rho = c.rho;
    r.probability = c.probability;
    return r;
  }
  if (level < spec.n) {
    auto m = doubling_merge(child, child, spec.imp);
    if (!(m.probability > 0)) throw std::runtime_error("doubling merge has zero success probability");
    r.rho = m.rho.normalized();
    r.probability = m.probability;
    return r;
  }
  throw ParameterError("use the 1D final-stage overload for the last level");
}

namespace {

LevelRecord final_stage_1d(const DensityOperator& link, const NetworkSpec& spec, const OneDPlan& plan) {
  std::array<DensityOperator, 3> t;
  double p = 1;
  for (int i = 0; i < 3; ++i) {
    auto m = attach_ghz(link, plan.ghz_mode[i], spec.imp);
    if (!(m.probability > 0)) throw std::runtime_error("GHZ attachment has zero success probability");
    t[i] = m.rho.normalized();
    p *= m.probability;
  }
  auto c = cycle_merge_static(t[0], t[1], t[2], plan.cycle, spec.imp);
  if (!(c.probability > 0)) throw std::runtime_error("final merge has zero success probability");
  return {c.rho, p * c.probability};
}

}  // namespace

StaticResult run_static(const NetworkSpec& spec, const DensityOperator& elementary, std::optional<CyclePlan> plan2d,
                        std::optional<OneDPlan> plan1d) {
  spec.validate();
  StaticResult res;
  DensityOperator cur = elementary.space.n_max() == spec.n_max ? elementary : restrict_cutoff(elementary, spec.n_max);
  res.levels.push_back({cur, 1.0});
  if (spec.scheme == Scheme::TwoD) {
    if (spec.n == 0) return res;
    res.plan2d = plan2d ? *plan2d : optimize_orientation(cur, spec.imp, cycle_candidates());
    for (int k = 1; k <= spec.n; ++k) {
      res.levels.push_back(merge_level_static(cur, spec, k, res.plan2d));
      cur = res.levels.back().rho;
    }
    return res;
  }
  for (int k = 1; k < spec.n; ++k) {
    res.levels.push_back(merge_level_static(cur, spec, k, {}));
    cur = res.levels.back().rho;
  }
  if (plan1d) {
    res.plan1d = *plan1d;
  } else {
    const auto target = ghz_state(spec.n_max);
    double best = -1;
    for (const auto& p : one_d_candidates()) {
      double f = fidelity(final_stage_1d(cur, spec, p).rho, target);
      if (f > best + 1e-12) {
        best = f;
        res.plan1d = p;
      }
    }
  }
  res.levels.push_back(final_stage_1d(cur, spec, res.plan1d));
  return res;
}

double level_one_fidelity(const DensityOperator& elementary, const ImperfectionSet& imp, int n_max) {
  DensityOperator child = restrict_cutoff(elementary, n_max);
  auto plan = optimize_orientation(child, imp, cycle_candidates());
  auto r = cycle_merge_static(child, child, child, plan, imp);
  return fidelity(r.rho, ghz_state(n_max));
}

ElementaryResult network_elementary(const NetworkSpec& spec) {
  auto e = generate_elementary(spec.scheme, spec.imp, spec.L0_km(), spec.n_max_elementary);
  double lost = 0;
  e.rho_e = restrict_cutoff(e.rho_e, spec.n_max, &lost);
  if (lost > 1e-3)
    e.warnings.push_back("restricting the elementary state to n_max=" + std::to_string(spec.n_max) +
                         " discards weight " + std::to_string(lost));
  return e;
}

}  // namespace ghzrep
