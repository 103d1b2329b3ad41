#include "ghzrep/protocol.hpp"

namespace ghzrep {

Protocol build_protocol(const NetworkSpec& spec, std::optional<CyclePlan> plan2d, std::optional<OneDPlan> plan1d) {
  spec.validate();
  return build_protocol(spec, network_elementary(spec), plan2d, plan1d);
}

Protocol build_protocol(const NetworkSpec& spec, const ElementaryResult& elementary, std::optional<CyclePlan> plan2d,
                        std::optional<OneDPlan> plan1d) {
  spec.validate();
  Protocol p;
  p.spec = spec;
  p.elementary = elementary;
  if (p.elementary.rho_e.space.n_max() != spec.n_max) p.elementary.rho_e = restrict_cutoff(elementary.rho_e, spec.n_max);
  if (!(p.elementary.q1 > 0) || !(p.elementary.attempt_duration > 0))
    throw ParameterError("elementary segment needs q1 > 0 and a positive attempt duration");
  p.born = decay(p.elementary.rho_e, p.elementary.attempt_duration, spec.imp.T_coh_s);

  const bool need2d = spec.scheme == Scheme::TwoD && spec.n > 0 && !plan2d;
  const bool need1d = spec.scheme == Scheme::OneD && !plan1d;
  if (need2d || need1d) {
    // orientation from the memory-free problem
    auto st = run_static(spec, p.elementary.rho_e, plan2d, plan1d);
    p.plan2d = st.plan2d;
    p.plan1d = st.plan1d;
  }
  if (plan2d) p.plan2d = *plan2d;
  if (plan1d) p.plan1d = *plan1d;

  ProtocolNode leaf;
  p.nodes.push_back(leaf);
  int cur = 0;
  auto add = [&](ProtocolNode n) {
    p.nodes.push_back(n);
    return static_cast<int>(p.nodes.size()) - 1;
  };
  if (spec.scheme == Scheme::TwoD) {
    for (int k = 1; k <= spec.n; ++k) {
      ProtocolNode n;
      n.kind = ProtocolNode::Kind::Cycle;
      n.level = k;
      n.child = {cur, cur, cur};
      n.delay_s = merge_delay(spec.imp, event_span(spec, k));
      cur = add(n);
    }
  } else {
    for (int k = 1; k < spec.n; ++k) {
      ProtocolNode n;
      n.kind = ProtocolNode::Kind::Doubling;
      n.level = k;
      n.child = {cur, cur, -1};
      n.delay_s = merge_delay(spec.imp, event_span(spec, k));
      cur = add(n);
    }
    const double delay = merge_delay(spec.imp, event_span(spec, spec.n));
    std::array<int, 3> attached{};
    for (int i = 0; i < 3; ++i) {
      ProtocolNode n;
      n.kind = ProtocolNode::Kind::Attach;
      n.level = spec.n;
      n.child = {cur, -1, -1};
      n.ghz_mode = p.plan1d.ghz_mode[i];
      n.delay_s = delay;
      attached[i] = add(n);
    }
    ProtocolNode c;
    c.kind = ProtocolNode::Kind::Cycle;
    c.level = spec.n;
    c.child = attached;
    c.delay_s = delay;
    cur = add(c);
  }
  p.root = cur;
  return p;
}

MergeResult apply_doubling(const Protocol& p, const DensityOperator& a, const DensityOperator& b) {
  return doubling_merge(a, b, p.spec.imp);
}

MergeResult apply_attach(const Protocol& p, const ProtocolNode& n, const DensityOperator& link) {
  return attach_ghz(link, n.ghz_mode, p.spec.imp);
}

namespace {
const CyclePlan& plan_of(const Protocol& p) {
  return p.spec.scheme == Scheme::TwoD ? p.plan2d : p.plan1d.cycle;
}
}  // namespace

MergeResult apply_cycle_first(const Protocol& p, const DensityOperator& c1, const DensityOperator& c2) {
  return cycle_first(c1, c2, plan_of(p), p.spec.imp);
}

MergeResult apply_cycle_rest(const Protocol& p, const DensityOperator& xy, const DensityOperator& c3) {
  return cycle_rest(xy, c3, plan_of(p), p.spec.imp);
}

}  // namespace ghzrep
