// The protocol as a tree of heralded steps, shared by the Monte Carlo and
// Laplace engines so both execute exactly the same merges, delays and
// orientations. Identical subtrees are stored once.
#pragma once

#include "ghzrep/network.hpp"

namespace ghzrep {

struct ProtocolNode {
  enum class Kind { Elementary, Doubling, Attach, Cycle };
  Kind kind = Kind::Elementary;
  int level = 0;
  std::array<int, 3> child{-1, -1, -1};
  double delay_s = 0.0;  // heralding delay of the node's merge(s)
  int ghz_mode = 0;      // Attach
};

struct Protocol {
  NetworkSpec spec;
  ElementaryResult elementary;  // rho_e restricted to spec.n_max
  DensityOperator born;         // rho_e after decaying over one attempt
  CyclePlan plan2d;
  OneDPlan plan1d;
  std::vector<ProtocolNode> nodes;  // children precede parents
  int root = 0;

  double nu0() const { return elementary.q1 / elementary.attempt_duration; }
  const ProtocolNode& node(int i) const { return nodes.at(static_cast<size_t>(i)); }
};

// Orientations come from the static engine on the same elementary state
// unless given.
Protocol build_protocol(const NetworkSpec& spec, std::optional<CyclePlan> plan2d = std::nullopt,
                        std::optional<OneDPlan> plan1d = std::nullopt);
Protocol build_protocol(const NetworkSpec& spec, const ElementaryResult& elementary,
                        std::optional<CyclePlan> plan2d = std::nullopt,
                        std::optional<OneDPlan> plan1d = std::nullopt);

// The merges of each node on density operators.
MergeResult apply_doubling(const Protocol& p, const DensityOperator& a, const DensityOperator& b);
MergeResult apply_attach(const Protocol& p, const ProtocolNode& n, const DensityOperator& link);
MergeResult apply_cycle_first(const Protocol& p, const DensityOperator& c1, const DensityOperator& c2);
MergeResult apply_cycle_rest(const Protocol& p, const DensityOperator& xy, const DensityOperator& c3);

}  // namespace ghzrep
