// Topology and schedules of the nested 2D scheme and the 1D benchmark, plus
// the static (perfect memory) level-merge engine.
#pragma once

#include "ghzrep/elementary.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ghzrep {

struct NetworkSpec {
  Scheme scheme = Scheme::TwoD;
  int n = 1;
  double L_total_km = 50.0;
  ImperfectionSet imp;
  int n_max = 2;             // network truncation
  int n_max_elementary = 5;  // truncation used while generating the elementary state
  // multiplier on the linear span used for communication delays
  double span_factor = 1.0;

  double L0_km() const;
  void validate() const;
};

long swap_count(Scheme scheme, int n);
long memory_count(Scheme scheme, int n);

struct MergeEvent {
  int level = 0;
  std::string stage;  // "cycle", "doubling", "ghz-attach"
  std::string node_i, node_j;
  double span_km = 0.0;
};
std::vector<MergeEvent> build_schedule(const NetworkSpec& spec);

// Communication delay of a merge at a given span (heralding plus the answer).
double merge_delay(const ImperfectionSet& imp, double span_km);
// Linear span used for delay accounting at level k (1-based).
double event_span(const NetworkSpec& spec, int level);

// Three tripartite children merged in a cycle:
//   (C1.next, C2.prev), then (C2.next, C3.prev) with (C3.next, C1.prev).
// roles[c] = {outer, next, prev} mode indices of child c. The outer modes
// (o1, o2, o3) are reordered by out_order to (A, B, C) and C gets a phase
// flip when flip_c is set.
struct CyclePlan {
  std::array<std::array<int, 3>, 3> roles{};
  std::array<int, 3> out_order{0, 1, 2};
  bool flip_c = false;
  std::string describe() const;
};

struct CycleStatic {
  DensityOperator rho;  // normalized, modes (A, B, C)
  double p_first = 0, p_rest = 0;
  double probability = 0;
};

// First merge only: returns the 4-mode operator (o1, p1, o2, n2), unnormalized.
MergeResult cycle_first(const DensityOperator& c1, const DensityOperator& c2, const CyclePlan& plan,
                        const ImperfectionSet& imp);
// Remaining two merges on the 4-mode operator and the third child. Output is
// the unnormalized (A, B, C) operator after reordering and phase fix.
MergeResult cycle_rest(const DensityOperator& xy, const DensityOperator& c3, const CyclePlan& plan,
                       const ImperfectionSet& imp);
CycleStatic cycle_merge_static(const DensityOperator& c1, const DensityOperator& c2, const DensityOperator& c3,
                               const CyclePlan& plan, const ImperfectionSet& imp);

// Orientation candidates that turn ideal children into the ideal GHZ state
// with probabilities (1/2, 1/2, 1). Cyclic relabelings of the children are
// removed.
const std::vector<CyclePlan>& cycle_candidates();

// Event 2 and event 3 applied one after the other on ideal children, for
// checking that the last merge is deterministic.
struct SequentialProbabilities {
  double p1 = 0, p2 = 0, p3 = 0;
};
SequentialProbabilities cycle_sequential_probabilities(const DensityOperator& c1, const DensityOperator& c2,
                                                       const DensityOperator& c3, const CyclePlan& plan,
                                                       const ImperfectionSet& imp);

// argmax of the level fidelity; first candidate wins ties.
CyclePlan optimize_orientation(const DensityOperator& child, const ImperfectionSet& imp,
                               const std::vector<CyclePlan>& candidates);

// 1D doubling swap: (L1, R1) with (L2, R2) merged at (R1, L2) -> (L1, R2).
MergeResult doubling_merge(const DensityOperator& left, const DensityOperator& right, const ImperfectionSet& imp);

// 1D: stage-1 attachment of a long link (far, near) to an ideal local GHZ
// state by merging near with GHZ mode ghz_mode. Output (far, other two).
// The far end is merged in stage 2 with the GHZ state held at its party.
MergeResult attach_ghz(const DensityOperator& link, int ghz_mode, const ImperfectionSet& imp);
DensityOperator ideal_bell(int n_max);

// Link i is attached at GHZ mode ghz_mode[i] and becomes cycle child i. In
// the cycle the far end (mode 0) of each child always meets a local GHZ mode
// of the neighbour and is never an output.
struct OneDPlan {
  std::array<int, 3> ghz_mode{2, 2, 2};
  CyclePlan cycle;
};
const std::vector<OneDPlan>& one_d_candidates();

struct LevelRecord {
  DensityOperator rho;
  double probability = 1.0;  // joint success probability of the level's merges
};

struct StaticResult {
  std::vector<LevelRecord> levels;  // index 0: elementary
  CyclePlan plan2d;
  OneDPlan plan1d;
  DensityOperator final_state() const { return levels.back().rho; }
};

// One nesting level with identical children.
LevelRecord merge_level_static(const DensityOperator& child, const NetworkSpec& spec, int level,
                               const CyclePlan& plan);

// Full recursion from a given elementary state (on spec.n_max).
StaticResult run_static(const NetworkSpec& spec, const DensityOperator& elementary,
                        std::optional<CyclePlan> plan2d = std::nullopt,
                        std::optional<OneDPlan> plan1d = std::nullopt);

// Level-I fidelity with the orientation optimized for this elementary state.
double level_one_fidelity(const DensityOperator& elementary, const ImperfectionSet& imp, int n_max);

// Elementary state for a network run, restricted to spec.n_max.
ElementaryResult network_elementary(const NetworkSpec& spec);

DensityOperator phase_flip(const DensityOperator& rho, int mode);

}  // namespace ghzrep
