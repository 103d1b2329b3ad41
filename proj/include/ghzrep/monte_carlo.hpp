// Trajectory simulation of the full protocol: discrete generation attempts,
// waiting in memory, heralding delays, probabilistic merges with restart,
// temporal filtering and Russian roulette.
#pragma once

#include "ghzrep/protocol.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>

namespace ghzrep {

enum class Representation {
  Pure,   // state vectors, decay and merges sampled from Kraus branches
  Mixed,  // conditional density operator, only success/failure sampled
};

struct TrajectoryConfig {
  std::uint64_t seed = 1;
  long n_trajectories = 10000;
  // Russian roulette: each time the trajectory clock passes another multiple
  // of the budget it survives with the given probability and its weight is
  // divided by it.
  double roulette_budget_s = std::numeric_limits<double>::infinity();
  double roulette_survival = 0.5;
  Representation representation = Representation::Pure;
  int threads = 0;  // 0: hardware concurrency
  void validate() const;
};

using Rng = std::mt19937_64;
// Independent stream per (seed, trajectory index).
Rng trajectory_rng(std::uint64_t seed, std::uint64_t index);

struct SegmentSample {
  PureState state;         // eigenvector of rho_e
  double birth_age = 0.0;  // K attempt durations
  long attempts = 0;
  int level = 0;
};
SegmentSample sample_elementary(const ElementaryResult& e, Rng& rng);

// Kraus branches of a successful merge of mode pairs (i, j) within psi; the
// branch operators sum to the merged density operator. Remaining modes keep
// their order.
std::vector<Vec> merge_branches(const PureState& psi, const std::vector<std::pair<int, int>>& pairs,
                                const ImperfectionSet& imp, ModeSpace* out_space = nullptr);

// Unnormalized Kraus branches of memory decay over t on one mode.
std::vector<Vec> decay_branches(const PureState& psi, int mode, double t, double T_coh);

struct TrajectoryOutcome {
  bool completed = false;  // false: removed by roulette
  double weight = 0.0;
  double time = 0.0;
  DensityOperator rho;  // final state (projector in pure mode)
  long clamped = 0;     // merge probabilities above one, clipped
};
TrajectoryOutcome run_trajectory(const Protocol& p, const TrajectoryConfig& cfg, std::uint64_t index);

struct McEstimate {
  DensityOperator rho;
  Eigen::MatrixXd rho_stderr;
  double fidelity = 0, fidelity_stderr = 0;
  double T = 0, T_stderr = 0;
  long n_trajectories = 0, n_completed = 0, n_killed = 0;
  double weight_sum = 0;
  long clamped = 0;
  bool has_result() const { return n_completed > 0; }
};
McEstimate estimate(const Protocol& p, const TrajectoryConfig& cfg);
McEstimate estimate(const NetworkSpec& spec, const TrajectoryConfig& cfg);

}  // namespace ghzrep
