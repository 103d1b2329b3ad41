// Elementary segments: the 2D triangle (A, B, C) and the 1D DLCZ link (A, C).
#pragma once

#include "ghzrep/channels.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ghzrep {

enum class Scheme { TwoD, OneD };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct ElementaryResult {
  DensityOperator rho_e;  // normalized
  double q1 = 0.0;
  double attempt_duration = 0.0;  // s
  double truncation_deficit = 0.0;
  std::vector<std::string> warnings;
};

// Modes (memory, photon); amplitudes sqrt(1-eps^2) eps^n up to n_max.
PureState two_mode_squeezed(double eps, int n_max, const ModeLabel& mem = {"X", "mem"},
                            const ModeLabel& photon = {"X", "photon"});

double attempt_duration(Scheme scheme, const ImperfectionSet& imp, double L0_km);

// Full pipeline: sources, fiber, node-B gate, interference and one click.
ElementaryResult generate_elementary(Scheme scheme, const ImperfectionSet& imp, double L0_km, int n_max);

// Restricts to a smaller cutoff and renormalizes; returns the weight removed.
DensityOperator restrict_cutoff(const DensityOperator& rho, int n_max, double* discarded = nullptr);

struct AnalyticElementary {
  double q_ghz = 0, q_L = 0, q_R = 0, q1 = 0;
  DensityOperator rho_e;  // on (A, B, C), n_max 2
};
AnalyticElementary analytic_elementary(const ImperfectionSet& imp, double L0_km);

struct EpsilonOptimum {
  double eps_op = 0;
  double F_max = 0;
  bool in_domain = true;
};
EpsilonOptimum optimal_epsilon(const ImperfectionSet& imp, double L0_km);

struct NumericOptimum {
  double eps = 0;
  double value = 0;
  bool degenerate = false;
};

// Grid over (0, eps_hi] followed by golden-section refinement.
NumericOptimum maximize_scan(const std::function<double(double)>& objective, double eps_hi = 0.5,
                             int grid = 40);

enum class EpsilonObjective { Elementary, LevelOne };
NumericOptimum optimize_epsilon_numeric(const ImperfectionSet& imp, double L0_km, EpsilonObjective objective,
                                        int n_max = 7);

double efficiency_from_cooperativity(double C);

}  // namespace ghzrep
