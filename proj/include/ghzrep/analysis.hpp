// Fidelity, qubit projection, GHZ-basis weights, the distillability
// criterion and closed-form benchmark states.
#pragma once

#include "ghzrep/elementary.hpp"

#include <array>

namespace ghzrep {

// (|1_A 1_B 0_C> + |0_A 0_B 1_C>)/sqrt2
PureState ghz_state(int n_max);
// (|j>_AB |1>_C + sign |3-j>_AB |0>_C)/sqrt2 with j = j1 j2 in binary
PureState ghz_basis_state(int j, int sign, int n_max);

DensityOperator rho_ghz(int n_max);
DensityOperator rho_classical(int n_max);  // (|001><001| + |110><110|)/2
DensityOperator rho_white(int n_max);      // identity on the qubit subspace / 8

// sqrt(<psi|rho|psi>)
double fidelity(const DensityOperator& rho, const PureState& target);

struct QubitProjection {
  DensityOperator rho;  // n_max = 1, renormalized
  double discarded = 0.0;
  bool degenerate = false;
};
QubitProjection qubit_project(const DensityOperator& rho);

struct GhzBasisWeights {
  double lambda0_plus = 0, lambda0_minus = 0;
  std::array<double, 3> lambda{};  // j = 1, 2, 3
};
GhzBasisWeights ghz_basis_weights(const DensityOperator& rho3);

struct Distillability {
  bool distillable = false;
  double margin = 0.0;
  GhzBasisWeights weights;
  double discarded = 0.0;
};
// Projects to the qubit subspace first when n_max > 1.
Distillability distillable(const DensityOperator& rho);

struct BenchmarkState {
  DensityOperator rho;  // 3 qubits
  double alpha_white = 0, alpha_classical = 0;
  bool in_regime = true;
};
BenchmarkState analytic_benchmark_state(Scheme scheme, int n, double f, double v, double d);
double analytic_infidelity(Scheme scheme, int n, double f, double v, double d);

}  // namespace ghzrep
