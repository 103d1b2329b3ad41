#include "ghzrep/analysis.hpp"

#include "ghzrep/network.hpp"

#include <algorithm>
#include <cmath>

namespace ghzrep {

namespace {

ModeSpace abc(int n_max) { return ModeSpace(n_max, {{"A", "mem"}, {"B", "mem"}, {"C", "mem"}}); }

DensityOperator projector(const ModeSpace& s, std::vector<int> occ) {
  return DensityOperator(PureState::basis(s, occ));
}

}  // namespace

PureState ghz_state(int n_max) { return ghz_basis_state(0, +1, n_max); }

PureState ghz_basis_state(int j, int sign, int n_max) {
  if (j < 0 || j > 3 || (sign != 1 && sign != -1)) throw ParameterError("invalid GHZ basis label");
  if (n_max < 1) throw ParameterError("GHZ states need n_max >= 1");
  ModeSpace s = abc(n_max);
  const int k = 3 - j;
  Vec v = Vec::Zero(s.dim());
  v(s.index({j >> 1, j & 1, 1})) = 1 / std::sqrt(2.0);
  v(s.index({k >> 1, k & 1, 0})) = sign / std::sqrt(2.0);
  return {s, v};
}

DensityOperator rho_ghz(int n_max) { return DensityOperator(ghz_state(n_max)); }

DensityOperator rho_classical(int n_max) {
  ModeSpace s = abc(n_max);
  return {s, 0.5 * (projector(s, {0, 0, 1}).m + projector(s, {1, 1, 0}).m)};
}

DensityOperator rho_white(int n_max) {
  ModeSpace s = abc(n_max);
  Mat m = Mat::Zero(s.dim(), s.dim());
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        long i = s.index({a, b, c});
        m(i, i) = 1.0 / 8;
      }
  return {s, m};
}

double fidelity(const DensityOperator& rho, const PureState& target) {
  if (rho.space.dim() != target.space.dim()) throw ConfigError("fidelity: dimension mismatch");
  double o = (target.amp.adjoint() * rho.m * target.amp)(0, 0).real();
  return std::sqrt(std::clamp(o, 0.0, 1.0));
}

QubitProjection qubit_project(const DensityOperator& rho) {
  if (rho.space.n_max() < 1) throw ParameterError("qubit projection needs n_max >= 1");
  QubitProjection q;
  DensityOperator t = rho.space.n_max() == 1 ? rho : truncate(rho, 1);
  const double kept = t.trace();
  const double total = rho.trace();
  q.discarded = total > 0 ? 1 - kept / total : 0.0;
  if (!(kept > 1e-300)) {
    q.degenerate = true;
    q.rho = t;
    return q;
  }
  q.rho = DensityOperator{t.space, t.m / kept};
  return q;
}

GhzBasisWeights ghz_basis_weights(const DensityOperator& rho3) {
  const int n_max = rho3.space.n_max();
  auto expect = [&](int j, int sign) {
    PureState p = ghz_basis_state(j, sign, n_max);
    return (p.amp.adjoint() * rho3.m * p.amp)(0, 0).real();
  };
  GhzBasisWeights w;
  w.lambda0_plus = expect(0, 1);
  w.lambda0_minus = expect(0, -1);
  for (int j = 1; j <= 3; ++j) w.lambda[j - 1] = 0.5 * (expect(j, 1) + expect(j, -1));
  return w;
}

Distillability distillable(const DensityOperator& rho) {
  Distillability out;
  DensityOperator q = rho;
  if (rho.space.n_max() > 1) {
    auto p = qubit_project(rho);
    out.discarded = p.discarded;
    q = p.rho;
  }
  out.weights = ghz_basis_weights(q);
  const auto& w = out.weights;
  const double worst = 2 * *std::max_element(w.lambda.begin(), w.lambda.end());
  out.margin = std::abs(w.lambda0_plus - w.lambda0_minus) - worst;
  out.distillable = out.margin > 0;
  return out;
}

BenchmarkState analytic_benchmark_state(Scheme scheme, int n, double f, double v, double d) {
  BenchmarkState b;
  const double x = (f + v) * d;
  const double N = static_cast<double>(swap_count(scheme, n));
  Mat m;
  if (scheme == Scheme::OneD) {
    const double a = 2 * N * N * x;
    b.alpha_white = a * 8.0 / 9.0;
    b.alpha_classical = a / 9.0;
  } else {
    b.alpha_white = 16.0 * n * x;
    b.alpha_classical = (2 * N - 4.0 * n) * x;
  }
  const double g = 1 - b.alpha_white - b.alpha_classical;
  b.in_regime = g >= 0 && g <= 1 && b.alpha_white >= 0 && b.alpha_classical >= 0;
  b.rho = DensityOperator{abc(1), g * rho_ghz(1).m + b.alpha_white * rho_white(1).m +
                                      b.alpha_classical * rho_classical(1).m};
  return b;
}

double analytic_infidelity(Scheme scheme, int n, double f, double v, double d) {
  const double x = (f + v) * d;
  const double N = static_cast<double>(swap_count(scheme, n));
  if (scheme == Scheme::OneD) return 5.0 / 6.0 * N * N * x;
  return 0.5 * (N + 12.0 * n) * x;
}

}  // namespace ghzrep
