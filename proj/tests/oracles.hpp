// Independent reference computations shared by the unit tests.
#pragma once

#include "ghzrep/fock_space.hpp"

#include <functional>
#include <random>

namespace oracle {

using ghzrep::Mat;
using ghzrep::Vec;

inline ghzrep::DensityOperator random_state(const ghzrep::ModeSpace& s, unsigned seed, int rank = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat a(s.dim(), rank);
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < rank; ++j) a(i, j) = {g(rng), g(rng)};
  Mat rho = a * a.adjoint();
  rho /= rho.trace();
  return {s, rho};
}

// Random state with no population in the top Fock level of any mode.
inline ghzrep::DensityOperator random_state_below_top(const ghzrep::ModeSpace& s, unsigned seed) {
  auto r = random_state(s, seed);
  for (long i = 0; i < s.dim(); ++i) {
    auto occ = s.occupations(i);
    for (int o : occ)
      if (o == s.n_max()) {
        r.m.row(i).setZero();
        r.m.col(i).setZero();
      }
  }
  r.m /= r.m.trace();
  return r;
}

// Classical RK4 for d(rho)/dt = L(rho) with a small fixed step.
inline Mat rk4(const std::function<Mat(const Mat&)>& L, Mat rho, double t, int steps = 4000) {
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    Mat k1 = L(rho);
    Mat k2 = L(rho + 0.5 * h * k1);
    Mat k3 = L(rho + 0.5 * h * k2);
    Mat k4 = L(rho + h * k3);
    rho += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return rho;
}

inline Mat dissipator(const Mat& J, const Mat& rho) {
  Mat JdJ = J.adjoint() * J;
  return J * rho * J.adjoint() - 0.5 * (JdJ * rho + rho * JdJ);
}

inline Vec rk4_vec(const Mat& G, Vec psi, double t, int steps = 4000) {
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    Vec k1 = G * psi;
    Vec k2 = G * (psi + 0.5 * h * k1);
    Vec k3 = G * (psi + 0.5 * h * k2);
    Vec k4 = G * (psi + h * k3);
    psi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return psi;
}

}  // namespace oracle
