// Semi-analytical engine: Laplace images of the (state, completion time)
// distribution, kept only as the value and -d/ds at s = 0.
#pragma once

#include "ghzrep/protocol.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace ghzrep {

struct LaplaceDual {
  DensityOperator value;  // image at s = 0
  DensityOperator deriv;  // -d/ds of the image at s = 0
  double probability() const { return value.trace(); }
  double mean_time() const { return deriv.trace(); }
};

// Amplitude damping of every mode at rate 1/T_coh. Functions of the
// generator are applied through the eigenbasis of the one-mode Liouvillian;
// the eigenvalue of a product mode is the sum of the one-mode eigenvalues.
class DecayGenerator {
 public:
  DecayGenerator(int n_max, double T_coh);

  bool trivial() const { return rate_ == 0.0; }
  double rate() const { return rate_; }

  // f(L) rho
  DensityOperator apply(const DensityOperator& rho, const std::function<double(double)>& f) const;
  // L rho written out with the dissipators (no eigenbasis)
  DensityOperator generator(const DensityOperator& rho) const;
  // (nu - L)^-1 rho
  DensityOperator resolvent(const DensityOperator& rho, double nu) const;
  DensityOperator evolve(const DensityOperator& rho, double t) const;
  // (eigenvalue, projection of rho onto its eigenspace), zero parts dropped
  std::vector<std::pair<double, DensityOperator>> components(const DensityOperator& rho) const;

 private:
  int n_max_ = 0;
  double rate_ = 0.0;
  Mat V_, Vinv_;
  std::vector<int> twice_lambda_;  // -2 lambda / rate per modal index
  Mat dissipator_;
};

// Process generating its output at exponential waiting times.
struct RateProcess {
  double nu = 0.0;
  DensityOperator rho;
};

// Prepared image as a sum of product operators a (x) b. The b side is a
// one-dimensional unit operator for single-process images.
struct ProductTerm {
  DensityOperator a, b;
};
struct ProductDual {
  std::vector<ProductTerm> value, deriv;
  double trace_value() const;
  double trace_deriv() const;
};

// Both processes start together; the first one waits in memory for the
// second. With a finite filter window a segment that has waited that long
// is discarded and its process restarts.
ProductDual pair_image(const RateProcess& a, const RateProcess& b, double T_coh,
                       double filter_window = std::numeric_limits<double>::infinity());
ProductDual single_image(const RateProcess& a);

using ProductMerge = std::function<MergeResult(const DensityOperator&, const DensityOperator&)>;

// Merge with heralding delay, restart of the whole preparation on failure.
// Output value is the normalized state, deriv traces to the mean time.
// success, if given, receives the per-attempt merge success probability.
LaplaceDual close_geometric(const ProductDual& prep, const ProductMerge& merge, double delay, double T_coh,
                            double* success = nullptr);

// Three-child cycle without filtering. The first two children merge into an
// intermediate which is then paired with the third. The intermediate is
// carried as its full image in s rather than as a rate process, which is
// exact when the three children are rate processes.
LaplaceDual cycle_image(const RateProcess& c0, const RateProcess& c1, const RateProcess& c2,
                        const ProductMerge& first, const ProductMerge& rest, double delay, double T_coh,
                        double* success = nullptr);

struct LaplaceLevel {
  DensityOperator rho;
  double T = 0.0;
  double success = 0.0;  // per-attempt success of the level's final closure
};

struct LaplaceResult {
  std::vector<LaplaceLevel> levels;  // index 0: elementary
  const DensityOperator& final_state() const { return levels.back().rho; }
  double T() const { return levels.back().T; }
};

LaplaceResult run_laplace(const Protocol& p);
LaplaceResult run_laplace(const NetworkSpec& spec);

}  // namespace ghzrep
