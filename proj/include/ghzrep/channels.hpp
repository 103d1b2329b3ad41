// Loss, dark counts, beamsplitter, detection, heralded merging and the
// node-B gate on the truncated Fock space.
#pragma once

#include "ghzrep/fock_space.hpp"

#include <limits>
#include <memory>
#include <utility>
#include <vector>

namespace ghzrep {

struct ImperfectionSet {
  double f = 0.05;      // detector loss probability
  double v = 0.05;      // read-out loss probability
  double d = 0.001;     // dark-count probability per pulse
  double eta = 0.6;     // node-B gate efficiency
  double eps_a = 0.1;
  double eps_c = -1.0;  // < 0 selects sqrt(eta) * eps_a
  double L_att_km = 22.0;
  double T_coh_s = std::numeric_limits<double>::infinity();
  double v_c_km_per_s = 2e5;
  double pulse_s = 1e-4;
  double filter_window_s = std::numeric_limits<double>::infinity();

  double eps_c_effective() const;
  void validate() const;  // throws ParameterError
  static ImperfectionSet ideal();
};

// One stage of a channel acting on a few modes of the space. Kraus stages
// apply sum_k K rho K^dagger; Liouville stages act on the row-major
// vectorized local block.
struct ChannelStage {
  enum class Kind { Kraus, Liouville };
  Kind kind = Kind::Kraus;
  std::vector<int> modes;
  std::vector<Mat> kraus;
  Mat liouville;
};

class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(ModeSpace space, std::vector<ChannelStage> stages, bool trace_preserving)
      : space_(std::move(space)), stages_(std::move(stages)), tp_(trace_preserving) {}
  static Superoperator identity(const ModeSpace& s) { return {s, {}, true}; }

  DensityOperator apply(const DensityOperator& rho) const;
  // this first, then next
  Superoperator then(const Superoperator& next) const;

  const ModeSpace& space() const { return space_; }
  bool trace_preserving() const { return tp_; }
  const std::vector<ChannelStage>& stages() const { return stages_; }

 private:
  ModeSpace space_;
  std::vector<ChannelStage> stages_;
  bool tp_ = true;
};

// Single-mode building blocks, dimension n_max+1.
std::vector<Mat> amplitude_damping_kraus(int n_max, double transmissivity);
Mat lindblad_dissipator(const Mat& jump);  // row-major Liouville matrix of D[J]
Mat dark_count_transfer(int n_max, double d);
Mat beamsplitter_unitary(int n_max);        // two modes, index i*(n_max+1)+j
Mat node_b_unitary(int n_max);              // modes (a, B, b)

Superoperator loss_channel(const ModeSpace& s, int mode, double g);
Superoperator dark_count_channel(const ModeSpace& s, int mode, double d);
Superoperator beamsplitter(const ModeSpace& s, int i, int j);
Superoperator detection_channel(const ModeSpace& s, int mode, double f, double d);
// Amplitude decay of every mode over time t.
Superoperator memory_decay(const ModeSpace& s, double t, double T_coh);
DensityOperator decay(const DensityOperator& rho, double t, double T_coh);

// Heisenberg-picture effect of a successful merge on two modes,
//   E = 2 (R^dag (x) R^dag)[U_BS^dag (D_1 (x) D_0) U_BS],
// where D_m is the detector effect for m registered photons and R the
// read-out loss. The merged output is Tr_ij[(1 (x) E) rho].
struct MergeEffect {
  int n_max = 0;
  Mat E;        // d^2 x d^2, local index i*d + j
  Mat outcome;  // same without the factor 2
  Eigen::VectorXd eigenvalues;
  Mat eigenvectors;
};

std::shared_ptr<const MergeEffect> merge_effect(int n_max, double f, double v, double d);

// Photon-number-resolving outcome (m_i, m_j) effect after S_read, U_BS and
// S_det, restricted to the memory dimension. Used for completeness checks.
Mat detection_outcome_effect(int n_max, double f, double v, double d, int m_i, int m_j);

struct MergeResult {
  DensityOperator rho;  // unnormalized, trace = success probability
  double probability = 0.0;
};

// Merge of two modes of one operator. Remaining modes keep their order.
MergeResult merge(const DensityOperator& rho, int i, int j, const ImperfectionSet& imp);

// Merge across a product X (x) Y without forming it. pairs[k] = (mode of X,
// mode of Y). Output modes: remaining X modes then remaining Y modes.
MergeResult merge_across(const DensityOperator& x, const DensityOperator& y,
                         const std::vector<std::pair<int, int>>& pairs, const ImperfectionSet& imp);

// Combined effect for several simultaneous merges; local index order is
// (i_1, j_1, i_2, j_2, ...). Cached.
std::shared_ptr<const MergeEffect> joint_merge_effect(int n_max, const ImperfectionSet& imp,
                                                      int num_pairs);

// S_B: loss -ln(eta) on mode a, gate U on (a, B, b), trace out a. Returns the
// input's other modes followed by B and b.
DensityOperator node_b_gate(const DensityOperator& rho, int mode_a, double eta,
                            const ModeLabel& label_B = {"B", "mem"},
                            const ModeLabel& label_b = {"B", "photon"});

}  // namespace ghzrep
