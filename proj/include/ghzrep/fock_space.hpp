// Truncated multi-mode Fock space: states, tensor products, partial traces
// and conditional projections.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghzrep {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModeLabel {
  std::string node;
  std::string role;
  bool operator==(const ModeLabel&) const = default;
};

// Mode 0 is the most significant digit of the flat index.
class ModeSpace {
 public:
  ModeSpace() = default;
  ModeSpace(int num_modes, int n_max);
  ModeSpace(int n_max, std::vector<ModeLabel> labels);

  int num_modes() const { return static_cast<int>(labels_.size()); }
  int n_max() const { return n_max_; }
  int local_dim() const { return n_max_ + 1; }
  long dim() const { return dim_; }

  const std::vector<ModeLabel>& labels() const { return labels_; }
  const ModeLabel& label(int mode) const { return labels_.at(mode); }
  void set_label(int mode, ModeLabel l) { labels_.at(mode) = std::move(l); }
  // -1 if not found
  int find(const std::string& node, const std::string& role = "") const;

  long index(const std::vector<int>& occ) const;
  std::vector<int> occupations(long idx) const;

  ModeSpace subspace(const std::vector<int>& modes) const;
  ModeSpace concat(const ModeSpace& other) const;

  bool operator==(const ModeSpace& o) const {
    return n_max_ == o.n_max_ && labels_.size() == o.labels_.size();
  }

 private:
  int n_max_ = 0;
  long dim_ = 1;
  std::vector<ModeLabel> labels_;
};

struct PureState {
  ModeSpace space;
  Vec amp;

  PureState() = default;
  PureState(ModeSpace s, Vec a) : space(std::move(s)), amp(std::move(a)) {}
  static PureState basis(const ModeSpace& s, const std::vector<int>& occ);
  double norm2() const { return amp.squaredNorm(); }
};

struct DensityOperator {
  ModeSpace space;
  Mat m;

  DensityOperator() = default;
  DensityOperator(ModeSpace s, Mat mat) : space(std::move(s)), m(std::move(mat)) {}
  explicit DensityOperator(const PureState& psi)
      : space(psi.space), m(psi.amp * psi.amp.adjoint()) {}
  static DensityOperator zero(const ModeSpace& s);

  int num_modes() const { return space.num_modes(); }
  double trace() const { return m.trace().real(); }
  DensityOperator normalized() const;
};

struct StateDiagnostics {
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  bool ok = true;
};

// Checks the invariants without modifying anything (no eigenvalue clipping).
StateDiagnostics diagnose(const DensityOperator& rho);

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
PureState tensor(const PureState& a, const PureState& b);

// Result modes are the kept modes in increasing original order.
DensityOperator partial_trace(const DensityOperator& rho, std::vector<int> keep);

// Unnormalized operator on the remaining modes after finding `modes` in
// occupation `pattern`.
DensityOperator project(const DensityOperator& rho, const std::vector<int>& modes,
                        const std::vector<int>& pattern);

// new mode k is old mode order[k]
DensityOperator permute_modes(const DensityOperator& rho, const std::vector<int>& order);
PureState permute_modes(const PureState& psi, const std::vector<int>& order);

// Index map used by every reordering routine: flat index in the permuted
// space -> flat index in the original space.
std::vector<long> permutation_map(const ModeSpace& s, const std::vector<int>& order);

// Order that moves `last` to the end (in the given order), others keep order.
std::vector<int> order_with_last(int num_modes, const std::vector<int>& last);

// Cuts every mode down to a smaller n_max. Population above is discarded, not
// renormalized.
DensityOperator truncate(const DensityOperator& rho, int n_max);
DensityOperator embed(const DensityOperator& rho, int n_max);

// Single-mode ladder operators of dimension n_max+1.
Mat annihilation(int n_max);
Mat number_op(int n_max);

// Applies a local operator `op` acting on `modes` (in the given order):
// returns (op (x) I) rho (op (x) I)^dagger.
DensityOperator conjugate_local(const DensityOperator& rho, const std::vector<int>& modes,
                                const Mat& op);
PureState apply_local(const PureState& psi, const std::vector<int>& modes, const Mat& op);

// Dense Kronecker product.
Mat kron(const Mat& a, const Mat& b);

// In place: A (d^2 x d^2) applied to the row-major vectorized (i, j) block of
// one mode, for all settings of the other modes' row and column digits.
void apply_mode_liouville(Mat& m, int num_modes, int local_dim, int mode, const Mat& A);

}  // namespace ghzrep
