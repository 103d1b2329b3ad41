#include "ghzrep/fock_space.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ghzrep {

namespace {

std::vector<ModeLabel> default_labels(int n) {
  std::vector<ModeLabel> l(n);
  for (int i = 0; i < n; ++i) l[i] = {"m" + std::to_string(i), ""};
  return l;
}

std::vector<int> inverse(const std::vector<int>& order) {
  std::vector<int> inv(order.size());
  for (size_t k = 0; k < order.size(); ++k) inv[order[k]] = static_cast<int>(k);
  return inv;
}

}  // namespace

ModeSpace::ModeSpace(int num_modes, int n_max) : ModeSpace(n_max, default_labels(num_modes)) {
  if (num_modes < 0) throw ConfigError("negative mode count");
}

ModeSpace::ModeSpace(int n_max, std::vector<ModeLabel> labels)
    : n_max_(n_max), labels_(std::move(labels)) {
  if (n_max < 0) throw ConfigError("n_max must be >= 0");
  dim_ = 1;
  for (size_t i = 0; i < labels_.size(); ++i) dim_ *= (n_max_ + 1);
}

int ModeSpace::find(const std::string& node, const std::string& role) const {
  for (int i = 0; i < num_modes(); ++i)
    if (labels_[i].node == node && (role.empty() || labels_[i].role == role)) return i;
  return -1;
}

long ModeSpace::index(const std::vector<int>& occ) const {
  long idx = 0;
  for (int k = 0; k < num_modes(); ++k) {
    if (occ[k] < 0 || occ[k] > n_max_) throw ParameterError("occupation out of range");
    idx = idx * (n_max_ + 1) + occ[k];
  }
  return idx;
}

std::vector<int> ModeSpace::occupations(long idx) const {
  std::vector<int> occ(num_modes());
  for (int k = num_modes() - 1; k >= 0; --k) {
    occ[k] = static_cast<int>(idx % (n_max_ + 1));
    idx /= (n_max_ + 1);
  }
  return occ;
}

ModeSpace ModeSpace::subspace(const std::vector<int>& modes) const {
  std::vector<ModeLabel> l;
  for (int m : modes) l.push_back(labels_.at(m));
  return ModeSpace(n_max_, l);
}

ModeSpace ModeSpace::concat(const ModeSpace& other) const {
  if (other.n_max_ != n_max_) throw ConfigError("tensor of spaces with different n_max");
  auto l = labels_;
  l.insert(l.end(), other.labels_.begin(), other.labels_.end());
  return ModeSpace(n_max_, l);
}

PureState PureState::basis(const ModeSpace& s, const std::vector<int>& occ) {
  Vec v = Vec::Zero(s.dim());
  v(s.index(occ)) = 1.0;
  return {s, v};
}

DensityOperator DensityOperator::zero(const ModeSpace& s) {
  return {s, Mat::Zero(s.dim(), s.dim())};
}

DensityOperator DensityOperator::normalized() const {
  double t = trace();
  if (!(t > 0)) throw std::runtime_error("cannot normalize operator with zero trace");
  return {space, m / t};
}

StateDiagnostics diagnose(const DensityOperator& rho) {
  StateDiagnostics d;
  d.trace = rho.trace();
  d.hermiticity_error = (rho.m - rho.m.adjoint()).cwiseAbs().maxCoeff();
  Mat h = 0.5 * (rho.m + rho.m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  d.ok = d.hermiticity_error <= 1e-10 && d.min_eigenvalue >= -1e-9 * std::max(d.trace, 1e-300) &&
         d.trace <= 1 + 1e-9 && d.trace >= -1e-12;
  return d;
}

void apply_mode_liouville(Mat& m, int num_modes, int d, int mode, const Mat& A) {
  long s = 1;
  for (int q = mode + 1; q < num_modes; ++q) s *= d;
  const long blocks = m.rows() / (d * s);
  // channels here are sparse in the local basis
  struct Entry {
    int row, col;
    cplx val;
  };
  std::vector<Entry> nz;
  for (int c = 0; c < d * d; ++c)
    for (int r = 0; r < d * d; ++r)
      if (A(r, c) != cplx(0)) nz.push_back({r, c, A(r, c)});
  std::vector<long> off(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) off[i * d + j] = i * s + j * s * m.rows();
  std::vector<cplx> v(d * d), o(d * d);
  cplx* data = m.data();
  for (long ch = 0; ch < blocks; ++ch)
    for (long cl = 0; cl < s; ++cl) {
      const long cb = ch * d * s + cl;
      for (long rh = 0; rh < blocks; ++rh)
        for (long rl = 0; rl < s; ++rl) {
          cplx* base = data + (rh * d * s + rl) + cb * m.rows();
          for (int p = 0; p < d * d; ++p) {
            v[p] = base[off[p]];
            o[p] = 0;
          }
          for (const auto& e : nz) o[e.row] += e.val * v[e.col];
          for (int p = 0; p < d * d; ++p) base[off[p]] = o[p];
        }
    }
}

Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return {a.space.concat(b.space), kron(a.m, b.m)};
}

PureState tensor(const PureState& a, const PureState& b) {
  Vec v(a.amp.size() * b.amp.size());
  for (Eigen::Index i = 0; i < a.amp.size(); ++i)
    v.segment(i * b.amp.size(), b.amp.size()) = a.amp(i) * b.amp;
  return {a.space.concat(b.space), v};
}

std::vector<long> permutation_map(const ModeSpace& s, const std::vector<int>& order) {
  const int n = s.num_modes();
  if (static_cast<int>(order.size()) != n) throw ParameterError("permutation size mismatch");
  std::vector<int> check = order;
  std::sort(check.begin(), check.end());
  for (int k = 0; k < n; ++k)
    if (check[k] != k) throw ParameterError("not a permutation");
  const long d = s.local_dim();
  std::vector<long> stride(n, 1);
  for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * d;
  std::vector<long> map(s.dim());
  // iterate new multi-index in lexicographic order
  std::vector<int> occ(n, 0);
  for (long i = 0; i < s.dim(); ++i) {
    long old = 0;
    for (int k = 0; k < n; ++k) old += occ[k] * stride[order[k]];
    map[i] = old;
    for (int k = n - 1; k >= 0; --k) {
      if (++occ[k] < d) break;
      occ[k] = 0;
    }
  }
  return map;
}

std::vector<int> order_with_last(int num_modes, const std::vector<int>& last) {
  std::vector<int> order;
  for (int k = 0; k < num_modes; ++k)
    if (std::find(last.begin(), last.end(), k) == last.end()) order.push_back(k);
  for (int m : last) {
    if (m < 0 || m >= num_modes) throw ParameterError("mode index out of range");
    order.push_back(m);
  }
  if (static_cast<int>(order.size()) != num_modes) throw ParameterError("repeated mode index");
  return order;
}

DensityOperator permute_modes(const DensityOperator& rho, const std::vector<int>& order) {
  auto map = permutation_map(rho.space, order);
  const long D = rho.space.dim();
  Mat out(D, D);
  for (long j = 0; j < D; ++j)
    for (long i = 0; i < D; ++i) out(i, j) = rho.m(map[i], map[j]);
  std::vector<ModeLabel> l;
  for (int k : order) l.push_back(rho.space.label(k));
  return {ModeSpace(rho.space.n_max(), l), out};
}

PureState permute_modes(const PureState& psi, const std::vector<int>& order) {
  auto map = permutation_map(psi.space, order);
  Vec out(psi.amp.size());
  for (long i = 0; i < psi.space.dim(); ++i) out(i) = psi.amp(map[i]);
  std::vector<ModeLabel> l;
  for (int k : order) l.push_back(psi.space.label(k));
  return {ModeSpace(psi.space.n_max(), l), out};
}

DensityOperator partial_trace(const DensityOperator& rho, std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const int n = rho.num_modes();
  std::vector<int> traced;
  for (int k = 0; k < n; ++k)
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);
  // kept modes first, traced modes last
  std::vector<int> order = keep;
  order.insert(order.end(), traced.begin(), traced.end());
  DensityOperator p = permute_modes(rho, order);
  long dt = 1;
  for (size_t i = 0; i < traced.size(); ++i) dt *= rho.space.local_dim();
  const long dk = rho.space.dim() / dt;
  Mat out = Mat::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) out(a, b) = p.m.block(a * dt, b * dt, dt, dt).trace();
  return {rho.space.subspace(keep), out};
}

DensityOperator project(const DensityOperator& rho, const std::vector<int>& modes,
                        const std::vector<int>& pattern) {
  if (modes.size() != pattern.size()) throw ParameterError("pattern size mismatch");
  for (int p : pattern)
    if (p < 0 || p > rho.space.n_max()) throw ParameterError("pattern entry exceeds n_max");
  auto order = order_with_last(rho.num_modes(), modes);
  DensityOperator p = permute_modes(rho, order);
  ModeSpace loc = rho.space.subspace(modes);
  const long dl = loc.dim();
  const long dr = rho.space.dim() / dl;
  const long k = loc.index(pattern);
  Mat out(dr, dr);
  for (long a = 0; a < dr; ++a)
    for (long b = 0; b < dr; ++b) out(a, b) = p.m(a * dl + k, b * dl + k);
  std::vector<int> rest(order.begin(), order.end() - modes.size());
  return {rho.space.subspace(rest), out};
}

DensityOperator truncate(const DensityOperator& rho, int n_max) {
  const ModeSpace& s = rho.space;
  if (n_max > s.n_max()) throw ParameterError("truncate cannot enlarge the space");
  ModeSpace t(n_max, s.labels());
  std::vector<long> idx(t.dim());
  for (long i = 0; i < t.dim(); ++i) idx[i] = s.index(t.occupations(i));
  Mat out(t.dim(), t.dim());
  for (long j = 0; j < t.dim(); ++j)
    for (long i = 0; i < t.dim(); ++i) out(i, j) = rho.m(idx[i], idx[j]);
  return {t, out};
}

DensityOperator embed(const DensityOperator& rho, int n_max) {
  const ModeSpace& s = rho.space;
  if (n_max < s.n_max()) throw ParameterError("embed cannot shrink the space");
  ModeSpace t(n_max, s.labels());
  std::vector<long> idx(s.dim());
  for (long i = 0; i < s.dim(); ++i) idx[i] = t.index(s.occupations(i));
  Mat out = Mat::Zero(t.dim(), t.dim());
  for (long j = 0; j < s.dim(); ++j)
    for (long i = 0; i < s.dim(); ++i) out(idx[i], idx[j]) = rho.m(i, j);
  return {t, out};
}

Mat annihilation(int n_max) {
  Mat a = Mat::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Mat number_op(int n_max) {
  Mat n = Mat::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) n(k, k) = k;
  return n;
}

DensityOperator conjugate_local(const DensityOperator& rho, const std::vector<int>& modes,
                                const Mat& op) {
  auto order = order_with_last(rho.num_modes(), modes);
  DensityOperator p = permute_modes(rho, order);
  const long dl = op.rows();
  const long dr = rho.space.dim() / dl;
  Mat out(p.m.rows(), p.m.cols());
  for (long a = 0; a < dr; ++a)
    for (long b = 0; b < dr; ++b)
      out.block(a * dl, b * dl, dl, dl) = op * p.m.block(a * dl, b * dl, dl, dl) * op.adjoint();
  return permute_modes(DensityOperator{p.space, out}, inverse(order));
}

PureState apply_local(const PureState& psi, const std::vector<int>& modes, const Mat& op) {
  auto order = order_with_last(psi.space.num_modes(), modes);
  PureState p = permute_modes(psi, order);
  const long dl = op.rows();
  const long dr = psi.space.dim() / dl;
  for (long a = 0; a < dr; ++a) p.amp.segment(a * dl, dl) = op * p.amp.segment(a * dl, dl);
  return permute_modes(p, inverse(order));
}

}  // namespace ghzrep
