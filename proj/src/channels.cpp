#include "ghzrep/channels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace ghzrep {

double ImperfectionSet::eps_c_effective() const {
  return eps_c >= 0 ? eps_c : std::sqrt(eta) * eps_a;
}

void ImperfectionSet::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0 && p <= 1)) throw ParameterError(std::string(name) + " must lie in [0,1]");
  };
  prob(f, "f");
  prob(v, "v");
  prob(d, "d");
  prob(eta, "eta");
  if (!(eps_a >= 0 && eps_a < 1)) throw ParameterError("eps_a must lie in [0,1)");
  if (eps_c >= 1) throw ParameterError("eps_c must lie in [0,1)");
  if (!(L_att_km > 0)) throw ParameterError("L_att must be positive");
  if (!(T_coh_s > 0)) throw ParameterError("T_coh must be positive");
  if (!(v_c_km_per_s > 0)) throw ParameterError("v_c must be positive");
  if (!(pulse_s >= 0)) throw ParameterError("pulse duration must be non-negative");
  if (!(filter_window_s > 0)) throw ParameterError("filter window must be positive");
}

ImperfectionSet ImperfectionSet::ideal() {
  ImperfectionSet s;
  s.f = s.v = s.d = 0.0;
  s.eta = 1.0;
  s.eps_c = -1.0;
  return s;
}

namespace {

std::vector<int> inverse(const std::vector<int>& order) {
  std::vector<int> inv(order.size());
  for (size_t k = 0; k < order.size(); ++k) inv[order[k]] = static_cast<int>(k);
  return inv;
}

Mat identity(long n) { return Mat::Identity(n, n); }

double binom(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

DensityOperator apply_stage(const DensityOperator& rho, const ChannelStage& st) {
  auto order = order_with_last(rho.num_modes(), st.modes);
  DensityOperator p = permute_modes(rho, order);
  long dl = 1;
  for (size_t i = 0; i < st.modes.size(); ++i) dl *= rho.space.local_dim();
  const long dr = rho.space.dim() / dl;
  Mat out(p.m.rows(), p.m.cols());
  for (long a = 0; a < dr; ++a)
    for (long b = 0; b < dr; ++b) {
      const Mat blk = p.m.block(a * dl, b * dl, dl, dl);
      Mat res = Mat::Zero(dl, dl);
      if (st.kind == ChannelStage::Kind::Kraus) {
        for (const Mat& k : st.kraus) res += k * blk * k.adjoint();
      } else {
        Vec vec(dl * dl);
        for (long i = 0; i < dl; ++i)
          for (long j = 0; j < dl; ++j) vec(i * dl + j) = blk(i, j);
        Vec o = st.liouville * vec;
        for (long i = 0; i < dl; ++i)
          for (long j = 0; j < dl; ++j) res(i, j) = o(i * dl + j);
      }
      out.block(a * dl, b * dl, dl, dl) = res;
    }
  return permute_modes(DensityOperator{p.space, out}, inverse(order));
}

void check_mode(const ModeSpace& s, int mode) {
  if (mode < 0 || mode >= s.num_modes()) throw ParameterError("mode index out of range");
}

}  // namespace

DensityOperator Superoperator::apply(const DensityOperator& rho) const {
  if (rho.space.num_modes() != space_.num_modes() || rho.space.n_max() != space_.n_max())
    throw ConfigError("superoperator applied to operator on a different space");
  DensityOperator out = rho;
  for (const auto& st : stages_) out = apply_stage(out, st);
  return out;
}

Superoperator Superoperator::then(const Superoperator& next) const {
  if (!(next.space_ == space_)) throw ConfigError("composing superoperators on different spaces");
  auto st = stages_;
  st.insert(st.end(), next.stages_.begin(), next.stages_.end());
  return {space_, st, tp_ && next.tp_};
}

std::vector<Mat> amplitude_damping_kraus(int n_max, double t) {
  std::vector<Mat> ks;
  for (int k = 0; k <= n_max; ++k) {
    Mat K = Mat::Zero(n_max + 1, n_max + 1);
    for (int n = k; n <= n_max; ++n)
      K(n - k, n) = std::sqrt(binom(n, k) * std::pow(t, n - k) * std::pow(1 - t, k));
    if (K.cwiseAbs().maxCoeff() > 0) ks.push_back(K);
  }
  return ks;
}

Mat lindblad_dissipator(const Mat& J) {
  const long d = J.rows();
  Mat JdJ = J.adjoint() * J;
  return kron(J, J.conjugate()) - 0.5 * kron(JdJ, identity(d)) - 0.5 * kron(identity(d), JdJ.transpose());
}

namespace {

// Matrix exponentials are the expensive part of channel construction; they
// depend only on a couple of numbers, so keep them.
template <class Key, class Fn>
Mat cached(const Key& key, Fn&& build) {
  static std::mutex mu;
  static std::map<Key, Mat> cache;
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Mat m = build();
  std::lock_guard<std::mutex> lk(mu);
  return cache.emplace(key, std::move(m)).first->second;
}

}  // namespace

Mat dark_count_transfer(int n_max, double d) {
  return cached(std::make_tuple(0, n_max, d), [&] {
    Mat a = annihilation(n_max);
    Mat gen = d * (lindblad_dissipator(a) + lindblad_dissipator(a.adjoint()));
    return Mat(gen.exp());
  });
}

Mat beamsplitter_unitary(int n_max) {
  return cached(std::make_tuple(1, n_max, 0.0), [&] {
    Mat a = annihilation(n_max);
    Mat I = identity(n_max + 1);
    Mat ai = kron(a, I), aj = kron(I, a);
    Mat gen = ai.adjoint() * aj - ai * aj.adjoint();
    return Mat((std::numbers::pi / 4 * gen).exp());
  });
}

Mat node_b_unitary(int n_max) {
  return cached(std::make_tuple(2, n_max, 0.0), [&] {
    Mat a = annihilation(n_max);
    Mat I = identity(n_max + 1);
    Mat A = kron(kron(a, I), I), B = kron(kron(I, a), I), b = kron(kron(I, I), a);
    Mat gen = A * B.adjoint() * b.adjoint();
    gen -= gen.adjoint().eval();
    return Mat((std::numbers::pi / 2 * gen).exp());
  });
}

Superoperator loss_channel(const ModeSpace& s, int mode, double g) {
  if (!(g >= 0)) throw ParameterError("loss exponent must be non-negative");
  check_mode(s, mode);
  ChannelStage st;
  st.modes = {mode};
  st.kraus = amplitude_damping_kraus(s.n_max(), std::exp(-g));
  return {s, {st}, true};
}

Superoperator dark_count_channel(const ModeSpace& s, int mode, double d) {
  if (!(d >= 0 && d <= 1)) throw ParameterError("dark-count probability must lie in [0,1]");
  check_mode(s, mode);
  ChannelStage st;
  st.kind = ChannelStage::Kind::Liouville;
  st.modes = {mode};
  st.liouville = dark_count_transfer(s.n_max(), d);
  return {s, {st}, true};
}

Superoperator beamsplitter(const ModeSpace& s, int i, int j) {
  if (i == j) throw ParameterError("beamsplitter needs two distinct modes");
  check_mode(s, i);
  check_mode(s, j);
  ChannelStage st;
  st.modes = {i, j};
  st.kraus = {beamsplitter_unitary(s.n_max())};
  return {s, {st}, true};
}

Superoperator detection_channel(const ModeSpace& s, int mode, double f, double d) {
  if (!(f >= 0 && f < 1)) throw ParameterError("detector loss must lie in [0,1)");
  return loss_channel(s, mode, -std::log1p(-f)).then(dark_count_channel(s, mode, d));
}

Superoperator memory_decay(const ModeSpace& s, double t, double T_coh) {
  if (!(t >= 0)) throw ParameterError("decay time must be non-negative");
  std::vector<ChannelStage> st;
  if (std::isfinite(T_coh) && t > 0) {
    auto ks = amplitude_damping_kraus(s.n_max(), std::exp(-t / T_coh));
    for (int m = 0; m < s.num_modes(); ++m) st.push_back({ChannelStage::Kind::Kraus, {m}, ks, {}});
  }
  return {s, st, true};
}

DensityOperator decay(const DensityOperator& rho, double t, double T_coh) {
  if (!(t >= 0)) throw ParameterError("decay time must be non-negative");
  if (!std::isfinite(T_coh) || t == 0) return rho;
  // same channel as memory_decay, applied mode by mode without permutations
  const int d = rho.space.local_dim();
  Mat S = Mat::Zero(d * d, d * d);
  for (const Mat& k : amplitude_damping_kraus(rho.space.n_max(), std::exp(-t / T_coh))) S += kron(k, k.conjugate());
  DensityOperator out = rho;
  for (int m = 0; m < rho.num_modes(); ++m) apply_mode_liouville(out.m, rho.num_modes(), d, m, S);
  return out;
}

// --- detection effects -----------------------------------------------------

namespace {

// P(m registered | n incident) for n < K, after detector loss and dark counts.
Mat detector_response(int K, double f, double d) {
  const int K2 = K + 2;  // headroom for dark-count excitation above the largest input
  auto loss = amplitude_damping_kraus(K2 - 1, 1 - f);
  Mat T = dark_count_transfer(K2 - 1, d);
  Mat P = Mat::Zero(K2, K);
  for (int n = 0; n < K; ++n) {
    Mat rho = Mat::Zero(K2, K2);
    rho(n, n) = 1;
    Mat r2 = Mat::Zero(K2, K2);
    for (const Mat& k : loss) r2 += k * rho * k.adjoint();
    Vec vec(K2 * K2);
    for (int i = 0; i < K2; ++i)
      for (int j = 0; j < K2; ++j) vec(i * K2 + j) = r2(i, j);
    Vec o = T * vec;
    for (int m = 0; m < K2; ++m) P(m, n) = o(m * K2 + m).real();
  }
  return P;
}

Mat outcome_effect_impl(int n_max, double f, double v, double d, int mi, int mj) {
  const int dm = n_max + 1;
  const int K = 2 * n_max + 1;  // photon-number conservation keeps U_BS exact here
  Mat P = detector_response(K, f, d);
  Mat U = beamsplitter_unitary(K - 1);
  Vec diag(K * K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      diag(i * K + j) = (mi < P.rows() && mj < P.rows()) ? P(mi, i) * P(mj, j) : 0.0;
  Mat M = U.adjoint() * diag.asDiagonal() * U;
  Mat Md(dm * dm, dm * dm);
  for (int i = 0; i < dm; ++i)
    for (int j = 0; j < dm; ++j)
      for (int k = 0; k < dm; ++k)
        for (int l = 0; l < dm; ++l) Md(i * dm + j, k * dm + l) = M(i * K + j, k * K + l);
  auto R = amplitude_damping_kraus(n_max, 1 - v);
  Mat E = Mat::Zero(dm * dm, dm * dm);
  for (const Mat& a : R)
    for (const Mat& b : R) {
      Mat ab = kron(a, b);
      E += ab.adjoint() * Md * ab;
    }
  return 0.5 * (E + E.adjoint());
}

std::shared_ptr<MergeEffect> finish_effect(int n_max, Mat outcome, double factor) {
  auto e = std::make_shared<MergeEffect>();
  e->n_max = n_max;
  e->outcome = std::move(outcome);
  e->E = factor * e->outcome;
  Eigen::SelfAdjointEigenSolver<Mat> es(e->E);
  e->eigenvalues = es.eigenvalues();
  e->eigenvectors = es.eigenvectors();
  return e;
}

}  // namespace

Mat detection_outcome_effect(int n_max, double f, double v, double d, int m_i, int m_j) {
  return outcome_effect_impl(n_max, f, v, d, m_i, m_j);
}

std::shared_ptr<const MergeEffect> merge_effect(int n_max, double f, double v, double d) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double, double>, std::shared_ptr<const MergeEffect>> cache;
  auto key = std::make_tuple(n_max, f, v, d);
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto e = finish_effect(n_max, outcome_effect_impl(n_max, f, v, d, 1, 0), 2.0);
  std::lock_guard<std::mutex> lk(mu);
  return cache.emplace(key, e).first->second;
}

std::shared_ptr<const MergeEffect> joint_merge_effect(int n_max, const ImperfectionSet& imp, int num_pairs) {
  if (num_pairs < 1) throw ParameterError("need at least one merge pair");
  auto single = merge_effect(n_max, imp.f, imp.v, imp.d);
  if (num_pairs == 1) return single;
  static std::mutex mu;
  static std::map<std::tuple<int, double, double, double, int>, std::shared_ptr<const MergeEffect>> cache;
  auto key = std::make_tuple(n_max, imp.f, imp.v, imp.d, num_pairs);
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Mat o = single->outcome;
  for (int k = 1; k < num_pairs; ++k) o = kron(o, single->outcome);
  auto e = finish_effect(n_max, o, std::pow(2.0, num_pairs));
  std::lock_guard<std::mutex> lk(mu);
  return cache.emplace(key, e).first->second;
}

// --- merging ---------------------------------------------------------------

MergeResult merge(const DensityOperator& rho, int i, int j, const ImperfectionSet& imp) {
  if (i == j) throw ParameterError("merge needs two distinct modes");
  auto eff = merge_effect(rho.space.n_max(), imp.f, imp.v, imp.d);
  auto order = order_with_last(rho.num_modes(), {i, j});
  DensityOperator p = permute_modes(rho, order);
  const long dl = eff->E.rows();
  const long dr = rho.space.dim() / dl;
  const Mat Et = eff->E.transpose();
  Mat out(dr, dr);
  for (long a = 0; a < dr; ++a)
    for (long b = 0; b < dr; ++b) out(a, b) = p.m.block(a * dl, b * dl, dl, dl).cwiseProduct(Et).sum();
  std::vector<int> rest(order.begin(), order.end() - 2);
  DensityOperator r{rho.space.subspace(rest), out};
  return {r, r.trace()};
}

MergeResult merge_across(const DensityOperator& x, const DensityOperator& y,
                         const std::vector<std::pair<int, int>>& pairs, const ImperfectionSet& imp) {
  if (x.space.n_max() != y.space.n_max()) throw ConfigError("merge across spaces with different n_max");
  const int n_max = x.space.n_max();
  const int d = n_max + 1;
  const int k = static_cast<int>(pairs.size());
  auto eff = joint_merge_effect(n_max, imp, k);

  std::vector<int> xl, yl;
  for (auto [a, b] : pairs) {
    xl.push_back(a);
    yl.push_back(b);
  }
  auto ox = order_with_last(x.num_modes(), xl);
  auto oy = order_with_last(y.num_modes(), yl);
  const Mat Xp = permute_modes(x, ox).m;
  const Mat Yp = permute_modes(y, oy).m;
  long dI = 1;
  for (int q = 0; q < k; ++q) dI *= d;
  const long dJ = dI;
  const long da = x.space.dim() / dI;
  const long dc = y.space.dim() / dJ;

  // joint local index (i1 j1 i2 j2 ...) -> (I, J)
  const long dl = dI * dJ;
  std::vector<long> toI(dl), toJ(dl);
  for (long idx = 0; idx < dl; ++idx) {
    long rem = idx, I = 0, J = 0, w = 1;
    for (int q = k - 1; q >= 0; --q) {
      long jq = rem % d;
      rem /= d;
      long iq = rem % d;
      rem /= d;
      I += iq * w;
      J += jq * w;
      w *= d;
    }
    toI[idx] = I;
    toJ[idx] = J;
  }

  std::vector<Mat> G(dI * dI, Mat::Zero(dc, dc));
  std::vector<char> used(dI * dI, 0);
  const Mat& E = eff->E;
  for (long col = 0; col < dl; ++col)
    for (long row = 0; row < dl; ++row) {
      const cplx val = E(row, col);
      if (std::abs(val) < 1e-300) continue;
      const long Ip = toI[row], Jp = toJ[row], I = toI[col], J = toJ[col];
      G[Ip * dI + I] += val * Yp(Eigen::seqN(J, dc, dJ), Eigen::seqN(Jp, dc, dJ));
      used[Ip * dI + I] = 1;
    }

  Mat out = Mat::Zero(da * dc, da * dc);
  for (long I = 0; I < dI; ++I)
    for (long Ip = 0; Ip < dI; ++Ip) {
      if (!used[Ip * dI + I]) continue;
      const Mat& g = G[Ip * dI + I];
      for (long b = 0; b < da; ++b)
        for (long a = 0; a < da; ++a) {
          const cplx xv = Xp(I + a * dI, Ip + b * dI);
          if (xv == cplx(0)) continue;
          out.block(a * dc, b * dc, dc, dc) += xv * g;
        }
    }

  std::vector<int> rx(ox.begin(), ox.end() - k), ry(oy.begin(), oy.end() - k);
  ModeSpace s = x.space.subspace(rx).concat(y.space.subspace(ry));
  DensityOperator r{s, out};
  return {r, r.trace()};
}

DensityOperator node_b_gate(const DensityOperator& rho, int mode_a, double eta, const ModeLabel& label_B,
                            const ModeLabel& label_b) {
  if (!(eta >= 0 && eta <= 1)) throw ParameterError("eta must lie in [0,1]");
  const int n_max = rho.space.n_max();
  const double g = eta > 0 ? -std::log(eta) : std::numeric_limits<double>::infinity();
  DensityOperator lossy = loss_channel(rho.space, mode_a, g).apply(rho);
  // append vacuum B, b
  ModeSpace two(n_max, std::vector<ModeLabel>{label_B, label_b});
  DensityOperator vac{two, Mat::Zero(two.dim(), two.dim())};
  vac.m(0, 0) = 1;
  DensityOperator joint = tensor(lossy, vac);
  const int nB = rho.num_modes(), nb = rho.num_modes() + 1;
  joint = conjugate_local(joint, {mode_a, nB, nb}, node_b_unitary(n_max));
  std::vector<int> keep;
  for (int m = 0; m < joint.num_modes(); ++m)
    if (m != mode_a) keep.push_back(m);
  return partial_trace(joint, keep);
}

}  // namespace ghzrep
