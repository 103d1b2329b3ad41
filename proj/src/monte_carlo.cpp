#include "ghzrep/monte_carlo.hpp"

#include "ghzrep/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

namespace ghzrep {

void TrajectoryConfig::validate() const {
  if (n_trajectories < 1) throw ConfigError("n_trajectories must be at least 1");
  if (!(roulette_budget_s > 0)) throw ConfigError("roulette budget must be positive");
  if (!(roulette_survival > 0 && roulette_survival <= 1)) throw ConfigError("roulette survival must lie in (0,1]");
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

Rng trajectory_rng(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return Rng(mix(mix(seed) ^ index));
}

namespace {

long ipow(long b, int e) {
  long r = 1;
  for (int k = 0; k < e; ++k) r *= b;
  return r;
}

// K acting on one mode of a state vector.
Vec apply_mode(const Vec& a, int num_modes, int d, int mode, const Mat& K) {
  const long s = ipow(d, num_modes - 1 - mode);
  const long blocks = a.size() / (d * s);
  Vec out = Vec::Zero(a.size());
  for (long b = 0; b < blocks; ++b)
    for (long l = 0; l < s; ++l) {
      const long base = b * d * s + l;
      for (int i = 0; i < d; ++i) {
        cplx acc = 0;
        for (int j = 0; j < d; ++j) acc += K(i, j) * a(base + j * s);
        out(base + i * s) = acc;
      }
    }
  return out;
}

std::vector<int> as_vec(const std::array<int, 3>& a) { return {a[0], a[1], a[2]}; }

// Picks a branch with probability |branch|^2; nullopt with the remaining
// probability 1 - sum |branch|^2.
std::optional<Vec> pick(const std::vector<Vec>& branches, double u, long* clamped) {
  std::vector<double> w(branches.size());
  double total = 0;
  for (size_t k = 0; k < branches.size(); ++k) total += (w[k] = branches[k].squaredNorm());
  if (total > 1 + 1e-9 && clamped) ++*clamped;
  const double scale = total > 1 ? total : 1.0;
  double acc = 0;
  for (size_t k = 0; k < branches.size(); ++k) {
    acc += w[k] / scale;
    if (u < acc && w[k] > 0) return Vec(branches[k] / std::sqrt(w[k]));
  }
  return std::nullopt;
}

// Number of attempts up to and including the first success.
long sample_attempts(double q1, Rng& rng) {
  if (q1 >= 1) return 1;
  std::geometric_distribution<long> geo(q1);
  return 1 + geo(rng);
}

}  // namespace

SegmentSample sample_elementary(const ElementaryResult& e, Rng& rng) {
  if (!(e.q1 > 0 && e.q1 <= 1)) throw ParameterError("q1 must lie in (0,1]");
  Eigen::SelfAdjointEigenSolver<Mat> es(e.rho_e.m);
  // rounding can leave tiny negative eigenvalues
  std::vector<double> w(es.eigenvalues().size());
  for (long k = 0; k < es.eigenvalues().size(); ++k) w[k] = std::max(0.0, es.eigenvalues()(k));
  std::discrete_distribution<int> dist(w.begin(), w.end());
  SegmentSample s;
  s.state = PureState(e.rho_e.space, es.eigenvectors().col(dist(rng)));
  s.attempts = sample_attempts(e.q1, rng);
  s.birth_age = s.attempts * e.attempt_duration;
  return s;
}

std::vector<Vec> merge_branches(const PureState& psi, const std::vector<std::pair<int, int>>& pairs,
                                const ImperfectionSet& imp, ModeSpace* out_space) {
  const int N = psi.space.num_modes();
  const int k = static_cast<int>(pairs.size());
  const int d = psi.space.local_dim();
  auto eff = joint_merge_effect(psi.space.n_max(), imp, k);
  std::vector<int> last;
  for (auto [i, j] : pairs) {
    last.push_back(i);
    last.push_back(j);
  }
  auto order = order_with_last(N, last);
  PureState p = permute_modes(psi, order);
  const long dl = ipow(d, 2 * k);
  const long rest = p.space.dim() / dl;
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> Psi(p.amp.data(), rest, dl);
  Mat Phi = Psi * eff->eigenvectors.conjugate();
  std::vector<Vec> out;
  for (long c = 0; c < dl; ++c) {
    const double s = eff->eigenvalues(c);
    if (s <= 0) continue;
    Vec v = std::sqrt(s) * Phi.col(c);
    if (v.squaredNorm() > 0) out.push_back(std::move(v));
  }
  if (out_space) {
    std::vector<int> keep(N - 2 * k);
    for (int q = 0; q < N - 2 * k; ++q) keep[q] = q;
    *out_space = p.space.subspace(keep);
  }
  return out;
}

std::vector<Vec> decay_branches(const PureState& psi, int mode, double t, double T_coh) {
  std::vector<Vec> out;
  if (!std::isfinite(T_coh) || t <= 0) {
    out.push_back(psi.amp);
    return out;
  }
  for (const Mat& K : amplitude_damping_kraus(psi.space.n_max(), std::exp(-t / T_coh)))
    out.push_back(apply_mode(psi.amp, psi.space.num_modes(), psi.space.local_dim(), mode, K));
  return out;
}

namespace {

struct Killed {};

// Data shared by all trajectories of one protocol.
struct Prepared {
  const Protocol* p = nullptr;
  std::vector<PureState> eigvecs;
  std::vector<double> eigvals;
  PureState ghz;
  Mat phase;

  explicit Prepared(const Protocol& proto) : p(&proto) {
    Eigen::SelfAdjointEigenSolver<Mat> es(proto.elementary.rho_e.m);
    for (long k = 0; k < es.eigenvalues().size(); ++k) {
      eigvals.push_back(std::max(0.0, es.eigenvalues()(k)));
      eigvecs.emplace_back(proto.elementary.rho_e.space, es.eigenvectors().col(k));
    }
    ghz = ghz_state(proto.spec.n_max);
    const int d = proto.spec.n_max + 1;
    phase = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) phase(n, n) = (n % 2) ? -1.0 : 1.0;
  }
};

struct Seg {
  DensityOperator rho;
  PureState psi;
  double t = 0;
};

class Trajectory {
 public:
  Trajectory(const Prepared& prep, const TrajectoryConfig& cfg, std::uint64_t index)
      : pr_(prep),
        p_(*prep.p),
        cfg_(cfg),
        rng_(trajectory_rng(cfg.seed, index)),
        pure_(cfg.representation == Representation::Pure),
        next_check_(cfg.roulette_budget_s),
        elem_(prep.eigvals.begin(), prep.eigvals.end()) {}

  TrajectoryOutcome run() {
    TrajectoryOutcome out;
    try {
      Seg s = gen(p_.root, 0.0);
      out.completed = true;
      out.weight = weight_;
      out.time = s.t;
      out.rho = pure_ ? DensityOperator(s.psi) : s.rho;
    } catch (const Killed&) {
      out.completed = false;
      out.weight = 0;
    }
    out.clamped = clamped_;
    return out;
  }

 private:
  using Source = std::function<Seg(double)>;
  using Merge2 = std::function<std::optional<Seg>(const Seg&, const Seg&)>;

  const Prepared& pr_;
  const Protocol& p_;
  const TrajectoryConfig& cfg_;
  Rng rng_;
  bool pure_;
  double weight_ = 1.0;
  double next_check_;
  long clamped_ = 0;
  long events_ = 0;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::discrete_distribution<int> elem_;

  const CyclePlan& plan() const { return p_.spec.scheme == Scheme::TwoD ? p_.plan2d : p_.plan1d.cycle; }
  double T_coh() const { return p_.spec.imp.T_coh_s; }

  void touch(double t) {
    if (++events_ > 500000000L) throw std::runtime_error("trajectory exceeded the event limit");
    if (!std::isfinite(cfg_.roulette_budget_s)) return;
    while (t >= next_check_) {
      next_check_ += cfg_.roulette_budget_s;
      if (unif_(rng_) < cfg_.roulette_survival)
        weight_ /= cfg_.roulette_survival;
      else
        throw Killed{};
    }
  }

  void wait(Seg& s, double dt) {
    if (!(dt > 0) || !std::isfinite(T_coh())) return;
    if (!pure_) {
      s.rho = decay(s.rho, dt, T_coh());
      return;
    }
    for (int m = 0; m < s.psi.space.num_modes(); ++m) {
      auto b = decay_branches(s.psi, m, dt, T_coh());
      auto v = pick(b, unif_(rng_), nullptr);
      if (!v) v = b.front().normalized();  // unreachable: decay is trace preserving
      s.psi.amp = *v;
    }
  }

  std::optional<Seg> accept_mixed(const MergeResult& r) {
    const double pr = r.rho.trace();
    if (pr > 1 + 1e-9) ++clamped_;
    if (unif_(rng_) < pr) return Seg{r.rho.normalized(), {}, 0.0};
    return std::nullopt;
  }

  std::optional<Seg> accept_pure(const PureState& x, const std::vector<std::pair<int, int>>& pairs) {
    ModeSpace sp;
    auto b = merge_branches(x, pairs, p_.spec.imp, &sp);
    auto v = pick(b, unif_(rng_), &clamped_);
    if (!v) return std::nullopt;
    return Seg{{}, PureState(sp, *v), 0.0};
  }

  Seg elementary(double t0) {
    Seg s;
    s.t = t0 + static_cast<double>(sample_attempts(p_.elementary.q1, rng_)) * p_.elementary.attempt_duration;
    touch(s.t);
    if (!pure_) {
      s.rho = p_.born;
      return s;
    }
    s.psi = pr_.eigvecs[elem_(rng_)];
    wait(s, p_.elementary.attempt_duration);
    return s;
  }

  Seg pair_stage(const Source& a, const Source& b, const Merge2& merge, double delay, double t0) {
    const double tau = p_.spec.imp.filter_window_s;
    double t = t0;
    for (;;) {
      Seg A = a(t), B = b(t);
      if (std::isfinite(tau)) {
        // a segment waiting longer than tau is dropped and regenerated
        for (;;) {
          if (B.t - A.t > tau)
            A = a(A.t + tau);
          else if (A.t - B.t > tau)
            B = b(B.t + tau);
          else
            break;
        }
      }
      const double tm = std::max(A.t, B.t);
      wait(A, tm - A.t);
      wait(B, tm - B.t);
      auto out = merge(A, B);
      t = tm + delay;
      touch(t);
      if (out) {
        wait(*out, delay);
        out->t = t;
        return *out;
      }
    }
  }

  Seg single_stage(const Source& a, const std::function<std::optional<Seg>(const Seg&)>& merge, double delay,
                   double t0) {
    double t = t0;
    for (;;) {
      Seg A = a(t);
      auto out = merge(A);
      t = A.t + delay;
      touch(t);
      if (out) {
        wait(*out, delay);
        out->t = t;
        return *out;
      }
    }
  }

  std::optional<Seg> doubling(const Seg& a, const Seg& b) {
    if (!pure_) return accept_mixed(apply_doubling(p_, a.rho, b.rho));
    return accept_pure(tensor(a.psi, b.psi), {{1, 2}});
  }

  std::optional<Seg> attach(const ProtocolNode& n, const Seg& a) {
    if (!pure_) return accept_mixed(apply_attach(p_, n, a.rho));
    return accept_pure(tensor(a.psi, pr_.ghz), {{1, 2 + n.ghz_mode}});
  }

  std::optional<Seg> cycle_first_merge(const Seg& a, const Seg& b) {
    if (!pure_) return accept_mixed(apply_cycle_first(p_, a.rho, b.rho));
    auto x = tensor(permute_modes(a.psi, as_vec(plan().roles[0])), permute_modes(b.psi, as_vec(plan().roles[1])));
    return accept_pure(x, {{1, 5}});  // (C1.next, C2.prev)
  }

  std::optional<Seg> cycle_rest_merge(const Seg& xy, const Seg& c) {
    if (!pure_) return accept_mixed(apply_cycle_rest(p_, xy.rho, c.rho));
    auto x = tensor(xy.psi, permute_modes(c.psi, as_vec(plan().roles[2])));
    auto out = accept_pure(x, {{3, 6}, {1, 5}});  // (C2.next, C3.prev) and (C3.next, C1.prev)
    if (!out) return out;
    PureState r = permute_modes(out->psi, as_vec(plan().out_order));
    if (plan().flip_c) r.amp = apply_mode(r.amp, 3, r.space.local_dim(), 2, pr_.phase);
    r.space = ModeSpace(r.space.n_max(), {{"A", "mem"}, {"B", "mem"}, {"C", "mem"}});
    out->psi = r;
    return out;
  }

  Source source(int id) {
    return [this, id](double t) { return gen(id, t); };
  }

  Seg gen(int id, double t0) {
    const ProtocolNode& n = p_.node(id);
    switch (n.kind) {
      case ProtocolNode::Kind::Elementary:
        return elementary(t0);
      case ProtocolNode::Kind::Doubling:
        return pair_stage(source(n.child[0]), source(n.child[1]),
                          [this](const Seg& a, const Seg& b) { return doubling(a, b); }, n.delay_s, t0);
      case ProtocolNode::Kind::Attach:
        return single_stage(source(n.child[0]), [this, &n](const Seg& a) { return attach(n, a); }, n.delay_s, t0);
      case ProtocolNode::Kind::Cycle: {
        Source xy = [this, &n](double t) {
          return pair_stage(source(n.child[0]), source(n.child[1]),
                            [this](const Seg& a, const Seg& b) { return cycle_first_merge(a, b); }, n.delay_s, t);
        };
        return pair_stage(xy, source(n.child[2]),
                          [this](const Seg& a, const Seg& b) { return cycle_rest_merge(a, b); }, n.delay_s, t0);
      }
    }
    throw std::logic_error("unknown protocol node");
  }
};

struct Accumulator {
  long n = 0, completed = 0, killed = 0, clamped = 0;
  double w = 0, w2 = 0, wT = 0, wT2 = 0, wf = 0, w2f = 0, w2f2 = 0;
  Mat wrho, w2rho;
  Eigen::MatrixXd w2abs;
  ModeSpace space;

  void add(const TrajectoryOutcome& o, const PureState& target) {
    ++n;
    clamped += o.clamped;
    if (!o.completed) {
      ++killed;
      return;
    }
    ++completed;
    const double f = (target.amp.adjoint() * o.rho.m * target.amp)(0, 0).real();
    const double ww = o.weight * o.weight;
    w += o.weight;
    w2 += ww;
    wT += o.weight * o.time;
    wT2 += ww * o.time * o.time;
    wf += o.weight * f;
    w2f += ww * f;
    w2f2 += ww * f * f;
    if (wrho.size() == 0) {
      space = o.rho.space;
      wrho = Mat::Zero(o.rho.m.rows(), o.rho.m.cols());
      w2rho = wrho;
      w2abs = Eigen::MatrixXd::Zero(o.rho.m.rows(), o.rho.m.cols());
    }
    wrho += o.weight * o.rho.m;
    w2rho += ww * o.rho.m;
    w2abs += ww * o.rho.m.cwiseAbs2();
  }

  void absorb(const Accumulator& a) {
    n += a.n;
    completed += a.completed;
    killed += a.killed;
    clamped += a.clamped;
    w += a.w;
    w2 += a.w2;
    wT += a.wT;
    wT2 += a.wT2;
    wf += a.wf;
    w2f += a.w2f;
    w2f2 += a.w2f2;
    if (a.wrho.size() == 0) return;
    if (wrho.size() == 0) {
      space = a.space;
      wrho = a.wrho;
      w2rho = a.w2rho;
      w2abs = a.w2abs;
    } else {
      wrho += a.wrho;
      w2rho += a.w2rho;
      w2abs += a.w2abs;
    }
  }
};

McEstimate finish(const Accumulator& acc) {
  McEstimate e;
  e.n_trajectories = acc.n;
  e.n_completed = acc.completed;
  e.n_killed = acc.killed;
  e.weight_sum = acc.w;
  e.clamped = acc.clamped;
  if (acc.completed == 0 || !(acc.w > 0)) {
    e.fidelity = e.T = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  const double N = static_cast<double>(acc.n);
  e.rho = DensityOperator{acc.space, acc.wrho / acc.w};
  // ratio estimators; spread of the weighted per-trajectory values
  Eigen::MatrixXd var = acc.w2abs - 2 * (e.rho.m.conjugate().cwiseProduct(acc.w2rho)).real() +
                        acc.w2 * e.rho.m.cwiseAbs2();
  e.rho_stderr = var.cwiseMax(0.0).cwiseSqrt() / acc.w;
  const double f2 = acc.wf / acc.w;
  const double vf2 = std::max(0.0, acc.w2f2 - 2 * f2 * acc.w2f + f2 * f2 * acc.w2) / (acc.w * acc.w);
  e.fidelity = std::sqrt(std::max(0.0, f2));
  e.fidelity_stderr = e.fidelity > 0 ? std::sqrt(vf2) / (2 * e.fidelity) : std::sqrt(std::sqrt(vf2));
  e.T = acc.wT / N;
  e.T_stderr = acc.n > 1 ? std::sqrt(std::max(0.0, acc.wT2 / N - e.T * e.T) / (N - 1)) : 0.0;
  return e;
}

}  // namespace

TrajectoryOutcome run_trajectory(const Protocol& p, const TrajectoryConfig& cfg, std::uint64_t index) {
  cfg.validate();
  Prepared prep(p);
  return Trajectory(prep, cfg, index).run();
}

McEstimate estimate(const Protocol& p, const TrajectoryConfig& cfg) {
  cfg.validate();
  Prepared prep(p);
  const PureState target = ghz_state(p.spec.n_max);
  constexpr long chunk = 64;
  const long nchunks = (cfg.n_trajectories + chunk - 1) / chunk;
  std::vector<Accumulator> parts(nchunks);
  std::atomic<long> next{0};
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<long>(threads, nchunks));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](int w) {
    try {
      for (;;) {
        const long c = next++;
        if (c >= nchunks) return;
        const long lo = c * chunk, hi = std::min(cfg.n_trajectories, lo + chunk);
        for (long i = lo; i < hi; ++i) parts[c].add(Trajectory(prep, cfg, static_cast<std::uint64_t>(i)).run(), target);
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = nchunks;
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  // fixed reduction order keeps results independent of the thread count
  Accumulator total;
  for (const auto& a : parts) total.absorb(a);
  return finish(total);
}

McEstimate estimate(const NetworkSpec& spec, const TrajectoryConfig& cfg) { return estimate(build_protocol(spec), cfg); }

}  // namespace ghzrep
