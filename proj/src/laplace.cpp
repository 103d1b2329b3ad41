#include "ghzrep/laplace.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ghzrep {

namespace {

DensityOperator unit_operator() { return DensityOperator{ModeSpace(), Mat::Identity(1, 1)}; }

DensityOperator scaled(const DensityOperator& r, double c) { return {r.space, c * r.m}; }

void add_to(DensityOperator& acc, const DensityOperator& x) {
  if (acc.m.size() == 0)
    acc = x;
  else
    acc.m += x.m;
}

}  // namespace

DecayGenerator::DecayGenerator(int n_max, double T_coh) : n_max_(n_max) {
  if (!(T_coh > 0)) throw ParameterError("T_coh must be positive");
  rate_ = std::isfinite(T_coh) ? 1.0 / T_coh : 0.0;
  const int d = n_max + 1;
  dissipator_ = lindblad_dissipator(annihilation(n_max));
  if (trivial()) return;
  Eigen::ComplexEigenSolver<Mat> es(dissipator_);
  V_ = es.eigenvectors();
  Vinv_ = V_.inverse();
  twice_lambda_.resize(d * d);
  for (int p = 0; p < d * d; ++p) {
    const double t = -2.0 * es.eigenvalues()(p).real();
    twice_lambda_[p] = static_cast<int>(std::lround(t));
    if (std::abs(t - twice_lambda_[p]) > 1e-8 || std::abs(es.eigenvalues()(p).imag()) > 1e-8)
      throw std::logic_error("unexpected decay spectrum");
  }
  Mat back = V_ * es.eigenvalues().asDiagonal() * Vinv_;
  if ((back - dissipator_).cwiseAbs().maxCoeff() > 1e-9) throw std::logic_error("decay generator not diagonalizable");
}

DensityOperator DecayGenerator::apply(const DensityOperator& rho, const std::function<double(double)>& f) const {
  if (trivial()) return scaled(rho, f(0.0));
  if (rho.space.n_max() != n_max_) throw ConfigError("decay generator built for a different cutoff");
  const int N = rho.num_modes();
  const int d = n_max_ + 1;
  const long dim = rho.space.dim();
  Mat m = rho.m;
  for (int k = 0; k < N; ++k) apply_mode_liouville(m, N, d, k, Vinv_);

  std::vector<double> fv(2 * N * n_max_ + 1);
  for (size_t t = 0; t < fv.size(); ++t) fv[t] = f(-0.5 * rate_ * static_cast<double>(t));
  std::vector<int> digits(dim * N);
  for (long I = 0; I < dim; ++I) {
    long rem = I;
    for (int k = N - 1; k >= 0; --k) {
      digits[I * N + k] = static_cast<int>(rem % d);
      rem /= d;
    }
  }
  for (long J = 0; J < dim; ++J)
    for (long I = 0; I < dim; ++I) {
      int t = 0;
      for (int k = 0; k < N; ++k) t += twice_lambda_[digits[I * N + k] * d + digits[J * N + k]];
      m(I, J) *= fv[t];
    }

  for (int k = 0; k < N; ++k) apply_mode_liouville(m, N, d, k, V_);
  return {rho.space, 0.5 * (m + m.adjoint())};
}

DensityOperator DecayGenerator::generator(const DensityOperator& rho) const {
  Mat out = Mat::Zero(rho.m.rows(), rho.m.cols());
  if (trivial()) return {rho.space, out};
  for (int k = 0; k < rho.num_modes(); ++k) {
    Mat m = rho.m;
    apply_mode_liouville(m, rho.num_modes(), n_max_ + 1, k, dissipator_);
    out += m;
  }
  return {rho.space, rate_ * out};
}

DensityOperator DecayGenerator::resolvent(const DensityOperator& rho, double nu) const {
  if (!(nu > 0)) throw ParameterError("resolvent needs a positive rate");
  return apply(rho, [nu](double l) { return 1.0 / (nu - l); });
}

DensityOperator DecayGenerator::evolve(const DensityOperator& rho, double t) const {
  return apply(rho, [t](double l) { return std::exp(t * l); });
}

std::vector<std::pair<double, DensityOperator>> DecayGenerator::components(const DensityOperator& rho) const {
  if (trivial()) return {{0.0, rho}};
  std::vector<std::pair<double, DensityOperator>> out;
  const int top = 2 * rho.num_modes() * n_max_;
  for (int k = 0; k <= top; ++k) {
    // same arithmetic as the eigenvalues handed to f in apply()
    const double lam = -0.5 * rate_ * static_cast<double>(k);
    auto part = apply(rho, [lam](double l) { return l == lam ? 1.0 : 0.0; });
    if (part.m.cwiseAbs().maxCoeff() > 1e-15) out.emplace_back(lam, std::move(part));
  }
  return out;
}

double ProductDual::trace_value() const {
  double s = 0;
  for (const auto& t : value) s += t.a.trace() * t.b.trace();
  return s;
}

double ProductDual::trace_deriv() const {
  double s = 0;
  for (const auto& t : deriv) s += t.a.trace() * t.b.trace();
  return s;
}

ProductDual pair_image(const RateProcess& a, const RateProcess& b, double T_coh, double tau) {
  if (!(a.nu > 0) || !(b.nu > 0)) throw ParameterError("pair image needs positive rates");
  if (!(tau > 0)) throw ParameterError("filter window must be positive");
  const bool filtered = std::isfinite(tau);
  const double sum = a.nu + b.nu;

  // process w arrives first and waits for its partner of rate np
  struct Side {
    DensityOperator v, d;
    double c = 0, aw = 0;
  };
  auto side = [&](const RateProcess& w, double np) {
    Side s;
    s.aw = w.nu / sum;
    s.c = filtered ? std::exp(-np * tau) : 0.0;
    const double aw = s.aw, c = s.c;
    DecayGenerator gen(w.rho.space.n_max(), T_coh);
    auto k0 = [=](double l) {
      const double x = np - l;
      const double e = c > 0 ? c * std::exp(tau * l) : 0.0;
      return (1 - e) / x;
    };
    auto k1 = [=](double l) {
      const double x = np - l;
      const double e = c > 0 ? c * std::exp(tau * l) : 0.0;
      return (1 - e) / (x * x) - (e > 0 ? tau * e / x : 0.0);
    };
    s.v = gen.apply(w.rho, [=](double l) { return aw * np * k0(l); });
    s.d = gen.apply(w.rho, [=](double l) { return np * aw * (k0(l) / sum + k1(l)); });
    return s;
  };
  Side sa = side(a, b.nu), sb = side(b, a.nu);

  // restart after a discarded segment (renewal)
  const double r0 = sa.aw * sa.c + sb.aw * sb.c;
  const double r1 = filtered ? sa.c * sa.aw * (1 / sum + tau) + sb.c * sb.aw * (1 / sum + tau) : 0.0;
  const double g = 1 / (1 - r0);
  const double h = r1 * g * g;

  ProductDual p;
  p.value.push_back({scaled(sa.v, g), b.rho});
  p.value.push_back({a.rho, scaled(sb.v, g)});
  p.deriv.push_back({DensityOperator{sa.d.space, g * sa.d.m + h * sa.v.m}, b.rho});
  p.deriv.push_back({a.rho, DensityOperator{sb.d.space, g * sb.d.m + h * sb.v.m}});
  return p;
}

ProductDual single_image(const RateProcess& a) {
  if (!(a.nu > 0)) throw ParameterError("single image needs a positive rate");
  ProductDual p;
  p.value.push_back({a.rho, unit_operator()});
  p.deriv.push_back({scaled(a.rho, 1 / a.nu), unit_operator()});
  return p;
}

LaplaceDual close_geometric(const ProductDual& prep, const ProductMerge& merge, double delay, double T_coh,
                            double* success) {
  if (!(delay >= 0)) throw ParameterError("delay must be non-negative");
  DensityOperator mp0, mp1;
  for (const auto& t : prep.value) add_to(mp0, merge(t.a, t.b).rho);
  for (const auto& t : prep.deriv) add_to(mp1, merge(t.a, t.b).rho);

  if (success) *success = mp0.trace() / prep.trace_value();
  const double g0 = prep.trace_value() - mp0.trace();
  const double g1 = prep.trace_deriv() - mp1.trace();
  if (!(1 - g0 > 1e-300)) throw ParameterError("merge success probability vanishes; mean time diverges");

  DensityOperator s0 = decay(mp0, delay, T_coh);
  DensityOperator s1 = decay(mp1, delay, T_coh);
  s1.m += delay * s0.m;
  const double f0 = g0, f1 = delay * g0 + g1;
  const double q = 1 / (1 - f0);

  LaplaceDual out;
  out.value = scaled(s0, q);
  out.deriv = DensityOperator{s1.space, q * s1.m + f1 * q * q * s0.m};
  return out;
}

namespace {

// Image at a point s together with its plain s-derivative.
struct ImagePoint {
  DensityOperator v, d;
};

struct PreparedAt {
  std::vector<ProductTerm> v, d;
};

// Unfiltered pair of rate processes at s.
PreparedAt pair_at(const RateProcess& a, const RateProcess& b, double T_coh, double s) {
  PreparedAt p;
  const double sum = s + a.nu + b.nu;
  auto side = [&](const RateProcess& w, double np, bool first_is_a) {
    DecayGenerator gen(w.rho.space.n_max(), T_coh);
    const double c = a.nu * b.nu / sum;
    auto v = gen.apply(w.rho, [=](double l) { return c / (s + np - l); });
    auto d = gen.apply(w.rho, [=](double l) {
      const double x = s + np - l;
      return -c / sum / x - c / (x * x);
    });
    if (first_is_a) {
      p.v.push_back({v, b.rho});
      p.d.push_back({d, b.rho});
    } else {
      p.v.push_back({a.rho, v});
      p.d.push_back({a.rho, d});
    }
  };
  side(a, b.nu, true);
  side(b, a.nu, false);
  return p;
}

ImagePoint close_at(const PreparedAt& prep, const ProductMerge& merge, double delay, double T_coh, double s,
                    double* success) {
  DensityOperator mv, md;
  double tv = 0, td = 0;
  for (const auto& t : prep.v) {
    add_to(mv, merge(t.a, t.b).rho);
    tv += t.a.trace() * t.b.trace();
  }
  for (const auto& t : prep.d) {
    add_to(md, merge(t.a, t.b).rho);
    td += t.a.trace() * t.b.trace();
  }
  if (success) *success = mv.trace() / tv;
  const double f = tv - mv.trace(), fd = td - md.trace();
  const double e = std::exp(-s * delay);
  const double den = 1 - e * f;
  if (!(den > 1e-300)) throw ParameterError("merge success probability vanishes; mean time diverges");
  const double den_d = -e * (fd - delay * f);
  DensityOperator n = decay(mv, delay, T_coh);
  n.m *= e;
  DensityOperator nd = decay(md, delay, T_coh);
  nd.m = e * nd.m - delay * n.m;
  return {DensityOperator{n.space, n.m / den}, DensityOperator{n.space, nd.m / den - n.m * (den_d / (den * den))}};
}

}  // namespace

LaplaceDual cycle_image(const RateProcess& c0, const RateProcess& c1, const RateProcess& c2,
                        const ProductMerge& first, const ProductMerge& rest, double delay, double T_coh,
                        double* success) {
  if (!(c0.nu > 0) || !(c1.nu > 0) || !(c2.nu > 0)) throw ParameterError("cycle image needs positive rates");
  if (!(delay >= 0)) throw ParameterError("delay must be non-negative");
  auto inter = [&](double s) { return close_at(pair_at(c0, c1, T_coh, s), first, delay, T_coh, s, nullptr); };
  const double nu = c2.nu;
  DecayGenerator gen(c2.rho.space.n_max(), T_coh);

  // Intermediate done first and waiting for the third child, or the third
  // child waiting; for the latter, on the eigenspace of L with eigenvalue
  // lam the waiting factor integrates to (X(s - lam) - X(s + nu)) / (nu + lam).
  const ImagePoint x_late = inter(nu);
  PreparedAt prep;
  prep.v.push_back({gen.apply(x_late.v, [nu](double l) { return nu / (nu - l); }), c2.rho});
  {
    auto a = gen.apply(x_late.v, [nu](double l) { return -nu / ((nu - l) * (nu - l)); });
    a.m += gen.apply(x_late.d, [nu](double l) { return nu / (nu - l); }).m;
    prep.d.push_back({a, c2.rho});
  }
  for (auto& [lam, part] : gen.components(c2.rho)) {
    double den = nu + lam;
    // resonant rates: move off the removable singularity
    if (std::abs(den) < 1e-9 * nu) den = 1e-9 * nu;
    const ImagePoint x = inter(-lam);
    const double k = nu / den;
    prep.v.push_back({DensityOperator{x.v.space, k * (x.v.m - x_late.v.m)}, part});
    prep.d.push_back({DensityOperator{x.d.space, k * (x.d.m - x_late.d.m)}, part});
  }
  const ImagePoint out = close_at(prep, rest, delay, T_coh, 0.0, success);
  return {out.v, DensityOperator{out.d.space, -out.d.m}};
}

LaplaceResult run_laplace(const Protocol& p) {
  const double T_coh = p.spec.imp.T_coh_s;
  const double tau = p.spec.imp.filter_window_s;
  std::vector<RateProcess> proc(p.nodes.size());
  LaplaceResult res;
  proc[0] = {p.nu0(), p.born};
  res.levels.push_back({p.born, 1 / p.nu0(), p.elementary.q1});

  auto close = [&](const ProductDual& prep, const ProductMerge& m, double delay, double* success) {
    return close_geometric(prep, m, delay, T_coh, success);
  };

  for (size_t i = 1; i < p.nodes.size(); ++i) {
    const auto& n = p.nodes[i];
    LaplaceDual out;
    double success = 0;
    switch (n.kind) {
      case ProtocolNode::Kind::Doubling: {
        const auto& c = proc[n.child[0]];
        out = close(pair_image(c, c, T_coh, tau),
                    [&](const DensityOperator& a, const DensityOperator& b) { return apply_doubling(p, a, b); },
                    n.delay_s, &success);
        break;
      }
      case ProtocolNode::Kind::Attach: {
        out = close(single_image(proc[n.child[0]]),
                    [&](const DensityOperator& a, const DensityOperator&) { return apply_attach(p, n, a); },
                    n.delay_s, &success);
        break;
      }
      case ProtocolNode::Kind::Cycle: {
        auto first = [&](const DensityOperator& a, const DensityOperator& b) { return apply_cycle_first(p, a, b); };
        auto rest = [&](const DensityOperator& a, const DensityOperator& b) { return apply_cycle_rest(p, a, b); };
        double s1 = 0;
        auto xy = close(pair_image(proc[n.child[0]], proc[n.child[1]], T_coh, tau), first, n.delay_s, &s1);
        // A filter window is only handled with the intermediate re-expressed
        // as a rate process. A window that no wait can reach is no window.
        RateProcess xp{xy.value.trace() / xy.mean_time(), xy.value.normalized()};
        bool inert = true;
        for (double nu : {proc[n.child[0]].nu, proc[n.child[1]].nu, proc[n.child[2]].nu, xp.nu})
          inert = inert && std::exp(-nu * tau) < 1e-16;
        if (inert)
          out = cycle_image(proc[n.child[0]], proc[n.child[1]], proc[n.child[2]], first, rest, n.delay_s, T_coh,
                            &success);
        else
          out = close(pair_image(xp, proc[n.child[2]], T_coh, tau), rest, n.delay_s, &success);
        break;
      }
      case ProtocolNode::Kind::Elementary:
        throw std::logic_error("elementary node above the leaf");
    }
    // the trace is one up to rounding; remove the drift so it cannot compound
    const double tr = out.value.trace();
    const double T = out.mean_time() / tr;
    DensityOperator rho = out.value.normalized();
    proc[i] = {1 / T, rho};
    if (n.kind != ProtocolNode::Kind::Attach) res.levels.push_back({rho, T, success});
  }
  return res;
}

LaplaceResult run_laplace(const NetworkSpec& spec) { return run_laplace(build_protocol(spec)); }

}  // namespace ghzrep
