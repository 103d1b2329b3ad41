#include "ghzrep/runner.hpp"

#include "ghzrep/analysis.hpp"
#include "ghzrep/laplace.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

namespace ghzrep {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "engine", "scheme", "n", "L_km", "L0_km", "T_coh_s", "f", "v", "d", "eta", "eps_a", "eps_c",
      "tau_filter_s", "fidelity", "fidelity_stderr", "T_gen_s", "T_gen_stderr", "q1", "distill_margin",
      "qubit_discard_weight", "seed", "code_version"};
  return cols;
}

std::string code_version() { return GHZREP_VERSION; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<NetworkSpec> expand_grid(const RunConfig& cfg) {
  auto axis = [](const std::vector<double>& xs, double base) { return xs.empty() ? std::vector<double>{base} : xs; };
  const auto& b = cfg.base;
  std::vector<NetworkSpec> out;
  for (double T : axis(cfg.sweep.T_coh_s, b.imp.T_coh_s))
    for (double L : axis(cfg.sweep.L_km, b.L_total_km))
      for (double e : axis(cfg.sweep.eps_a, b.imp.eps_a))
        for (double tau : axis(cfg.sweep.tau_filter_s, b.imp.filter_window_s)) {
          NetworkSpec s = b;
          s.imp.T_coh_s = T;
          s.L_total_km = L;
          s.imp.eps_a = e;
          s.imp.filter_window_s = tau;
          out.push_back(s);
        }
  return out;
}

ResultRecord evaluate(Engine engine, const NetworkSpec& spec, const TrajectoryConfig& mc) {
  ResultRecord r;
  r.engine = engine;
  r.spec = spec;
  r.seed = mc.seed;
  const Protocol p = build_protocol(spec);
  r.q1 = p.elementary.q1;
  DensityOperator rho;
  switch (engine) {
    case Engine::Static: {
      auto st = run_static(spec, p.elementary.rho_e, p.plan2d, p.plan1d);
      rho = st.final_state();
      r.fidelity_stderr = 0.0;
      break;
    }
    case Engine::Laplace: {
      auto l = run_laplace(p);
      rho = l.final_state();
      r.fidelity_stderr = 0.0;
      r.T_gen_s = l.T();
      r.T_gen_stderr = 0.0;
      break;
    }
    case Engine::MonteCarlo: {
      auto e = estimate(p, mc);
      if (!e.has_result()) throw ParameterError("no trajectory survived the roulette");
      rho = e.rho;
      r.fidelity = e.fidelity;
      r.fidelity_stderr = e.fidelity_stderr;
      r.T_gen_s = e.T;
      r.T_gen_stderr = e.T_stderr;
      break;
    }
  }
  if (!r.fidelity) r.fidelity = fidelity(rho, ghz_state(rho.space.n_max()));
  auto dist = distillable(rho);
  r.distill_margin = dist.margin;
  r.qubit_discard_weight = dist.discarded;
  return r;
}

ResultRecord evaluate_point(const RunConfig& cfg, const NetworkSpec& spec, int mc_threads) {
  TrajectoryConfig mc = cfg.mc;
  mc.threads = mc_threads;
  ResultRecord fallback;
  fallback.engine = cfg.engine;
  fallback.spec = spec;
  fallback.seed = mc.seed;
  try {
    if (!cfg.auto_n) return evaluate(cfg.engine, spec, mc);
    // highest fidelity wins; strict comparison keeps the smaller n on ties
    std::optional<ResultRecord> best;
    std::string last_error;
    for (int n = spec.scheme == Scheme::OneD ? 1 : 0; n <= cfg.auto_n_max; ++n) {
      NetworkSpec s = spec;
      s.n = n;
      try {
        auto r = evaluate(cfg.engine, s, mc);
        if (!best || *r.fidelity > *best->fidelity) best = r;
      } catch (const std::exception& e) {
        last_error = "n=" + std::to_string(n) + ": " + e.what();
      }
    }
    if (!best) throw std::runtime_error("auto nesting: no level could be evaluated (" + last_error + ")");
    return *best;
  } catch (const std::exception& e) {
    fallback.error = e.what();
    if (fallback.error.empty()) fallback.error = "unknown failure";
    return fallback;
  }
}

RunOutput run_grid(const RunConfig& cfg, int threads) {
  const auto grid = expand_grid(cfg);
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int workers = std::min<int>(threads, static_cast<int>(grid.size()));
  // a single point gets all threads for its trajectories
  const int mc_threads = grid.size() == 1 ? threads : 1;
  RunOutput out;
  out.records.resize(grid.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next++) < grid.size();) out.records[i] = evaluate_point(cfg, grid[i], mc_threads);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& r : out.records) out.failures += r.ok() ? 0 : 1;
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  const auto& cols = csv_columns();
  for (size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << "\n";
  auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
  for (const auto& r : records) {
    const auto& s = r.spec;
    const bool ok = r.ok();
    out << to_string(r.engine) << "," << to_string(s.scheme) << "," << s.n << "," << format_number(s.L_total_km) << ","
        << format_number(s.L0_km()) << "," << format_number(s.imp.T_coh_s) << "," << format_number(s.imp.f) << ","
        << format_number(s.imp.v) << "," << format_number(s.imp.d) << "," << format_number(s.imp.eta) << ","
        << format_number(s.imp.eps_a) << "," << format_number(s.imp.eps_c_effective()) << ","
        << format_number(s.imp.filter_window_s) << "," << opt(r.fidelity) << "," << opt(r.fidelity_stderr) << ","
        << opt(r.T_gen_s) << "," << opt(r.T_gen_stderr) << "," << (ok ? format_number(r.q1) : std::string()) << ","
        << opt(r.distill_margin) << "," << opt(r.qubit_discard_weight) << "," << r.seed << "," << code_version()
        << "\n";
  }
}

void write_errors_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "row,error\n";
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].ok()) continue;
    std::string msg = records[i].error;
    for (auto& c : msg)
      if (c == '\n' || c == '\r') c = ' ';
    std::string q;
    for (char c : msg) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    // row counts data lines of the results file from 1
    out << i + 1 << ",\"" << q << "\"\n";
  }
}

}  // namespace ghzrep
