// Grid sweeps: expand the configured axes, evaluate every point with the
// chosen engine on a worker pool and write records in grid order.
#pragma once

#include "ghzrep/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ghzrep {

const std::vector<std::string>& csv_columns();
std::string code_version();

struct ResultRecord {
  Engine engine = Engine::Static;
  NetworkSpec spec;  // n is the level actually evaluated (chosen one for auto)
  std::optional<double> fidelity, fidelity_stderr, T_gen_s, T_gen_stderr;
  double q1 = 0.0;
  std::optional<double> distill_margin, qubit_discard_weight;
  std::uint64_t seed = 0;
  std::string error;  // empty on success
  bool ok() const { return error.empty(); }
};

// Order: T_coh_s outermost, then L_km, eps_a, tau_filter_s.
std::vector<NetworkSpec> expand_grid(const RunConfig& cfg);

// One point at a fixed level. Throws on engine failure.
ResultRecord evaluate(Engine engine, const NetworkSpec& spec, const TrajectoryConfig& mc);
// Honors auto nesting; never throws, failures land in error.
ResultRecord evaluate_point(const RunConfig& cfg, const NetworkSpec& spec, int mc_threads);

struct RunOutput {
  std::vector<ResultRecord> records;
  int failures = 0;
};
RunOutput run_grid(const RunConfig& cfg, int threads);

void write_results_csv(std::ostream& out, const std::vector<ResultRecord>& records);
// grid index and message of every failed point
void write_errors_csv(std::ostream& out, const std::vector<ResultRecord>& records);

// Shortest round-trip representation; "inf" for infinity.
std::string format_number(double x);

}  // namespace ghzrep
