// Run configuration read from YAML. Physical quantities carry their unit in
// the key name (L_km, T_coh_s, ...). Errors are reported as file:line:column.
#pragma once

#include "ghzrep/monte_carlo.hpp"

#include <string>
#include <vector>

namespace ghzrep {

enum class Engine { Static, MonteCarlo, Laplace };
std::string to_string(Engine e);

// Empty axis: the base value is used.
struct SweepAxes {
  std::vector<double> T_coh_s, L_km, eps_a, tau_filter_s;
};

struct RunConfig {
  Engine engine = Engine::Static;
  NetworkSpec base;
  bool auto_n = false;
  int auto_n_max = 3;  // auto nesting searches [0 or 1, auto_n_max]
  SweepAxes sweep;
  TrajectoryConfig mc;
  std::string results_file = "results.csv";
  std::string errors_file = "errors.csv";
  std::string source = "<config>";
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace ghzrep
