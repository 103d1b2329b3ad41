// Command-line front end: run a configured sweep, or plot a results file.
#include "ghzrep/report.hpp"
#include "ghzrep/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace ghzrep;

namespace {

constexpr int kConfigError = 2;
constexpr int kPartial = 3;

fs::path place(const fs::path& dir, const std::string& file) {
  fs::path p(file);
  return p.is_absolute() ? p : dir / p;
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("error writing " + p.string());
}

int cmd_run(const std::string& config, int threads, const std::optional<long>& seed, const std::string& out_dir) {
  RunConfig cfg = load_config(config);
  if (seed) {
    if (*seed < 0) throw ConfigError("--seed must be non-negative");
    cfg.mc.seed = static_cast<std::uint64_t>(*seed);
  }
  const auto res = run_grid(cfg, threads);
  std::ostringstream csv;
  write_results_csv(csv, res.records);
  const fs::path results = place(out_dir, cfg.results_file);
  write_file(results, csv.str());
  std::cout << "wrote " << res.records.size() << " records to " << results.string() << "\n";
  if (res.failures > 0) {
    std::ostringstream err;
    write_errors_csv(err, res.records);
    const fs::path errors = place(out_dir, cfg.errors_file);
    write_file(errors, err.str());
    std::cerr << res.failures << " grid point(s) failed, see " << errors.string() << "\n";
    return kPartial;
  }
  return 0;
}

int cmd_report(const std::string& results, const std::string& kind, const std::string& out_dir) {
  const ReportKind k = report_kind_from_string(kind);
  const CsvTable t = load_csv(results);
  const std::string svg = render_report(t, k, results);
  const fs::path out = fs::path(out_dir) / (fs::path(results).stem().string() + "_" + to_string(k) + ".svg");
  write_file(out, svg);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GHZ repeater simulator"};
  app.require_subcommand(1);

  std::string config, results, kind, out_dir = ".";
  int threads = 0;
  std::optional<long> seed;

  auto* run = app.add_subcommand("run", "evaluate every point of a configured grid");
  run->add_option("config", config, "YAML run configuration")->required();
  run->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--out", out_dir, "output directory");

  auto* rep = app.add_subcommand("report", "plot a results file as SVG");
  rep->add_option("results", results, "results CSV")->required();
  rep->add_option("--kind", kind, "heatmap, curve or tradeoff")->required();
  rep->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, threads, seed, out_dir);
    return cmd_report(results, kind, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
