#include "doctest.h"
#include "ghzrep/report.hpp"
#include "ghzrep/runner.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace ghzrep;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / ("ghzrep_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(REPEATER_BIN) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  auto c = parse_config("");
  CHECK(c.engine == Engine::Static);
  CHECK(c.base.scheme == Scheme::TwoD);
  CHECK(c.base.imp.f == 0.05);
  CHECK(c.base.imp.L_att_km == 22.0);
  CHECK(c.base.imp.pulse_s == 1e-4);

  c = parse_config(R"(
engine: mc
scheme: 1D
n: auto
auto_n_max: 2
L_km: 80
seed: 7
imperfections:
  T_coh_s: inf
  eps_a: 0.05
  tau_filter_s: 0.002
sweep:
  T_coh_s: [0.01, 0.1]
  L_km: [20, 40, 60]
mc:
  trajectories: 50
  representation: mixed
)");
  CHECK(c.engine == Engine::MonteCarlo);
  CHECK(c.base.scheme == Scheme::OneD);
  CHECK(c.auto_n);
  CHECK(c.auto_n_max == 2);
  CHECK(c.base.L_total_km == 80);
  CHECK(c.mc.seed == 7);
  CHECK(std::isinf(c.base.imp.T_coh_s));
  CHECK(c.base.imp.filter_window_s == 0.002);
  CHECK(c.mc.n_trajectories == 50);
  CHECK(c.mc.representation == Representation::Mixed);

  auto g = expand_grid(c);
  REQUIRE(g.size() == 6);
  CHECK(g[0].imp.T_coh_s == 0.01);
  CHECK(g[0].L_total_km == 20);
  CHECK(g[1].L_total_km == 40);
  CHECK(g[3].imp.T_coh_s == 0.1);
  CHECK(g[5].L_total_km == 60);
}

TEST_CASE("config errors carry line and column") {
  CHECK(error_of("engine: static\nbogus: 1\n").find("cfg.yaml:2:1") == 0);
  CHECK(error_of("imperfections:\n  f: 0.05\n  T_coh: 1\n").find("cfg.yaml:3:3: unknown key 'T_coh'") == 0);
  CHECK(error_of("L_km: fifty\n").find("cfg.yaml:1:7") == 0);
  CHECK(error_of("engine: quantum\n").find("cfg.yaml:1:9") == 0);
  CHECK(error_of("sweep:\n  L_km: [10, -5]\n").find("cfg.yaml:2:9") == 0);
  CHECK(error_of("imperfections: {f: 2}\n").find("invalid parameters") != std::string::npos);
  CHECK(error_of("n: [1\n").find("cfg.yaml:") == 0);
  CHECK(error_of("mc:\n  trajectories: 0\n").find("cfg.yaml:2:") == 0);
}

TEST_CASE("results header is the fixed column list") {
  std::ostringstream s;
  write_results_csv(s, {});
  CHECK(s.str() ==
        "engine,scheme,n,L_km,L0_km,T_coh_s,f,v,d,eta,eps_a,eps_c,tau_filter_s,fidelity,fidelity_stderr,T_gen_s,"
        "T_gen_stderr,q1,distill_margin,qubit_discard_weight,seed,code_version\n");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("auto nesting picks the best level, smaller on ties") {
  auto c = parse_config("engine: static\nn: auto\nauto_n_max: 2\nL_km: 100\n");
  auto r = evaluate_point(c, c.base, 1);
  REQUIRE(r.ok());
  std::vector<double> F;
  for (int n = 0; n <= 2; ++n) {
    NetworkSpec s = c.base;
    s.n = n;
    F.push_back(*evaluate(Engine::Static, s, c.mc).fidelity);
  }
  for (int n = 0; n <= 2; ++n) {
    CHECK(F[n] <= *r.fidelity);
    if (n < r.spec.n) CHECK(F[n] < *r.fidelity);
  }
}

TEST_CASE("failed grid points become error records") {
  auto c = parse_config(R"(
engine: mc
n: 1
sweep:
  T_coh_s: [0.1]
mc:
  trajectories: 4
  roulette_budget_s: 1.0e-6
  roulette_survival: 0.001
)");
  auto out = run_grid(c, 1);
  REQUIRE(out.records.size() == 1);
  CHECK(out.failures == 1);
  CHECK_FALSE(out.records[0].ok());
  std::ostringstream e;
  write_errors_csv(e, out.records);
  CHECK(e.str().find("1,\"no trajectory survived") != std::string::npos);
}

TEST_CASE("command line: outputs, reproducibility, exit codes") {
  auto d = scratch("run");
  std::ofstream(d / "mc.yaml") << "engine: mc\nn: 1\nseed: 3\nsweep:\n  T_coh_s: [0.1, inf]\nmc:\n  trajectories: 60\n";
  CHECK(run_tool("run " + (d / "mc.yaml").string() + " --out " + (d / "a").string()) == 0);
  CHECK(run_tool("run " + (d / "mc.yaml").string() + " --threads 2 --out " + (d / "b").string()) == 0);
  const auto a = slurp(d / "a" / "results.csv");
  CHECK(a == slurp(d / "b" / "results.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);
  CHECK(a.find("\nmc,2D,1,50,25,0.1,") != std::string::npos);
  // a different seed changes the estimates
  CHECK(run_tool("run " + (d / "mc.yaml").string() + " --seed 4 --out " + (d / "c").string()) == 0);
  CHECK(slurp(d / "c" / "results.csv") != a);
  CHECK(slurp(d / "c" / "results.csv").find(",4,") != std::string::npos);

  std::ofstream(d / "bad.yaml") << "engine: static\nscheme: 3D\n";
  CHECK(run_tool("run " + (d / "bad.yaml").string() + " --out " + d.string()) == 2);
  CHECK(run_tool("run " + (d / "missing.yaml").string()) == 2);
  CHECK(run_tool("frobnicate") == 2);

  std::ofstream(d / "fail.yaml")
      << "engine: mc\nn: 1\nsweep:\n  T_coh_s: [0.1, 0.2]\nmc:\n  trajectories: 3\n  roulette_budget_s: 1.0e-6\n"
         "  roulette_survival: 0.001\n";
  CHECK(run_tool("run " + (d / "fail.yaml").string() + " --out " + (d / "f").string()) == 3);
  CHECK(fs::exists(d / "f" / "errors.csv"));
  CHECK(fs::exists(d / "f" / "results.csv"));

  CHECK(run_tool("report " + (d / "a" / "results.csv").string() + " --kind heatmap --out " + (d / "r").string()) == 0);
  CHECK(fs::exists(d / "r" / "results_heatmap.svg"));
  CHECK(run_tool("report " + (d / "a" / "results.csv").string() + " --kind pie --out " + d.string()) == 2);
}

TEST_CASE("reports") {
  std::istringstream in(
      "engine,scheme,n,L_km,T_coh_s,tau_filter_s,fidelity,T_gen_s\n"
      "laplace,2D,1,20,0.1,inf,0.95,1.5\n"
      "laplace,2D,1,40,0.1,inf,0.9,3\n"
      "laplace,2D,2,60,0.1,inf,0.85,6\n"
      "laplace,2D,1,20,inf,0.01,0.97,2\n"
      "laplace,2D,1,20,inf,0.02,0.96,1.8\n");
  auto t = read_csv(in, "r.csv");
  REQUIRE(t.rows.size() == 5);

  for (auto k : {ReportKind::Heatmap, ReportKind::Curve, ReportKind::Tradeoff}) {
    auto svg = render_report(t, k, "r.csv");
    CHECK(svg == render_report(t, k, "r.csv"));
    CHECK(svg.find("<!-- data: r.csv; kind: " + to_string(k)) != std::string::npos);
    // every plotted fidelity is a CSV value of the cited row
    std::regex re("data-row=\"(\\d+)\"[^>]*data-fidelity=\"([^\"]+)\"");
    int seen = 0;
    for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it, ++seen) {
      const size_t row = std::stoul((*it)[1]) - 1;
      CHECK((*it)[2] == t.rows.at(row)[t.column("fidelity")]);
    }
    CHECK(seen > 0);
  }
  // the level change between 40 and 60 km is marked
  auto curve = render_report(t, ReportKind::Curve, "r.csv");
  CHECK(curve.find("class=\"transition\" data-row=\"3\"") != std::string::npos);

  std::istringstream thin("L_km,fidelity\n10,0.9\n");
  auto t2 = read_csv(thin, "thin.csv");
  try {
    render_report(t2, ReportKind::Tradeoff, "thin.csv");
    FAIL("expected a diagnostic");
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    CHECK(m.find("T_coh_s") != std::string::npos);
    CHECK(m.find("tau_filter_s") != std::string::npos);
    CHECK(m.find("T_gen_s") != std::string::npos);
    CHECK(m.find(" fidelity") == std::string::npos);
  }
  std::istringstream ragged("a,b\n1\n");
  CHECK_THROWS_AS(read_csv(ragged, "x.csv"), ConfigError);
}
