#include "ghzrep/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ghzrep {

std::string to_string(Engine e) {
  switch (e) {
    case Engine::Static:
      return "static";
    case Engine::MonteCarlo:
      return "mc";
    case Engine::Laplace:
      return "laplace";
  }
  return "?";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    std::ostringstream o;
    o << source_;
    const auto m = n.Mark();
    if (!m.is_null()) o << ":" << m.line + 1 << ":" << m.column + 1;
    o << ": " << msg;
    throw ConfigError(o.str());
  }

  void only(const YAML::Node& map, const std::set<std::string>& keys, const std::string& where) const {
    if (!map.IsMap()) fail(map, where + " must be a mapping");
    for (const auto& kv : map) {
      const auto k = kv.first.as<std::string>();
      if (!keys.count(k)) fail(kv.first, "unknown key '" + k + "' in " + where);
    }
  }

  double number(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + " must be a number");
    std::string s = n.Scalar();
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "inf" || s == ".inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    const char* b = s.c_str();
    char* e = nullptr;
    errno = 0;
    const double v = std::strtod(b, &e);
    if (e == b || *e != '\0' || errno == ERANGE || std::isnan(v))
      fail(n, key + ": expected a number, got '" + n.Scalar() + "'");
    return v;
  }

  long integer(const YAML::Node& n, const std::string& key) const {
    const double v = number(n, key);
    if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e15) fail(n, key + " must be an integer");
    return static_cast<long>(v);
  }

  std::string text(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + " must be a string");
    return n.Scalar();
  }

  std::vector<double> list(const YAML::Node& n, const std::string& key) const {
    std::vector<double> out;
    if (n.IsScalar()) {
      out.push_back(number(n, key));
    } else if (n.IsSequence()) {
      for (const auto& x : n) out.push_back(number(x, key));
      if (out.empty()) fail(n, "sweep axis " + key + " is empty");
    } else {
      fail(n, key + " must be a number or a list of numbers");
    }
    return out;
  }

 private:
  std::string source_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream o;
    o << source << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(o.str());
  }
  RunConfig c;
  c.source = source;
  if (root.IsNull()) return c;
  r.only(root, {"engine", "scheme", "n", "auto_n_max", "L_km", "seed", "network", "imperfections", "sweep", "mc", "output"},
         "the top level");

  if (auto n = root["engine"]) {
    const auto e = r.text(n, "engine");
    if (e == "static")
      c.engine = Engine::Static;
    else if (e == "mc" || e == "monte-carlo")
      c.engine = Engine::MonteCarlo;
    else if (e == "laplace")
      c.engine = Engine::Laplace;
    else
      r.fail(n, "engine must be static, mc or laplace");
  }
  if (auto n = root["scheme"]) {
    try {
      c.base.scheme = scheme_from_string(r.text(n, "scheme"));
    } catch (const ConfigError& e) {
      r.fail(n, e.what());
    }
  }
  if (auto n = root["n"]) {
    if (n.IsScalar() && n.Scalar() == "auto")
      c.auto_n = true;
    else
      c.base.n = static_cast<int>(r.integer(n, "n"));
  }
  if (auto n = root["auto_n_max"]) {
    c.auto_n_max = static_cast<int>(r.integer(n, "auto_n_max"));
    if (c.auto_n_max < 0 || c.auto_n_max > 6) r.fail(n, "auto_n_max must lie in [0, 6]");
  }
  if (auto n = root["L_km"]) c.base.L_total_km = r.number(n, "L_km");
  if (auto n = root["seed"]) {
    const long s = r.integer(n, "seed");
    if (s < 0) r.fail(n, "seed must be non-negative");
    c.mc.seed = static_cast<std::uint64_t>(s);
  }

  if (auto net = root["network"]) {
    r.only(net, {"n_max", "n_max_elementary", "span_factor"}, "network");
    if (auto n = net["n_max"]) c.base.n_max = static_cast<int>(r.integer(n, "n_max"));
    if (auto n = net["n_max_elementary"]) c.base.n_max_elementary = static_cast<int>(r.integer(n, "n_max_elementary"));
    if (auto n = net["span_factor"]) c.base.span_factor = r.number(n, "span_factor");
  }

  if (auto imp = root["imperfections"]) {
    r.only(imp, {"f", "v", "d", "eta", "eps_a", "eps_c", "L_att_km", "T_coh_s", "v_c_km_per_s", "pulse_s", "tau_filter_s"},
           "imperfections");
    auto& p = c.base.imp;
    const std::pair<const char*, double*> fields[] = {
        {"f", &p.f},         {"v", &p.v},         {"d", &p.d},
        {"eta", &p.eta},     {"eps_a", &p.eps_a}, {"eps_c", &p.eps_c},
        {"L_att_km", &p.L_att_km}, {"T_coh_s", &p.T_coh_s}, {"v_c_km_per_s", &p.v_c_km_per_s},
        {"pulse_s", &p.pulse_s},   {"tau_filter_s", &p.filter_window_s}};
    for (const auto& [key, dst] : fields)
      if (auto n = imp[key]) *dst = r.number(n, key);
  }

  if (auto sw = root["sweep"]) {
    r.only(sw, {"T_coh_s", "L_km", "eps_a", "tau_filter_s"}, "sweep");
    if (auto n = sw["T_coh_s"]) c.sweep.T_coh_s = r.list(n, "T_coh_s");
    if (auto n = sw["L_km"]) c.sweep.L_km = r.list(n, "L_km");
    if (auto n = sw["eps_a"]) c.sweep.eps_a = r.list(n, "eps_a");
    if (auto n = sw["tau_filter_s"]) c.sweep.tau_filter_s = r.list(n, "tau_filter_s");
  }

  if (auto mc = root["mc"]) {
    r.only(mc, {"trajectories", "representation", "roulette_budget_s", "roulette_survival", "threads"}, "mc");
    if (auto n = mc["trajectories"]) c.mc.n_trajectories = r.integer(n, "trajectories");
    if (auto n = mc["representation"]) {
      const auto s = r.text(n, "representation");
      if (s == "pure")
        c.mc.representation = Representation::Pure;
      else if (s == "mixed")
        c.mc.representation = Representation::Mixed;
      else
        r.fail(n, "representation must be pure or mixed");
    }
    if (auto n = mc["roulette_budget_s"]) c.mc.roulette_budget_s = r.number(n, "roulette_budget_s");
    if (auto n = mc["roulette_survival"]) c.mc.roulette_survival = r.number(n, "roulette_survival");
    if (auto n = mc["threads"]) c.mc.threads = static_cast<int>(r.integer(n, "threads"));
    try {
      c.mc.validate();
    } catch (const std::exception& e) {
      r.fail(mc, e.what());
    }
  }

  if (auto out = root["output"]) {
    r.only(out, {"results", "errors"}, "output");
    if (auto n = out["results"]) c.results_file = r.text(n, "results");
    if (auto n = out["errors"]) c.errors_file = r.text(n, "errors");
  }

  if (c.auto_n && c.base.scheme == Scheme::OneD && c.auto_n_max < 1)
    r.fail(root["auto_n_max"], "the 1D scheme needs auto_n_max >= 1");
  // every swept value must be admissible on its own
  try {
    NetworkSpec probe = c.base;
    if (c.auto_n) probe.n = c.base.scheme == Scheme::OneD ? 1 : 0;
    probe.validate();
  } catch (const std::exception& e) {
    r.fail(root, std::string("invalid parameters: ") + e.what());
  }
  auto check_axis = [&](const char* key, const std::vector<double>& xs, auto set) {
    for (double x : xs) {
      NetworkSpec probe = c.base;
      if (c.auto_n) probe.n = c.base.scheme == Scheme::OneD ? 1 : 0;
      set(probe, x);
      try {
        probe.validate();
      } catch (const std::exception& e) {
        r.fail(root["sweep"][key], std::string("invalid sweep value: ") + e.what());
      }
    }
  };
  check_axis("T_coh_s", c.sweep.T_coh_s, [](NetworkSpec& s, double x) { s.imp.T_coh_s = x; });
  check_axis("L_km", c.sweep.L_km, [](NetworkSpec& s, double x) { s.L_total_km = x; });
  check_axis("eps_a", c.sweep.eps_a, [](NetworkSpec& s, double x) { s.imp.eps_a = x; });
  check_axis("tau_filter_s", c.sweep.tau_filter_s, [](NetworkSpec& s, double x) { s.imp.filter_window_s = x; });
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), path);
}

}  // namespace ghzrep
