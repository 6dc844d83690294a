#include "mfg/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfg/error.hpp"

namespace mfg {

using nlohmann::json;

namespace {

const std::vector<std::string> kMonitorGroups{
    "mass",         "lower_bound", "integral_identity", "lax_hopf", "heat_kernel", "first_order",
    "second_order", "entropy",     "lbeta",             "hopf_cole", "duality",    "gagliardo_nirenberg"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Reads typed values out of one JSON object, recording problems instead of
// throwing so that the caller sees all of them.
class Section {
 public:
  Section(const json& root, std::string path, std::vector<std::string>& issues)
      : path_(std::move(path)), issues_(issues) {
    if (root.is_null()) return;
    if (!root.is_object()) {
      issue("", "expected an object");
      return;
    }
    obj_ = &root;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_ != nullptr && obj_->contains(key) && !(*obj_)[key].is_null();
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return (*obj_)[key];
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number()) return issue(key, "expected a number");
    out = v.get<double>();
  }
  void number(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    double v = 0.0;
    number(key, v);
    out = v;
  }
  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_integer()) return issue(key, "expected an integer");
    out = v.get<int>();
  }
  void count(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) return issue(key, "expected a non-negative integer");
    out = v.get<std::size_t>();
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_boolean()) return issue(key, "expected true or false");
    out = v.get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) return issue(key, "expected a string");
    out = v.get<std::string>();
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_array()) return issue(key, "expected an array of numbers");
    out.clear();
    for (const auto& x : v) {
      if (!x.is_number()) return issue(key, "expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  void issue(const std::string& key, const std::string& msg) {
    issues_.push_back(name(key) + ": " + msg);
  }
  std::string name(const std::string& key) const { return key.empty() ? path_ : path_ + "." + key; }

  void reject_unknown() {
    if (obj_ == nullptr) return;
    for (const auto& [k, v] : obj_->items()) {
      if (!seen_.count(k)) issue(k, "unknown key");
    }
  }

 private:
  const json* obj_ = nullptr;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> seen_;
};

const json& child(const json& j, const char* key) {
  static const json null_json;
  if (j.is_object() && j.contains(key)) return j[key];
  return null_json;
}

FieldSpec read_field(const json& j, const std::string& path, std::vector<std::string>& issues) {
  FieldSpec s;
  if (j.is_number()) return FieldSpec::constant(j.get<double>());
  Section sec(j, path, issues);
  if (!j.is_object()) return s;
  std::string type = "constant";
  sec.string("type", type);
  if (type == "constant") {
    s.kind = FieldSpec::Kind::Constant;
    sec.number("value", s.base);
  } else if (type == "cosine") {
    s.kind = FieldSpec::Kind::Cosine;
    sec.number("base", s.base);
    auto read_term = [&](const json& t, const std::string& tpath) {
      CosineTerm term;
      Section ts(t, tpath, issues);
      ts.number("amplitude", term.amplitude);
      ts.number("phase", term.phase);
      if (ts.has("mode")) {
        const json& m = ts.raw("mode");
        if (!m.is_array() || m.empty()) {
          ts.issue("mode", "expected an array of integers");
        } else {
          for (const auto& k : m) {
            if (!k.is_number_integer()) {
              ts.issue("mode", "expected an array of integers");
              break;
            }
            term.mode.push_back(k.get<int>());
          }
        }
      } else {
        ts.issue("mode", "required for a cosine term");
      }
      ts.reject_unknown();
      s.terms.push_back(term);
    };
    if (sec.has("terms")) {
      const json& terms = sec.raw("terms");
      if (!terms.is_array()) {
        sec.issue("terms", "expected an array");
      } else {
        for (std::size_t i = 0; i < terms.size(); ++i) read_term(terms[i], path + ".terms[" + std::to_string(i) + "]");
      }
    }
  } else if (type == "table") {
    s.kind = FieldSpec::Kind::Table;
    sec.numbers("values", s.table);
    if (s.table.empty()) sec.issue("values", "a table needs values");
  } else {
    sec.issue("type", "must be constant, cosine or table, got '" + type + "'");
  }
  sec.reject_unknown();
  return s;
}

json field_to_json(const FieldSpec& s) {
  switch (s.kind) {
    case FieldSpec::Kind::Constant:
      return json{{"type", "constant"}, {"value", s.base}};
    case FieldSpec::Kind::Cosine: {
      json terms = json::array();
      for (const auto& t : s.terms) terms.push_back({{"amplitude", t.amplitude}, {"mode", t.mode}, {"phase", t.phase}});
      return json{{"type", "cosine"}, {"base", s.base}, {"terms", terms}};
    }
    case FieldSpec::Kind::Table:
      return json{{"type", "table"}, {"values", s.table}};
  }
  return json();
}

// Checks a field spec against the grid and samples it; nullopt on a problem.
std::optional<Field> checked_sample(const FieldSpec& s, const TorusGrid& g, const std::string& path,
                                    std::vector<std::string>& issues) {
  if (s.kind == FieldSpec::Kind::Table && s.table.size() != g.size()) {
    issues.push_back(path + ": table has " + std::to_string(s.table.size()) + " values, grid needs " +
                     std::to_string(g.size()));
    return std::nullopt;
  }
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    if (s.terms[i].mode.size() != static_cast<std::size_t>(g.dim())) {
      issues.push_back(path + ".terms[" + std::to_string(i) + "].mode: needs " + std::to_string(g.dim()) +
                       " entries");
      return std::nullopt;
    }
  }
  Field f = s.sample(g);
  if (!f.all_finite()) {
    issues.push_back(path + ": non-finite values");
    return std::nullopt;
  }
  return f;
}

}  // namespace

Field FieldSpec::sample(const TorusGrid& grid) const {
  if (kind == Kind::Table) return Field(grid, table);
  return Field::from_function(grid, [&](std::span<const double> x) {
    double v = base;
    for (const auto& t : terms) {
      double arg = t.phase;
      for (std::size_t a = 0; a < t.mode.size() && a < x.size(); ++a) arg += 2.0 * std::numbers::pi * t.mode[a] * x[a];
      v += t.amplitude * std::cos(arg);
    }
    return v;
  });
}

TorusGrid RunConfig::grid() const {
  const double step = dt ? *dt : cfl_target.value_or(0.1) / n;
  return TorusGrid::with_time_step(d, n, T, step);
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config: parse error: ") + e.what()});
  }
  std::vector<std::string> issues;
  RunConfig cfg;
  if (!root.is_object()) throw ConfigError({"config: top level must be an object"});
  Section top(root, "config", issues);

  Section grid(child(root, "grid"), "grid", issues);
  top.has("grid");
  grid.integer("d", cfg.d);
  grid.integer("n", cfg.n);
  grid.number("T", cfg.T);
  grid.number("dt", cfg.dt);
  grid.number("cfl_target", cfg.cfl_target);
  // Echoed configs carry the resolved step count; it must agree with dt.
  std::size_t echoed_steps = 0;
  const bool has_steps = grid.has("steps");
  grid.count("steps", echoed_steps);
  grid.reject_unknown();
  if (cfg.d < 1 || cfg.d > kMaxDim) grid.issue("d", "must be 1, 2 or 3");
  if (cfg.n < 4) grid.issue("n", "must be >= 4");
  if (!(cfg.T > 0.0)) grid.issue("T", "must be > 0");
  if (cfg.dt && cfg.cfl_target) grid.issue("dt", "give either dt or cfl_target, not both");
  if (cfg.dt && !(*cfg.dt > 0.0)) grid.issue("dt", "must be > 0");
  if (cfg.cfl_target && !(*cfg.cfl_target > 0.0 && *cfg.cfl_target <= 1.0)) grid.issue("cfl_target", "must lie in (0, 1]");
  if (!cfg.dt && !cfg.cfl_target) cfg.dt = 0.002;

  Section model(child(root, "model"), "model", issues);
  top.has("model");
  model.number("gamma", cfg.gamma);
  // A manufactured problem brings its own gamma, validated with that section.
  if (!root.contains("manufactured") && cfg.d >= 1 && cfg.d <= kMaxDim &&
      !HamiltonianModel::in_growth_window(cfg.gamma, cfg.d)) {
    issues.push_back("model.gamma: " + fmt(cfg.gamma) + " outside the window (1 + 1/(d+1), 2) for d = " +
                     std::to_string(cfg.d));
  }

  if (model.has("a")) cfg.a = read_field(model.raw("a"), "model.a", issues);
  if (model.has("V")) cfg.V = read_field(model.raw("V"), "model.V", issues);
  model.reject_unknown();

  Section coupling(child(root, "coupling"), "coupling", issues);
  top.has("coupling");
  coupling.number("alpha", cfg.coupling.alpha);
  coupling.number("eps", cfg.coupling.eps);
  coupling.numbers("eps_ladder", cfg.eps_ladder);
  coupling.reject_unknown();
  if (!(cfg.coupling.alpha > 0.0)) coupling.issue("alpha", "must be > 0");
  if (!(cfg.coupling.eps >= 0.0)) coupling.issue("eps", "must be >= 0");
  for (std::size_t i = 0; i < cfg.eps_ladder.size(); ++i) {
    if (!(cfg.eps_ladder[i] >= 0.0) || (i > 0 && !(cfg.eps_ladder[i] < cfg.eps_ladder[i - 1]))) {
      coupling.issue("eps_ladder", "must be non-negative and strictly decreasing");
      break;
    }
  }

  Section data(child(root, "data"), "data", issues);
  top.has("data");
  if (data.has("u_T")) cfg.u_T = read_field(data.raw("u_T"), "data.u_T", issues);
  if (data.has("m0")) cfg.m0 = read_field(data.raw("m0"), "data.m0", issues);
  data.number("kappa0", cfg.kappa0);
  data.reject_unknown();
  if (!(cfg.kappa0 > 0.0)) data.issue("kappa0", "must be > 0");

  Section solver(child(root, "solver"), "solver", issues);
  top.has("solver");
  solver.number("omega", cfg.solver.omega);
  solver.number("tol", cfg.solver.tol);
  solver.count("max_iters", cfg.solver.max_iters);
  solver.number("cfl_factor", cfg.solver.cfl_factor);
  solver.boolean("compare_cold_start", cfg.solver.compare_cold_start);
  solver.reject_unknown();
  if (!(cfg.solver.omega > 0.0 && cfg.solver.omega <= 1.0)) solver.issue("omega", "must lie in (0, 1]");
  if (!(cfg.solver.tol > 0.0)) solver.issue("tol", "must be > 0");
  if (cfg.solver.max_iters == 0) solver.issue("max_iters", "must be >= 1");
  if (!(cfg.solver.cfl_factor > 0.0 && cfg.solver.cfl_factor <= 1.0)) solver.issue("cfl_factor", "must lie in (0, 1]");
  cfg.solver.eps_ladder = cfg.eps_ladder;

  Section mon(child(root, "monitor"), "monitor", issues);
  top.has("monitor");
  if (mon.has("entries")) {
    const json& e = mon.raw("entries");
    if (!e.is_array()) {
      mon.issue("entries", "expected an array of group names");
    } else {
      for (const auto& g : e) {
        if (!g.is_string()) {
          mon.issue("entries", "expected an array of group names");
          break;
        }
        const std::string name = g.get<std::string>();
        if (std::find(kMonitorGroups.begin(), kMonitorGroups.end(), name) == kMonitorGroups.end()) {
          mon.issue("entries", "unknown group '" + name + "'");
        }
        cfg.monitor.entries.push_back(name);
      }
    }
  }
  mon.numbers("betas", cfg.monitor.betas);
  if (mon.has("pq")) {
    const json& pq = mon.raw("pq");
    cfg.monitor.pq.clear();
    bool ok = pq.is_array();
    if (ok) {
      for (const auto& pair : pq) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
          ok = false;
          break;
        }
        cfg.monitor.pq.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
    }
    if (!ok) mon.issue("pq", "expected an array of [p, q] pairs");
  }
  mon.number("c1", cfg.monitor.c1);
  mon.number("c2", cfg.monitor.c2);
  mon.number("c3", cfg.monitor.c3);
  mon.number("a3_c", cfg.monitor.a3_c);
  mon.reject_unknown();
  for (double b : cfg.monitor.betas) {
    if (!(b > 1.0)) mon.issue("betas", "every beta must be > 1");
  }
  for (const auto& [p, q] : cfg.monitor.pq) {
    if (!(p > cfg.d / 2.0) || !(q > 1.0) || std::abs(1.0 / p + 1.0 / q - 1.0) > 1e-12) {
      mon.issue("pq", "pair [" + fmt(p) + ", " + fmt(q) + "] must be conjugate with p > d/2");
    }
  }
  for (double c : {cfg.monitor.c1, cfg.monitor.c2, cfg.monitor.c3}) {
    if (!(c > 0.0)) {
      mon.issue("c1", "tolerance constants c1, c2, c3 must be > 0");
      break;
    }
  }

  Section audit(child(root, "audit"), "audit", issues);
  top.has("audit");
  audit.number("radius", cfg.audit.radius);
  audit.count("samples", cfg.audit.samples);
  if (audit.has("seed")) {
    const json& s = audit.raw("seed");
    if (!s.is_number_unsigned()) {
      audit.issue("seed", "expected a non-negative integer");
    } else {
      cfg.audit.seed = s.get<std::uint64_t>();
    }
  }
  audit.count("matrices_per_sample", cfg.audit.matrices_per_sample);
  audit.number("delta", cfg.audit.delta);
  audit.reject_unknown();
  if (!(cfg.audit.radius > 0.0)) audit.issue("radius", "must be > 0");
  if (cfg.audit.samples == 0) audit.issue("samples", "must be >= 1");
  if (!(cfg.audit.delta > 0.0)) audit.issue("delta", "must be > 0");

  if (top.has("manufactured")) {
    Section man(root["manufactured"], "manufactured", issues);
    ManufacturedSpec ms;
    man.number("u_amplitude", ms.u_amplitude);
    man.number("m_amplitude", ms.m_amplitude);
    man.number("gamma", ms.gamma);
    man.number("alpha", ms.alpha);
    man.reject_unknown();
    if (!(std::abs(ms.m_amplitude) < 1.0)) man.issue("m_amplitude", "must be below 1 in magnitude");
    if (!(ms.alpha > 0.0)) man.issue("alpha", "must be > 0");
    if (cfg.d >= 1 && cfg.d <= kMaxDim && !HamiltonianModel::in_growth_window(ms.gamma, cfg.d)) {
      man.issue("gamma", fmt(ms.gamma) + " outside the window (1 + 1/(d+1), 2) for d = " + std::to_string(cfg.d));
    }
    cfg.manufactured = ms;
    cfg.gamma = ms.gamma;
  }

  Section out(child(root, "output"), "output", issues);
  top.has("output");
  out.string("directory", cfg.output.directory);
  if (out.has("formats")) {
    const json& f = out.raw("formats");
    cfg.output.json = cfg.output.csv = false;
    bool ok = f.is_array();
    if (ok) {
      for (const auto& x : f) {
        if (x == "json") {
          cfg.output.json = true;
        } else if (x == "csv") {
          cfg.output.csv = true;
        } else {
          ok = false;
        }
      }
    }
    if (!ok) out.issue("formats", "expected a subset of [\"json\", \"csv\"]");
  }
  out.boolean("plots", cfg.output.plots);
  out.reject_unknown();
  top.reject_unknown();

  // Cross-field checks need a grid.
  if (issues.empty()) {
    const TorusGrid g = cfg.grid();
    if (has_steps && echoed_steps != g.steps()) {
      issues.push_back("grid.steps: " + std::to_string(echoed_steps) + " does not match " +
                       std::to_string(g.steps()) + " steps implied by T and dt");
    }
    if (!cfg.manufactured) {
      if (auto a = checked_sample(cfg.a, g, "model.a", issues); a && !(a->min() > 0.0)) {
        issues.push_back("model.a: must be > 0 everywhere, min is " + fmt(a->min()));
      }
      if (auto V = checked_sample(cfg.V, g, "model.V", issues); V && !(V->min() > 0.0)) {
        issues.push_back("model.V: must be > 0 everywhere, min is " + fmt(V->min()));
      }
      checked_sample(cfg.u_T, g, "data.u_T", issues);
      if (auto m0 = checked_sample(cfg.m0, g, "data.m0", issues)) {
        const double mass = m0->integral();
        if (!(mass > 0.0)) {
          issues.push_back("data.m0: total mass must be > 0");
        } else {
          if (mass != 1.0) cfg.log.push_back("data.m0: renormalized from mass " + fmt(mass) + " to 1");
          const double floor = m0->min() / mass;
          if (!(floor >= cfg.kappa0)) {
            issues.push_back("data.m0: min value " + fmt(floor) + " below the positivity floor kappa0 = " +
                             fmt(cfg.kappa0));
          }
        }
      }
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
  const TorusGrid g = cfg.grid();
  json j;
  j["grid"] = {{"d", cfg.d}, {"n", cfg.n}, {"T", cfg.T}, {"dt", g.time_step()}, {"steps", g.steps()}};
  j["model"] = {{"gamma", cfg.gamma}, {"a", field_to_json(cfg.a)}, {"V", field_to_json(cfg.V)}};
  j["coupling"] = {{"alpha", cfg.coupling.alpha}, {"eps", cfg.coupling.eps}, {"eps_ladder", cfg.eps_ladder}};
  j["data"] = {{"u_T", field_to_json(cfg.u_T)}, {"m0", field_to_json(cfg.m0)}, {"kappa0", cfg.kappa0}};
  j["solver"] = {{"omega", cfg.solver.omega},
                 {"tol", cfg.solver.tol},
                 {"max_iters", cfg.solver.max_iters},
                 {"cfl_factor", cfg.solver.cfl_factor},
                 {"compare_cold_start", cfg.solver.compare_cold_start}};
  json pq = json::array();
  for (const auto& [p, q] : cfg.monitor.pq) pq.push_back({p, q});
  j["monitor"] = {{"entries", cfg.monitor.entries}, {"betas", cfg.monitor.betas}, {"pq", pq},
                  {"c1", cfg.monitor.c1},           {"c2", cfg.monitor.c2},       {"c3", cfg.monitor.c3}};
  if (cfg.monitor.a3_c) j["monitor"]["a3_c"] = *cfg.monitor.a3_c;
  j["audit"] = {{"radius", cfg.audit.radius},
                {"samples", cfg.audit.samples},
                {"seed", cfg.audit.seed},
                {"matrices_per_sample", cfg.audit.matrices_per_sample},
                {"delta", cfg.audit.delta}};
  if (cfg.manufactured) {
    const auto& m = *cfg.manufactured;
    j["manufactured"] = {{"u_amplitude", m.u_amplitude},
                         {"m_amplitude", m.m_amplitude},
                         {"gamma", m.gamma},
                         {"alpha", m.alpha}};
  }
  return j.dump(2);
}

MfgProblem build_problem(const RunConfig& cfg) {
  const TorusGrid g = cfg.grid();
  if (cfg.manufactured) return manufactured_problem(*cfg.manufactured, g);
  Field m0 = cfg.m0.sample(g);
  m0 *= 1.0 / m0.integral();
  return MfgProblem{g,
                    HamiltonianModel(cfg.a.sample(g), cfg.V.sample(g), cfg.gamma),
                    cfg.coupling,
                    cfg.u_T.sample(g),
                    std::move(m0),
                    std::nullopt,
                    std::nullopt};
}

}  // namespace mfg
