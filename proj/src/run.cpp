#include "mfg/run.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mfg/calculus.hpp"
#include "mfg/error.hpp"
#include "mfg/exponents.hpp"
#include "mfg/io.hpp"

namespace mfg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Timestamps and timings go here, never into summary.json.
class RunLog {
 public:
  explicit RunLog(const fs::path& dir) : start_(std::chrono::steady_clock::now()), out_(dir / "run.log") {
    if (!out_) throw IoError("cannot write " + (dir / "run.log").string());
    const std::time_t now = std::time(nullptr);
    out_ << "started " << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ") << "\n";
  }
  void line(const std::string& s) {
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    out_ << "[" << std::fixed << std::setprecision(3) << t << "s] " << s << "\n";
    out_.flush();
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::ofstream out_;
};

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

const char* kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::Identity:
      return "identity";
    case EntryKind::Bound:
      return "bound";
    case EntryKind::Observe:
      return "observe";
  }
  return "observe";
}

json entry_json(const EstimateEntry& e, bool series) {
  json j{{"name", e.name},       {"kind", kind_name(e.kind)}, {"verdict", e.verdict()}, {"lhs", e.lhs},
         {"rhs", e.rhs},         {"slack", e.slack},          {"tol", e.tol},           {"pass", e.pass},
         {"skipped", e.skipped}, {"note", e.note},            {"values", e.values}};
  if (series) {
    j["lhs_series"] = e.lhs_series;
    j["rhs_series"] = e.rhs_series;
  }
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string report_csv(const EstimateReport& r) {
  std::ostringstream os;
  os << "name,kind,verdict,lhs,rhs,slack,tol,note\n";
  for (const auto& e : r.entries) {
    os << csv_field(e.name) << "," << kind_name(e.kind) << "," << e.verdict() << "," << num(e.lhs) << ","
       << num(e.rhs) << "," << num(e.slack) << "," << num(e.tol) << "," << csv_field(e.note) << "\n";
  }
  return os.str();
}

json verdicts(const EstimateReport& r) {
  json j = json::object();
  for (const auto& e : r.entries) j[e.name] = e.verdict();
  return j;
}

json density_stats(const Trajectory& m) {
  double lo = m.front().min(), hi = m.front().max(), dev = 0.0;
  for (const auto& f : m) {
    lo = std::min(lo, f.min());
    hi = std::max(hi, f.max());
    dev = std::max(dev, std::abs(f.integral() - 1.0));
  }
  return {{"min_m", lo}, {"max_m", hi}, {"max_mass_deviation", dev}};
}

// Writes report.json / report.csv per the output formats.
void write_report(const fs::path& dir, const RunConfig& cfg, const EstimateReport& report, json solver,
                  RunResult& res) {
  if (cfg.output.json) {
    json entries = json::array();
    for (const auto& e : report.entries) entries.push_back(entry_json(e, true));
    json j{{"estimates", entries}, {"checks_failed", report.failed()}};
    if (!solver.is_null()) j["solver"] = std::move(solver);
    write_text(dir / "report.json", j.dump(2) + "\n");
    res.files.push_back("report.json");
  }
  if (cfg.output.csv) {
    write_text(dir / "report.csv", report_csv(report));
    res.files.push_back("report.csv");
  }
}

void write_summary(const fs::path& dir, json summary, RunResult& res) {
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  res.files.push_back("summary.json");
}

void write_plots(const fs::path& dir, const MfgSolution& sol, RunResult& res) {
  if (sol.m.grid().dim() == 1) {
    write_spacetime_ppm((dir / "m_spacetime.ppm").string(), sol.m);
    write_spacetime_ppm((dir / "u_spacetime.ppm").string(), sol.u);
    res.files.insert(res.files.end(), {"m_spacetime.ppm", "u_spacetime.ppm"});
  } else {
    write_field_ppm((dir / "m_final.ppm").string(), sol.m.back());
    write_field_ppm((dir / "u_initial.ppm").string(), sol.u.front());
    res.files.insert(res.files.end(), {"m_final.ppm", "u_initial.ppm"});
  }
  write_series_ppm((dir / "residuals.ppm").string(), sol.residual_history);
  res.files.push_back("residuals.ppm");
}

json solver_json(const MfgSolution& sol) {
  return {{"iterations", sol.iterations},
          {"converged", sol.converged},
          {"final_residual", sol.residual_history.empty() ? 0.0 : sol.residual_history.back()},
          {"residual_history", sol.residual_history}};
}

template <class F>
void parallel_for(std::size_t count, F&& body) {
  const unsigned workers = std::min<std::size_t>(thread_cap(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

json witness_json(const ExponentWitness& w) {
  return {{"lambda", w.lambda}, {"zeta", w.zeta}, {"upsilon", w.upsilon}, {"a_upsilon", w.a_upsilon},
          {"b_upsilon", w.b_upsilon}, {"r", w.r}, {"r_tilde", w.r_tilde}, {"p", w.p},
          {"p_tilde", w.p_tilde}, {"theta", w.theta}, {"F", w.F}, {"G", w.G},
          {"beta0", w.beta0}, {"q", w.q}};
}

json residuals_json(const WitnessCheck& c) {
  return {{"equalities", c.equalities}, {"inequalities", c.inequalities}, {"feasible", c.feasible}};
}

}  // namespace

unsigned thread_cap() {
  if (const char* env = std::getenv("MFG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunResult run_solve(const RunConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.output.directory);
  RunLog log(dir);
  for (const auto& l : cfg.log) log.line(l);
  RunResult res;
  const MfgProblem pb = build_problem(cfg);
  log.line("solve: grid d=" + std::to_string(pb.grid.dim()) + " n=" + std::to_string(pb.grid.points_per_axis()) +
           " steps=" + std::to_string(pb.grid.steps()));
  const MfgSolution sol = solve_mfg(pb, cfg.solver);
  log.line("solve: " + std::to_string(sol.iterations) + " iterations, converged=" + (sol.converged ? "true" : "false"));
  write_trajectory((dir / "u.traj").string(), sol.u);
  write_trajectory((dir / "m.traj").string(), sol.m);
  res.files.insert(res.files.end(), {"u.traj", "m.traj"});

  const EstimateReport report = run_monitor(MonitorInputs{pb.model, pb.coupling, sol.u, sol.m}, cfg.monitor);
  log.line("monitor: " + std::to_string(report.entries.size()) + " entries, " + std::to_string(report.failed()) +
           " failed");
  write_report(dir, cfg, report, solver_json(sol), res);
  if (cfg.output.plots) write_plots(dir, sol, res);

  res.converged = sol.converged;
  res.iterations = sol.iterations;
  res.checks_failed = report.failed();
  json summary{{"command", "solve"},
               {"config", json::parse(config_to_json(cfg))},
               {"solver", {{"iterations", sol.iterations},
                           {"converged", sol.converged},
                           {"final_residual", sol.residual_history.back()}}},
               {"density", density_stats(sol.m)},
               {"checks", {{"total", report.entries.size()}, {"failed", report.failed()}, {"verdicts", verdicts(report)}}}};
  write_summary(dir, std::move(summary), res);
  log.line("done");
  return res;
}

RunResult run_continuation(const RunConfig& cfg) {
  if (cfg.eps_ladder.empty()) throw ConfigError({"coupling.eps_ladder: continuation needs a nonempty ladder"});
  const fs::path dir = prepare_dir(cfg.output.directory);
  RunLog log(dir);
  for (const auto& l : cfg.log) log.line(l);
  RunResult res;
  const MfgProblem pb = build_problem(cfg);
  const auto rungs = eps_continuation(pb, cfg.solver);
  json rows = json::array();
  std::ostringstream csv;
  csv << "eps,iterations,converged,delta_u,delta_m,cold_start_iterations,error\n";
  for (const auto& r : rungs) {
    log.line("rung eps=" + num(r.eps) + ": " + (r.error.empty() ? std::to_string(r.solution.iterations) + " iterations"
                                                               : "failed: " + r.error));
    json row{{"eps", r.eps}, {"iterations", r.solution.iterations}, {"converged", r.solution.converged},
             {"delta_u", r.delta_u ? json(*r.delta_u) : json()}, {"delta_m", r.delta_m ? json(*r.delta_m) : json()},
             {"cold_start_iterations", r.cold_start_iterations ? json(*r.cold_start_iterations) : json()},
             {"error", r.error}};
    rows.push_back(row);
    csv << num(r.eps) << "," << r.solution.iterations << "," << (r.solution.converged ? 1 : 0) << ","
        << (r.delta_u ? num(*r.delta_u) : "") << "," << (r.delta_m ? num(*r.delta_m) : "") << ","
        << (r.cold_start_iterations ? std::to_string(*r.cold_start_iterations) : "") << "," << csv_field(r.error)
        << "\n";
    res.iterations += r.solution.iterations;
    res.converged = res.converged && r.error.empty() && r.solution.converged;
  }
  // Soft check: later rungs should move the density less than the first step did.
  std::vector<double> deltas;
  for (const auto& r : rungs)
    if (r.delta_m) deltas.push_back(*r.delta_m);
  bool finite = true;
  for (double d : deltas) finite = finite && std::isfinite(d);
  const bool shrinking = deltas.size() < 2 || deltas.back() <= deltas.front();
  log.line(std::string("delta_m shrinking: ") + (shrinking ? "yes" : "no"));
  if (!finite) res.checks_failed = 1;
  json out{{"rungs", rows}, {"deltas_finite", finite}, {"last_delta_le_first", shrinking}};
  if (cfg.output.json) {
    write_text(dir / "continuation.json", out.dump(2) + "\n");
    res.files.push_back("continuation.json");
  }
  if (cfg.output.csv) {
    write_text(dir / "continuation.csv", csv.str());
    res.files.push_back("continuation.csv");
  }
  const auto& last = rungs.back();
  if (last.error.empty()) {
    write_trajectory((dir / "u.traj").string(), last.solution.u);
    write_trajectory((dir / "m.traj").string(), last.solution.m);
    res.files.insert(res.files.end(), {"u.traj", "m.traj"});
  }
  for (auto& row : rows) row.erase("cold_start_iterations");
  write_summary(dir, {{"command", "continuation"}, {"config", json::parse(config_to_json(cfg))}, {"rungs", rows},
                      {"deltas_finite", finite}, {"last_delta_le_first", shrinking}},
                res);
  if (!last.error.empty()) throw NumericalError("continuation stopped at eps=" + num(last.eps) + ": " + last.error);
  return res;
}

RunResult run_audit(const RunConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.output.directory);
  RunLog log(dir);
  RunResult res;
  const MfgProblem pb = build_problem(cfg);
  const auto certs = audit_assumptions(pb.model, cfg.audit, pb.coupling.alpha);
  json arr = json::array();
  json verdict = json::object();
  for (const auto& c : certs) {
    arr.push_back({{"assumption", c.assumption}, {"constants", c.constants}, {"samples", c.samples},
                   {"residual", c.residual}, {"pass", c.pass}, {"note", c.note}});
    verdict[c.assumption] = c.pass ? "pass" : "fail";
    if (!c.pass) ++res.checks_failed;
    log.line(c.assumption + (c.pass ? " pass" : " FAIL") + " residual " + num(c.residual));
  }
  write_text(dir / "audit.json", arr.dump(2) + "\n");
  res.files.push_back("audit.json");
  write_summary(dir, {{"command", "audit"}, {"config", json::parse(config_to_json(cfg))}, {"certificates", arr},
                      {"failed", res.checks_failed}, {"verdicts", verdict}},
                res);
  return res;
}

RunResult run_monitor(const RunConfig& cfg, const std::string& u_path, const std::string& m_path) {
  const fs::path dir = prepare_dir(cfg.output.directory);
  RunLog log(dir);
  RunResult res;
  const Trajectory u = read_trajectory(u_path);
  const Trajectory m = read_trajectory(m_path);
  if (!(u.grid() == m.grid())) throw FormatError("monitor: u and m trajectories have different grids");
  if (u.grid().dim() != cfg.d || u.grid().points_per_axis() != cfg.n) {
    throw ConfigError({"grid: config has d=" + std::to_string(cfg.d) + " n=" + std::to_string(cfg.n) +
                       ", trajectories have d=" + std::to_string(u.grid().dim()) +
                       " n=" + std::to_string(u.grid().points_per_axis())});
  }
  // The model lives on the spatial grid; time metadata comes from the files.
  const MfgProblem pb = build_problem(cfg);
  log.line("monitor: read " + std::to_string(u.frame_count()) + " frames");
  const EstimateReport report = run_monitor(MonitorInputs{pb.model, pb.coupling, u, m}, cfg.monitor);
  write_report(dir, cfg, report, json(), res);
  res.checks_failed = report.failed();
  write_summary(dir, {{"command", "monitor"}, {"density", density_stats(m)},
                      {"checks", {{"total", report.entries.size()}, {"failed", report.failed()},
                                  {"verdicts", verdicts(report)}}}},
                res);
  log.line("monitor: " + std::to_string(report.failed()) + " entries failed");
  return res;
}

RunResult run_exponents(const ExponentsRequest& req) {
  if (req.gammas.empty() || req.dims.empty()) throw InvalidArgument("exponents: need at least one gamma and one d");
  std::vector<std::pair<double, int>> points;
  for (int d : req.dims)
    for (double g : req.gammas) points.emplace_back(g, d);
  // Validate the whole grid before spending time on it.
  for (const auto& [g, d] : points) alpha_formula(g, d);
  if (req.alpha && !(*req.alpha > 0.0)) throw DomainError("exponents: alpha must be > 0");

  const fs::path dir = prepare_dir(req.directory);
  RunLog log(dir);
  RunResult res;
  std::vector<AlphaMax> maxima(points.size());
  std::vector<std::optional<WitnessSearch>> searches(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const auto [g, d] = points[i];
    maxima[i] = alpha_max(g, d, req.budget);
    if (req.alpha) searches[i] = find_witness(g, d, *req.alpha, req.budget);
  });

  std::ostringstream csv;
  csv << "gamma,d,alpha_formula,alpha_max,alpha_upper,formula_bound_met\n";
  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [g, d] = points[i];
    const double f = alpha_formula(g, d);
    const AlphaMax& am = maxima[i];
    const bool met = am.alpha_max >= f - 1e-3;
    if (!met) ++res.checks_failed;
    csv << num(g) << "," << d << "," << num(f) << "," << num(am.alpha_max) << "," << num(am.upper) << ","
        << (met ? 1 : 0) << "\n";
    json row{{"gamma", g}, {"d", d}, {"alpha_formula", f}, {"alpha_max", am.alpha_max}, {"alpha_upper", am.upper},
             {"formula_bound_met", met}, {"diagnostics", am.diagnostics}};
    if (am.witness) {
      row["witness_at_alpha_max"] = witness_json(*am.witness);
      row["witness_residuals"] = residuals_json(witness_residuals(*am.witness, g, d, am.alpha_max));
    }
    if (searches[i]) {
      const WitnessSearch& s = *searches[i];
      json q{{"alpha", *req.alpha}, {"feasible", s.feasible}, {"best_slack", s.best_slack},
             {"attempts", s.attempts_used}, {"witness", witness_json(s.witness)},
             {"residuals", residuals_json(witness_residuals(s.witness, g, d, *req.alpha))}};
      row["query"] = q;
    }
    rows.push_back(row);
    log.line("gamma=" + num(g) + " d=" + std::to_string(d) + ": alpha_max " + num(am.alpha_max) + " (" +
             am.diagnostics + ")");
  }
  write_text(dir / "exponents.csv", csv.str());
  write_text(dir / "witnesses.json", rows.dump(2) + "\n");
  res.files.insert(res.files.end(), {"exponents.csv", "witnesses.json"});
  write_summary(dir, {{"command", "exponents"}, {"budget", req.budget}, {"rows", rows}}, res);
  return res;
}

}  // namespace mfg
