// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Solves shared between criteria are computed once.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/calculus.hpp"
#include "mfg/driver.hpp"
#include "mfg/estimates.hpp"
#include "mfg/exponents.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/manufactured.hpp"
#include "mfg/solvers.hpp"
#include "mfg/spectral.hpp"

using namespace mfg;

namespace {

constexpr double kPi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Baseline: d = 2, T = 0.5, gamma = 1.5, alpha = 0.5, a = 1 + 0.2 cos(2 pi x),
// V = 1 + 0.2 cos(2 pi y), u_T = 0, m0 = 1.
MfgProblem baseline(int n, double dt, double eps = 0.05) {
  const auto g = TorusGrid::with_time_step(2, n, 0.5, dt);
  HamiltonianModel model(Field::from_function(g, [](auto x) { return 1 + 0.2 * std::cos(2 * kPi * x[0]); }),
                         Field::from_function(g, [](auto x) { return 1 + 0.2 * std::cos(2 * kPi * x[1]); }), 1.5);
  return MfgProblem{g, std::move(model), {0.5, eps}, Field(g, 0.0), Field(g, 1.0), std::nullopt, std::nullopt};
}

struct Solved {
  MfgProblem pb;
  MfgSolution sol;
  double seconds = 0.0;
};

// Cache keyed by (n, omega); dt = 0.002 * 64 / n keeps dt/h fixed.
std::map<std::pair<int, double>, Solved>& cache() {
  static std::map<std::pair<int, double>, Solved> c;
  return c;
}

const Solved& solved_baseline(int n, double omega = 0.5) {
  auto& c = cache();
  const auto key = std::make_pair(n, omega);
  if (auto it = c.find(key); it != c.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  MfgProblem pb = baseline(n, 0.002 * 64.0 / n);
  FixedPointConfig cfg;
  cfg.omega = omega;
  cfg.tol = 1e-8;
  cfg.max_iters = 200;
  MfgSolution sol = solve_mfg(pb, cfg);
  const double secs = seconds_since(t0);
  std::printf("  [solve] baseline n=%d dt=%g omega=%g: %zu iterations, converged=%s, %.1f s\n", n,
              pb.grid.time_step(), omega, sol.iterations, sol.converged ? "true" : "false", secs);
  std::fflush(stdout);
  return c.emplace(key, Solved{std::move(pb), std::move(sol), secs}).first->second;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %2d: %s | %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

Outcome c1_formula() {
  const auto t0 = std::chrono::steady_clock::now();
  const double f = alpha_formula(1.5, 3);
  bool ok = std::abs(f - 2.5630) <= 5e-4;
  std::ostringstream os;
  os << "alpha_formula(1.5,3) = " << fmt("%.6f", f) << " (2.5630 +- 5e-4)";
  int grid_ok = 0, grid_total = 0;
  for (double g : {1.3, 1.5, 1.7, 1.9}) {
    for (int d : {3, 4, 5}) {
      if (!HamiltonianModel::in_growth_window(g, d)) continue;
      ++grid_total;
      if (alpha_formula(g, d) > 2.0 / (d - 2)) ++grid_ok;
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && grid_ok == grid_total && secs < 1.0;
  os << "; > 2/(d-2) at " << grid_ok << "/" << grid_total << " window points; " << fmt("%.3f", secs) << " s (< 1 s)";
  return {ok, os.str()};
}

Outcome c2_alpha_max() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::ostringstream os;
  for (auto [g, d] : {std::pair{1.5, 3}, std::pair{1.7, 4}}) {
    const auto r = alpha_max(g, d);
    const double f = alpha_formula(g, d);
    const bool witness_ok = r.witness && witness_residuals(*r.witness, g, d, r.alpha_max).feasible;
    ok = ok && r.alpha_max >= f - 1e-3 && witness_ok;
    os << "(" << g << "," << d << "): alpha_max " << fmt("%.4f", r.alpha_max) << " >= formula-1e-3 "
       << fmt("%.4f", f - 1e-3) << ", witness " << (witness_ok ? "re-checked" : "REJECTED") << "; ";
  }
  // Every witness accepted along the bisection is re-checked inside find_witness;
  // here the feasible interior point is also checked from scratch.
  const auto s = find_witness(1.5, 3, 0.5);
  const bool interior = s.feasible && witness_residuals(s.witness, 1.5, 3, 0.5).feasible;
  const double secs = seconds_since(t0);
  ok = ok && interior && secs < 300.0;
  os << "alpha=0.5 witness " << (interior ? "re-checked" : "REJECTED") << "; " << fmt("%.2f", secs) << " s (< 300 s)";
  return {ok, os.str()};
}

Outcome c3_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = TorusGrid::with_time_step(1, 128, 0.25, 1e-3);
  FpConfig fp;
  fp.m0 = Field::from_function(g, [](auto x) {
    return 1.0 + 0.6 * std::cos(2 * kPi * x[0]) + 0.2 * std::sin(6 * kPi * x[0]);
  });
  const Trajectory m = solve_fp(fp, g, [&](std::size_t) { return VectorField(g, 0.0); });
  const double err = lp_norm(m.back() - heat_evolve(fp.m0, 0.25), 2.0);
  const double bound = 5.0 * g.time_step() * lp_norm(fp.m0, 2.0);

  const HamiltonianModel model(Field(g, 1.0), Field(g, 1.0), 1.7);
  const Field u = Field::from_function(g, [](auto x) { return std::cos(2 * kPi * x[0]) + 0.3 * std::sin(4 * kPi * x[0]); });
  const Field f = Field::from_function(g, [](auto x) { return std::sin(2 * kPi * x[0]); });
  const double dt = 1e-3;
  Field rhs = u;
  rhs.axpy(dt, f);
  const double hook = lp_norm(hjb_step_backward(u, f, model, dt, kDefaultCfl, HamiltonianTerm::Zero) - heat_evolve(rhs, dt),
                              kInfinity);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "FP vs heat L2 error " << fmt("%.3e", err) << " <= " << fmt("%.3e", bound) << "; H=0 hook max diff "
     << fmt("%.2e", hook) << " <= 1e-12; " << fmt("%.2f", secs) << " s (< 10 s)";
  return {err <= bound && hook <= 1e-12 && secs < 10.0, os.str()};
}

Outcome c4_conservation() {
  const auto& s = solved_baseline(64);
  double mass_dev = 0.0, min_m = kInfinity;
  for (const auto& f : s.sol.m) {
    mass_dev = std::max(mass_dev, std::abs(f.integral() - 1.0));
    min_m = std::min(min_m, f.min());
  }
  std::ostringstream os;
  os << "max |mass-1| " << fmt("%.2e", mass_dev) << " <= 1e-10; min m " << fmt("%.4f", min_m)
     << " >= -1e-12; solve " << fmt("%.1f", s.seconds) << " s (< 300 s)";
  return {mass_dev <= 1e-10 && min_m >= -1e-12 && s.seconds < 300.0, os.str()};
}

Outcome c5_fixed_point() {
  const auto& half = solved_baseline(64, 0.5);
  const auto& full = solved_baseline(64, 1.0);
  const double dm = sup_distance(half.sol.m, full.sol.m);
  const double du = sup_distance(half.sol.u, full.sol.u);
  const double secs = half.seconds + full.seconds;
  std::ostringstream os;
  os << "omega=0.5: " << half.sol.iterations << " iterations (<= 200), omega=1: " << full.sol.iterations
     << "; sup|dm| " << fmt("%.2e", dm) << ", sup|du| " << fmt("%.2e", du) << " <= 1e-7; " << fmt("%.1f", secs)
     << " s (< 900 s)";
  const bool ok = half.sol.converged && half.sol.iterations <= 200 && full.sol.converged && dm <= 1e-7 &&
                  du <= 1e-7 && secs < 900.0;
  return {ok, os.str()};
}

Outcome c6_integral_identity() {
  const auto& coarse = solved_baseline(64);
  const auto& fine = solved_baseline(128);
  const auto ec = check_integral_identity(coarse.sol.u, coarse.sol.m, coarse.pb.model, coarse.pb.coupling);
  const auto ef = check_integral_identity(fine.sol.u, fine.sol.m, fine.pb.model, fine.pb.coupling);
  const double rel = std::abs(ec.slack) / std::max(std::abs(ec.lhs), std::abs(ec.rhs));
  const double ratio = std::abs(ec.slack) / std::abs(ef.slack);
  std::ostringstream os;
  os << "LHS " << fmt("%.6f", ec.lhs) << " RHS " << fmt("%.6f", ec.rhs) << ", relative residual " << fmt("%.2e", rel)
     << " <= 0.02; residual " << fmt("%.3e", std::abs(ec.slack)) << " -> " << fmt("%.3e", std::abs(ef.slack))
     << " on halving, ratio " << fmt("%.2f", ratio) << " >= 1.7";
  return {rel <= 0.02 && ratio >= 1.7, os.str()};
}

Outcome c7_inequalities() {
  const auto& s = solved_baseline(64);
  const auto& pb = s.pb;
  const auto& u = s.sol.u;
  const auto& m = s.sol.m;
  bool ok = true;
  std::ostringstream os;
  auto note = [&](const std::string& name, bool real_pass, bool control_fails) {
    ok = ok && real_pass && control_fails;
    os << name << " " << (real_pass ? "pass" : "FAIL") << "/control " << (control_fails ? "fails" : "PASSES") << "; ";
  };

  // Constants of A3 come from the audit of this model.
  double a3_c = 0.0;
  for (const auto& cert : audit_assumptions(pb.model, AuditSampleSpec{}, pb.coupling.alpha))
    if (cert.assumption == "A3") a3_c = cert.constants.at("c");

  Trajectory u_low = u;
  u_low[0][u_low[0].size() / 3] -= 1.0;
  note("lower_bound", check_lower_bound(u, pb.model).pass, !check_lower_bound(u_low, pb.model).pass);

  Trajectory u_high = u;
  u_high[0] += Field(pb.grid, 1.0);
  const auto lh = check_lax_hopf(u, m, pb.model, pb.coupling);
  const auto lh_bad = check_lax_hopf(u_high, m, pb.model, pb.coupling);
  note("lax_hopf_uniform", lh[0].pass, !lh_bad[0].pass);
  note("lax_hopf_m0", lh[1].pass, !lh_bad[1].pass);

  Trajectory m_spike = m;
  m_spike[pb.grid.steps() / 2][m_spike[0].size() / 2] += 1.0;
  for (double beta : {1.5, 2.0, 3.0}) {
    const auto e = check_lbeta_evolution(m, u, pb.model, beta, 2.0, 2.0);
    const auto bad = check_lbeta_evolution(m_spike, u, pb.model, beta, 2.0, 2.0);
    note(e.name, e.pass, !bad.pass);
  }
  os << "A3 c = " << fmt("%.4f", a3_c) << " (first-order LHS "
     << fmt("%.4f", check_first_order(u, m, pb.model, pb.coupling, a3_c)[0].lhs) << ", observed)";
  return {ok, os.str()};
}

Outcome c8_hopf_cole() {
  std::vector<double> r;
  std::ostringstream os;
  os << "residual";
  for (int n : {32, 64, 128}) {
    const auto& s = solved_baseline(n);
    const auto e = check_hopf_cole(s.sol.u, s.sol.m, s.pb.model);
    if (e.skipped) return {false, "skipped at n=" + std::to_string(n) + ": " + e.note};
    r.push_back(e.lhs);
    os << " n=" << n << ":" << fmt("%.3e", e.lhs);
  }
  const double q1 = r[0] / r[1], q2 = r[1] / r[2];
  os << "; ratios " << fmt("%.2f", q1) << ", " << fmt("%.2f", q2) << " >= 1.3";
  return {q1 >= 1.3 && q2 >= 1.3, os.str()};
}

Outcome c9_gagliardo_nirenberg() {
  const auto e = gn_frequency_invariance(TorusGrid::spatial(1, 1024), {1, 2, 4, 8}, 2.0, 0.05);
  std::ostringstream os;
  os << "ratios";
  for (double v : e.lhs_series) os << " " << fmt("%.5f", v);
  os << "; spread " << fmt("%.2e", e.slack) << " <= 0.05";
  return {e.pass, os.str()};
}

Outcome c10_continuation() {
  MfgProblem pb = baseline(64, 0.002);
  FixedPointConfig cfg;
  cfg.eps_ladder = {0.1, 0.05, 0.025};
  const auto rungs = eps_continuation(pb, cfg);
  std::ostringstream os;
  bool finite = rungs.size() == 3;
  std::vector<double> deltas;
  for (const auto& r : rungs) {
    os << "eps=" << r.eps << ": " << r.solution.iterations << " it";
    if (!r.error.empty()) {
      finite = false;
      os << " (error: " << r.error << ")";
    }
    if (r.delta_m) {
      deltas.push_back(*r.delta_m);
      finite = finite && std::isfinite(*r.delta_m);
      os << ", delta_m " << fmt("%.3e", *r.delta_m);
    }
    os << "; ";
  }
  // Soft check: logged, never fails the criterion on its own.
  if (deltas.size() == 2) {
    os << "last delta <= first: " << (deltas[1] <= deltas[0] ? "yes" : "NO (logged)");
  }
  return {finite && deltas.size() == 2, os.str()};
}

Outcome c11_manufactured() {
  const auto t0 = std::chrono::steady_clock::now();
  const ManufacturedSpec spec;
  FixedPointConfig cfg;
  cfg.omega = 1.0;
  cfg.tol = 1e-12;
  const double T = 0.5;
  auto run = [&](int n, double dt) {
    const auto g = TorusGrid::with_time_step(1, n, T, dt);
    return solve_mfg(manufactured_problem(spec, g), cfg);
  };
  // The forced problem converges to the discrete solution; errors are measured
  // against a much finer run so each ladder isolates one discretization error.
  auto sup_err = [](const MfgSolution& a, const MfgSolution& ref, std::size_t xs, std::size_t ts) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.u.frame_count(); ++k)
      for (std::size_t i = 0; i < a.u[k].size(); ++i) {
        e = std::max(e, std::abs(a.u[k][i] - ref.u[k * ts][i * xs]));
        e = std::max(e, std::abs(a.m[k][i] - ref.m[k * ts][i * xs]));
      }
    return e;
  };
  std::ostringstream os;
  const double dts = 2.5e-4;
  const auto ref_x = run(256, dts);
  std::vector<double> ex;
  for (int n : {16, 32, 64}) ex.push_back(sup_err(run(n, dts), ref_x, 256 / n, 1));
  const double ox1 = std::log2(ex[0] / ex[1]), ox2 = std::log2(ex[1] / ex[2]);

  const double dt_ref = 6.25e-5;
  const auto ref_t = run(64, dt_ref);
  std::vector<double> et;
  for (double dt : {2e-3, 1e-3, 5e-4}) et.push_back(sup_err(run(64, dt), ref_t, 1, std::lround(dt / dt_ref)));
  const double ot1 = std::log2(et[0] / et[1]), ot2 = std::log2(et[1] / et[2]);

  // Distance of the finest runs to the exact manufactured pair, for the log.
  double exact = 0.0;
  const auto& g = ref_x.u.grid();
  for (std::size_t k = 0; k <= g.steps(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      exact = std::max(exact, std::abs(ref_x.u[k][i] - manufactured_u(spec, g.position(i, 0), g.time_at(k))));
  const double secs = seconds_since(t0);
  os << "space n=16/32/64 errors " << fmt("%.2e", ex[0]) << "/" << fmt("%.2e", ex[1]) << "/" << fmt("%.2e", ex[2])
     << ", orders " << fmt("%.2f", ox1) << ", " << fmt("%.2f", ox2) << " >= 1.8; time dt=2e-3/1e-3/5e-4 orders "
     << fmt("%.2f", ot1) << ", " << fmt("%.2f", ot2) << " >= 0.9; |u-u*| at reference " << fmt("%.1e", exact) << "; "
     << fmt("%.1f", secs) << " s (< 600 s)";
  const bool ok = std::min(ox1, ox2) >= 1.8 && std::min(ot1, ot2) >= 0.9 && secs < 600.0;
  return {ok, os.str()};
}

Outcome c12_audit() {
  const auto g = TorusGrid::spatial(2, 64);
  const HamiltonianModel model(Field::from_function(g, [](auto x) { return 1 + 0.2 * std::cos(2 * kPi * x[0]); }),
                               Field::from_function(g, [](auto x) { return 1 + 0.2 * std::cos(2 * kPi * x[1]); }), 1.5);
  AuditSampleSpec spec;
  spec.radius = 20.0;
  spec.samples = 10000;
  bool ok = true;
  std::ostringstream os;
  for (const auto& c : audit_assumptions(model, spec, 0.5)) {
    ok = ok && c.pass;
    os << c.assumption << (c.pass ? " ok" : " FAIL");
    if (c.assumption == "derivatives") {
      os << " (dp err " << fmt("%.1e", c.constants.at("max_error_dp")) << " <= 1e-6, dpp err "
         << fmt("%.1e", c.constants.at("max_error_dpp")) << " <= 1e-5)";
    }
    os << "; ";
  }
  return {ok, os.str()};
}

}  // namespace

int main() {
  std::printf("acceptance: 12 criteria\n");
  report(1, "exponent formula", c1_formula);
  report(2, "alpha_max re-derivation", c2_alpha_max);
  report(3, "oracle equivalence", c3_oracles);
  report(4, "conservation and positivity", c4_conservation);
  report(5, "fixed point and damping", c5_fixed_point);
  report(6, "integral identity", c6_integral_identity);
  report(7, "inequality suite with negative controls", c7_inequalities);
  report(8, "Hopf-Cole residual refinement", c8_hopf_cole);
  report(9, "Gagliardo-Nirenberg frequency invariance", c9_gagliardo_nirenberg);
  report(10, "eps continuation", c10_continuation);
  report(11, "manufactured-solution orders", c11_manufactured);
  report(12, "Hamiltonian audit", c12_audit);
  std::printf("acceptance: %d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
