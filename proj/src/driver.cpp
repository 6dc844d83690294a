#include "mfg/driver.hpp"

#include <cmath>
#include <sstream>

#include "mfg/calculus.hpp"

namespace mfg {

void validate(const FixedPointConfig& cfg) {
  if (!(cfg.omega > 0.0 && cfg.omega <= 1.0)) throw InvalidArgument("damping omega must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("fixed-point tolerance must be > 0");
  if (cfg.max_iters == 0) throw InvalidArgument("max_iters must be >= 1");
  if (!(cfg.cfl_factor > 0.0 && cfg.cfl_factor <= 1.0)) throw InvalidArgument("CFL factor must lie in (0, 1]");
  for (std::size_t i = 0; i < cfg.eps_ladder.size(); ++i) {
    if (!(cfg.eps_ladder[i] >= 0.0)) throw InvalidArgument("eps ladder entries must be >= 0");
    if (i > 0 && !(cfg.eps_ladder[i] < cfg.eps_ladder[i - 1])) {
      throw InvalidArgument("eps ladder must be strictly decreasing");
    }
  }
}

namespace {

Trajectory sweep_hjb(const MfgProblem& pb, const Mollifier& moll, const Trajectory& m, double cfl) {
  const auto& g = pb.grid;
  Trajectory u(g);
  u[g.steps()] = pb.u_T;
  for (std::size_t k = g.steps(); k-- > 0;) {
    Field f = g_eps(moll, pb.coupling, m[k]);
    if (pb.hjb_source) f += (*pb.hjb_source)[k];
    u[k] = hjb_step_backward(u[k + 1], f, pb.model, g.time_step(), cfl);
  }
  return u;
}

}  // namespace

MfgSolution solve_mfg(const MfgProblem& pb, const FixedPointConfig& cfg, const Trajectory* warm_start_m) {
  validate(cfg);
  const auto& g = pb.grid;
  if (!g.same_space(pb.model.grid()) || !g.same_space(pb.u_T.grid()) || !g.same_space(pb.m0.grid())) {
    throw InvalidArgument("solve_mfg: problem fields live on different grids");
  }
  const Mollifier moll(g, pb.coupling.eps);

  MfgSolution sol;
  if (warm_start_m != nullptr) {
    if (!(warm_start_m->grid() == g)) throw InvalidArgument("solve_mfg: warm start grid differs");
    sol.m = *warm_start_m;
    sol.m[0] = pb.m0;
  } else {
    sol.m = Trajectory::constant(g, pb.m0);
  }

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const Trajectory u = sweep_hjb(pb, moll, sol.m, cfg.cfl_factor);
    // Forward sweep, blending each new level into m as soon as it is known.
    Field m_new = pb.m0;
    double residual = 0.0;
    for (std::size_t k = 0; k < g.steps(); ++k) {
      const VectorField b = pb.model.drift_field(gradient(u[k]));
      const Field* src = pb.fp_source ? &(*pb.fp_source)[k] : nullptr;
      m_new = fp_step_forward(m_new, b, g.time_step(), cfg.cfl_factor, src);
      Field& slot = sol.m[k + 1];
      for (std::size_t i = 0; i < slot.size(); ++i) {
        const double blended = (1.0 - cfg.omega) * slot[i] + cfg.omega * m_new[i];
        residual = std::max(residual, std::abs(blended - slot[i]));
        slot[i] = blended;
      }
    }
    if (!std::isfinite(residual)) {
      std::ostringstream os;
      os << "solve_mfg: non-finite density at iteration " << it + 1;
      throw NumericalError(os.str());
    }
    sol.residual_history.push_back(residual);
    sol.iterations = it + 1;
    if (residual <= cfg.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.u = sweep_hjb(pb, moll, sol.m, cfg.cfl_factor);
  if (!sol.u.all_finite()) throw NumericalError("solve_mfg: non-finite value function");
  return sol;
}

std::vector<ContinuationRung> eps_continuation(const MfgProblem& problem, const FixedPointConfig& cfg) {
  validate(cfg);
  if (cfg.eps_ladder.empty()) throw InvalidArgument("eps_continuation needs a nonempty ladder");
  std::vector<ContinuationRung> rungs;
  MfgProblem pb = problem;
  for (double eps : cfg.eps_ladder) {
    ContinuationRung rung;
    rung.eps = eps;
    pb.coupling.eps = eps;
    try {
      const Trajectory* warm = rungs.empty() ? nullptr : &rungs.back().solution.m;
      rung.solution = solve_mfg(pb, cfg, warm);
      if (!rungs.empty()) {
        rung.delta_u = sup_distance(rung.solution.u, rungs.back().solution.u);
        rung.delta_m = sup_distance(rung.solution.m, rungs.back().solution.m);
      }
      if (cfg.compare_cold_start) rung.cold_start_iterations = solve_mfg(pb, cfg).iterations;
    } catch (const Error& e) {
      rung.error = e.what();
      rungs.push_back(std::move(rung));
      break;
    }
    rungs.push_back(std::move(rung));
  }
  return rungs;
}

}  // namespace mfg
