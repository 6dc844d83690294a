#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/coupling.hpp"
#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/solvers.hpp"

namespace mfg {

struct MfgProblem {
  TorusGrid grid;
  HamiltonianModel model;
  CouplingParams coupling;
  Field u_T;
  Field m0;
  // Extra sources for manufactured solutions: added to the HJB right-hand
  // side and to the Fokker-Planck equation respectively.
  std::optional<Trajectory> hjb_source;
  std::optional<Trajectory> fp_source;
};

struct FixedPointConfig {
  double omega = 0.5;
  double tol = 1e-8;
  std::size_t max_iters = 200;
  double cfl_factor = kDefaultCfl;
  std::vector<double> eps_ladder;
  // Continuation also re-solves every rung from a cold start and records the
  // iteration count next to the warm-started one.
  bool compare_cold_start = false;
};

struct MfgSolution {
  Trajectory u;
  Trajectory m;
  std::size_t iterations = 0;
  // sup over space-time of |m^{k+1} - m^k|, one entry per iteration.
  std::vector<double> residual_history;
  bool converged = false;
};

// Throws InvalidArgument for an unusable configuration.
void validate(const FixedPointConfig& cfg);

// Damped Picard iteration on m. Non-convergence is reported through
// `converged`; non-finite values throw NumericalError.
MfgSolution solve_mfg(const MfgProblem& problem, const FixedPointConfig& cfg,
                      const Trajectory* warm_start_m = nullptr);

struct ContinuationRung {
  double eps = 0.0;
  MfgSolution solution;
  // sup distance to the previous rung; absent on the first rung.
  std::optional<double> delta_u;
  std::optional<double> delta_m;
  std::optional<std::size_t> cold_start_iterations;
  // Set when the rung failed; later rungs are not attempted.
  std::string error;
};

// Solves along cfg.eps_ladder, warm-starting each rung from the previous m.
std::vector<ContinuationRung> eps_continuation(const MfgProblem& problem, const FixedPointConfig& cfg);

}  // namespace mfg
