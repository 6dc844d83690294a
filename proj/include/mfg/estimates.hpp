#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfg/coupling.hpp"
#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"

namespace mfg {

// identity: pass iff |lhs - rhs| <= tol.  bound: lhs <= rhs, pass iff
// rhs - lhs >= -tol.  observe: values only, never fails.
enum class EntryKind { Identity, Bound, Observe };

struct EstimateEntry {
  std::string name;
  EntryKind kind = EntryKind::Observe;
  double lhs = 0.0;
  double rhs = 0.0;
  // identity: lhs - rhs (worst step); bound: rhs - lhs (worst step).
  double slack = 0.0;
  double tol = 0.0;
  bool pass = true;
  bool skipped = false;
  std::string note;
  // Per-time-step values when the entry is evaluated step by step.
  std::vector<double> lhs_series;
  std::vector<double> rhs_series;
  // Named auxiliary values (integrals entering a right-hand side, etc).
  std::map<std::string, double> values;

  // "identity-pass", "identity-fail", "bound-pass", "bound-fail", "observe", "skipped"
  std::string verdict() const;
};

struct EstimateReport {
  std::vector<EstimateEntry> entries;

  std::size_t failed() const;
  const EstimateEntry* find(const std::string& name) const;
  void append(std::vector<EstimateEntry> more);
};

struct MonitorConfig {
  // Entry groups to evaluate; empty means all of them.
  // mass, lower_bound, integral_identity, lax_hopf, heat_kernel, first_order,
  // second_order, entropy, lbeta, hopf_cole, duality
  std::vector<std::string> entries;
  std::vector<double> betas{1.5, 2.0, 3.0};
  // (p, q) conjugate pairs for the L^beta evolution bound; p > d/2.
  std::vector<std::pair<double, double>> pq{{2.0, 2.0}};
  double c1 = 10.0;  // lower bound and Lax-Hopf tolerances: c1 (h^2 + dt)
  double c2 = 1.0;   // integral identity: c2 (dt + h^2) max(|lhs|, |rhs|)
  double c3 = 10.0;  // entropy identity: c3 (dt + h^2) scale
  // c of A3 (L_hat >= c H - C); taken from the audit when absent.
  std::optional<double> a3_c;
};

struct MonitorInputs {
  const HamiltonianModel& model;
  CouplingParams coupling;
  const Trajectory& u;
  const Trajectory& m;
};

std::vector<EstimateEntry> check_mass_positivity(const Trajectory& m);
EstimateEntry check_lower_bound(const Trajectory& u, const HamiltonianModel& model, double c1 = 10.0);
// m_rhs replaces m inside the coupling integral when given (negative control).
EstimateEntry check_integral_identity(const Trajectory& u, const Trajectory& m, const HamiltonianModel& model,
                                      const CouplingParams& coupling, double c2 = 1.0,
                                      const Trajectory* m_rhs = nullptr);
std::vector<EstimateEntry> check_lax_hopf(const Trajectory& u, const Trajectory& m, const HamiltonianModel& model,
                                          const CouplingParams& coupling, double c1 = 10.0);
// Pointwise heat-kernel bound at the node of max u(., t_k) for the given levels.
std::vector<EstimateEntry> check_heat_kernel_bound(const Trajectory& u, const Trajectory& m,
                                                   const HamiltonianModel& model, const CouplingParams& coupling,
                                                   const std::vector<std::size_t>& levels, double c1 = 10.0);
std::vector<EstimateEntry> check_first_order(const Trajectory& u, const Trajectory& m,
                                             const HamiltonianModel& model, const CouplingParams& coupling,
                                             double c);
std::vector<EstimateEntry> check_second_order(const Trajectory& u, const Trajectory& m,
                                              const HamiltonianModel& model, const CouplingParams& coupling);
// Entropy identity with phi(z) = z^beta, evaluated per step.
EstimateEntry check_entropy_identity(const Trajectory& m, const Trajectory& u, const HamiltonianModel& model,
                                     double beta, double c3 = 10.0);
// d/dt int m^beta <= C || |D_pH|^2 ||_p || m^beta ||_q - c int |D m^(beta/2)|^2
// with C = beta(beta-1)/2 and c = 2(beta-1)/beta.
EstimateEntry check_lbeta_evolution(const Trajectory& m, const Trajectory& u, const HamiltonianModel& model,
                                    double beta, double p, double q, double c3 = 10.0);
EstimateEntry check_hopf_cole(const Trajectory& u, const Trajectory& m, const HamiltonianModel& model);
// -d/dt int u m + int (H - D_pH . Du) m = int m g_eps(m), per step.
EstimateEntry check_duality(const Trajectory& u, const Trajectory& m, const HamiltonianModel& model,
                            const CouplingParams& coupling);

// ||Du||_{2p} / (||D^2 u||_p^{1/2} ||u||_inf^{1/2}); nullopt for constant u.
std::optional<double> gagliardo_nirenberg_ratio(const Field& u, double p);
EstimateEntry check_gagliardo_nirenberg(const std::vector<Field>& samples, double p);
// Ratios for u = sin(2 pi k x_0), k in ks; identity within rel_tol across k.
EstimateEntry gn_frequency_invariance(const TorusGrid& grid, const std::vector<int>& ks, double p,
                                      double rel_tol = 0.05);

// Observe entries across one refinement: pass iff fine/coarse lies in [lo, hi].
EstimateEntry refinement_stability(const std::string& name, double coarse, double fine, double lo = 0.5,
                                   double hi = 1.5);
// pass iff fine <= factor * coarse.
EstimateEntry refinement_decrease(const std::string& name, double coarse, double fine, double factor = 0.75);

EstimateReport run_monitor(const MonitorInputs& in, const MonitorConfig& cfg);

}  // namespace mfg
