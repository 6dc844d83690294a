#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>

namespace mfg {

// kappa = (d + 2q - dq) / (q ((theta-1) d + 2)); DomainError unless kappa > 0.
double kappa(double q, double theta, int d);

// r (theta^n - 1) / (theta - 1)
double r_n(double r, double theta, int n);

struct UpsilonPair {
  double a;  // +infinity at upsilon = 1
  double b;
};
UpsilonPair ab_upsilon(double alpha, double beta0, double theta, int d, double upsilon);

// r = p (d (theta-1) + 2) / (2p - d); DomainError for p <= d/2.
double r_of_p(double p, double theta, int d);

// The exponent tuple; `G` is the spatial integrability exponent paired with F.
struct ExponentWitness {
  double lambda = 0.0;
  double zeta = 0.0;
  double upsilon = 0.0;
  double a_upsilon = 0.0;
  double b_upsilon = 0.0;
  double r = 0.0;
  double r_tilde = 0.0;
  double p = 0.0;
  double p_tilde = 0.0;
  double theta = 0.0;
  double F = 0.0;
  double G = 0.0;
  double beta0 = 0.0;
  double q = 0.0;
};

struct WitnessCheck {
  // Equalities: relative |lhs - rhs|. Inequalities: slack (> 0 means satisfied).
  std::map<std::string, double> equalities;
  std::map<std::string, double> inequalities;
  // Strict inequalities need slack > 1e-9; non-strict ones slack >= -1e-12.
  std::map<std::string, bool> strict;
  bool feasible = false;
};

inline constexpr double kEqualityTol = 1e-9;
inline constexpr double kStrictSlack = 1e-9;

// Evaluates every constraint in its raw form; independent of the search code.
WitnessCheck witness_residuals(const ExponentWitness& w, double gamma, int d, double alpha);

struct WitnessSearch {
  bool feasible = false;
  ExponentWitness witness;  // feasible witness, or the least-violated candidate
  double best_slack = 0.0;  // normalized min-slack of `witness`
  std::size_t attempts_used = 0;
};

inline constexpr std::size_t kDefaultBudget = 48;

// Multi-start search over (upsilon, theta, beta0, zeta); the other entries
// follow from the equality constraints in closed form. `budget` is the number
// of deterministic local searches; attempt i is the same for every budget.
WitnessSearch find_witness(double gamma, int d, double alpha, std::size_t budget = kDefaultBudget);

// Displayed rational lower bound for the admissibility threshold.
double alpha_formula(double gamma, int d);

struct AlphaMax {
  double alpha_max = 0.0;  // largest alpha found feasible
  double upper = 0.0;      // smallest alpha found infeasible
  std::optional<ExponentWitness> witness;  // at alpha_max
  std::string diagnostics;
};

// Bisection on find_witness feasibility to width `resolution`.
AlphaMax alpha_max(double gamma, int d, std::size_t budget = kDefaultBudget, double resolution = 1e-3);

}  // namespace mfg
