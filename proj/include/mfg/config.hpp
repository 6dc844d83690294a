#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/driver.hpp"
#include "mfg/estimates.hpp"
#include "mfg/hamiltonian.hpp"
#include "mfg/manufactured.hpp"

namespace mfg {

// base + sum_j amplitude_j cos(2 pi mode_j . x + phase_j), or an inline table
// of n^d values in row-major order.
struct CosineTerm {
  double amplitude = 0.0;
  std::vector<int> mode;
  double phase = 0.0;
};

struct FieldSpec {
  enum class Kind { Constant, Cosine, Table };
  Kind kind = Kind::Constant;
  double base = 0.0;
  std::vector<CosineTerm> terms;
  std::vector<double> table;

  static FieldSpec constant(double v) {
    FieldSpec s;
    s.base = v;
    return s;
  }
  Field sample(const TorusGrid& grid) const;
};

struct OutputConfig {
  std::string directory = "out";
  bool json = true;
  bool csv = true;
  bool plots = false;
};

struct RunConfig {
  int d = 2;
  int n = 64;
  double T = 0.5;
  // Exactly one of these sets the time step; dt = cfl_target * h otherwise.
  std::optional<double> dt;
  std::optional<double> cfl_target;

  double gamma = 1.5;
  FieldSpec a = FieldSpec::constant(1.0);
  FieldSpec V = FieldSpec::constant(1.0);

  CouplingParams coupling{0.5, 0.05};
  std::vector<double> eps_ladder;

  FieldSpec u_T = FieldSpec::constant(0.0);
  FieldSpec m0 = FieldSpec::constant(1.0);
  double kappa0 = 1e-6;

  FixedPointConfig solver;
  MonitorConfig monitor;
  AuditSampleSpec audit;
  // Replaces model, coupling and data by the forced problem when present.
  std::optional<ManufacturedSpec> manufactured;

  OutputConfig output;

  // Human-readable notes produced while loading (m0 renormalization etc).
  std::vector<std::string> log;

  TorusGrid grid() const;
};

// Throws ConfigError listing every problem found; a JSON syntax error is a
// single issue carrying its line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Normalized JSON echo of a loaded config (deterministic key order).
std::string config_to_json(const RunConfig& cfg);

// The model, data and coupling of the run on cfg.grid(). m0 is renormalized
// to unit mass.
MfgProblem build_problem(const RunConfig& cfg);

}  // namespace mfg
