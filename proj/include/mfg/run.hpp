#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/config.hpp"

namespace mfg {

struct RunResult {
  bool converged = true;
  std::size_t iterations = 0;
  // Failed estimate entries or audit certificates.
  std::size_t checks_failed = 0;
  // Files written, relative to the output directory.
  std::vector<std::string> files;
};

// Each run writes its artifacts into cfg.output.directory (created if needed):
// summary.json is deterministic, run.log carries timings and notes.
RunResult run_solve(const RunConfig& cfg);
RunResult run_continuation(const RunConfig& cfg);
RunResult run_audit(const RunConfig& cfg);
RunResult run_monitor(const RunConfig& cfg, const std::string& u_path, const std::string& m_path);

struct ExponentsRequest {
  std::vector<double> gammas;
  std::vector<int> dims;
  // When set, also test feasibility of this alpha and emit the witness.
  std::optional<double> alpha;
  std::size_t budget = 48;
  std::string directory = "out";
};
// exponents.csv (gamma, d, alpha_formula, alpha_max, upper) and witnesses.json.
RunResult run_exponents(const ExponentsRequest& req);

// MFG_THREADS if set and positive, otherwise the hardware concurrency.
unsigned thread_cap();

}  // namespace mfg
