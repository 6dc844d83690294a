// Command-line front end; talks to the solver only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "mfg/mfg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(mfg_status s) {
  switch (s) {
    case MFG_OK:
      return kExitOk;
    case MFG_ERR_CONFIG:
    case MFG_ERR_INVALID_ARGUMENT:
    case MFG_ERR_DOMAIN:
      return kExitConfig;
    case MFG_ERR_NUMERICAL:
      return kExitNumerical;
    default:
      return kExitOther;
  }
}

int fail(mfg_status s) {
  std::fprintf(stderr, "mfg: %s\n", mfg_last_error());
  return exit_code(s);
}

void report(const char* what, const mfg_run_result& r) {
  std::printf("%s: iterations=%zu converged=%s checks_failed=%zu\n", what, r.iterations,
              r.converged ? "true" : "false", r.checks_failed);
}

struct ConfigHandle {
  mfg_config* p = nullptr;
  ~ConfigHandle() { mfg_config_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field game solver and a-priori estimate monitor"};
  app.require_subcommand(1);

  std::string config_path, out_dir, u_path, m_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.directory)");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve the coupled system and monitor the estimates");
  add_common(solve);
  CLI::App* cont = app.add_subcommand("continuation", "solve along the eps ladder with warm starts");
  add_common(cont);
  CLI::App* audit = app.add_subcommand("audit", "sample-based certificates for the Hamiltonian assumptions");
  add_common(audit);
  CLI::App* monitor = app.add_subcommand("monitor", "re-evaluate the estimates on stored trajectories");
  add_common(monitor);
  monitor->add_option("--u", u_path, "value function trajectory")->required();
  monitor->add_option("--m", m_path, "density trajectory")->required();

  CLI::App* expo = app.add_subcommand("exponents", "admissible coupling exponents");
  std::vector<double> gammas;
  std::vector<int> dims;
  std::optional<double> alpha;
  std::size_t budget = 0;
  std::string expo_out = "out";
  expo->add_option("--gamma", gammas, "growth exponent(s) of the Hamiltonian")->required();
  expo->add_option("--dim,-d", dims, "space dimension(s), > 2")->required();
  expo->add_option("--alpha", alpha, "also test feasibility at this coupling exponent");
  expo->add_option("--budget", budget, "local searches per feasibility test (default 48)");
  expo->add_option("-o,--out", expo_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  mfg_run_result res{};
  if (expo->parsed()) {
    const double* a = alpha ? &*alpha : nullptr;
    const mfg_status s = mfg_run_exponents(gammas.data(), gammas.size(), dims.data(), dims.size(), a, budget,
                                           expo_out.c_str(), &res);
    if (s != MFG_OK) return fail(s);
    std::printf("exponents: wrote %s/exponents.csv, rows below the formula bound: %zu\n", expo_out.c_str(),
                res.checks_failed);
    return kExitOk;
  }

  ConfigHandle cfg;
  if (mfg_status s = mfg_config_load(config_path.c_str(), &cfg.p); s != MFG_OK) return fail(s);
  if (!out_dir.empty()) {
    if (mfg_status s = mfg_config_set_output_dir(cfg.p, out_dir.c_str()); s != MFG_OK) return fail(s);
  }
  mfg_status s = MFG_OK;
  const char* what = "";
  if (solve->parsed()) {
    s = mfg_run_solve(cfg.p, &res);
    what = "solve";
  } else if (cont->parsed()) {
    s = mfg_run_continuation(cfg.p, &res);
    what = "continuation";
  } else if (audit->parsed()) {
    s = mfg_run_audit(cfg.p, &res);
    what = "audit";
  } else if (monitor->parsed()) {
    s = mfg_run_monitor(cfg.p, u_path.c_str(), m_path.c_str(), &res);
    what = "monitor";
  }
  if (s != MFG_OK) return fail(s);
  // Non-convergence and failed checks are results, not errors.
  report(what, res);
  return kExitOk;
}
