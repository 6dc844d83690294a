#include "mfg/mfg.h"

#include <new>
#include <string>

#include "mfg/error.hpp"
#include "mfg/exponents.hpp"
#include "mfg/io.hpp"
#include "mfg/run.hpp"

struct mfg_config {
  mfg::RunConfig cfg;
  std::string json;
};

struct mfg_trajectory {
  mfg::Trajectory traj;
};

namespace {

thread_local std::string g_last_error;

mfg_status status_of(mfg::ErrorKind k) {
  switch (k) {
    case mfg::ErrorKind::InvalidArgument:
      return MFG_ERR_INVALID_ARGUMENT;
    case mfg::ErrorKind::Domain:
      return MFG_ERR_DOMAIN;
    case mfg::ErrorKind::Config:
      return MFG_ERR_CONFIG;
    case mfg::ErrorKind::Numerical:
      return MFG_ERR_NUMERICAL;
    case mfg::ErrorKind::Format:
      return MFG_ERR_FORMAT;
    case mfg::ErrorKind::Io:
      return MFG_ERR_IO;
  }
  return MFG_ERR_INTERNAL;
}

template <class F>
mfg_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return MFG_OK;
  } catch (const mfg::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return MFG_ERR_INTERNAL;
}

void require(bool cond, const char* what) {
  if (!cond) throw mfg::InvalidArgument(what);
}

void fill(mfg_run_result* out, const mfg::RunResult& r) {
  if (out == nullptr) return;
  out->converged = r.converged ? 1 : 0;
  out->iterations = r.iterations;
  out->checks_failed = r.checks_failed;
}

}  // namespace

extern "C" {

const char* mfg_version(void) { return "1.0.0"; }

const char* mfg_last_error(void) { return g_last_error.c_str(); }

mfg_status mfg_config_load(const char* path, mfg_config** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "mfg_config_load: null argument");
    *out = new mfg_config{mfg::load_config(path), {}};
  });
}

mfg_status mfg_config_parse(const char* json_text, mfg_config** out) {
  return guard([&] {
    require(json_text != nullptr && out != nullptr, "mfg_config_parse: null argument");
    *out = new mfg_config{mfg::parse_config(json_text), {}};
  });
}

void mfg_config_free(mfg_config* cfg) { delete cfg; }

mfg_status mfg_config_set_output_dir(mfg_config* cfg, const char* dir) {
  return guard([&] {
    require(cfg != nullptr && dir != nullptr, "mfg_config_set_output_dir: null argument");
    cfg->cfg.output.directory = dir;
  });
}

const char* mfg_config_json(mfg_config* cfg) {
  if (cfg == nullptr) return "";
  cfg->json = mfg::config_to_json(cfg->cfg);
  return cfg->json.c_str();
}

mfg_status mfg_run_solve(const mfg_config* cfg, mfg_run_result* out) {
  return guard([&] {
    require(cfg != nullptr, "mfg_run_solve: null config");
    fill(out, mfg::run_solve(cfg->cfg));
  });
}

mfg_status mfg_run_continuation(const mfg_config* cfg, mfg_run_result* out) {
  return guard([&] {
    require(cfg != nullptr, "mfg_run_continuation: null config");
    fill(out, mfg::run_continuation(cfg->cfg));
  });
}

mfg_status mfg_run_audit(const mfg_config* cfg, mfg_run_result* out) {
  return guard([&] {
    require(cfg != nullptr, "mfg_run_audit: null config");
    fill(out, mfg::run_audit(cfg->cfg));
  });
}

mfg_status mfg_run_monitor(const mfg_config* cfg, const char* u_path, const char* m_path, mfg_run_result* out) {
  return guard([&] {
    require(cfg != nullptr && u_path != nullptr && m_path != nullptr, "mfg_run_monitor: null argument");
    fill(out, mfg::run_monitor(cfg->cfg, u_path, m_path));
  });
}

mfg_status mfg_run_exponents(const double* gammas, size_t n_gammas, const int* dims, size_t n_dims,
                             const double* alpha, size_t budget, const char* out_dir, mfg_run_result* out) {
  return guard([&] {
    require(gammas != nullptr && dims != nullptr && out_dir != nullptr, "mfg_run_exponents: null argument");
    mfg::ExponentsRequest req;
    req.gammas.assign(gammas, gammas + n_gammas);
    req.dims.assign(dims, dims + n_dims);
    if (alpha != nullptr) req.alpha = *alpha;
    if (budget > 0) req.budget = budget;
    req.directory = out_dir;
    fill(out, mfg::run_exponents(req));
  });
}

mfg_status mfg_alpha_formula(double gamma, int d, double* out) {
  return guard([&] {
    require(out != nullptr, "mfg_alpha_formula: null output");
    *out = mfg::alpha_formula(gamma, d);
  });
}

mfg_status mfg_alpha_max(double gamma, int d, size_t budget, double* out) {
  return guard([&] {
    require(out != nullptr, "mfg_alpha_max: null output");
    *out = mfg::alpha_max(gamma, d, budget > 0 ? budget : mfg::kDefaultBudget).alpha_max;
  });
}

mfg_status mfg_trajectory_read(const char* path, mfg_trajectory** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "mfg_trajectory_read: null argument");
    *out = new mfg_trajectory{mfg::read_trajectory(path)};
  });
}

mfg_status mfg_trajectory_write(const mfg_trajectory* traj, const char* path) {
  return guard([&] {
    require(traj != nullptr && path != nullptr, "mfg_trajectory_write: null argument");
    mfg::write_trajectory(path, traj->traj);
  });
}

mfg_status mfg_trajectory_create(int d, int n, double T, size_t steps, const double* data, mfg_trajectory** out) {
  return guard([&] {
    require(data != nullptr && out != nullptr, "mfg_trajectory_create: null argument");
    const mfg::TorusGrid g = mfg::TorusGrid::with_steps(d, n, T, steps);
    std::vector<mfg::Field> frames;
    for (size_t k = 0; k <= steps; ++k) {
      const double* p = data + k * g.size();
      frames.emplace_back(g, std::vector<double>(p, p + g.size()));
    }
    *out = new mfg_trajectory{mfg::Trajectory(g, std::move(frames))};
  });
}

void mfg_trajectory_free(mfg_trajectory* traj) { delete traj; }

int mfg_trajectory_dim(const mfg_trajectory* traj) { return traj ? traj->traj.grid().dim() : 0; }

int mfg_trajectory_points(const mfg_trajectory* traj) { return traj ? traj->traj.grid().points_per_axis() : 0; }

size_t mfg_trajectory_steps(const mfg_trajectory* traj) { return traj ? traj->traj.grid().steps() : 0; }

double mfg_trajectory_horizon(const mfg_trajectory* traj) { return traj ? traj->traj.grid().horizon() : 0.0; }

const double* mfg_trajectory_frame(const mfg_trajectory* traj, size_t k) {
  if (traj == nullptr || k >= traj->traj.frame_count()) return nullptr;
  return traj->traj[k].values().data();
}

}  // extern "C"
