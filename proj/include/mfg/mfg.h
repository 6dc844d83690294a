#ifndef MFG_MFG_H
#define MFG_MFG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define MFG_API __attribute__((visibility("default")))
#else
#define MFG_API
#endif

typedef enum mfg_status {
  MFG_OK = 0,
  MFG_ERR_INVALID_ARGUMENT = 1,
  MFG_ERR_DOMAIN = 2,
  MFG_ERR_CONFIG = 3,
  MFG_ERR_NUMERICAL = 4,
  MFG_ERR_FORMAT = 5,
  MFG_ERR_IO = 6,
  MFG_ERR_INTERNAL = 7
} mfg_status;

typedef struct mfg_config mfg_config;
typedef struct mfg_trajectory mfg_trajectory;

typedef struct mfg_run_result {
  int converged;
  size_t iterations;
  size_t checks_failed;
} mfg_run_result;

MFG_API const char* mfg_version(void);

/* Message of the last failed call on this thread; never NULL. */
MFG_API const char* mfg_last_error(void);

MFG_API mfg_status mfg_config_load(const char* path, mfg_config** out);
MFG_API mfg_status mfg_config_parse(const char* json_text, mfg_config** out);
MFG_API void mfg_config_free(mfg_config* cfg);
MFG_API mfg_status mfg_config_set_output_dir(mfg_config* cfg, const char* dir);
/* Normalized JSON echo; owned by the handle, valid until the next call on it. */
MFG_API const char* mfg_config_json(mfg_config* cfg);

MFG_API mfg_status mfg_run_solve(const mfg_config* cfg, mfg_run_result* out);
MFG_API mfg_status mfg_run_continuation(const mfg_config* cfg, mfg_run_result* out);
MFG_API mfg_status mfg_run_audit(const mfg_config* cfg, mfg_run_result* out);
MFG_API mfg_status mfg_run_monitor(const mfg_config* cfg, const char* u_path, const char* m_path,
                                   mfg_run_result* out);
/* alpha may be NULL. budget 0 selects the default. */
MFG_API mfg_status mfg_run_exponents(const double* gammas, size_t n_gammas, const int* dims, size_t n_dims,
                                     const double* alpha, size_t budget, const char* out_dir,
                                     mfg_run_result* out);

MFG_API mfg_status mfg_alpha_formula(double gamma, int d, double* out);
MFG_API mfg_status mfg_alpha_max(double gamma, int d, size_t budget, double* out);

MFG_API mfg_status mfg_trajectory_read(const char* path, mfg_trajectory** out);
MFG_API mfg_status mfg_trajectory_write(const mfg_trajectory* traj, const char* path);
/* steps+1 frames of n^d values each, copied from data. */
MFG_API mfg_status mfg_trajectory_create(int d, int n, double T, size_t steps, const double* data,
                                         mfg_trajectory** out);
MFG_API void mfg_trajectory_free(mfg_trajectory* traj);
MFG_API int mfg_trajectory_dim(const mfg_trajectory* traj);
MFG_API int mfg_trajectory_points(const mfg_trajectory* traj);
MFG_API size_t mfg_trajectory_steps(const mfg_trajectory* traj);
MFG_API double mfg_trajectory_horizon(const mfg_trajectory* traj);
/* Frame k (n^d values); NULL when k is out of range. */
MFG_API const double* mfg_trajectory_frame(const mfg_trajectory* traj, size_t k);

#ifdef __cplusplus
}
#endif

#endif
