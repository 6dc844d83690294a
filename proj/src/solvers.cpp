#include "mfg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfg/calculus.hpp"
#include "mfg/spectral.hpp"

namespace mfg {

namespace {

void check_cfl(const char* who, double max_drift, double dt, double h, double cfl_factor) {
  if (!(cfl_factor > 0.0 && cfl_factor <= 1.0)) throw InvalidArgument("CFL factor must lie in (0, 1]");
  if (!std::isfinite(max_drift)) throw NumericalError(std::string(who) + ": drift is not finite");
  const double number = dt * max_drift / h;
  if (number > cfl_factor) {
    std::ostringstream os;
    os << who << ": CFL violated, dt*max|D_pH|/h = " << number << " > " << cfl_factor
       << " (max drift " << max_drift << ", dt " << dt << ", h " << h << ")";
    throw CflError(os.str(), max_drift);
  }
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return a > 0.0 ? std::min(a, b) : std::max(a, b);
}

}  // namespace

Field hjb_step_backward(const Field& u_next, const Field& f, const HamiltonianModel& model, double dt,
                        double cfl_factor, HamiltonianTerm term) {
  const auto& g = u_next.grid();
  if (!g.same_space(f.grid()) || !g.same_space(model.grid())) {
    throw InvalidArgument("hjb_step_backward: fields on different grids");
  }
  Field rhs = u_next;
  rhs.axpy(dt, f);
  if (term == HamiltonianTerm::Model) {
    const VectorField du = gradient(u_next);
    check_cfl("hjb_step_backward", model.drift_field(du).max_norm(), dt, g.spacing(), cfl_factor);
    rhs.axpy(-dt, model.hamiltonian_field(du));
  }
  return heat_evolve(rhs, dt);
}

Field fp_advection(const Field& m, const VectorField& drift) {
  const auto& g = m.grid();
  const double inv_h = 1.0 / g.spacing();
  Field out(g);
  std::vector<double> flux(g.size());
  for (int a = 0; a < g.dim(); ++a) {
    const Field& b = drift[a];
    // flux[i] lives on the face between i and its +1 neighbour along a.
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t ip = g.neighbor(i, a, 1);
      const double v = -0.5 * (b[i] + b[ip]);
      double face;
      if (v >= 0.0) {
        const std::size_t im = g.neighbor(i, a, -1);
        face = m[i] + 0.5 * minmod(m[i] - m[im], m[ip] - m[i]);
      } else {
        const std::size_t ipp = g.neighbor(ip, a, 1);
        face = m[ip] - 0.5 * minmod(m[ip] - m[i], m[ipp] - m[ip]);
      }
      flux[i] = v * face;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      out[i] -= (flux[i] - flux[g.neighbor(i, a, -1)]) * inv_h;
    }
  }
  return out;
}

Field fp_step_forward(const Field& m_prev, const VectorField& drift, double dt, double cfl_factor,
                      const Field* source) {
  const auto& g = m_prev.grid();
  if (!g.same_space(drift.grid()) || drift.dim() != g.dim()) {
    throw InvalidArgument("fp_step_forward: drift does not match the density grid");
  }
  check_cfl("fp_step_forward", drift.max_norm(), dt, g.spacing(), cfl_factor);
  Field next = m_prev;
  next.axpy(dt, fp_advection(m_prev, drift));
  double expected = m_prev.integral();
  if (source != nullptr) {
    next.axpy(dt, *source);
    expected += dt * source->integral();
  }
  next = implicit_diffusion(next, dt);
  const double drift_mass = std::abs(next.integral() - expected);
  if (!(drift_mass <= 1e-10 * std::max(1.0, std::abs(expected)))) {
    std::ostringstream os;
    os << "fp_step_forward: mass drift " << drift_mass << " exceeds 1e-10";
    throw NumericalError(os.str());
  }
  return next;
}

Trajectory solve_hjb(const HjbConfig& cfg, const HamiltonianModel& model) {
  const auto& g = cfg.source.grid();
  if (!g.same_space(cfg.u_T.grid())) throw InvalidArgument("solve_hjb: u_T and source grids differ");
  if (cfg.source.frame_count() != g.steps() + 1) throw InvalidArgument("solve_hjb: source has wrong length");
  Trajectory u(g);
  u[g.steps()] = cfg.u_T;
  for (std::size_t k = g.steps(); k-- > 0;) {
    u[k] = hjb_step_backward(u[k + 1], cfg.source[k], model, g.time_step(), cfg.cfl_factor, cfg.hamiltonian);
    if (!u[k].all_finite()) throw NumericalError("solve_hjb: non-finite value at step " + std::to_string(k));
  }
  return u;
}

Trajectory solve_fp(const FpConfig& cfg, const TorusGrid& grid,
                    const std::function<VectorField(std::size_t)>& drift) {
  if (!grid.same_space(cfg.m0.grid())) throw InvalidArgument("solve_fp: m0 grid differs");
  if (cfg.source && cfg.source->frame_count() != grid.steps() + 1) {
    throw InvalidArgument("solve_fp: source has wrong length");
  }
  Trajectory m(grid);
  m[0] = cfg.m0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const Field* src = cfg.source ? &(*cfg.source)[k] : nullptr;
    m[k + 1] = fp_step_forward(m[k], drift(k), grid.time_step(), cfg.cfl_factor, src);
    if (!m[k + 1].all_finite()) throw NumericalError("solve_fp: non-finite value at step " + std::to_string(k + 1));
  }
  return m;
}

Trajectory solve_fp(const FpConfig& cfg, const Trajectory& u, const HamiltonianModel& model) {
  return solve_fp(cfg, u.grid(), [&](std::size_t k) { return model.drift_field(gradient(u[k])); });
}

}  // namespace mfg
