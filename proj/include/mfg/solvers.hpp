#pragma once

#include <functional>
#include <optional>

#include "mfg/error.hpp"
#include "mfg/grid.hpp"
#include "mfg/hamiltonian.hpp"

namespace mfg {

// Test hook: Zero drops H(x, Du) from the HJB step, leaving heat flow plus source.
enum class HamiltonianTerm { Model, Zero };

// dt * max|b| / h exceeded the configured factor.
class CflError : public NumericalError {
 public:
  CflError(const std::string& what, double max_drift) : NumericalError(what), max_drift_(max_drift) {}
  double max_drift() const noexcept { return max_drift_; }

 private:
  double max_drift_;
};

inline constexpr double kDefaultCfl = 0.15;

struct HjbConfig {
  // f_k for k = 0..steps-1 is used in the step from t_{k+1} to t_k.
  Trajectory source;
  Field u_T;
  double cfl_factor = kDefaultCfl;
  HamiltonianTerm hamiltonian = HamiltonianTerm::Model;
};

struct FpConfig {
  Field m0;
  double cfl_factor = kDefaultCfl;
  // Optional extra source S_k added in the step from t_k to t_{k+1}.
  std::optional<Trajectory> source;
};

// u_k = exp(dt laplacian) (u_{k+1} + dt (f - H(x, D u_{k+1}))).
// Diffusion is integrated exactly in Fourier space, H and f explicitly.
Field hjb_step_backward(const Field& u_next, const Field& f, const HamiltonianModel& model, double dt,
                        double cfl_factor = kDefaultCfl, HamiltonianTerm term = HamiltonianTerm::Model);

// m_{k+1} = (I - dt laplacian)^{-1} (m_k + dt div(b m_k) [+ dt S]).
// The advective flux is conservative with face velocity -b averaged onto the
// face and an upwind, minmod-limited linear reconstruction of m.
Field fp_step_forward(const Field& m_prev, const VectorField& drift, double dt,
                      double cfl_factor = kDefaultCfl, const Field* source = nullptr);

// The explicit advective increment div(b m) of fp_step_forward, for monitors.
Field fp_advection(const Field& m, const VectorField& drift);

Trajectory solve_hjb(const HjbConfig& cfg, const HamiltonianModel& model);

// drift(k) returns b at time level k, k = 0..steps-1.
Trajectory solve_fp(const FpConfig& cfg, const TorusGrid& grid,
                    const std::function<VectorField(std::size_t)>& drift);
// Drift D_pH(x, D u_k) taken from a value-function trajectory.
Trajectory solve_fp(const FpConfig& cfg, const Trajectory& u, const HamiltonianModel& model);

}  // namespace mfg
