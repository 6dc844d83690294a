#pragma once

#include "mfg/driver.hpp"

namespace mfg {

// u*(x,t) = A cos(2 pi x_0) cos(t),  m*(x,t) = 1 + B cos(2 pi x_0) exp(-t)
// with a = V = 1 and eps = 0; both equations get the forcing that makes
// (u*, m*) an exact solution.
struct ManufacturedSpec {
  double u_amplitude = 0.1;
  double m_amplitude = 0.3;
  double gamma = 1.7;
  double alpha = 0.5;
};

double manufactured_u(const ManufacturedSpec& s, double x0, double t);
double manufactured_m(const ManufacturedSpec& s, double x0, double t);
Trajectory manufactured_u(const ManufacturedSpec& s, const TorusGrid& grid);
Trajectory manufactured_m(const ManufacturedSpec& s, const TorusGrid& grid);

// Problem with u_T = u*(T), m0 = m*(0) and both sources filled in. The HJB
// source at level k is taken at t_k, the Fokker-Planck one at t_{k+1}.
MfgProblem manufactured_problem(const ManufacturedSpec& s, const TorusGrid& grid);

}  // namespace mfg
