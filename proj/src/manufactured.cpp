#include "mfg/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace mfg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Derivs {
  double v, t, x, xx;
};

Derivs u_derivs(const ManufacturedSpec& s, double x0, double t) {
  const double c = std::cos(kTwoPi * x0), sn = std::sin(kTwoPi * x0);
  const double A = s.u_amplitude;
  return {A * c * std::cos(t), -A * c * std::sin(t), -kTwoPi * A * sn * std::cos(t),
          -kTwoPi * kTwoPi * A * c * std::cos(t)};
}

Derivs m_derivs(const ManufacturedSpec& s, double x0, double t) {
  const double c = std::cos(kTwoPi * x0), sn = std::sin(kTwoPi * x0), e = std::exp(-t);
  const double B = s.m_amplitude;
  return {1.0 + B * c * e, -B * c * e, -kTwoPi * B * sn * e, -kTwoPi * kTwoPi * B * c * e};
}

// H(p) = (1 + p^2)^(gamma/2) + 1 and its first two p-derivatives, p scalar.
double ham(double g, double p) { return std::pow(1.0 + p * p, 0.5 * g) + 1.0; }
double ham_p(double g, double p) { return g * std::pow(1.0 + p * p, 0.5 * g - 1.0) * p; }
double ham_pp(double g, double p) {
  return g * std::pow(1.0 + p * p, 0.5 * g - 2.0) * (1.0 + (g - 1.0) * p * p);
}

template <class F>
Trajectory sample(const TorusGrid& grid, F f) {
  Trajectory out(grid);
  for (std::size_t k = 0; k < out.frame_count(); ++k) {
    const double t = grid.time_at(k);
    out[k] = Field::from_function(grid, [&](std::span<const double> x) { return f(x[0], t); });
  }
  return out;
}

}  // namespace

double manufactured_u(const ManufacturedSpec& s, double x0, double t) { return u_derivs(s, x0, t).v; }
double manufactured_m(const ManufacturedSpec& s, double x0, double t) { return m_derivs(s, x0, t).v; }

Trajectory manufactured_u(const ManufacturedSpec& s, const TorusGrid& grid) {
  return sample(grid, [&](double x, double t) { return manufactured_u(s, x, t); });
}

Trajectory manufactured_m(const ManufacturedSpec& s, const TorusGrid& grid) {
  return sample(grid, [&](double x, double t) { return manufactured_m(s, x, t); });
}

MfgProblem manufactured_problem(const ManufacturedSpec& s, const TorusGrid& grid) {
  const double g = s.gamma;
  // -u_t + H(Du) - lap u - m^alpha
  Trajectory hjb = sample(grid, [&](double x, double t) {
    const Derivs u = u_derivs(s, x, t);
    const Derivs m = m_derivs(s, x, t);
    return -u.t + ham(g, u.x) - u.xx - std::pow(m.v, s.alpha);
  });
  // m_t - lap m - (m H_p(Du))_x
  Trajectory fp_at = sample(grid, [&](double x, double t) {
    const Derivs u = u_derivs(s, x, t);
    const Derivs m = m_derivs(s, x, t);
    return m.t - m.xx - (m.x * ham_p(g, u.x) + m.v * ham_pp(g, u.x) * u.xx);
  });
  Trajectory fp(grid);
  for (std::size_t k = 0; k < grid.steps(); ++k) fp[k] = fp_at[k + 1];
  fp[grid.steps()] = fp_at[grid.steps()];

  Field one(grid, 1.0);
  MfgProblem pb{grid, HamiltonianModel(one, one, g), CouplingParams{s.alpha, 0.0},
                Field::from_function(grid, [&](std::span<const double> x) {
                  return manufactured_u(s, x[0], grid.horizon());
                }),
                Field::from_function(grid, [&](std::span<const double> x) { return manufactured_m(s, x[0], 0.0); }),
                std::move(hjb), std::move(fp)};
  return pb;
}

}  // namespace mfg
