#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mfg/calculus.hpp"
#include "mfg/coupling.hpp"
#include "mfg/solvers.hpp"
#include "mfg/spectral.hpp"

using namespace mfg;

namespace {

constexpr double kPi = std::numbers::pi;

HamiltonianModel unit_model(const TorusGrid& g, double gamma = 1.5) {
  return HamiltonianModel(Field(g, 1.0), Field(g, 1.0), gamma);
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("hjb step: constant reductions") {
  const auto g = TorusGrid::spatial(2, 16);
  const auto model = unit_model(g);
  const double dt = 0.01;
  // H(x, 0) = 2, f = 0: u = c - 2 dt.
  const Field u = hjb_step_backward(Field(g, 0.3), Field(g, 0.0), model, dt);
  CHECK(u.max() == doctest::Approx(0.3 - 2 * dt).epsilon(1e-14));
  CHECK(u.min() == doctest::Approx(0.3 - 2 * dt).epsilon(1e-14));
  // Source balancing H(x, 0).
  const Field s = hjb_step_backward(Field(g, 0.3), Field(g, 2.0), model, dt);
  CHECK(max_abs_diff(s, Field(g, 0.3)) <= 1e-15);
}

TEST_CASE("hjb step with the zero-Hamiltonian hook is heat flow plus dt f") {
  const auto g = TorusGrid::spatial(1, 64);
  const auto model = unit_model(g, 1.7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Field u(g), f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    u[i] = U(rng);
    f[i] = U(rng);
  }
  const double dt = 1e-3;
  const Field step = hjb_step_backward(u, f, model, dt, 1.0, HamiltonianTerm::Zero);
  Field rhs = u;
  rhs.axpy(dt, f);
  CHECK(max_abs_diff(step, heat_evolve(rhs, dt)) <= 1e-12);
}

TEST_CASE("hjb step rejects CFL violations") {
  const auto g = TorusGrid::spatial(1, 32);
  const auto model = unit_model(g, 1.7);
  const Field steep = Field::from_function(g, [](auto x) { return 5.0 * std::sin(2 * kPi * x[0]); });
  try {
    hjb_step_backward(steep, Field(g), model, 0.05);
    FAIL("expected a CFL error");
  } catch (const CflError& e) {
    CHECK(e.max_drift() > 0.0);
  }
}

TEST_CASE("fp step") {
  const auto g = TorusGrid::spatial(1, 64);
  const double dt = 0.01;
  VectorField zero(g, 0.0);
  CHECK(max_abs_diff(fp_step_forward(Field(g, 1.0), zero, dt), Field(g, 1.0)) <= 1e-15);

  const double h = g.spacing();
  const double lam = 2.0 * (1.0 - std::cos(2 * kPi * h)) / (h * h);
  const Field m = Field::from_function(g, [](auto x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  const Field expect = Field::from_function(g, [&](auto x) {
    return 1.0 + 0.5 * std::cos(2 * kPi * x[0]) / (1.0 + dt * lam);
  });
  CHECK(max_abs_diff(fp_step_forward(m, zero, dt), expect) <= 1e-14);

  VectorField c(g, 0.7);
  CHECK(max_abs_diff(fp_step_forward(Field(g, 1.0), c, 1e-3), Field(g, 1.0)) <= 1e-14);
}

TEST_CASE("fp step: mass and positivity on random data") {
  std::mt19937_64 rng(12);
  for (int d = 1; d <= 2; ++d) {
    const auto g = TorusGrid::spatial(d, 32);
    const double dt = 0.1 * g.spacing();
    std::uniform_real_distribution<double> U(0.0, 1.0), B(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      Field m(g);
      for (auto& v : m.values()) v = U(rng) < 0.2 ? 0.0 : U(rng);
      VectorField b(g);
      for (int a = 0; a < d; ++a)
        for (auto& v : b[a].values()) v = B(rng);
      const Field out = fp_step_forward(m, b, dt, 1.0);
      CHECK(std::abs(out.integral() - m.integral()) <= 1e-13);
      CHECK(out.min() >= -1e-12);
    }
  }
}

TEST_CASE("fp advection is the negative transpose of drift transport") {
  // For smooth positive m and drift b the conservative flux differs from
  // div(b m) by the reconstruction error only; the pairing <div(bm), u> =
  // -<b m, Du> is what the duality monitor relies on.
  const auto g = TorusGrid::spatial(1, 256);
  const Field m = Field::from_function(g, [](auto x) { return 1.0 + 0.3 * std::cos(2 * kPi * x[0]); });
  const Field u = Field::from_function(g, [](auto x) { return std::sin(2 * kPi * x[0]); });
  VectorField b(g);
  b[0] = Field::from_function(g, [](auto x) { return 0.5 * std::cos(2 * kPi * x[0]); });
  const double lhs = inner(fp_advection(m, b), u);
  VectorField bm(g);
  bm[0] = hadamard(b[0], m);
  const double rhs = -inner(bm, gradient(u));
  CHECK(std::abs(lhs - rhs) <= 1e-3 * std::abs(rhs));
}

TEST_CASE("solve_hjb: spatially constant solution") {
  const auto g = TorusGrid::with_time_step(1, 16, 0.5, 0.01);
  const auto model = unit_model(g, 1.7);
  HjbConfig cfg;
  cfg.u_T = Field(g, 0.0);
  cfg.source = Trajectory::constant(g, g_eps(Mollifier(g, 0.05), {0.5, 0.05}, Field(g, 1.0)));
  const Trajectory u = solve_hjb(cfg, model);
  for (std::size_t k = 0; k <= g.steps(); ++k) {
    CHECK(u[k].max() == doctest::Approx(-(0.5 - g.time_at(k))).epsilon(1e-12).scale(1.0));
    CHECK(u[k].max() - u[k].min() <= 1e-13);
  }
  CHECK(max_abs_diff(u.back(), cfg.u_T) == 0.0);

  const auto g0 = TorusGrid::with_steps(1, 16, 0.0, 0);
  HjbConfig c0;
  c0.u_T = Field(g0, 0.25);
  c0.source = Trajectory(g0);
  const Trajectory u0 = solve_hjb(c0, unit_model(g0, 1.7));
  CHECK(u0.frame_count() == 1);
  CHECK(u0[0].max() == 0.25);
}

TEST_CASE("solve_fp: zero drift matches heat evolution") {
  const auto g = TorusGrid::with_time_step(1, 128, 0.25, 1e-3);
  FpConfig cfg;
  cfg.m0 = Field::from_function(g, [](auto x) { return 1.0 + 0.8 * std::cos(2 * kPi * x[0]) + 0.3 * std::sin(6 * kPi * x[0]); });
  const Trajectory m = solve_fp(cfg, g, [&](std::size_t) { return VectorField(g, 0.0); });
  const Field exact = heat_evolve(cfg.m0, 0.25);
  const double err = lp_norm(m.back() - exact, 2.0);
  CHECK(err <= 5.0 * g.time_step() * lp_norm(cfg.m0, 2.0));
  for (const auto& f : m) CHECK(std::abs(f.integral() - 1.0) <= 1e-10);

  FpConfig ones;
  ones.m0 = Field(g, 1.0);
  const Trajectory m1 = solve_fp(ones, g, [&](std::size_t) { return VectorField(g, 0.0); });
  for (const auto& f : m1) CHECK(max_abs_diff(f, Field(g, 1.0)) <= 1e-14);
}

TEST_CASE("solve_fp: any drift conserves mass") {
  const auto g = TorusGrid::with_time_step(2, 32, 0.2, 0.002);
  FpConfig cfg;
  cfg.m0 = Field::from_function(g, [](auto x) { return 1.0 + 0.5 * std::sin(2 * kPi * (x[0] + x[1])); });
  const Trajectory m = solve_fp(cfg, g, [&](std::size_t k) {
    VectorField b(g);
    const double t = g.time_at(k);
    b[0] = Field::from_function(g, [&](auto x) { return std::cos(2 * kPi * x[1] + t); });
    b[1] = Field::from_function(g, [&](auto x) { return -0.5 * std::sin(2 * kPi * x[0]); });
    return b;
  });
  double lo = 1.0, hi = 1.0, mn = 1.0;
  for (const auto& f : m) {
    lo = std::min(lo, f.integral());
    hi = std::max(hi, f.integral());
    mn = std::min(mn, f.min());
  }
  CHECK(std::abs(lo - 1.0) <= 1e-10);
  CHECK(std::abs(hi - 1.0) <= 1e-10);
  CHECK(mn >= -1e-12);
}
