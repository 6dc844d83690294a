#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mfg/calculus.hpp"
#include "mfg/coupling.hpp"
#include "mfg/error.hpp"

using namespace mfg;

namespace {

Field random_field(const TorusGrid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Field f(g);
  for (auto& v : f.values()) v = U(rng);
  return f;
}

// Index of -x on the grid.
std::size_t reflect(const TorusGrid& g, std::size_t i) {
  std::size_t out = 0;
  for (int a = 0; a < g.dim(); ++a) {
    const int c = g.coordinate(i, a);
    out += static_cast<std::size_t>((g.points_per_axis() - c) % g.points_per_axis()) * g.stride(a);
  }
  return out;
}

// Direct O(N^2) periodic convolution, the oracle for the FFT path.
Field direct_convolution(const Field& kernel, const Field& f) {
  const auto& g = f.grid();
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      // node i - j
      std::size_t idx = 0;
      for (int a = 0; a < g.dim(); ++a) {
        const int n = g.points_per_axis();
        const int c = ((g.coordinate(i, a) - g.coordinate(j, a)) % n + n) % n;
        idx += static_cast<std::size_t>(c) * g.stride(a);
      }
      s += kernel[idx] * f[j];
    }
    out[i] = s * g.cell_volume();
  }
  return out;
}

}  // namespace

TEST_CASE("mollifier kernel") {
  for (int d = 1; d <= 2; ++d) {
    const auto g = TorusGrid::spatial(d, 32);
    const Mollifier moll(g, 0.1);
    const Field& k = moll.kernel();
    CHECK(k.min() >= 0.0);
    CHECK(k.integral() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(k[i] == k[reflect(g, i)]);
  }
  const auto g = TorusGrid::spatial(1, 16);
  CHECK(Mollifier(g, 0.0).is_identity());
  CHECK_THROWS_AS(Mollifier(g, -0.1), InvalidArgument);
}

TEST_CASE("mollify") {
  std::mt19937_64 rng(17);
  const auto g = TorusGrid::spatial(2, 16);
  const Mollifier moll(g, 0.08);
  CHECK(mollify(moll, Field(g, 2.5)).max() == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(mollify(moll, Field(g, 2.5)).min() == doctest::Approx(2.5).epsilon(1e-13));

  const Field f = random_field(g, rng, -1.0, 3.0);
  const Field same = mollify(Mollifier(g, 0.0), f);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(same[i] == f[i]);

  const Field mf = mollify(moll, f);
  CHECK(std::abs(mf.integral() - f.integral()) <= 1e-12);
  const Field oracle = direct_convolution(moll.kernel(), f);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(mf[i] - oracle[i]) <= 1e-12);

  for (int trial = 0; trial < 10; ++trial) {
    const Field a = random_field(g, rng, -1.0, 1.0), b = random_field(g, rng, -1.0, 1.0);
    CHECK(std::abs(inner(mollify(moll, a), b) - inner(a, mollify(moll, b))) <= 1e-12);
    for (double p : {1.0, 2.0, kInfinity}) CHECK(lp_norm(mollify(moll, a), p) <= lp_norm(a, p) * (1 + 1e-12));
    // Commutes with reflection.
    Field ra(g);
    for (std::size_t i = 0; i < g.size(); ++i) ra[reflect(g, i)] = a[i];
    const Field m1 = mollify(moll, ra), m2 = mollify(moll, a);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(m1[reflect(g, i)] - m2[i]) <= 1e-13);
  }
}

TEST_CASE("g_eps") {
  const auto g = TorusGrid::spatial(2, 16);
  const Mollifier moll(g, 0.1);
  const Field one = g_eps(moll, {0.7, 0.1}, Field(g, 1.0));
  CHECK(one.max() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(one.min() == doctest::Approx(1.0).epsilon(1e-12));
  const Field four = g_eps(Mollifier(g, 0.0), {0.5, 0.0}, Field(g, 4.0));
  CHECK(four.max() == doctest::Approx(2.0));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Field m1 = random_field(g, rng, 0.0, 2.0);
    Field m2 = m1;
    std::uniform_real_distribution<double> U(0.0, 0.5);
    for (auto& v : m2.values()) v += U(rng);
    const Field g1 = g_eps(moll, {1.3, 0.1}, m1), g2 = g_eps(moll, {1.3, 0.1}, m2);
    CHECK(g1.min() >= 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g1[i] <= g2[i] + 1e-14);
  }

  Field tiny(g, 1.0);
  tiny[3] = -5e-13;
  CHECK_NOTHROW(g_eps(Mollifier(g, 0.0), {0.5, 0.0}, tiny));
  tiny[3] = -1e-9;
  CHECK_THROWS_AS(g_eps(Mollifier(g, 0.0), {0.5, 0.0}, tiny), NumericalError);
}

TEST_CASE("antiderivative") {
  CHECK(g_antideriv({0.5, 0.0}, 0.0) == 0.0);
  CHECK(g_antideriv({1.0, 0.0}, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(g_antideriv({1.0, 0.0}, -1.0), DomainError);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const CouplingParams p{U(rng) + 0.01, 0.0};
    const double a = U(rng), b = U(rng);
    CHECK(g_antideriv(p, 0.5 * (a + b)) <= 0.5 * (g_antideriv(p, a) + g_antideriv(p, b)) + 1e-12);
  }
}
