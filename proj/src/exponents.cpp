#include "mfg/exponents.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "mfg/error.hpp"

namespace mfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(int d) {
  if (d <= 2) throw DomainError("exponents: dimension must be > 2");
}

void check_gamma(double gamma, int d) {
  check_dim(d);
  const double lo = 1.0 + 1.0 / (d + 1.0);
  if (!(gamma > lo && gamma < 2.0)) {
    std::ostringstream os;
    os << "exponents: gamma = " << gamma << " outside (" << lo << ", 2) for d = " << d;
    throw DomainError(os.str());
  }
}

double rel(double lhs, double rhs) {
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) return kInf;
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

// Closed-form elimination: given (upsilon, theta, beta0, zeta) the equality
// constraints determine everything else.
struct Reduced {
  bool ok = false;
  ExponentWitness w;
  double min_slack = -10.0;
};

Reduced reduce(double gamma, int d, double alpha, const std::array<double, 4>& x) {
  Reduced out;
  const double ups = x[0], th = x[1], b0 = x[2], z = x[3];
  const double dd = d;
  const double a = (alpha + 1.0) / (1.0 - ups);
  const double b = dd * (alpha + 1.0) * b0 * th / ((alpha + 1.0) * dd * ups + th * b0 * (dd - 2.0) * (1.0 - ups));
  const double F = gamma * a / alpha;
  const double G = gamma * b / alpha;
  const double K = dd * (th - 1.0) + 2.0;
  const double c = 1.0 / (2.0 * (gamma - 1.0));
  const double DG = 1.0 / gamma - 1.0 / G;
  if (!(std::abs(DG) > 1e-300)) return out;
  const double rho = (1.0 / gamma - 1.0 / F) / DG;
  const double s = (2.0 * c / K - 1.0 / F + rho / G) / (c * (rho + dd / K));
  if (!(s > 0.0) || !std::isfinite(s)) return out;
  const double p = 1.0 / s;
  if (!(2.0 * p - dd > 0.0)) return out;
  const double r = p * K / (2.0 * p - dd);
  const double lam = (c * s - 1.0 / G) / DG;
  const double pt = 1.0 / ((1.0 - z) / ((1.0 + 1.0 / alpha) * dd / (dd - 2.0)) + z / (b / alpha));
  const double rt = 1.0 / ((1.0 - z) / (1.0 + 1.0 / alpha) + z / (a / alpha));
  const double fac = r * ups * alpha / (b0 * th);
  const std::array<double, 7> sl{
      p / (dd / 2.0) - 1.0,
      lam,
      1.0 - lam,
      b / a * (a - alpha) / alpha / (dd / 2.0) - 1.0,
      pt * (rt - 1.0) / rt / (dd / 2.0) - 1.0,
      1.0 - (1.0 - lam) * (gamma - 1.0) * z * (4.0 - gamma) / (2.0 - gamma) * fac,
      1.0 - (1.0 - lam) * (gamma - 1.0) * (2.0 + gamma * z) / gamma * fac,
  };
  double m = *std::min_element(sl.begin(), sl.end());
  if (!std::isfinite(m)) return out;
  out.ok = true;
  out.min_slack = m;
  out.w = ExponentWitness{lam, z, ups, a, b, r, rt, p, pt, th, F, G, b0, p / (p - 1.0)};
  return out;
}

// Unconstrained coordinates y -> box (upsilon, theta, beta0, zeta).
std::array<double, 4> to_box(const std::array<double, 4>& y, int d) {
  auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  const double b0_hi = static_cast<double>(d) / (d - 2.0) - 1e-6;
  return {sig(y[0]) * (1.0 - 1e-6), 1.0 + 1e-6 + 49.0 * sig(y[1]), 1.0 + (b0_hi - 1.0) * sig(y[2]), sig(y[3])};
}

double halton(std::size_t i, int base) {
  double f = 1.0, r = 0.0;
  for (std::size_t n = i; n > 0; n /= base) {
    f /= base;
    r += f * static_cast<double>(n % base);
  }
  return r;
}

// Nelder-Mead maximizing the normalized min-slack; stops early once a
// point clears `target`.
std::array<double, 4> nelder_mead(const std::function<double(const std::array<double, 4>&)>& obj,
                                  std::array<double, 4> y0, double target, int max_evals) {
  constexpr int n = 4;
  std::array<std::array<double, 4>, n + 1> pts;
  std::array<double, n + 1> val;
  pts[0] = y0;
  for (int i = 0; i < n; ++i) {
    pts[i + 1] = y0;
    pts[i + 1][i] += 1.0;
  }
  int evals = 0;
  auto f = [&](const std::array<double, 4>& y) {
    ++evals;
    return -obj(y);
  };
  for (int i = 0; i <= n; ++i) val[i] = f(pts[i]);
  while (evals < max_evals) {
    std::array<int, n + 1> idx{0, 1, 2, 3, 4};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] < val[b]; });
    auto p2 = pts;
    auto v2 = val;
    for (int i = 0; i <= n; ++i) {
      pts[i] = p2[idx[i]];
      val[i] = v2[idx[i]];
    }
    if (-val[0] > target) break;
    if (val[n] - val[0] < 1e-14) break;
    std::array<double, 4> cen{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cen[j] += pts[i][j] / n;
    auto along = [&](double t) {
      std::array<double, 4> y;
      for (int j = 0; j < n; ++j) y[j] = cen[j] + t * (pts[n][j] - cen[j]);
      return y;
    };
    const auto yr = along(-1.0);
    const double fr = f(yr);
    if (fr < val[0]) {
      const auto ye = along(-2.0);
      const double fe = f(ye);
      if (fe < fr) {
        pts[n] = ye;
        val[n] = fe;
      } else {
        pts[n] = yr;
        val[n] = fr;
      }
    } else if (fr < val[n - 1]) {
      pts[n] = yr;
      val[n] = fr;
    } else {
      const auto yc = fr < val[n] ? along(-0.5) : along(0.5);
      const double fc = f(yc);
      if (fc < std::min(fr, val[n])) {
        pts[n] = yc;
        val[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int j = 0; j < n; ++j) pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
          val[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (val[i] < val[best]) best = i;
  return pts[best];
}

}  // namespace

double kappa(double q, double theta, int d) {
  check_dim(d);
  if (!(q > 0.0) || !(theta > 0.0)) throw DomainError("kappa: q and theta must be > 0");
  const double k = (d + 2.0 * q - d * q) / (q * ((theta - 1.0) * d + 2.0));
  if (!(k > 0.0)) {
    std::ostringstream os;
    os << "kappa: value " << k << " <= 0 (needs q < d/(d-2))";
    throw DomainError(os.str());
  }
  return k;
}

double r_n(double r, double theta, int n) {
  if (!(theta > 1.0)) throw DomainError("r_n: theta must be > 1");
  if (n < 0) throw DomainError("r_n: n must be >= 0");
  return r * (std::pow(theta, n) - 1.0) / (theta - 1.0);
}

UpsilonPair ab_upsilon(double alpha, double beta0, double theta, int d, double upsilon) {
  check_dim(d);
  if (!(alpha > 0.0)) throw DomainError("ab_upsilon: alpha must be > 0");
  if (!(upsilon >= 0.0 && upsilon <= 1.0)) throw DomainError("ab_upsilon: upsilon must lie in [0, 1]");
  if (!(beta0 >= 1.0) || !(theta > 1.0)) throw DomainError("ab_upsilon: needs beta0 >= 1 and theta > 1");
  UpsilonPair out;
  out.a = upsilon == 1.0 ? kInf : (alpha + 1.0) / (1.0 - upsilon);
  out.b = d * (alpha + 1.0) * beta0 * theta /
          ((alpha + 1.0) * d * upsilon + theta * beta0 * (d - 2.0) * (1.0 - upsilon));
  return out;
}

double r_of_p(double p, double theta, int d) {
  check_dim(d);
  if (!(p > d / 2.0)) throw DomainError("r_of_p: p must exceed d/2");
  return p * (d * (theta - 1.0) + 2.0) / (2.0 * p - d);
}

WitnessCheck witness_residuals(const ExponentWitness& w, double gamma, int d, double alpha) {
  WitnessCheck c;
  const double dd = d;
  auto eq = [&](const char* name, double lhs, double rhs) { c.equalities[name] = rel(lhs, rhs); };
  auto ineq = [&](const char* name, double slack, bool strict) {
    c.inequalities[name] = std::isfinite(slack) ? slack : -kInf;
    c.strict[name] = strict;
  };
  const double cst = 1.0 / (2.0 * (gamma - 1.0));
  // Equalities.
  eq("a_upsilon", w.a_upsilon * (1.0 - w.upsilon), alpha + 1.0);
  eq("b_upsilon", 1.0 / w.b_upsilon,
     ((alpha + 1.0) * dd * w.upsilon + w.theta * w.beta0 * (dd - 2.0) * (1.0 - w.upsilon)) /
         (dd * (alpha + 1.0) * w.beta0 * w.theta));
  eq("r_of_p", w.r * (2.0 * w.p - dd), w.p * (dd * (w.theta - 1.0) + 2.0));
  eq("F_scaling", w.F / gamma, w.a_upsilon / alpha);
  eq("G_scaling", w.G / gamma, w.b_upsilon / alpha);
  eq("F_interpolation", cst / w.r, w.lambda / gamma + (1.0 - w.lambda) / w.F);
  eq("G_interpolation", cst / w.p, w.lambda / gamma + (1.0 - w.lambda) / w.G);
  eq("p_tilde", 1.0 / w.p_tilde,
     (1.0 - w.zeta) / ((1.0 + 1.0 / alpha) * dd / (dd - 2.0)) + w.zeta / (w.b_upsilon / alpha));
  eq("r_tilde", 1.0 / w.r_tilde, (1.0 - w.zeta) / (1.0 + 1.0 / alpha) + w.zeta / (w.a_upsilon / alpha));
  eq("q_conjugate", 1.0 / w.p + 1.0 / w.q, 1.0);
  // Inequalities.
  ineq("upsilon_lower", w.upsilon, false);
  ineq("upsilon_upper", 1.0 - w.upsilon, false);
  ineq("theta_gt_1", w.theta - 1.0, true);
  ineq("lambda_lower", w.lambda, false);
  ineq("lambda_upper", 1.0 - w.lambda, false);
  ineq("zeta_lower", w.zeta, false);
  ineq("zeta_upper", 1.0 - w.zeta, false);
  ineq("beta0_lower", w.beta0 - 1.0, false);
  ineq("beta0_upper", dd / (dd - 2.0) - w.beta0, true);
  ineq("p_gt_half_d", w.p - dd / 2.0, true);
  ineq("q_gt_1", w.q - 1.0, true);
  ineq("q_lt_critical", dd / (dd - 2.0) - w.q, true);
  ineq("ab_balance", (w.b_upsilon / w.a_upsilon) * (w.a_upsilon - alpha) / alpha - dd / 2.0, true);
  ineq("tilde_balance", w.p_tilde * (w.r_tilde - 1.0) / w.r_tilde - dd / 2.0, true);
  const double geo = w.r * w.upsilon * alpha * (1.0 - 1.0 / w.theta) / (w.beta0 * (w.theta - 1.0));
  ineq("product_zeta", 1.0 - (1.0 - w.lambda) * (gamma - 1.0) * w.zeta * (4.0 - gamma) / (2.0 - gamma) * geo,
       true);
  ineq("product_gamma", 1.0 - (1.0 - w.lambda) * (gamma - 1.0) * (2.0 + gamma * w.zeta) / gamma * geo, true);

  bool ok = true;
  for (const auto& [k, v] : c.equalities) ok = ok && v <= kEqualityTol;
  for (const auto& [k, v] : c.inequalities) ok = ok && (c.strict[k] ? v > kStrictSlack : v >= -1e-12);
  c.feasible = ok;
  return c;
}

WitnessSearch find_witness(double gamma, int d, double alpha, std::size_t budget) {
  check_gamma(gamma, d);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("find_witness: alpha must be a positive number");
  if (budget == 0) throw InvalidArgument("find_witness: budget must be >= 1");
  auto obj = [&](const std::array<double, 4>& y) { return reduce(gamma, d, alpha, to_box(y, d)).min_slack; };

  WitnessSearch out;
  out.best_slack = -kInf;
  for (std::size_t i = 0; i < budget; ++i) {
    // Halton start in a y-box of half-width 4 (sigmoid range ~[0.02, 0.98]).
    std::array<double, 4> y0{};
    const int bases[4] = {2, 3, 5, 7};
    for (int j = 0; j < 4; ++j) y0[j] = -4.0 + 8.0 * halton(i + 1, bases[j]);
    const auto y = nelder_mead(obj, y0, 1e-6, 1500);
    const Reduced red = reduce(gamma, d, alpha, to_box(y, d));
    out.attempts_used = i + 1;
    if (red.ok && red.min_slack > out.best_slack) {
      out.best_slack = red.min_slack;
      out.witness = red.w;
    }
    if (red.ok && red.min_slack > kStrictSlack && witness_residuals(red.w, gamma, d, alpha).feasible) {
      out.feasible = true;
      out.best_slack = red.min_slack;
      out.witness = red.w;
      break;
    }
  }
  return out;
}

double alpha_formula(double gamma, int d) {
  check_gamma(gamma, d);
  const double g = gamma, dd = d;
  const double num = -4.0 * (g - 4.0) * (g - 4.0) * (g - 1.0) * g * g +
                     2.0 * dd * (-4.0 + (g - 2.0) * g) * (-4.0 + (g - 4.0) * (g - 2.0) * g);
  const double den = (dd - 2.0) * (g - 4.0) * (g - 1.0) * g * (-2.0 * (g - 4.0) * g + dd * (-4.0 + (g - 2.0) * g));
  if (std::abs(den) < 1e-14) throw DomainError("alpha_formula: vanishing denominator");
  return num / den;
}

AlphaMax alpha_max(double gamma, int d, std::size_t budget, double resolution) {
  check_gamma(gamma, d);
  if (!(resolution > 0.0)) throw InvalidArgument("alpha_max: resolution must be > 0");
  AlphaMax out;
  std::ostringstream diag;
  double lo = 0.0;
  double hi = 4.0 * std::max(alpha_formula(gamma, d), 2.0 / (d - 2.0)) + 1.0;
  const WitnessSearch top = find_witness(gamma, d, hi, budget);
  if (top.feasible) {
    // The bracket is not closed; report the feasible endpoint as a lower bound.
    diag << "feasible at bracket end " << hi << "; alpha_max is only a lower bound";
    out.alpha_max = hi;
    out.upper = kInf;
    out.witness = top.witness;
    out.diagnostics = diag.str();
    return out;
  }
  std::size_t steps = 0;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    const WitnessSearch s = find_witness(gamma, d, mid, budget);
    if (s.feasible) {
      lo = mid;
      out.witness = s.witness;
    } else {
      hi = mid;
    }
    ++steps;
  }
  diag << "bisection steps " << steps << ", budget " << budget;
  out.alpha_max = lo;
  out.upper = hi;
  out.diagnostics = diag.str();
  return out;
}

}  // namespace mfg
