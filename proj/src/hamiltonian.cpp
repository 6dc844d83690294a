#include "mfg/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfg/calculus.hpp"
#include "mfg/error.hpp"
#include "random.hpp"

namespace mfg {

namespace {

double norm_squared(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return s;
}

bool is_constant(const Field& f) { return f.max() - f.min() == 0.0; }

}  // namespace

bool HamiltonianModel::in_growth_window(double gamma, int d) noexcept {
  return gamma > 1.0 + 1.0 / (d + 1.0) && gamma < 2.0;
}

HamiltonianModel::HamiltonianModel(Field a, Field V, double gamma)
    : a_(std::move(a)), V_(std::move(V)), gamma_(gamma) {
  if (!a_.grid().same_space(V_.grid())) throw InvalidArgument("a and V must share one grid");
  if (!a_.all_finite() || !V_.all_finite()) throw InvalidArgument("a and V must be finite");
  if (!(a_.min() > 0.0)) throw DomainError("coefficient a(x) must be strictly positive");
  if (!(V_.min() > 0.0)) throw DomainError("potential V(x) must be strictly positive");
  const int d = a_.grid().dim();
  if (!in_growth_window(gamma, d)) {
    std::ostringstream os;
    os << "gamma = " << gamma << " outside the growth window (" << 1.0 + 1.0 / (d + 1.0)
       << ", 2) for d = " << d;
    throw DomainError(os.str());
  }
  x_independent_ = is_constant(a_) && is_constant(V_);
  grad_a_ = gradient(a_);
  grad_V_ = gradient(V_);
  hess_a_ = hessian(a_);
  hess_V_ = hessian(V_);
}

double HamiltonianModel::h_eval(std::size_t x, std::span<const double> p) const {
  return a_[x] * std::pow(1.0 + norm_squared(p), 0.5 * gamma_) + V_[x];
}

void HamiltonianModel::dp_h(std::size_t x, std::span<const double> p, std::span<double> out) const {
  const double scale = a_[x] * gamma_ * std::pow(1.0 + norm_squared(p), 0.5 * (gamma_ - 2.0));
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = scale * p[i];
}

Eigen::MatrixXd HamiltonianModel::dpp_h(std::size_t x, std::span<const double> p) const {
  const auto d = static_cast<Eigen::Index>(p.size());
  const double q = 1.0 + norm_squared(p);
  const double iso = a_[x] * gamma_ * std::pow(q, 0.5 * (gamma_ - 2.0));
  const double rank1 = a_[x] * gamma_ * (gamma_ - 2.0) * std::pow(q, 0.5 * (gamma_ - 4.0));
  Eigen::Map<const Eigen::VectorXd> pv(p.data(), d);
  Eigen::MatrixXd m = rank1 * pv * pv.transpose();
  m.diagonal().array() += iso;
  return m;
}

double HamiltonianModel::l_hat(std::size_t x, std::span<const double> p) const {
  std::vector<double> g(p.size());
  dp_h(x, p, g);
  double dot = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) dot += g[i] * p[i];
  return dot - h_eval(x, p);
}

double HamiltonianModel::l_hat_closed_form(std::size_t x, std::span<const double> p) const {
  const double s2 = norm_squared(p);
  return a_[x] * ((gamma_ - 1.0) * s2 - 1.0) * std::pow(1.0 + s2, 0.5 * (gamma_ - 2.0)) - V_[x];
}

double HamiltonianModel::legendre_l(std::size_t x, std::span<const double> v) const {
  const double speed = std::sqrt(norm_squared(v));
  const double a = a_[x];
  const double g = gamma_;
  auto objective = [&](double s) { return s * speed - a * std::pow(1.0 + s * s, 0.5 * g) - V_[x]; };
  if (speed == 0.0) return objective(0.0);

  // Stationarity: |D_pH|(s) = a g (1+s^2)^((g-2)/2) s = speed, increasing in s.
  auto residual = [&](double s) { return a * g * std::pow(1.0 + s * s, 0.5 * (g - 2.0)) * s - speed; };
  auto slope = [&](double s) {
    return a * g * std::pow(1.0 + s * s, 0.5 * (g - 4.0)) * (1.0 + (g - 1.0) * s * s);
  };
  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200) throw NumericalError("legendre_l: could not bracket the maximizer");
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = residual(s);
    if (r == 0.0) return objective(s);
    (r < 0.0 ? lo : hi) = s;
    double next = s - r / slope(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * std::max(1.0, s) || hi - lo <= 1e-15 * std::max(1.0, hi)) {
      return objective(next);
    }
    s = next;
  }
  throw NumericalError("legendre_l: inner maximization did not converge");
}

void HamiltonianModel::dx_h(std::size_t x, std::span<const double> p, std::span<double> out) const {
  const double growth = std::pow(1.0 + norm_squared(p), 0.5 * gamma_);
  for (int j = 0; j < dim(); ++j) out[j] = grad_a_[j][x] * growth + grad_V_[j][x];
}

Eigen::MatrixXd HamiltonianModel::dxx_h(std::size_t x, std::span<const double> p) const {
  const int d = dim();
  const double growth = std::pow(1.0 + norm_squared(p), 0.5 * gamma_);
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const auto k = static_cast<std::size_t>(i * d + j);
      m(i, j) = hess_a_[k][x] * growth + hess_V_[k][x];
    }
  }
  return m;
}

Eigen::MatrixXd HamiltonianModel::dxp_h(std::size_t x, std::span<const double> p) const {
  const int d = dim();
  const double scale = gamma_ * std::pow(1.0 + norm_squared(p), 0.5 * (gamma_ - 2.0));
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = grad_a_[j][x] * scale * p[i];
  }
  return m;
}

Field HamiltonianModel::hamiltonian_field(const VectorField& grad) const {
  const auto& g = grad.grid();
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = a_[i] * std::pow(1.0 + grad.norm_squared_at(i), 0.5 * gamma_) + V_[i];
  }
  return out;
}

VectorField HamiltonianModel::drift_field(const VectorField& grad) const {
  const auto& g = grad.grid();
  VectorField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double scale = a_[i] * gamma_ * std::pow(1.0 + grad.norm_squared_at(i), 0.5 * (gamma_ - 2.0));
    for (int k = 0; k < grad.dim(); ++k) out[k][i] = scale * grad[k][i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assumption audit

namespace {

struct Sample {
  std::size_t node;
  std::vector<double> p;
};

// Ball samples (uniform in |p| <= R) followed by far-field probes at radii
// R * 10^j, j = 1..6, which pin the growth constants in the tail.
std::vector<Sample> draw_samples(const HamiltonianModel& model, const AuditSampleSpec& spec) {
  const int d = model.dim();
  const std::size_t nodes = model.grid().size();
  std::vector<Sample> out;
  out.reserve(spec.samples + 64);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    detail::SplitMix64 rng(spec.seed, i);
    Sample s{static_cast<std::size_t>(rng.next() % nodes), std::vector<double>(static_cast<std::size_t>(d))};
    double n2 = 0.0;
    for (auto& v : s.p) {
      v = rng.normal();
      n2 += v * v;
    }
    // Every 100th sample sits at p = 0, where H attains its minimum in p.
    const double radius = (i % 100 == 0) ? 0.0 : spec.radius * std::pow(rng.uniform(), 1.0 / d);
    const double scale = n2 > 0.0 ? radius / std::sqrt(n2) : 0.0;
    for (auto& v : s.p) v *= scale;
    out.push_back(std::move(s));
  }
  for (int j = 1; j <= 6; ++j) {
    for (int dir = 0; dir < 8; ++dir) {
      detail::SplitMix64 rng(spec.seed ^ 0xA5A5A5A5ull, static_cast<std::uint64_t>(j * 8 + dir));
      Sample s{static_cast<std::size_t>(rng.next() % nodes), std::vector<double>(static_cast<std::size_t>(d))};
      double n2 = 0.0;
      for (auto& v : s.p) {
        v = rng.normal();
        n2 += v * v;
      }
      const double scale = spec.radius * std::pow(10.0, j) / std::sqrt(n2);
      for (auto& v : s.p) v *= scale;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string describe(const AuditSampleSpec& spec, const HamiltonianModel& model) {
  std::ostringstream os;
  os << spec.samples << " samples uniform in |p| <= " << spec.radius << " over " << model.grid().size()
     << " grid nodes (seed " << spec.seed << ") plus 48 far-field probes at |p| = R*10^j, j=1..6";
  return os.str();
}

double pnorm(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

// Tiny relative slack so that constants fitted as a max reproduce residual <= 0.
constexpr double kFitSlack = 1e-12;

AuditCertificate ratio_certificate(const std::string& id, const std::string& samples,
                                   const std::vector<double>& lhs, const std::vector<double>& base,
                                   const std::string& note) {
  // Fits C in lhs <= C * base; base > 0.
  double c = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) c = std::max(c, lhs[i] / base[i]);
  c *= 1.0 + kFitSlack;
  double residual = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lhs.size(); ++i) residual = std::max(residual, lhs[i] - c * base[i]);
  AuditCertificate cert;
  cert.assumption = id;
  cert.constants["C"] = c;
  cert.samples = samples;
  cert.residual = residual;
  cert.pass = std::isfinite(c) && residual <= 0.0;
  cert.note = note;
  return cert;
}

}  // namespace

std::vector<AuditCertificate> audit_assumptions(const HamiltonianModel& model, const AuditSampleSpec& spec,
                                                double alpha) {
  if (!(spec.radius > 0.0) || spec.samples == 0) {
    throw InvalidArgument("audit needs a positive radius and at least one sample");
  }
  const auto samples = draw_samples(model, spec);
  const std::string where = describe(spec, model);
  const double g = model.gamma();
  const int d = model.dim();
  std::vector<AuditCertificate> certs;

  std::vector<double> H(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) H[i] = model.h_eval(samples[i].node, samples[i].p);

  // A1: strict convexity (positive definite D_pp H) and H >= 1.
  {
    double min_eig = std::numeric_limits<double>::infinity();
    double pd_const = std::numeric_limits<double>::infinity();
    double min_h = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.dpp_h(s.node, s.p));
      const double lo = eig.eigenvalues().minCoeff();
      min_eig = std::min(min_eig, lo);
      const double r = pnorm(s.p);
      pd_const = std::min(pd_const, lo / std::pow(1.0 + r * r, 0.5 * (g - 2.0)));
      min_h = std::min(min_h, H[i]);
    }
    AuditCertificate cert;
    cert.assumption = "A1";
    cert.constants["min_eigenvalue_dpp"] = min_eig;
    cert.constants["c_convexity"] = pd_const;
    cert.constants["min_H"] = min_h;
    cert.samples = where;
    cert.residual = std::max(-min_eig, 1.0 - min_h);
    cert.pass = min_eig > 0.0 && min_h >= 1.0;
    cert.note =
        "eigenvalues of D_pp H are >= c (1+|p|^2)^((gamma-2)/2); coercivity holds since gamma > 1";
    certs.push_back(cert);
  }

  // A2/A4: g(m) = m^alpha is nonnegative and increasing.
  {
    double worst = -std::numeric_limits<double>::infinity();
    double prev = -1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double z = 0.01 * k;
      const double gz = std::pow(z, alpha);
      worst = std::max(worst, -gz);
      if (k > 0) worst = std::max(worst, prev - gz);
      prev = gz;
    }
    AuditCertificate cert;
    cert.assumption = "A2/A4";
    cert.constants["alpha"] = alpha;
    cert.samples = "z in {0, 0.01, ..., 10}";
    cert.residual = worst;
    cert.pass = alpha > 0.0 && worst <= 0.0;
    cert.note = "g(m) = m^alpha with antiderivative G(z) = z^(alpha+1)/(alpha+1)";
    certs.push_back(cert);
  }

  // A3: L_hat >= c H - C. c by golden-section search on (0, gamma - 1)
  // minimizing C(c)/c, the ratio that enters the first-order estimate.
  {
    std::vector<double> lhat(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) lhat[i] = model.l_hat(samples[i].node, samples[i].p);
    auto big_c = [&](double c) {
      double v = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < samples.size(); ++i) v = std::max(v, c * H[i] - lhat[i]);
      return v;
    };
    auto cost = [&](double c) { return big_c(c) / c; };
    double lo = 0.05 * (g - 1.0);
    double hi = 0.95 * (g - 1.0);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = cost(x1);
    double f2 = cost(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = cost(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = cost(x2);
      }
    }
    const double c = 0.5 * (lo + hi);
    double C = big_c(c);
    C += kFitSlack * std::max(1.0, std::abs(C));
    double residual = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) residual = std::max(residual, c * H[i] - C - lhat[i]);
    AuditCertificate cert;
    cert.assumption = "A3";
    cert.constants["c"] = c;
    cert.constants["C"] = C;
    cert.samples = where;
    cert.residual = residual;
    cert.pass = c > 0.0 && std::isfinite(C) && residual <= 0.0;
    cert.note = "L_hat/H -> gamma-1 as |p| -> infinity, so any c < gamma-1 holds in the tail";
    certs.push_back(cert);
  }

  // A5: |D_x H|, |D_xx H| <= C H + C, and Tr(D_px H M) <= delta Tr(D_pp H M^2) + C_delta H.
  {
    std::vector<double> dx(samples.size());
    std::vector<double> dxx(samples.size());
    std::vector<double> cross(samples.size());
    std::vector<double> base(samples.size());
    std::vector<double> hbase(samples.size());
    std::vector<double> grad(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      model.dx_h(s.node, s.p, grad);
      double n2 = 0.0;
      for (double v : grad) n2 += v * v;
      dx[i] = std::sqrt(n2);
      dxx[i] = model.dxx_h(s.node, s.p).norm();
      base[i] = H[i] + 1.0;
      hbase[i] = H[i];
      // sup over symmetric M of Tr(A M) - delta Tr(B M^2), A = D_px H, B = D_pp H:
      // in the eigenbasis of B it equals sum_ij A_ij^2 / (4 delta (l_i + l_j)).
      const Eigen::MatrixXd A = model.dxp_h(s.node, s.p);
      const Eigen::MatrixXd As = 0.5 * (A + A.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.dpp_h(s.node, s.p));
      const Eigen::MatrixXd At = eig.eigenvectors().transpose() * As * eig.eigenvectors();
      double sup = 0.0;
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          sup += At(r, c) * At(r, c) / (4.0 * spec.delta * (eig.eigenvalues()(r) + eig.eigenvalues()(c)));
        }
      }
      cross[i] = sup;
    }
    auto c1 = ratio_certificate("A5", where, dx, base, "");
    auto c2 = ratio_certificate("A5", where, dxx, base, "");
    auto c3 = ratio_certificate("A5", where, cross, hbase, "");
    AuditCertificate cert;
    cert.assumption = "A5";
    cert.constants["C_dx"] = c1.constants["C"];
    cert.constants["C_dxx"] = c2.constants["C"];
    cert.constants["delta"] = spec.delta;
    cert.constants["C_delta"] = c3.constants["C"];
    cert.samples = where + "; sup over symmetric M evaluated in closed form";
    cert.residual = std::max({c1.residual, c2.residual, c3.residual});
    cert.pass = c1.pass && c2.pass && c3.pass;
    cert.note = model.x_independent() ? "x-independent model: D_x H = 0, derivative constants vanish"
                                      : "|D_x H|, |D_xx H| grow like (1+|p|^2)^(gamma/2), as H does";
    certs.push_back(cert);
  }

  // A7: H <= C |p|^gamma + C.
  {
    std::vector<double> base(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) base[i] = std::pow(pnorm(samples[i].p), g) + 1.0;
    certs.push_back(ratio_certificate("A7", where, H, base, "H/|p|^gamma -> a(x) as |p| -> infinity"));
  }

  // A8: |D_p H| <= C |p|^(gamma-1) + C.
  {
    std::vector<double> lhs(samples.size());
    std::vector<double> base(samples.size());
    std::vector<double> grad(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      model.dp_h(samples[i].node, samples[i].p, grad);
      double n2 = 0.0;
      for (double v : grad) n2 += v * v;
      lhs[i] = std::sqrt(n2);
      base[i] = std::pow(pnorm(samples[i].p), g - 1.0) + 1.0;
    }
    certs.push_back(
        ratio_certificate("A8", where, lhs, base, "|D_p H| <= a gamma |p|^(gamma-1) for gamma < 2"));
  }

  // A9: |D_xp H|^2 <= C H and |D_pp H M|^2 <= C Tr(D_pp H M M).
  {
    std::vector<double> xp(samples.size());
    std::vector<double> mat_lhs;
    std::vector<double> mat_base;
    double lambda_max = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      xp[i] = model.dxp_h(s.node, s.p).squaredNorm();
      const Eigen::MatrixXd B = model.dpp_h(s.node, s.p);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
      lambda_max = std::max(lambda_max, eig.eigenvalues().maxCoeff());
      detail::SplitMix64 rng(spec.seed ^ 0x5EEDull, i);
      for (std::size_t k = 0; k < spec.matrices_per_sample; ++k) {
        Eigen::MatrixXd M(d, d);
        for (int r = 0; r < d; ++r) {
          for (int c = r; c < d; ++c) M(r, c) = M(c, r) = rng.normal();
        }
        mat_lhs.push_back((B * M).squaredNorm());
        mat_base.push_back((B * M * M).trace());
      }
    }
    auto first = ratio_certificate("A9", where, xp, H, "");
    auto second = ratio_certificate("A9", where, mat_lhs, mat_base, "");
    // Tr(B^2 M^2)/Tr(B M^2) <= lambda_max(B) for every symmetric M.
    const double c_matrix = std::max(second.constants["C"], lambda_max);
    AuditCertificate cert;
    cert.assumption = "A9";
    cert.constants["C_xp"] = first.constants["C"];
    cert.constants["C_pp"] = c_matrix;
    cert.constants["max_eigenvalue_dpp"] = lambda_max;
    cert.samples = where + "; " + std::to_string(spec.matrices_per_sample) +
                   " random symmetric M per sample";
    cert.residual = std::max(first.residual, second.residual);
    cert.pass = first.pass && second.pass && second.constants["C"] <= lambda_max * (1.0 + 1e-9);
    cert.note = "uniform upper bound on the eigenvalues of D_pp H";
    certs.push_back(cert);
  }

  // Derivative consistency against central finite differences of h_eval.
  {
    const std::size_t count = std::min<std::size_t>(spec.samples, 1000);  // ball samples only
    double err_dp = 0.0;
    double err_dpp = 0.0;
    const double step = 1e-4;
    std::vector<double> grad(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < count; ++i) {
      const auto& s = samples[i];
      model.dp_h(s.node, s.p, grad);
      const Eigen::MatrixXd B = model.dpp_h(s.node, s.p);
      for (int a = 0; a < d; ++a) {
        auto pp = s.p;
        auto pm = s.p;
        pp[static_cast<std::size_t>(a)] += step;
        pm[static_cast<std::size_t>(a)] -= step;
        const double fd = (model.h_eval(s.node, pp) - model.h_eval(s.node, pm)) / (2.0 * step);
        err_dp = std::max(err_dp, std::abs(fd - grad[static_cast<std::size_t>(a)]));
        for (int b = 0; b < d; ++b) {
          auto shift = [&](double sa, double sb) {
            auto q = s.p;
            q[static_cast<std::size_t>(a)] += sa;
            q[static_cast<std::size_t>(b)] += sb;
            return model.h_eval(s.node, q);
          };
          const double fd2 = (shift(step, step) - shift(step, -step) - shift(-step, step) + shift(-step, -step)) /
                             (4.0 * step * step);
          err_dpp = std::max(err_dpp, std::abs(fd2 - B(a, b)));
        }
      }
    }
    AuditCertificate cert;
    cert.assumption = "derivatives";
    cert.constants["max_error_dp"] = err_dp;
    cert.constants["max_error_dpp"] = err_dpp;
    cert.constants["tolerance_dp"] = 1e-6;
    cert.constants["tolerance_dpp"] = 1e-5;
    cert.samples = "first " + std::to_string(count) + " ball samples, central differences with step 1e-4";
    cert.residual = std::max(err_dp - 1e-6, err_dpp - 1e-5);
    cert.pass = cert.residual <= 0.0;
    certs.push_back(cert);
  }

  return certs;
}

}  // namespace mfg
