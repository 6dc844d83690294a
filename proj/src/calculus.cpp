#include "mfg/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/error.hpp"

namespace mfg {

VectorField gradient(const Field& f) {
  const auto& g = f.grid();
  VectorField out(g);
  const double inv2h = 0.5 / g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    Field& comp = out[a];
    for (std::size_t i = 0; i < g.size(); ++i) {
      comp[i] = (f[g.neighbor(i, a, 1)] - f[g.neighbor(i, a, -1)]) * inv2h;
    }
  }
  return out;
}

Field laplacian(const Field& f) {
  const auto& g = f.grid();
  Field out(g);
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double acc = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      acc += f[g.neighbor(i, a, 1)] + f[g.neighbor(i, a, -1)] - 2.0 * f[i];
    }
    out[i] = acc * inv_h2;
  }
  return out;
}

Field divergence(const VectorField& v) {
  const auto& g = v.grid();
  Field out(g);
  const double inv2h = 0.5 / g.spacing();
  for (int a = 0; a < v.dim(); ++a) {
    const Field& comp = v[a];
    for (std::size_t i = 0; i < g.size(); ++i) {
      out[i] += (comp[g.neighbor(i, a, 1)] - comp[g.neighbor(i, a, -1)]) * inv2h;
    }
  }
  return out;
}

std::vector<Field> hessian(const Field& f) {
  const auto& g = f.grid();
  const int d = g.dim();
  const double h = g.spacing();
  std::vector<Field> out(static_cast<std::size_t>(d * d), Field(g));
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      Field& e = out[static_cast<std::size_t>(a * d + b)];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a == b) {
          e[i] = (f[g.neighbor(i, a, 1)] - 2.0 * f[i] + f[g.neighbor(i, a, -1)]) / (h * h);
        } else {
          const std::size_t ip = g.neighbor(i, a, 1);
          const std::size_t im = g.neighbor(i, a, -1);
          e[i] = (f[g.neighbor(ip, b, 1)] - f[g.neighbor(ip, b, -1)] - f[g.neighbor(im, b, 1)] +
                  f[g.neighbor(im, b, -1)]) /
                 (4.0 * h * h);
        }
      }
      if (a != b) out[static_cast<std::size_t>(b * d + a)] = e;
    }
  }
  return out;
}

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm needs p >= 1, got " + std::to_string(p));
  const auto vals = f.values();
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : vals) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : vals) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double bochner_from_norms(const std::vector<double>& frame_norms, double dt, double r) {
  if (!(r >= 1.0)) throw DomainError("time exponent must be >= 1, got " + std::to_string(r));
  if (frame_norms.empty()) return 0.0;
  if (std::isinf(r)) return *std::max_element(frame_norms.begin(), frame_norms.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < frame_norms.size(); ++k) s += dt * std::pow(frame_norms[k], r);
  return std::pow(s, 1.0 / r);
}

double bochner_norm(const Trajectory& traj, double r, double p) {
  std::vector<double> norms;
  norms.reserve(traj.frame_count());
  for (const auto& f : traj) norms.push_back(lp_norm(f, p));
  return bochner_from_norms(norms, traj.grid().time_step(), r);
}

}  // namespace mfg
