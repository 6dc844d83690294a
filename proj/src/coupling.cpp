#include "mfg/coupling.hpp"

#include <cmath>
#include <sstream>

#include "mfg/error.hpp"
#include "mfg/spectral.hpp"

namespace mfg {

namespace {

constexpr double kClip = 1e-12;
constexpr double kReject = 1e-10;

}  // namespace

Mollifier::Mollifier(const TorusGrid& grid, double eps) : eps_(eps), kernel_(grid) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("mollifier width must be >= 0");
  if (eps == 0.0) {
    kernel_[0] = 1.0 / grid.cell_volume();
    return;
  }
  const double radius = 2.0 * eps;
  const int d = grid.dim();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double x = grid.position(i, a);
      x = std::min(x, 1.0 - x);
      r2 += x * x;
    }
    const double s2 = r2 / (radius * radius);
    if (s2 < 1.0) kernel_[i] = std::exp(-1.0 / (1.0 - s2));
  }
  const double mass = kernel_.integral();
  if (!(mass > 0.0)) {
    // Support narrower than one cell: fall back to the identity.
    kernel_ = Field(grid);
    kernel_[0] = 1.0 / grid.cell_volume();
    return;
  }
  kernel_ *= 1.0 / mass;

  const auto& sp = Spectral::for_grid(grid);
  const auto spectrum = sp.forward(kernel_);
  symbol_.resize(spectrum.size());
  const double w = grid.cell_volume();
  for (std::size_t k = 0; k < spectrum.size(); ++k) symbol_[k] = spectrum[k].real() * w;
}

Field Mollifier::apply(const Field& f) const {
  if (!f.grid().same_space(kernel_.grid())) throw InvalidArgument("mollifier applied on a different grid");
  if (is_identity()) return f;
  return Spectral::for_grid(f.grid()).apply_symbol(f, symbol_);
}

Field mollify(const Mollifier& moll, const Field& f) { return moll.apply(f); }

Field g_eps(const Mollifier& moll, const CouplingParams& params, const Field& m) {
  if (!(params.alpha > 0.0)) throw InvalidArgument("coupling exponent alpha must be > 0");
  const double m_min = m.min();
  if (m_min < -kReject) {
    std::ostringstream os;
    os << "density has negative values (min " << m_min << "); positivity lost";
    throw NumericalError(os.str());
  }
  Field inner = moll.apply(m);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    double& v = inner[i];
    v = v > 0.0 ? std::pow(v, params.alpha) : 0.0;
  }
  Field out = moll.apply(inner);
  // The outer convolution of a nonnegative field can only go negative by roundoff.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0 && out[i] >= -kClip) out[i] = 0.0;
  }
  return out;
}

double g_antideriv(const CouplingParams& params, double z) {
  if (!(z >= 0.0)) throw DomainError("g_antideriv needs z >= 0");
  return std::pow(z, params.alpha + 1.0) / (params.alpha + 1.0);
}

}  // namespace mfg
