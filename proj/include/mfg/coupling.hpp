#pragma once

#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// Wrapped bump exp(-1/(1 - (r/2eps)^2)) of support radius 2 eps, renormalized
// so that sum(kernel) h^d = 1. eps = 0 is the identity.
class Mollifier {
 public:
  Mollifier(const TorusGrid& grid, double eps);

  double eps() const noexcept { return eps_; }
  bool is_identity() const noexcept { return symbol_.empty(); }
  // Kernel centred at node 0 (periodic distance). A unit delta when eps = 0.
  const Field& kernel() const noexcept { return kernel_; }

  Field apply(const Field& f) const;

 private:
  double eps_;
  Field kernel_;
  // Real Fourier symbol of the kernel (the kernel is even, so it has no
  // imaginary part); empty for the identity.
  std::vector<double> symbol_;
};

struct CouplingParams {
  double alpha = 1.0;
  double eps = 0.0;
};

Field mollify(const Mollifier& moll, const Field& f);

// eta * ((eta * m)^alpha). Values of m in [-1e-12, 0) are treated as 0;
// anything below -1e-10 throws NumericalError.
Field g_eps(const Mollifier& moll, const CouplingParams& params, const Field& m);

// G(z) = z^(alpha+1)/(alpha+1), the antiderivative of g(z) = z^alpha.
double g_antideriv(const CouplingParams& params, double z);

}  // namespace mfg
