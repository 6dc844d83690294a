#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// Real-to-complex DFT on one spatial grid. Every operator in this file is
// diagonal in the Fourier basis because the torus is periodic and the
// stencils are translation invariant.
class Spectral {
 public:
  using Complex = std::complex<double>;

  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  // Shared, lazily planned instance per (d, n). Safe to call from any thread.
  static const Spectral& for_grid(const TorusGrid& grid);

  std::size_t spectrum_size() const noexcept { return spectrum_size_; }
  // lambda_h(k) = sum_a 4 sin^2(pi k_a h) / h^2, the eigenvalue of -laplacian.
  std::span<const double> laplacian_eigenvalues() const noexcept { return eigenvalues_; }

  std::vector<Complex> forward(const Field& f) const;
  // Unnormalized input spectrum -> field (divides by n^d).
  Field inverse(std::vector<Complex> spectrum, const TorusGrid& grid) const;
  // Multiplies mode k by symbol[k].
  Field apply_symbol(const Field& f, std::span<const double> symbol) const;

 private:
  explicit Spectral(const TorusGrid& grid);
  struct Plans;

  int d_;
  int n_;
  std::size_t size_;
  std::size_t spectrum_size_;
  std::vector<double> eigenvalues_;
  std::unique_ptr<Plans> plans_;
};

// Exact solution of g_t = laplacian_h g over time t (Fourier diagonalization).
Field heat_evolve(const Field& f, double t);

// (I - dt laplacian_h)^{-1} f, one backward-Euler diffusion step.
Field implicit_diffusion(const Field& f, double dt);

// Discrete delta at node i: value 1/h^d there, 0 elsewhere (unit mass).
Field discrete_delta(const TorusGrid& grid, std::size_t node);

}  // namespace mfg
