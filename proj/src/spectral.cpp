#include "mfg/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "mfg/error.hpp"

namespace mfg {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Spectral::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Spectral::Spectral(const TorusGrid& grid)
    : d_(grid.dim()), n_(grid.points_per_axis()), size_(grid.size()), plans_(new Plans) {
  const int half = n_ / 2 + 1;
  spectrum_size_ = size_ / static_cast<std::size_t>(n_) * static_cast<std::size_t>(half);

  std::vector<int> dims(static_cast<std::size_t>(d_), n_);
  std::vector<double> real(size_);
  std::vector<fftw_complex> cplx(spectrum_size_);
  constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_dft_r2c(d_, dims.data(), real.data(), cplx.data(), flags);
  plans_->backward = fftw_plan_dft_c2r(d_, dims.data(), cplx.data(), real.data(), flags);
  if (plans_->forward == nullptr || plans_->backward == nullptr) {
    throw NumericalError("FFTW planning failed");
  }

  // Spectrum layout: axes 0..d-2 have n entries, the last axis n/2+1.
  eigenvalues_.resize(spectrum_size_);
  const double h = 1.0 / n_;
  for (std::size_t idx = 0; idx < spectrum_size_; ++idx) {
    std::size_t rest = idx;
    double lambda = 0.0;
    for (int a = d_ - 1; a >= 0; --a) {
      const std::size_t extent = (a == d_ - 1) ? static_cast<std::size_t>(half) : static_cast<std::size_t>(n_);
      const auto k = static_cast<double>(rest % extent);
      rest /= extent;
      const double s = std::sin(std::numbers::pi * k * h);
      lambda += 4.0 * s * s / (h * h);
    }
    eigenvalues_[idx] = lambda;
  }
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  if (plans_->forward != nullptr) fftw_destroy_plan(plans_->forward);
  if (plans_->backward != nullptr) fftw_destroy_plan(plans_->backward);
}

const Spectral& Spectral::for_grid(const TorusGrid& grid) {
  // The mutex must outlive the cache: construct it first.
  auto& mutex = planner_mutex();
  static std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(grid.dim(), grid.points_per_axis());
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::unique_ptr<Spectral>(new Spectral(grid))).first;
  }
  return *it->second;
}

std::vector<Spectral::Complex> Spectral::forward(const Field& f) const {
  if (f.size() != size_) throw InvalidArgument("field does not match the spectral grid");
  std::vector<double> in(f.values().begin(), f.values().end());
  std::vector<Complex> out(spectrum_size_);
  fftw_execute_dft_r2c(plans_->forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Field Spectral::inverse(std::vector<Complex> spectrum, const TorusGrid& grid) const {
  if (spectrum.size() != spectrum_size_) throw InvalidArgument("spectrum size mismatch");
  std::vector<double> out(size_);
  // c2r overwrites its input; `spectrum` is our own copy.
  fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(spectrum.data()), out.data());
  const double scale = 1.0 / static_cast<double>(size_);
  for (double& v : out) v *= scale;
  return Field(grid, std::move(out));
}

Field Spectral::apply_symbol(const Field& f, std::span<const double> symbol) const {
  if (symbol.size() != spectrum_size_) throw InvalidArgument("symbol size mismatch");
  auto spec = forward(f);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= symbol[k];
  return inverse(std::move(spec), f.grid());
}

Field heat_evolve(const Field& f, double t) {
  if (!(t >= 0.0)) throw DomainError("heat_evolve needs t >= 0");
  if (t == 0.0) return f;
  const auto& sp = Spectral::for_grid(f.grid());
  const auto lambda = sp.laplacian_eigenvalues();
  std::vector<double> symbol(lambda.size());
  for (std::size_t k = 0; k < symbol.size(); ++k) symbol[k] = std::exp(-lambda[k] * t);
  return sp.apply_symbol(f, symbol);
}

Field implicit_diffusion(const Field& f, double dt) {
  if (!(dt >= 0.0)) throw DomainError("implicit_diffusion needs dt >= 0");
  const auto& sp = Spectral::for_grid(f.grid());
  const auto lambda = sp.laplacian_eigenvalues();
  std::vector<double> symbol(lambda.size());
  for (std::size_t k = 0; k < symbol.size(); ++k) symbol[k] = 1.0 / (1.0 + dt * lambda[k]);
  return sp.apply_symbol(f, symbol);
}

Field discrete_delta(const TorusGrid& grid, std::size_t node) {
  Field out(grid);
  out[node] = 1.0 / grid.cell_volume();
  return out;
}

}  // namespace mfg
