#include "mfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfg/error.hpp"

namespace mfg {

TorusGrid::TorusGrid(int d, int n, double T, double dt, std::size_t steps)
    : d_(d), n_(n), h_(1.0 / n), T_(T), dt_(dt), steps_(steps) {
  if (d < 1 || d > kMaxDim) {
    throw InvalidArgument("grid dimension must be in [1, " + std::to_string(kMaxDim) + "], got " +
                          std::to_string(d));
  }
  if (n < 4) throw InvalidArgument("grid needs at least 4 points per axis, got " + std::to_string(n));
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidArgument("horizon T must be finite and >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
  size_ = 1;
  for (int a = d - 1; a >= 0; --a) {
    stride_[a] = size_;
    size_ *= static_cast<std::size_t>(n);
  }
  cell_volume_ = std::pow(h_, d);
}

TorusGrid TorusGrid::with_time_step(int d, int n, double T, double dt_target) {
  if (!(dt_target > 0.0)) throw InvalidArgument("time step must be positive");
  if (T == 0.0) return TorusGrid(d, n, 0.0, dt_target, 0);
  auto steps = static_cast<std::size_t>(std::ceil(T / dt_target - 1e-9));
  steps = std::max<std::size_t>(steps, 1);
  return TorusGrid(d, n, T, T / static_cast<double>(steps), steps);
}

TorusGrid TorusGrid::with_steps(int d, int n, double T, std::size_t steps) {
  if (steps == 0) {
    if (T != 0.0) throw InvalidArgument("zero steps requires T = 0");
    return TorusGrid(d, n, 0.0, 1.0, 0);
  }
  return TorusGrid(d, n, T, T / static_cast<double>(steps), steps);
}

TorusGrid TorusGrid::from_header(int d, int n, double T, double dt, std::size_t steps) {
  if (steps == 0 ? T != 0.0 : std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * std::max(1.0, T)) {
    throw InvalidArgument("inconsistent time metadata: steps * dt != T");
  }
  return TorusGrid(d, n, T, dt, steps);
}

TorusGrid TorusGrid::spatial(int d, int n) { return TorusGrid(d, n, 0.0, 1.0, 0); }

std::size_t TorusGrid::neighbor(std::size_t index, int axis, int shift) const noexcept {
  const int c = coordinate(index, axis);
  int shifted = (c + shift) % n_;
  if (shifted < 0) shifted += n_;
  return index + (static_cast<std::size_t>(shifted) - static_cast<std::size_t>(c)) * stride_[axis];
}

Field::Field(const TorusGrid& grid, double value) : grid_(grid), values_(grid.size(), value) {}

Field::Field(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidArgument("field has " + std::to_string(values_.size()) + " values, grid needs " +
                          std::to_string(grid_.size()));
  }
}

Field Field::from_function(const TorusGrid& grid,
                           const std::function<double(std::span<const double>)>& f) {
  Field out(grid);
  std::array<double, kMaxDim> x{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.position(i, a);
    out[i] = f(std::span<const double>(x.data(), grid.dim()));
  }
  return out;
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::sum() const {
  // Compensated summation; mass checks run at the 1e-13 level.
  double s = 0.0;
  double c = 0.0;
  for (double v : values_) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& other) { return axpy(1.0, other); }
Field& Field::operator-=(const Field& other) { return axpy(-1.0, other); }

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  if (!grid_.same_space(other.grid_)) throw InvalidArgument("fields live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
  if (!a.grid().same_space(b.grid())) throw InvalidArgument("fields live on different grids");
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double inner(const Field& a, const Field& b) { return hadamard(a, b).integral(); }

VectorField::VectorField(const TorusGrid& grid, double value)
    : grid_(grid), components_(static_cast<std::size_t>(grid.dim()), Field(grid, value)) {}

double VectorField::norm_squared_at(std::size_t i) const noexcept {
  double s = 0.0;
  for (const auto& c : components_) s += c[i] * c[i];
  return s;
}

void VectorField::gather(std::size_t i, std::span<double> out) const noexcept {
  for (std::size_t a = 0; a < components_.size(); ++a) out[a] = components_[a][i];
}

double VectorField::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) m = std::max(m, norm_squared_at(i));
  return std::sqrt(m);
}

double inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) s += inner(a[k], b[k]);
  return s;
}

Trajectory::Trajectory(const TorusGrid& grid)
    : grid_(grid), frames_(grid.steps() + 1, Field(grid)) {}

Trajectory::Trajectory(const TorusGrid& grid, std::vector<Field> frames)
    : grid_(grid), frames_(std::move(frames)) {
  if (frames_.size() != grid_.steps() + 1) {
    throw InvalidArgument("trajectory has " + std::to_string(frames_.size()) +
                          " frames, grid needs " + std::to_string(grid_.steps() + 1));
  }
  for (const auto& f : frames_) {
    if (!f.grid().same_space(grid_)) throw InvalidArgument("trajectory frames must share one grid");
  }
}

Trajectory Trajectory::constant(const TorusGrid& grid, const Field& f) {
  Field frame(grid, std::vector<double>(f.values().begin(), f.values().end()));
  return Trajectory(grid, std::vector<Field>(grid.steps() + 1, frame));
}

bool Trajectory::all_finite() const {
  return std::all_of(frames_.begin(), frames_.end(), [](const Field& f) { return f.all_finite(); });
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  if (a.frame_count() != b.frame_count()) throw InvalidArgument("trajectories differ in length");
  double d = 0.0;
  for (std::size_t k = 0; k < a.frame_count(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) d = std::max(d, std::abs(a[k][i] - b[k][i]));
  }
  return d;
}

}  // namespace mfg
