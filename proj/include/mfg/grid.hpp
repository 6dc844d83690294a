#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfg {

inline constexpr int kMaxDim = 3;

// Uniform periodic discretization of the unit torus T^d times [0, T].
// Axis 0 is the slowest varying index (row-major).
class TorusGrid {
 public:
  TorusGrid() = default;

  // Builds a grid whose step count is the smallest integer with dt <= dt_target;
  // dt is then shrunk so that steps * dt == T.
  static TorusGrid with_time_step(int d, int n, double T, double dt_target);
  static TorusGrid with_steps(int d, int n, double T, std::size_t steps);
  // Exact metadata as stored in a trajectory file; steps * dt must match T.
  static TorusGrid from_header(int d, int n, double T, double dt, std::size_t steps);
  // Space-only grid (T = 0, one frame).
  static TorusGrid spatial(int d, int n);

  int dim() const noexcept { return d_; }
  int points_per_axis() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double horizon() const noexcept { return T_; }
  double time_step() const noexcept { return dt_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return size_; }
  // Cell volume h^d, the quadrature weight of every node.
  double cell_volume() const noexcept { return cell_volume_; }
  double time_at(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }

  std::size_t stride(int axis) const noexcept { return stride_[axis]; }
  int coordinate(std::size_t index, int axis) const noexcept {
    return static_cast<int>((index / stride_[axis]) % static_cast<std::size_t>(n_));
  }
  // Node index shifted by `shift` cells along `axis`, wrapped periodically.
  std::size_t neighbor(std::size_t index, int axis, int shift) const noexcept;
  // Physical position of a node along `axis`, in [0, 1).
  double position(std::size_t index, int axis) const noexcept {
    return coordinate(index, axis) * h_;
  }

  // Same spatial discretization (time metadata ignored).
  bool same_space(const TorusGrid& other) const noexcept { return d_ == other.d_ && n_ == other.n_; }
  bool operator==(const TorusGrid& other) const noexcept {
    return same_space(other) && T_ == other.T_ && dt_ == other.dt_ && steps_ == other.steps_;
  }

 private:
  TorusGrid(int d, int n, double T, double dt, std::size_t steps);

  int d_ = 1;
  int n_ = 4;
  double h_ = 0.25;
  double T_ = 0.0;
  double dt_ = 1.0;
  std::size_t steps_ = 0;
  std::size_t size_ = 4;
  double cell_volume_ = 0.25;
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
};

// Scalar grid function at one time level.
class Field {
 public:
  Field() = default;
  explicit Field(const TorusGrid& grid, double value = 0.0);
  Field(const TorusGrid& grid, std::vector<double> values);
  // Samples f(x_0, ..., x_{d-1}) at every node.
  static Field from_function(const TorusGrid& grid,
                             const std::function<double(std::span<const double>)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  double min() const;
  double max() const;
  double sum() const;
  // Sum times h^d: the discrete integral over the torus.
  double integral() const { return sum() * grid_.cell_volume(); }
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  // this += s * other
  Field& axpy(double s, const Field& other);

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
// Pointwise product.
Field hadamard(const Field& a, const Field& b);
// Discrete L^2 pairing sum(a*b) h^d.
double inner(const Field& a, const Field& b);

// d scalar components on one grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const TorusGrid& grid, double value = 0.0);

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return static_cast<int>(components_.size()); }
  const Field& operator[](int axis) const noexcept { return components_[axis]; }
  Field& operator[](int axis) noexcept { return components_[axis]; }
  // Euclidean norm squared at a node.
  double norm_squared_at(std::size_t i) const noexcept;
  // Writes the components at node i into out (length dim()).
  void gather(std::size_t i, std::span<double> out) const noexcept;
  double max_norm() const;

 private:
  TorusGrid grid_;
  std::vector<Field> components_;
};

double inner(const VectorField& a, const VectorField& b);

// Time-indexed sequence of fields, frames 0..steps of its grid.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(const TorusGrid& grid);  // steps+1 zero frames
  Trajectory(const TorusGrid& grid, std::vector<Field> frames);
  // Every frame equal to `f`.
  static Trajectory constant(const TorusGrid& grid, const Field& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t frame_count() const noexcept { return frames_.size(); }
  const Field& operator[](std::size_t k) const noexcept { return frames_[k]; }
  Field& operator[](std::size_t k) noexcept { return frames_[k]; }
  const Field& front() const { return frames_.front(); }
  const Field& back() const { return frames_.back(); }
  auto begin() const { return frames_.begin(); }
  auto end() const { return frames_.end(); }

  // sup over space-time of |a - b|
  friend double sup_distance(const Trajectory& a, const Trajectory& b);
  bool all_finite() const;

 private:
  TorusGrid grid_;
  std::vector<Field> frames_;
};

double sup_distance(const Trajectory& a, const Trajectory& b);

}  // namespace mfg
