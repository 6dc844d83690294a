#pragma once

#include <string>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// Binary trajectory file, all numbers little-endian:
//   bytes  0..7   "MFGTRAJ1"
//   bytes  8..11  int32  d
//   bytes 12..15  int32  n
//   bytes 16..23  uint64 steps
//   bytes 24..31  f64    T
//   bytes 32..39  f64    dt
// then steps+1 frames of n^d f64 values, axis 0 slowest.
inline constexpr std::size_t kTrajectoryHeaderBytes = 40;

void write_trajectory(const std::string& path, const Trajectory& traj);
// FormatError on a bad magic, inconsistent header or wrong file size.
Trajectory read_trajectory(const std::string& path);

// Binary PPM heat map of a 2-D slice (axes 0 and 1, other axes at index 0).
// For d = 1 the trajectory is drawn as a space-time image instead.
void write_field_ppm(const std::string& path, const Field& f);
void write_spacetime_ppm(const std::string& path, const Trajectory& traj);
// log10 line plot of a positive series (residual histories).
void write_series_ppm(const std::string& path, const std::vector<double>& values);

}  // namespace mfg
