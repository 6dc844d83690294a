#include "mfg/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "mfg/error.hpp"

namespace mfg {

namespace {

constexpr char kMagic[8] = {'M', 'F', 'G', 'T', 'R', 'A', 'J', '1'};

template <class T>
void put(std::vector<unsigned char>& buf, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get(const unsigned char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

struct Rgb {
  unsigned char r, g, b;
};

// Blue-white-red ramp on [0, 1].
Rgb ramp(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  auto c = [](double x) { return static_cast<unsigned char>(std::lround(255.0 * std::clamp(x, 0.0, 1.0))); };
  if (t < 0.5) return {c(2.0 * t), c(2.0 * t), 255};
  return {255, c(2.0 - 2.0 * t), c(2.0 - 2.0 * t)};
}

void write_ppm(const std::string& path, int w, int h, const std::vector<Rgb>& px) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size() * 3));
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<Rgb> heat(const std::vector<double>& v) {
  double lo = v.empty() ? 0.0 : v[0], hi = lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<Rgb> px;
  px.reserve(v.size());
  for (double x : v) px.push_back(ramp((x - lo) / span));
  return px;
}

}  // namespace

static_assert(sizeof(Rgb) == 3);

void write_trajectory(const std::string& path, const Trajectory& traj) {
  const TorusGrid& g = traj.grid();
  std::vector<unsigned char> buf;
  buf.reserve(kTrajectoryHeaderBytes + traj.frame_count() * g.size() * 8);
  buf.insert(buf.end(), kMagic, kMagic + 8);
  put<std::int32_t>(buf, g.dim());
  put<std::int32_t>(buf, g.points_per_axis());
  put<std::uint64_t>(buf, g.steps());
  put<double>(buf, g.horizon());
  put<double>(buf, g.time_step());
  for (const Field& f : traj) {
    for (double v : f.values()) put<double>(buf, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trajectory '" + path + "'");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for trajectory '" + path + "'");
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kTrajectoryHeaderBytes) {
    throw FormatError(path + ": file has " + std::to_string(buf.size()) + " bytes, header needs " +
                      std::to_string(kTrajectoryHeaderBytes));
  }
  if (std::memcmp(buf.data(), kMagic, 8) != 0) throw FormatError(path + ": bad magic (expected MFGTRAJ1)");
  const int d = get<std::int32_t>(buf.data() + 8);
  const int n = get<std::int32_t>(buf.data() + 12);
  const auto steps = get<std::uint64_t>(buf.data() + 16);
  const double T = get<double>(buf.data() + 24);
  const double dt = get<double>(buf.data() + 32);
  if (d >= 1 && d <= kMaxDim && n > 0 && std::pow(static_cast<double>(n), d) * 8.0 > static_cast<double>(buf.size())) {
    throw FormatError(path + ": header claims " + std::to_string(n) + "^" + std::to_string(d) +
                      " points per frame, more than the file holds (" + std::to_string(buf.size()) + " bytes)");
  }
  if (steps >= buf.size()) throw FormatError(path + ": step count " + std::to_string(steps) + " exceeds file size");
  TorusGrid g;
  try {
    g = TorusGrid::from_header(d, n, T, dt, steps);
  } catch (const Error& e) {
    throw FormatError(path + ": bad header: " + e.what());
  }
  const std::size_t expected = kTrajectoryHeaderBytes + (steps + 1) * g.size() * 8;
  if (buf.size() != expected) {
    throw FormatError(path + ": expected " + std::to_string(expected) + " bytes, found " + std::to_string(buf.size()));
  }
  std::vector<Field> frames;
  frames.reserve(steps + 1);
  const unsigned char* p = buf.data() + kTrajectoryHeaderBytes;
  for (std::uint64_t k = 0; k <= steps; ++k) {
    std::vector<double> v(g.size());
    for (auto& x : v) {
      x = get<double>(p);
      p += 8;
    }
    frames.emplace_back(g, std::move(v));
  }
  return Trajectory(g, std::move(frames));
}

void write_field_ppm(const std::string& path, const Field& f) {
  const TorusGrid& g = f.grid();
  const int n = g.points_per_axis();
  if (g.dim() == 1) {
    write_ppm(path, n, 1, heat(std::vector<double>(f.values().begin(), f.values().end())));
    return;
  }
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v.push_back(f[i * g.stride(0) + j * g.stride(1)]);
  write_ppm(path, n, n, heat(v));
}

void write_spacetime_ppm(const std::string& path, const Trajectory& traj) {
  const TorusGrid& g = traj.grid();
  const int n = g.points_per_axis();
  // At most 512 rows; time runs downwards.
  const std::size_t frames = traj.frame_count();
  const std::size_t rows = std::min<std::size_t>(frames, 512);
  std::vector<double> v;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t k = rows == 1 ? 0 : r * (frames - 1) / (rows - 1);
    for (int i = 0; i < n; ++i) v.push_back(traj[k][i * g.stride(0)]);
  }
  write_ppm(path, n, static_cast<int>(rows), heat(v));
}

void write_series_ppm(const std::string& path, const std::vector<double>& values) {
  constexpr int W = 400, H = 200;
  std::vector<Rgb> px(static_cast<std::size_t>(W) * H, Rgb{255, 255, 255});
  std::vector<double> y;
  for (double v : values) y.push_back(v > 0.0 ? std::log10(v) : -300.0);
  if (!y.empty()) {
    double lo = *std::min_element(y.begin(), y.end()), hi = *std::max_element(y.begin(), y.end());
    if (hi <= lo) hi = lo + 1.0;
    int prev_x = -1, prev_y = -1;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const int x = y.size() == 1 ? 0 : static_cast<int>(i * (W - 1) / (y.size() - 1));
      const int row = static_cast<int>(std::lround((hi - y[i]) / (hi - lo) * (H - 1)));
      if (prev_x >= 0) {
        // Straight segment from the previous point.
        const int steps = std::max(std::abs(x - prev_x), std::abs(row - prev_y)) + 1;
        for (int s = 0; s <= steps; ++s) {
          const int xx = prev_x + (x - prev_x) * s / steps, yy = prev_y + (row - prev_y) * s / steps;
          px[static_cast<std::size_t>(yy) * W + xx] = Rgb{20, 20, 160};
        }
      }
      px[static_cast<std::size_t>(row) * W + x] = Rgb{200, 0, 0};
      prev_x = x;
      prev_y = row;
    }
  }
  write_ppm(path, W, H, px);
}

}  // namespace mfg
