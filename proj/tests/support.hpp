#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "wmfi/grid.hpp"

namespace wmfi::test {

inline constexpr double pi = std::numbers::pi;

inline GridSpec square(int n, double L = 50.0) { return GridSpec{n, n + 1, L, L}; }

/// Smooth random field: a few low modes with random amplitudes and phases, so
/// stencil tests are not dominated by grid-scale noise.
inline Field smooth_random(const GridSpec& g, BcClass bc, std::uint64_t seed, int modes = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * pi);
  Field f(g, bc);
  for (int m = 0; m < modes; ++m) {
    const int kx = m % 3 + 1;
    const int ky = m / 2 + 1;
    const double A = amp(rng), px = phase(rng), py = phase(rng);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        f(i, j) += A * std::cos(2 * pi * kx * g.x(i) / g.Lx + px) * std::cos(pi * ky * g.y(j) / g.Ly + py);
  }
  return f;
}

/// White-noise field (for identities that must hold for any data).
inline Field noise(const GridSpec& g, BcClass bc, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g, bc);
  for (double& v : f.values()) v = n(rng);
  return f;
}

/// Zeroes both wall rows (homogeneous Dirichlet data).
inline Field zero_walls(Field f) {
  for (int i = 0; i < f.grid().nx; ++i) {
    f(i, 0) = 0.0;
    f(i, f.grid().ny - 1) = 0.0;
  }
  return f;
}

/// Max |f| over rows [j0, ny - 1 - j0] and columns [i0, nx - 1 - i0].
inline double max_abs_inner(const Field& f, int i0 = 0, int j0 = 1) {
  double m = 0.0;
  for (int j = j0; j < f.grid().ny - j0; ++j)
    for (int i = i0; i < f.grid().nx - i0; ++i) m = std::max(m, std::abs(f(i, j)));
  return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("wmfi_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace wmfi::test
