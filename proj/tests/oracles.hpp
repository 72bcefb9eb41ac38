#pragma once

// Slow reference implementations the library is checked against.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "uwhl/uwhl.hpp"

namespace oracle {

using uwhl::GrayMap;
using uwhl::LinearImage;
using uwhl::Rgb;

/// Smallest angle, lowest index first.
inline int nearest_by_angle(const Rgb& v, const std::vector<Rgb>& dirs) {
  const double n = uwhl::norm(v);
  if (!(n > 0.0)) return 0;
  int best = 0;
  double best_angle = 10.0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const double c = std::clamp(uwhl::dot(v, dirs[k]) / (n * uwhl::norm(dirs[k])), -1.0, 1.0);
    const double a = std::acos(c);
    if (a < best_angle) {
      best_angle = a;
      best = static_cast<int>(k);
    }
  }
  return best;
}

inline double pearson_two_pass(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Gaussian elimination with partial pivoting.
template <std::size_t N>
std::array<double, N> solve(std::array<std::array<double, N + 1>, N> m) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (std::size_t r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= N; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, N> x{};
  for (std::size_t r = 0; r < N; ++r) x[r] = m[r][N] / m[r][r];
  return x;
}

/// Guided filter straight from its definition: in every (clipped) window
/// solve the ridge least-squares problem for q = a·I + b, then average the
/// predictions of all windows covering a pixel.
inline GrayMap guided_filter(const GrayMap& p, const LinearImage& guide, int r, double eps) {
  const int w = p.width();
  const int h = p.height();
  std::vector<std::array<double, 4>> coef(static_cast<std::size_t>(w) * h);
  for (int ky = 0; ky < h; ++ky) {
    for (int kx = 0; kx < w; ++kx) {
      std::array<std::array<double, 5>, 4> m{};
      double n = 0.0;
      for (int y = std::max(0, ky - r); y <= std::min(h - 1, ky + r); ++y) {
        for (int x = std::max(0, kx - r); x <= std::min(w - 1, kx + r); ++x) {
          const Rgb g = guide(x, y);
          const std::array<double, 4> f{g.r, g.g, g.b, 1.0};
          for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) m[a][b] += f[a] * f[b];
            m[a][4] += f[a] * p(x, y);
          }
          n += 1.0;
        }
      }
      for (auto& row : m)
        for (auto& v : row) v /= n;
      for (int a = 0; a < 3; ++a) m[a][a] += eps;
      coef[static_cast<std::size_t>(ky) * w + kx] = solve<4>(m);
    }
  }
  GrayMap q(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb g = guide(x, y);
      double sum = 0.0;
      double n = 0.0;
      for (int ky = std::max(0, y - r); ky <= std::min(h - 1, y + r); ++ky) {
        for (int kx = std::max(0, x - r); kx <= std::min(w - 1, x + r); ++kx) {
          const auto& c = coef[static_cast<std::size_t>(ky) * w + kx];
          sum += c[0] * g.r + c[1] * g.g + c[2] * g.b + c[3];
          n += 1.0;
        }
      }
      q(x, y) = sum / n;
    }
  }
  return q;
}

inline LinearImage random_image(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  LinearImage img(w, h);
  for (auto& p : img.pixels()) p = {u(rng), u(rng), u(rng)};
  return img;
}

inline double max_abs_diff(const GrayMap& a, const GrayMap& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
