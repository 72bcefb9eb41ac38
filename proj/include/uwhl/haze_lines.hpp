#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "uwhl/image.hpp"
#include "uwhl/water_types.hpp"

namespace uwhl {

/// Signed per-pixel vectors in medium-compensated space. Under the image
/// formation model every channel here shares the blue transmission.
using CompensatedImage = Image<Rgb>;

inline double signed_power(double v, double p) { return std::copysign(std::pow(std::abs(v), p), v); }

/// (I - A) with R and G raised to beta_BR and beta_BG, sign preserved.
inline CompensatedImage medium_compensate(const LinearImage& img, const Rgb& veiling, const WaterType& wt) {
  CompensatedImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const Rgb d = img[i] - veiling;
    out[i] = {signed_power(d.r, wt.beta_br), signed_power(d.g, wt.beta_bg), d.b};
  }
  return out;
}

/// `n` nearly uniform unit vectors on the sphere (golden-angle spiral with
/// both poles included). Deterministic in `n`.
inline std::vector<Rgb> sphere_directions(int n) {
  if (n < 2) throw Error("sphere_directions: need at least 2 directions");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Rgb> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    Rgb d{rho * std::cos(phi), rho * std::sin(phi), z};
    dirs.push_back(d * (1.0 / norm(d)));
  }
  return dirs;
}

/// Index of the direction with maximal cosine similarity to `v`; the lowest
/// index wins ties and a zero vector maps to 0.
inline int nearest_direction(const Rgb& v, const std::vector<Rgb>& dirs) {
  int best = 0;
  if (norm(v) > 0.0) {
    double best_dot = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const double d = dot(dirs[k], v);
      if (d > best_dot) {
        best_dot = d;
        best = static_cast<int>(k);
      }
    }
  }
  return best;
}

struct HazeLineClustering {
  std::vector<Rgb> directions;
  Image<int> assignment;
  GrayMap radius;
  /// Per-line maximal radius and population over the counted pixels.
  std::vector<double> line_rmax;
  std::vector<std::size_t> line_size;
  /// Pixels that took part in the per-line statistics.
  PixelMask counted;
};

/// Assigns each pixel to the direction of maximal cosine similarity (lowest
/// index on ties; zero vectors go to line 0). Pixels in `exclude` are
/// assigned but left out of the per-line maxima and sizes.
inline HazeLineClustering cluster_pixels(const CompensatedImage& comp, std::vector<Rgb> directions,
                                         const PixelMask* exclude = nullptr) {
  if (directions.empty()) throw Error("cluster_pixels: no directions");
  HazeLineClustering out;
  out.directions = std::move(directions);
  const auto& dirs = out.directions;
  out.assignment = Image<int>(comp.width(), comp.height(), 0);
  out.radius = GrayMap(comp.width(), comp.height());
  out.line_rmax.assign(dirs.size(), 0.0);
  out.line_size.assign(dirs.size(), 0);
  out.counted = PixelMask(comp.width(), comp.height(), 1);
  if (exclude != nullptr) {
    require_same_shape(comp, *exclude, "cluster exclusion mask");
    out.counted = invert(*exclude);
  }

  for (std::size_t i = 0; i < comp.size(); ++i) {
    const Rgb v = comp[i];
    const double r = norm(v);
    const int best = nearest_direction(v, dirs);
    out.assignment[i] = best;
    out.radius[i] = r;
    if (out.counted[i]) {
      auto k = static_cast<std::size_t>(best);
      out.line_rmax[k] = std::max(out.line_rmax[k], r);
      ++out.line_size[k];
    }
  }
  return out;
}

/// Factor applied to r / r_max: the nearest pixel of a haze-line is assumed
/// to sit at blue transmission 0.9 rather than at 1.
inline constexpr double kNearestPixelTransmission = 0.9;

/// t~_B = 0.9 * r / r_max(line), clamped to [t_floor, 0.9]. Lines with fewer
/// than `min_line_size` counted pixels use the 99th percentile of all nonzero
/// counted radii as r_max.
inline GrayMap initial_transmission(const HazeLineClustering& cl, std::size_t min_line_size, double t_floor) {
  const auto& radius = cl.radius;
  GrayMap out(radius.width(), radius.height(), t_floor);

  std::vector<double> nonzero;
  nonzero.reserve(radius.size());
  for (std::size_t i = 0; i < radius.size(); ++i)
    if (cl.counted[i] && radius[i] > 0.0) nonzero.push_back(radius[i]);
  if (nonzero.empty()) return out;
  const double global_rmax = percentile(nonzero, 99.0);

  for (std::size_t i = 0; i < radius.size(); ++i) {
    const auto k = static_cast<std::size_t>(cl.assignment[i]);
    const double rmax = cl.line_size[k] >= min_line_size && cl.line_rmax[k] > 0.0 ? cl.line_rmax[k] : global_rmax;
    const double ratio = std::min(1.0, radius[i] / rmax);
    out[i] = std::clamp(kNearestPixelTransmission * ratio, t_floor, kNearestPixelTransmission);
  }
  return out;
}

}  // namespace uwhl
