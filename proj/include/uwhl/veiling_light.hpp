#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "uwhl/image.hpp"

namespace uwhl {

/// Symmetric-friendly 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> m{};

  static constexpr Mat3 identity(double s = 1.0) { return Mat3{{s, 0, 0, 0, s, 0, 0, 0, s}}; }
  static constexpr Mat3 diagonal(double a, double b, double c) { return Mat3{{a, 0, 0, 0, b, 0, 0, 0, c}}; }

  constexpr double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  constexpr double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

  [[nodiscard]] constexpr double trace() const { return m[0] + m[4] + m[8]; }

  [[nodiscard]] constexpr double determinant() const {
    const auto& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  }

  /// Positive-definite via Sylvester's criterion.
  [[nodiscard]] constexpr bool positive_definite() const {
    const auto& a = *this;
    const double d1 = a(0, 0);
    const double d2 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return d1 > 0.0 && d2 > 0.0 && determinant() > 0.0;
  }

  [[nodiscard]] Mat3 inverse() const {
    const auto& a = *this;
    const double det = determinant();
    if (!(std::abs(det) > std::numeric_limits<double>::min()) || !std::isfinite(det)) {
      throw Error("singular covariance");
    }
    Mat3 inv;
    inv(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / det;
    inv(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / det;
    inv(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / det;
    inv(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / det;
    inv(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / det;
    inv(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / det;
    inv(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / det;
    inv(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / det;
    inv(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / det;
    return inv;
  }

  /// vᵀ M v
  [[nodiscard]] constexpr double quadratic(const Rgb& v) const {
    double s = 0.0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) s += v[r] * (*this)(r, c) * v[c];
    return s;
  }
};

/// Water color and the color distribution of the object-free region.
struct VeilingLightEstimate {
  Rgb color;         ///< A
  PixelMask mask;    ///< VL pixels
  Rgb mean;          ///< mean of VL pixels (equals `color`)
  Mat3 covariance;   ///< regularized population covariance of VL pixels
  double dm_mean = 0.0;
  double dm_max = 0.0;
  double dm_std = 0.0;
};

/// Sobel gradient magnitude of the luminance, scaled by 1/8 so a unit ramp
/// of one level per pixel reads as 1. Borders are replicated.
inline GrayMap edge_strength(const LinearImage& img) {
  const int w = img.width();
  const int h = img.height();
  GrayMap lum(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) lum[i] = luminance(img[i]);
  auto at = [&](int x, int y) { return lum(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  GrayMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      out(x, y) = std::sqrt(gx * gx + gy * gy) / 8.0;
    }
  }
  return out;
}

/// Labels 8-connected components of the set pixels; returns one label per
/// pixel (-1 for unset) and fills `sizes`.
inline Image<int> label_components(const PixelMask& candidates, std::vector<std::size_t>& sizes) {
  const int w = candidates.width();
  const int h = candidates.height();
  Image<int> labels(w, h, -1);
  sizes.clear();
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (!candidates(x0, y0) || labels(x0, y0) >= 0) continue;
      const int label = static_cast<int>(sizes.size());
      std::size_t n = 0;
      labels(x0, y0) = label;
      stack.assign(1, {x0, y0});
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        ++n;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!candidates(nx, ny) || labels(nx, ny) >= 0) continue;
            labels(nx, ny) = label;
            stack.emplace_back(nx, ny);
          }
        }
      }
      sizes.push_back(n);
    }
  }
  return labels;
}

/// Largest 8-connected component (first in scan order on ties); empty mask if none.
inline PixelMask largest_component(const PixelMask& candidates) {
  std::vector<std::size_t> sizes;
  const auto labels = label_components(candidates, sizes);
  PixelMask out(candidates.width(), candidates.height());
  if (sizes.empty()) return out;
  const auto best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = labels[i] == best ? 1 : 0;
  return out;
}

inline double mahalanobis(const Rgb& p, const Rgb& mean, const Mat3& precision) {
  return std::sqrt(std::max(0.0, precision.quadratic(p - mean)));
}

/// Fits color, covariance and the Mahalanobis statistics on the pixels of `mask`.
inline VeilingLightEstimate fit_veiling_light(const LinearImage& img, PixelMask mask) {
  require_same_shape(img, mask, "veiling-light mask");
  const std::size_t n = count(mask);
  if (n == 0) throw Error("empty veiling-light region");

  VeilingLightEstimate est;
  est.mean = masked_mean(img, &mask);
  est.color = est.mean;
  for (int c = 0; c < 3; ++c) {
    if (!(est.color[c] > 0.0)) throw Error("veiling light must be positive in every channel");
  }

  Mat3 cov;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!mask[i]) continue;
    const Rgb d = img[i] - est.mean;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cov(r, c) += d[r] * d[c];
  }
  for (auto& v : cov.m) v /= static_cast<double>(n);
  const double tr = cov.trace();
  const double lambda = tr > 0.0 ? 1e-6 * tr / 3.0 : 1e-6;
  for (int c = 0; c < 3; ++c) cov(c, c) += lambda;
  if (!cov.positive_definite()) throw Error("singular covariance");
  est.covariance = cov;
  const Mat3 precision = cov.inverse();

  std::vector<double> dm;
  dm.reserve(n);
  for (std::size_t i = 0; i < img.size(); ++i)
    if (mask[i]) dm.push_back(mahalanobis(img[i], est.mean, precision));
  const double nd = static_cast<double>(n);
  double sum = 0.0;
  for (double d : dm) sum += d;
  est.dm_mean = sum / nd;
  est.dm_max = *std::max_element(dm.begin(), dm.end());
  double ss = 0.0;
  for (double d : dm) ss += (d - est.dm_mean) * (d - est.dm_mean);
  est.dm_std = std::sqrt(ss / nd);
  est.mask = std::move(mask);
  return est;
}

struct VeilingLightOptions {
  double edge_threshold = 0.05;
  double min_region_frac = 0.01;
  double stretch_low = 1.0;
  double stretch_high = 99.0;
};

/// Non-edge pixels of the stretched image; `exclude` pixels are never candidates.
inline PixelMask smooth_pixels(const LinearImage& img, double edge_threshold, double stretch_low, double stretch_high,
                               const PixelMask* exclude = nullptr) {
  const auto edges = edge_strength(contrast_stretch(img, stretch_low, stretch_high));
  PixelMask smooth(img.width(), img.height());
  for (std::size_t i = 0; i < smooth.size(); ++i) smooth[i] = edges[i] <= edge_threshold ? 1 : 0;
  return subtract(smooth, exclude);
}

/// Largest smooth region of the contrast-stretched image, taken as water.
inline VeilingLightEstimate estimate_veiling_light(const LinearImage& img, const VeilingLightOptions& opt = {},
                                                   const PixelMask* exclude = nullptr) {
  require_valid(img);
  if (!(opt.min_region_frac > 0.0 && opt.min_region_frac < 1.0)) throw Error("min_region_frac must be in (0,1)");
  auto region = largest_component(smooth_pixels(img, opt.edge_threshold, opt.stretch_low, opt.stretch_high, exclude));
  if (static_cast<double>(count(region)) < opt.min_region_frac * static_cast<double>(img.size()) ||
      count(region) == 0) {
    throw Error("no veiling-light region found");
  }
  return fit_veiling_light(img, std::move(region));
}

/// Statistics over a user-chosen rectangle.
inline VeilingLightEstimate manual_veiling_light(const LinearImage& img, const Rect& rect) {
  require_valid(img);
  if (rect.empty()) throw Error("empty veiling-light rectangle");
  if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > img.width() || rect.y + rect.h > img.height()) {
    throw Error("veiling-light rectangle outside image bounds");
  }
  return fit_veiling_light(img, rect_mask(img.width(), img.height(), rect));
}

/// Per-pixel Mahalanobis distance to the VL color distribution.
inline GrayMap mahalanobis_map(const LinearImage& img, const VeilingLightEstimate& est) {
  if (!est.covariance.positive_definite()) throw Error("singular covariance");
  const Mat3 precision = est.covariance.inverse();
  GrayMap out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = mahalanobis(img[i], est.mean, precision);
  return out;
}

}  // namespace uwhl
