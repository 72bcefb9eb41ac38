#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "uwhl/haze_lines.hpp"
#include "uwhl/image.hpp"
#include "uwhl/veiling_light.hpp"
#include "uwhl/water_types.hpp"

namespace uwhl {

/// Blue-channel transmission, values in [t_floor, 1].
struct TransmissionMap {
  GrayMap map;

  [[nodiscard]] int width() const { return map.width(); }
  [[nodiscard]] int height() const { return map.height(); }
  double& operator[](std::size_t i) { return map[i]; }
  double operator[](std::size_t i) const { return map[i]; }
};

/// Bound implied by J >= 0:
/// max{1 - I_B/A_B, (1 - I_G/A_G)^beta_BG, (1 - I_R/A_R)^beta_BR}.
/// Each base is clamped to [0,1] before the power.
inline GrayMap lower_bound(const LinearImage& img, const Rgb& veiling, const WaterType& wt) {
  for (int c = 0; c < 3; ++c)
    if (!(veiling[c] > 0.0)) throw Error("lower_bound: veiling light must be positive");
  const Rgb exponent{wt.beta_br, wt.beta_bg, 1.0};
  GrayMap out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    double t = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double base = std::clamp(1.0 - img[i][c] / veiling[c], 0.0, 1.0);
      t = std::max(t, std::pow(base, exponent[c]));
    }
    out[i] = std::clamp(t, 0.0, 1.0);
  }
  return out;
}

/// Mahalanobis-weighted blend of the lower bound (water-like pixels) and the
/// haze-line estimate (object pixels).
inline GrayMap soft_matte(const GrayMap& t_init, const GrayMap& t_lb, const GrayMap& dm,
                          const VeilingLightEstimate& est) {
  require_same_shape(t_init, t_lb, "soft_matte lower bound");
  require_same_shape(t_init, dm, "soft_matte Mahalanobis map");
  const double lo = est.dm_mean + est.dm_std;
  const double hi = est.dm_max + est.dm_std;
  const double span = est.dm_max - est.dm_mean;
  GrayMap out(t_init.width(), t_init.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = dm[i];
    if (d <= lo) {
      out[i] = t_lb[i];
    } else if (d >= hi || !(span > 0.0)) {
      out[i] = t_init[i];
    } else {
      // The numerator subtracts sigma but the denominator does not, so alpha
      // is clamped to keep the blend convex.
      const double alpha = std::clamp((d - est.dm_mean - est.dm_std) / span, 0.0, 1.0);
      out[i] = alpha * t_lb[i] + (1.0 - alpha) * t_init[i];
    }
  }
  return out;
}

namespace detail {

/// Summed-area table with a zero guard row/column.
class IntegralImage {
 public:
  template <class F>
  IntegralImage(int w, int h, F&& value) : w_(w), h_(h), s_(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += value(static_cast<std::size_t>(y) * w + x);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  /// Sum over the inclusive rectangle [x0,x1] x [y0,y1].
  [[nodiscard]] double sum(int x0, int y0, int x1, int y1) const {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) { return s_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  [[nodiscard]] double at(int x, int y) const { return s_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  int w_;
  int h_;
  std::vector<double> s_;
};

}  // namespace detail

/// Mean over the (2r+1)^2 window clipped to the image.
template <class F>
GrayMap box_mean(int w, int h, int radius, F&& value) {
  const detail::IntegralImage sat(w, h, value);
  GrayMap out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius);
    const int y1 = std::min(h - 1, y + radius);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      const double n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
      out(x, y) = sat.sum(x0, y0, x1, y1) / n;
    }
  }
  return out;
}

/// Guided image filter with a color guide: a local linear model
/// q = a·I + b fitted in every window, coefficients averaged over the
/// windows covering each pixel.
inline GrayMap guided_filter(const GrayMap& map, const LinearImage& guidance, int radius, double eps) {
  require_same_shape(map, guidance, "guided_filter guidance");
  if (radius < 1) throw Error("guided_filter: radius must be >= 1");
  if (!(eps > 0.0)) throw Error("guided_filter: eps must be > 0");
  const int w = map.width();
  const int h = map.height();
  auto mean = [&](auto&& f) { return box_mean(w, h, radius, f); };

  std::array<GrayMap, 3> mu;
  std::array<GrayMap, 3> mu_ip;
  for (int c = 0; c < 3; ++c) {
    mu[c] = mean([&](std::size_t i) { return guidance[i][c]; });
    mu_ip[c] = mean([&](std::size_t i) { return guidance[i][c] * map[i]; });
  }
  const GrayMap mu_p = mean([&](std::size_t i) { return map[i]; });
  // Second moments of the guide: rr rg rb gg gb bb.
  constexpr std::array<std::pair<int, int>, 6> kPairs{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  std::array<GrayMap, 6> mu_ii;
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto [a, b] = kPairs[k];
    mu_ii[k] = mean([&](std::size_t i) { return guidance[i][a] * guidance[i][b]; });
  }

  std::array<GrayMap, 3> coef_a{GrayMap(w, h), GrayMap(w, h), GrayMap(w, h)};
  GrayMap coef_b(w, h);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Rgb m{mu[0][i], mu[1][i], mu[2][i]};
    Mat3 sigma;
    for (std::size_t k = 0; k < kPairs.size(); ++k) {
      const auto [a, b] = kPairs[k];
      const double v = mu_ii[k][i] - m[a] * m[b];
      sigma(a, b) = v;
      sigma(b, a) = v;
    }
    for (int c = 0; c < 3; ++c) sigma(c, c) += eps;
    const Rgb cov_ip{mu_ip[0][i] - m.r * mu_p[i], mu_ip[1][i] - m.g * mu_p[i], mu_ip[2][i] - m.b * mu_p[i]};
    const Mat3 inv = sigma.inverse();
    Rgb a;
    for (int r = 0; r < 3; ++r) a[r] = inv(r, 0) * cov_ip.r + inv(r, 1) * cov_ip.g + inv(r, 2) * cov_ip.b;
    for (int c = 0; c < 3; ++c) coef_a[c][i] = a[c];
    coef_b[i] = mu_p[i] - dot(a, m);
  }

  std::array<GrayMap, 3> mean_a;
  for (int c = 0; c < 3; ++c) mean_a[c] = mean([&](std::size_t i) { return coef_a[c][i]; });
  const GrayMap mean_b = mean([&](std::size_t i) { return coef_b[i]; });

  GrayMap out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = mean_a[0][i] * guidance[i].r + mean_a[1][i] * guidance[i].g + mean_a[2][i] * guidance[i].b + mean_b[i];
  }
  return out;
}

/// Masked pixels take the value of the nearest unmasked pixel below them in
/// the same column, or above when nothing lies below. Columns that are fully
/// masked are left untouched.
inline void fill_masked_from_below(GrayMap& map, const PixelMask& mask) {
  require_same_shape(map, mask, "fill mask");
  for (int x = 0; x < map.width(); ++x) {
    // Rows at and below `tail` have no unmasked pixel beneath them.
    int tail = map.height();
    while (tail > 0 && mask(x, tail - 1)) --tail;
    std::optional<double> below;
    for (int y = tail - 1; y >= 0; --y) {
      if (!mask(x, y)) {
        below = map(x, y);
      } else {
        map(x, y) = *below;
      }
    }
    if (tail > 0 && tail < map.height()) {
      const double above = map(x, tail - 1);
      for (int y = tail; y < map.height(); ++y) map(x, y) = above;
    }
  }
}

struct TransmissionOptions {
  int n_hazelines = 500;
  std::size_t min_line_size = 50;
  double t_floor = 0.05;
  int gf_radius = 0;  ///< 0 selects max(8, width / 50)
  double gf_eps = 1e-3;
  double stretch_low = 1.0;
  double stretch_high = 99.0;

  [[nodiscard]] int radius_for(int width) const { return gf_radius > 0 ? gf_radius : std::max(8, width / 50); }
};

/// Intermediate maps of one transmission estimate.
struct TransmissionStages {
  GrayMap initial;
  GrayMap lower;
  GrayMap matted;
};

/// Holds what is shared across water types for one image: the veiling-light
/// estimate, the Mahalanobis map, the stretched guide and the haze-line
/// directions.
class TransmissionEstimator {
 public:
  TransmissionEstimator(const LinearImage& img, VeilingLightEstimate est, TransmissionOptions opt = {},
                        const PixelMask* exclude = nullptr)
      : img_(img),
        est_(std::move(est)),
        opt_(opt),
        dm_(mahalanobis_map(img, est_)),
        guidance_(contrast_stretch(img, opt.stretch_low, opt.stretch_high)),
        directions_(sphere_directions(opt.n_hazelines)) {
    require_valid(img);
    if (!(opt_.t_floor > 0.0 && opt_.t_floor < kNearestPixelTransmission)) {
      throw Error("t_floor must be in (0, 0.9)");
    }
    if (exclude != nullptr) {
      require_same_shape(img, *exclude, "exclusion mask");
      if (count(*exclude) > 0) exclude_ = *exclude;
    }
  }

  [[nodiscard]] const VeilingLightEstimate& veiling() const { return est_; }
  [[nodiscard]] const GrayMap& mahalanobis() const { return dm_; }
  [[nodiscard]] const LinearImage& guidance() const { return guidance_; }
  [[nodiscard]] const TransmissionOptions& options() const { return opt_; }
  [[nodiscard]] const PixelMask* exclude() const { return exclude_ ? &*exclude_ : nullptr; }

  /// medium_compensate -> cluster -> initial estimate -> soft matte ->
  /// guided filter -> clamp to [t_floor, 1].
  [[nodiscard]] TransmissionMap estimate(const WaterType& wt, TransmissionStages* stages = nullptr) const {
    const auto comp = medium_compensate(img_, est_.color, wt);
    const auto clusters = cluster_pixels(comp, directions_, exclude());
    GrayMap initial = initial_transmission(clusters, opt_.min_line_size, opt_.t_floor);
    GrayMap lower = lower_bound(img_, est_.color, wt);
    GrayMap matted = soft_matte(initial, lower, dm_, est_);
    if (exclude_) fill_masked_from_below(matted, *exclude_);
    GrayMap refined = guided_filter(matted, guidance_, opt_.radius_for(img_.width()), opt_.gf_eps);
    if (exclude_) fill_masked_from_below(refined, *exclude_);
    for (auto& v : refined.pixels()) v = std::clamp(v, opt_.t_floor, 1.0);
    if (stages != nullptr) *stages = {std::move(initial), std::move(lower), std::move(matted)};
    return {std::move(refined)};
  }

 private:
  const LinearImage& img_;
  VeilingLightEstimate est_;
  TransmissionOptions opt_;
  GrayMap dm_;
  LinearImage guidance_;
  std::vector<Rgb> directions_;
  std::optional<PixelMask> exclude_;
};

inline TransmissionMap estimate_transmission(const LinearImage& img, const VeilingLightEstimate& est,
                                             const WaterType& wt, const TransmissionOptions& opt = {},
                                             const PixelMask* exclude = nullptr) {
  return TransmissionEstimator(img, est, opt, exclude).estimate(wt);
}

}  // namespace uwhl
