#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "uwhl/chart.hpp"
#include "uwhl/image.hpp"
#include "uwhl/transmission.hpp"
#include "uwhl/water_types.hpp"

namespace uwhl {

/// Ground truth for one simulated underwater image. Non-finite distances are
/// open water (zero transmission).
struct SyntheticScene {
  LinearImage radiance;
  GrayMap distance;
  Rgb veiling;
  WaterType water_type;
  double beta_b = 0.1;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;
  std::vector<ChartSpec> charts;
  /// Chart pixels (frames included); empty when the scene has no charts.
  PixelMask chart_mask;
};

/// (beta_R, beta_G, beta_B) in 1/m.
inline Rgb attenuation_coefficients(const WaterType& wt, double beta_b) {
  return {beta_b / wt.beta_br, beta_b / wt.beta_bg, beta_b};
}

inline void validate(const SyntheticScene& s) {
  require_valid(s.radiance);
  require_same_shape(s.radiance, s.distance, "scene distance");
  validate(s.water_type);
  if (!(s.beta_b > 0.0)) throw Error("scene: beta_b must be > 0");
  if (!(s.noise_sigma >= 0.0)) throw Error("scene: noise_sigma must be >= 0");
  for (double z : s.distance.pixels())
    if (z < 0.0) throw Error("scene: negative distance");
}

/// I_c = t_c J_c + (1 - t_c) A_c + noise with t_c = exp(-beta_c z).
inline LinearImage synthesize(const SyntheticScene& scene, bool clamp = true) {
  validate(scene);
  const Rgb beta = attenuation_coefficients(scene.water_type, scene.beta_b);
  std::mt19937_64 rng(scene.noise_seed);
  std::normal_distribution<double> noise(0.0, scene.noise_sigma > 0.0 ? scene.noise_sigma : 1.0);
  LinearImage out(scene.radiance.width(), scene.radiance.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double z = scene.distance[i];
    Rgb p;
    for (int c = 0; c < 3; ++c) {
      const double t = std::isfinite(z) ? std::exp(-beta[c] * z) : 0.0;
      double v = t * scene.radiance[i][c] + (1.0 - t) * scene.veiling[c];
      if (scene.noise_sigma > 0.0) v += noise(rng);
      p[c] = clamp ? std::clamp(v, 0.0, 1.0) : v;
    }
    out[i] = p;
  }
  return out;
}

/// t_B = exp(-beta_B z); zero where the distance is non-finite.
inline TransmissionMap true_transmission(const SyntheticScene& scene) {
  GrayMap t(scene.distance.width(), scene.distance.height());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double z = scene.distance[i];
    t[i] = std::isfinite(z) ? std::exp(-scene.beta_b * z) : 0.0;
  }
  return {std::move(t)};
}

enum class SceneKind { planes, ramp, charts };

inline SceneKind parse_scene_kind(std::string_view s) {
  if (s == "planes") return SceneKind::planes;
  if (s == "ramp") return SceneKind::ramp;
  if (s == "charts") return SceneKind::charts;
  throw Error("unknown scene kind '" + std::string(s) + "' (expected planes, ramp, charts)");
}

struct SceneOptions {
  int width = 256;
  int height = 256;
  std::optional<WaterType> water_type;  ///< defaults to builtin "3C"
  double beta_b = 0.0;                  ///< 0 places the nearest objects at 1 m
  double noise_sigma = 0.0;
};

/// Blue transmission of the nearest objects in generated scenes.
inline constexpr double kNearTransmission = 0.9;
/// Transmission of the most attenuated channel at the three chart distances.
inline constexpr std::array<double, 3> kChartChannelTransmission{0.35, 0.25, 0.18};
/// Transmission of the most attenuated channel at the far end of a ramp.
inline constexpr double kRampFarChannelTransmission = 0.1;
inline constexpr std::array<double, kGrayPatches> kGrayLevels{0.9, 0.7, 0.5, 0.35, 0.2, 0.1};

/// Water color for a type: the least attenuated channel is brightest,
/// A_c = 0.5 exp(-4 (beta_c - beta_min) / beta_max).
inline Rgb typical_veiling_light(const WaterType& wt) {
  const Rgb beta = attenuation_coefficients(wt, 1.0);
  const double bmax = std::max({beta.r, beta.g, beta.b});
  const double bmin = std::min({beta.r, beta.g, beta.b});
  Rgb a;
  for (int c = 0; c < 3; ++c) a[c] = 0.5 * std::exp(-4.0 * (beta[c] - bmin) / bmax);
  return a;
}

namespace detail {

/// Distance at which the most attenuated channel transmits `tau`.
inline double distance_for_channel_transmission(const Rgb& beta, double tau) {
  return -std::log(tau) / std::max({beta.r, beta.g, beta.b});
}

/// Direction of a radiance in medium-compensated space.
inline Rgb compensated_direction(const Rgb& j, const Rgb& veiling, const WaterType& wt) {
  const Rgb d = j - veiling;
  const Rgb v{std::copysign(std::pow(std::abs(d.r), wt.beta_br), d.r),
              std::copysign(std::pow(std::abs(d.g), wt.beta_bg), d.g), d.b};
  return v * (1.0 / norm(v));
}

struct PaletteRules {
  double min_angle_deg = 8.0;   ///< between any two colors in compensated space
  int cells = 500;              ///< colors must fall in distinct cells of this many directions
  double min_luma_gap = 0.12;   ///< |luminance - water luminance| at the nearest distance
  double min_spread = 0.6;      ///< max - min channel of each base color
  int max_groups = 4;
  int draws_per_group = 2000;
};

/// Random base colors plus every channel permutation of each, so the palette
/// has equal channel means. A base color is accepted only if all of its
/// permutations are at least `min_angle_deg` away from every accepted color in
/// the compensated space of the generating water type and falls in a cell of
/// its own among `cells` haze-line directions (each color then owns its
/// haze-line) and, seen at transmission `near_t`, differ in luminance from
/// the water by `min_luma_gap` (objects next to the water are separated from
/// it by an edge). A wide channel spread keeps neighbouring blocks apart in
/// luminance. At least one group is always returned: if none fits, every rule
/// is relaxed by 10% and the draw restarts.
inline std::vector<Rgb> balanced_palette(std::mt19937_64& rng, const Rgb& veiling, const WaterType& wt,
                                         const Rgb& near_t, PaletteRules rules = {}) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const auto cells = sphere_directions(rules.cells);
  std::vector<Rgb> palette;
  std::vector<Rgb> dirs;
  std::vector<int> taken;
  double min_cos = std::cos(rules.min_angle_deg * std::numbers::pi / 180.0);
  int failures = 0;
  while (static_cast<int>(palette.size()) < 6 * rules.max_groups) {
    std::array<double, 3> v{u(rng), u(rng), u(rng)};
    std::sort(v.begin(), v.end());
    bool ok = v[2] - v[0] >= rules.min_spread;
    std::vector<Rgb> group;
    std::vector<Rgb> group_dirs;
    std::vector<int> group_cells;
    do {
      const Rgb c{v[0], v[1], v[2]};
      Rgb seen;
      for (int k = 0; k < 3; ++k) seen[k] = near_t[k] * c[k] + (1.0 - near_t[k]) * veiling[k];
      ok = ok && std::abs(luminance(seen) - luminance(veiling)) >= rules.min_luma_gap;
      const Rgb d = compensated_direction(c, veiling, wt);
      for (const auto& o : dirs) ok = ok && dot(d, o) < min_cos;
      for (const auto& o : group_dirs) ok = ok && dot(d, o) < min_cos;
      const int cell = nearest_direction(d, cells);
      ok = ok && std::find(taken.begin(), taken.end(), cell) == taken.end() &&
           std::find(group_cells.begin(), group_cells.end(), cell) == group_cells.end();
      group.push_back(c);
      group_dirs.push_back(d);
      group_cells.push_back(cell);
    } while (ok && std::next_permutation(v.begin(), v.end()));
    if (ok) {
      palette.insert(palette.end(), group.begin(), group.end());
      dirs.insert(dirs.end(), group_dirs.begin(), group_dirs.end());
      taken.insert(taken.end(), group_cells.begin(), group_cells.end());
      failures = 0;
    } else if (++failures >= rules.draws_per_group) {
      if (!palette.empty()) break;
      failures = 0;
      min_cos = std::cos(std::acos(min_cos) * 0.9);
      rules.min_luma_gap *= 0.9;
      rules.min_spread *= 0.9;
    }
  }
  return palette;
}

/// Fills rows [y0, y1) with square blocks; each run of palette.size() blocks
/// is a fresh shuffle, so all colors are used about equally often.
inline void paint_blocks(LinearImage& img, int y0, int y1, int block, const std::vector<Rgb>& palette,
                         std::mt19937_64& rng) {
  const int cols = (img.width() + block - 1) / block;
  std::vector<std::size_t> order;
  std::size_t next = 0;
  for (int by = y1; by > y0; by -= block) {
    for (int bx = 0; bx < cols; ++bx) {
      if (next == order.size()) {
        order.resize(palette.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        next = 0;
      }
      const Rgb color = palette[order[next++]];
      for (int y = std::max(y0, by - block); y < by; ++y)
        for (int x = bx * block; x < std::min(img.width(), (bx + 1) * block); ++x) img(x, y) = color;
    }
  }
}

}  // namespace detail

/// Deterministic test scenes, textured with 2x2 blocks. All have open water in
/// the top quarter bordered by the nearest objects (blue transmission 0.9), so
/// the waterline is always a luminance edge:
///  - planes: two fronto-parallel planes, the near one directly below the water;
///  - ramp:   distance rising linearly from the waterline to the bottom row;
///  - charts: a near band below the water, then three bands each carrying a
///            chart of six gray patches, distance falling towards the bottom.
inline SyntheticScene make_test_scene(SceneKind kind, std::uint64_t seed, const SceneOptions& opt = {}) {
  if (opt.width < 64 || opt.height < 64) throw Error("make_test_scene: image must be at least 64x64");
  SyntheticScene s;
  s.water_type = opt.water_type ? *opt.water_type : builtin_library().at("3C");
  validate(s.water_type);
  const double z_near = 1.0;
  s.beta_b = opt.beta_b > 0.0 ? opt.beta_b : -std::log(kNearTransmission) / z_near;
  const double near = -std::log(kNearTransmission) / s.beta_b;
  const Rgb beta = attenuation_coefficients(s.water_type, s.beta_b);
  s.veiling = typical_veiling_light(s.water_type);
  s.noise_sigma = opt.noise_sigma;
  s.noise_seed = seed * 0x9E3779B97F4A7C15ULL + 1;

  const int w = opt.width;
  const int h = opt.height;
  const int water_rows = h / 4;
  const int block = 2;
  s.radiance = LinearImage(w, h, s.veiling);
  s.distance = GrayMap(w, h, std::numeric_limits<double>::infinity());

  std::mt19937_64 rng(seed);
  Rgb near_t;
  for (int c = 0; c < 3; ++c) near_t[c] = std::exp(-beta[c] * near);
  const auto palette = detail::balanced_palette(rng, s.veiling, s.water_type, near_t);
  detail::paint_blocks(s.radiance, water_rows, h, block, palette, rng);

  switch (kind) {
    case SceneKind::planes: {
      const double far = std::max(near * 1.5, detail::distance_for_channel_transmission(beta, 0.2));
      const int mid = water_rows + (h - water_rows) / 2;
      for (int y = water_rows; y < h; ++y)
        for (int x = 0; x < w; ++x) s.distance(x, y) = y < mid ? near : far;
      break;
    }
    case SceneKind::ramp: {
      const double far = std::max(near * 1.5, detail::distance_for_channel_transmission(beta, kRampFarChannelTransmission));
      for (int y = water_rows; y < h; ++y) {
        const double f = static_cast<double>(y - water_rows) / static_cast<double>(h - 1 - water_rows);
        for (int x = 0; x < w; ++x) s.distance(x, y) = near + f * (far - near);
      }
      break;
    }
    case SceneKind::charts: {
      const int band = (h - water_rows) / 4;
      const int patch = std::max(4, w / 32);
      const int gap = std::max(1, patch / 4);
      const int chart_w = static_cast<int>(kGrayPatches) * patch + (static_cast<int>(kGrayPatches) + 1) * gap;
      const int chart_h = patch + 2 * gap;
      s.chart_mask = PixelMask(w, h);
      double previous = near;
      for (int b = 0; b < 4; ++b) {
        // Band 0 (nearest) sits just below the water; bands 1..3 follow it
        // from the bottom of the frame upwards.
        const int y1 = b == 0 ? water_rows + band : h - (b - 1) * band;
        const int y0 = b == 0 ? water_rows : (b == 3 ? water_rows + band : y1 - band);
        double z = near;
        if (b > 0) {
          z = std::max(previous * 1.05,
                       detail::distance_for_channel_transmission(beta, kChartChannelTransmission[b - 1]));
        }
        previous = z;
        for (int y = y0; y < y1; ++y)
          for (int x = 0; x < w; ++x) s.distance(x, y) = z;
        if (b == 0) continue;

        const int cx = (w - chart_w) * b / 4;
        const int cy = y0 + std::max(2, band / 6);
        ChartSpec chart;
        chart.id = std::to_string(b);
        for (int y = cy; y < cy + chart_h; ++y) {
          for (int x = cx; x < cx + chart_w; ++x) {
            s.radiance(x, y) = {0.05, 0.05, 0.05};
            s.chart_mask(x, y) = 1;
          }
        }
        for (std::size_t p = 0; p < kGrayPatches; ++p) {
          const Rect r{cx + gap + static_cast<int>(p) * (patch + gap), cy + gap, patch, patch};
          chart.patches[p] = r;
          const double g = kGrayLevels[p];
          for (int y = r.y; y < r.y + r.h; ++y)
            for (int x = r.x; x < r.x + r.w; ++x) s.radiance(x, y) = {g, g, g};
        }
        s.charts.push_back(chart);
      }
      break;
    }
  }
  return s;
}

}  // namespace uwhl
