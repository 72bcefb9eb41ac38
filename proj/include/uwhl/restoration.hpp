#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "uwhl/config.hpp"
#include "uwhl/image.hpp"
#include "uwhl/transmission.hpp"
#include "uwhl/veiling_light.hpp"
#include "uwhl/water_types.hpp"

namespace uwhl {

/// J_c = A_c + (I_c - A_c) / t_B^(beta_c / beta_B), clamped to [0, clip_max].
inline LinearImage recover_radiance(const LinearImage& img, const Rgb& veiling, const TransmissionMap& t,
                                    const WaterType& wt, double clip_max = 1.5) {
  require_same_shape(img, t.map, "recover_radiance transmission");
  const Rgb exponent = wt.channel_exponents();
  LinearImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double tb = t[i];
    if (!(tb > 0.0)) throw Error("recover_radiance: transmission must be positive");
    Rgb j;
    for (int c = 0; c < 3; ++c) {
      j[c] = std::clamp(veiling[c] + (img[i][c] - veiling[c]) / std::pow(tb, exponent[c]), 0.0, clip_max);
    }
    out[i] = j;
  }
  return out;
}

/// Per-channel means over the mask.
inline Rgb channel_means(const LinearImage& img, const PixelMask& mask) {
  require_same_shape(img, mask, "channel means mask");
  if (count(mask) == 0) throw Error("empty mask");
  return masked_mean(img, &mask);
}

/// Gains g_c = L / mu_c with L the mean of the three channel means over the mask.
inline Rgb white_balance_gains(const LinearImage& img, const PixelMask& mask) {
  const Rgb mu = channel_means(img, mask);
  const double level = (mu.r + mu.g + mu.b) / 3.0;
  Rgb g;
  for (int c = 0; c < 3; ++c) {
    if (!(mu[c] > 0.0)) throw Error("degenerate channel");
    g[c] = level / mu[c];
  }
  return g;
}

/// Gray-world white balance: gains measured on the mask, applied to every pixel.
inline LinearImage white_balance(const LinearImage& img, const PixelMask& object_mask,
                                 double clip_max = std::numeric_limits<double>::infinity()) {
  const Rgb g = white_balance_gains(img, object_mask);
  LinearImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < 3; ++c) out[i][c] = std::clamp(img[i][c] * g[c], 0.0, clip_max);
  }
  return out;
}

/// |mu_R - mu_G| + |mu_G - mu_B| + |mu_R - mu_B| over the mask; lower is grayer.
inline double gray_world_score(const LinearImage& img, const PixelMask& object_mask) {
  const Rgb mu = channel_means(img, object_mask);
  return std::abs(mu.r - mu.g) + std::abs(mu.g - mu.b) + std::abs(mu.r - mu.b);
}

struct RestorationCandidate {
  WaterType water_type;
  LinearImage restored;  ///< after white balance
  TransmissionMap transmission;
  double gray_world_score = 0.0;
};

struct RestorationResult {
  std::vector<RestorationCandidate> candidates;
  std::size_t selected = 0;
  VeilingLightEstimate veiling;
  /// Pixels the selection statistics were computed on (not VL, not excluded).
  PixelMask object_mask;

  [[nodiscard]] const RestorationCandidate& best() const { return candidates.at(selected); }
};

struct RestoreOptions {
  /// Keep restored images and maps of every candidate, not just the winner.
  bool keep_all = true;
};

/// Picks the lowest score, first occurrence on ties.
inline std::size_t select_candidate(const std::vector<RestorationCandidate>& candidates) {
  if (candidates.empty()) throw Error("no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].gray_world_score < candidates[best].gray_world_score) best = i;
  return best;
}

/// Estimates the veiling light once, then for every water type: transmission,
/// radiance recovery, gray-world scoring on object pixels and white balance.
/// The candidate with the grayest recovered radiance wins. Pixels in
/// `exclude` (e.g. color charts) are left out of every statistic and their
/// transmission is taken from the nearest unmasked pixels below.
inline RestorationResult restore_auto(const LinearImage& img, const WaterTypeLibrary& library,
                                      const RunConfig& config = {}, const PixelMask* exclude = nullptr,
                                      RestoreOptions options = {}) {
  validate(config);
  require_valid(img);
  if (library.size() == 0) throw Error("empty library");
  if (exclude != nullptr) require_same_shape(img, *exclude, "chart mask");

  VeilingLightEstimate est = config.veiling_rect ? manual_veiling_light(img, *config.veiling_rect)
                                                 : estimate_veiling_light(img, config.veiling_options(), exclude);

  RestorationResult result;
  result.object_mask = subtract(invert(est.mask), exclude);
  if (count(result.object_mask) == 0) throw Error("no object pixels outside the veiling-light region");

  const TransmissionEstimator estimator(img, est, config.transmission_options(), exclude);
  result.veiling = std::move(est);
  const Rgb& veiling = result.veiling.color;

  std::vector<WaterType> types = library.entries();
  if (!config.force_type.empty()) types = {library.at(config.force_type)};

  std::optional<std::size_t> best;
  for (const auto& wt : types) {
    RestorationCandidate cand;
    cand.water_type = wt;
    cand.transmission = estimator.estimate(wt);
    LinearImage radiance = recover_radiance(img, veiling, cand.transmission, wt, config.clip_max);
    cand.gray_world_score = gray_world_score(radiance, result.object_mask);
    cand.restored = white_balance(radiance, result.object_mask, config.clip_max);
    result.candidates.push_back(std::move(cand));

    const std::size_t idx = result.candidates.size() - 1;
    if (!best || result.candidates[idx].gray_world_score < result.candidates[*best].gray_world_score) {
      if (best && !options.keep_all) {
        result.candidates[*best].restored = {};
        result.candidates[*best].transmission = {};
      }
      best = idx;
    } else if (!options.keep_all) {
      result.candidates[idx].restored = {};
      result.candidates[idx].transmission = {};
    }
  }
  result.selected = select_candidate(result.candidates);
  return result;
}

/// Plain-text summary: veiling light, one line per candidate, selected type.
inline void write_restore_report(std::ostream& os, const RestorationResult& result) {
  char buf[160];
  const Rgb& a = result.veiling.color;
  std::snprintf(buf, sizeof(buf), "veiling_light %.6f %.6f %.6f\n", a.r, a.g, a.b);
  os << buf << "veiling_pixels " << count(result.veiling.mask) << "\n";
  os << "# type beta_br beta_bg gray_world_score\n";
  for (const auto& c : result.candidates) {
    std::snprintf(buf, sizeof(buf), " %.6f %.6f %.6f\n", c.water_type.beta_br, c.water_type.beta_bg,
                  c.gray_world_score);
    os << c.water_type.name << buf;
  }
  os << "selected " << result.best().water_type.name << "\n";
}

}  // namespace uwhl
