#pragma once

#include <optional>
#include <string>

#include "uwhl/image.hpp"
#include "uwhl/transmission.hpp"
#include "uwhl/veiling_light.hpp"

namespace uwhl {

/// Every pipeline tunable with its default.
struct RunConfig {
  // veiling light
  double edge_threshold = 0.05;
  double min_vl_frac = 0.01;
  std::optional<Rect> veiling_rect;
  // contrast stretch, used for both edge detection and the filter guide
  double stretch_low = 1.0;
  double stretch_high = 99.0;
  // haze-lines
  int n_hazelines = 500;
  int min_line_size = 50;
  double t_floor = 0.05;
  // guided filter
  int gf_radius = 0;  ///< 0 selects max(8, width / 50)
  double gf_eps = 1e-3;
  // recovery
  double clip_max = 1.5;
  // selection
  std::string water_types = "builtin";
  std::string force_type;

  [[nodiscard]] VeilingLightOptions veiling_options() const {
    return {edge_threshold, min_vl_frac, stretch_low, stretch_high};
  }

  [[nodiscard]] TransmissionOptions transmission_options() const {
    return {n_hazelines, static_cast<std::size_t>(min_line_size), t_floor, gf_radius, gf_eps, stretch_low,
            stretch_high};
  }
};

inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& what) { throw Error("invalid configuration: " + what); };
  if (!(c.edge_threshold >= 0.0)) fail("edge threshold must be >= 0");
  if (!(c.min_vl_frac > 0.0 && c.min_vl_frac < 1.0)) fail("min-vl-frac must be in (0,1)");
  if (c.veiling_rect && c.veiling_rect->empty()) fail("veiling rectangle is empty");
  if (!(c.stretch_low >= 0.0 && c.stretch_low < c.stretch_high && c.stretch_high <= 100.0)) {
    fail("stretch percentiles must satisfy 0 <= low < high <= 100");
  }
  if (c.n_hazelines < 2) fail("n-hazelines must be >= 2");
  if (c.min_line_size < 1) fail("min-line-size must be >= 1");
  if (!(c.t_floor > 0.0 && c.t_floor < 0.9)) fail("t-floor must be in (0, 0.9)");
  if (c.gf_radius < 0) fail("gf-radius must be >= 0");
  if (!(c.gf_eps > 0.0)) fail("gf-eps must be > 0");
  if (!(c.clip_max >= 1.0)) fail("clip-max must be >= 1");
}

}  // namespace uwhl
