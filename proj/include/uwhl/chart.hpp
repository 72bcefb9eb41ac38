#pragma once

#include <array>
#include <string>

#include "uwhl/image.hpp"

namespace uwhl {

inline constexpr std::size_t kGrayPatches = 6;

/// A color chart reduced to the pixel rectangles of its six gray patches.
struct ChartSpec {
  std::string id;
  std::array<Rect, kGrayPatches> patches{};

  /// Bounding box of the patches.
  [[nodiscard]] Rect bounds() const {
    int x0 = patches[0].x, y0 = patches[0].y, x1 = x0 + patches[0].w, y1 = y0 + patches[0].h;
    for (const auto& p : patches) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x + p.w);
      y1 = std::max(y1, p.y + p.h);
    }
    return {x0, y0, x1 - x0, y1 - y0};
  }
};

inline void validate(const ChartSpec& chart, int width, int height) {
  for (const auto& r : chart.patches) {
    if (r.empty() || r.x < 0 || r.y < 0 || r.x + r.w > width || r.y + r.h > height) {
      throw Error("chart '" + chart.id + "': patch outside image bounds");
    }
  }
}

}  // namespace uwhl
