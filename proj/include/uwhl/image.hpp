#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwhl {

/// Library-wide error type. Every failure the pipeline reports is one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Three doubles indexed as R, G, B. Also used for signed vectors in the
/// medium-compensated space.
struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  constexpr double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }
  constexpr double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }

  constexpr Rgb& operator+=(const Rgb& o) { r += o.r; g += o.g; b += o.b; return *this; }
  constexpr Rgb& operator-=(const Rgb& o) { r -= o.r; g -= o.g; b -= o.b; return *this; }
  constexpr Rgb& operator*=(double s) { r *= s; g *= s; b *= s; return *this; }
  friend constexpr Rgb operator+(Rgb a, const Rgb& o) { return a += o; }
  friend constexpr Rgb operator-(Rgb a, const Rgb& o) { return a -= o; }
  friend constexpr Rgb operator*(Rgb a, double s) { return a *= s; }
  friend constexpr Rgb operator*(double s, Rgb a) { return a *= s; }
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr double dot(const Rgb& a, const Rgb& b) { return a.r * b.r + a.g * b.g + a.b * b.b; }
inline double norm(const Rgb& a) { return std::sqrt(dot(a, a)); }

/// Pixel rectangle, top-left origin.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  [[nodiscard]] constexpr bool empty() const { return w <= 0 || h <= 0; }
  [[nodiscard]] constexpr bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

/// Row-major single-plane container.
template <class T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error("image dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Image(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
      throw Error("image dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw Error("image data length does not match dimensions");
    }
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] std::span<T> pixels() { return data_; }
  [[nodiscard]] std::span<const T> pixels() const { return data_; }
  [[nodiscard]] const std::vector<T>& data() const { return data_; }

  template <class U>
  [[nodiscard]] bool same_shape(const Image<U>& o) const {
    return width_ == o.width() && height_ == o.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using LinearImage = Image<Rgb>;
using GrayMap = Image<double>;
/// Nonzero entries are members.
using PixelMask = Image<std::uint8_t>;

template <class A, class B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(std::string("dimension mismatch: ") + what);
  }
}

inline std::size_t count(const PixelMask& m) {
  return static_cast<std::size_t>(std::count_if(m.pixels().begin(), m.pixels().end(), [](auto v) { return v != 0; }));
}

inline PixelMask invert(const PixelMask& m) {
  PixelMask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
  return out;
}

/// Pixels set in `a` and not set in `b` (when `b` is non-null).
inline PixelMask subtract(const PixelMask& a, const PixelMask* b) {
  PixelMask out = a;
  if (b != nullptr) {
    require_same_shape(a, *b, "mask subtraction");
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && !(*b)[i]) ? 1 : 0;
  }
  return out;
}

inline PixelMask rect_mask(int width, int height, const Rect& r) {
  PixelMask m(width, height);
  for (int y = std::max(0, r.y); y < std::min(height, r.y + r.h); ++y)
    for (int x = std::max(0, r.x); x < std::min(width, r.x + r.w); ++x) m(x, y) = 1;
  return m;
}

inline bool all_finite(const LinearImage& img) {
  return std::all_of(img.pixels().begin(), img.pixels().end(), [](const Rgb& p) {
    return std::isfinite(p.r) && std::isfinite(p.g) && std::isfinite(p.b);
  });
}

inline void require_valid(const LinearImage& img) {
  if (img.empty()) throw Error("empty image");
  if (!all_finite(img)) throw Error("image contains non-finite values");
}

// sRGB transfer curve (IEC 61966-2-1).
inline double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline double linear_to_srgb(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

/// Percentile with linear interpolation between order statistics; `pct` in [0, 100].
/// Reorders `values`.
inline double percentile(std::vector<double>& values, double pct) {
  if (values.empty()) throw Error("percentile of empty set");
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double vlo = values[lo];
  if (hi == lo) return vlo;
  const double vhi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return vlo + (pos - static_cast<double>(lo)) * (vhi - vlo);
}

/// Per-channel affine map sending the `low_pct` percentile to 0 and the
/// `high_pct` percentile to 1, clamped to [0, 1]. A channel whose two
/// percentiles coincide is left unchanged and flagged in `degenerate`.
inline LinearImage contrast_stretch(const LinearImage& img, double low_pct, double high_pct,
                                    std::array<bool, 3>* degenerate = nullptr) {
  if (!(low_pct >= 0.0 && low_pct < high_pct && high_pct <= 100.0)) {
    throw Error("contrast_stretch: require 0 <= low < high <= 100");
  }
  LinearImage out = img;
  std::vector<double> channel(img.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < img.size(); ++i) channel[i] = img[i][c];
    const double lo = percentile(channel, low_pct);
    const double hi = percentile(channel, high_pct);
    const bool flat = !(hi > lo);
    if (degenerate != nullptr) (*degenerate)[static_cast<std::size_t>(c)] = flat;
    if (flat) continue;
    const double scale = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < img.size(); ++i) out[i][c] = std::clamp((img[i][c] - lo) * scale, 0.0, 1.0);
  }
  return out;
}

/// Rec. 709 luminance of a linear pixel.
inline constexpr double luminance(const Rgb& p) { return 0.2126 * p.r + 0.7152 * p.g + 0.0722 * p.b; }

/// Mean color over the set pixels of `mask` (all pixels if null).
inline Rgb masked_mean(const LinearImage& img, const PixelMask* mask) {
  Rgb sum;
  std::size_t n = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    sum += img[i];
    ++n;
  }
  if (n == 0) throw Error("mean over empty mask");
  return sum * (1.0 / static_cast<double>(n));
}

}  // namespace uwhl
