#pragma once

// File I/O for images and single-channel maps. Decoding/encoding is delegated
// to OpenCV's imgcodecs (PNG and TIFF, 8/16-bit, float TIFF for metric maps).

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "uwhl/image.hpp"

namespace uwhl {

enum class Encoding {
  automatic,  ///< 16-bit/float files are linear, 8-bit files are sRGB
  linear16,
  srgb8,
};

inline Encoding parse_encoding(std::string_view s) {
  if (s == "auto") return Encoding::automatic;
  if (s == "linear16") return Encoding::linear16;
  if (s == "srgb8") return Encoding::srgb8;
  throw Error("unknown encoding '" + std::string(s) + "' (expected auto, linear16, srgb8)");
}

namespace detail {

inline std::string lower_extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

inline bool is_text_path(const std::string& path) { return lower_extension(path) == ".txt"; }

inline bool is_tiff_path(const std::string& path) {
  const auto ext = lower_extension(path);
  return ext == ".tif" || ext == ".tiff";
}

inline void write_or_throw(const std::string& path, const cv::Mat& m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path, m);
  } catch (const cv::Exception& e) {
    throw Error("cannot write '" + path + "': " + e.what());
  }
  if (!ok) throw Error("cannot write '" + path + "'");
}

inline cv::Mat read_or_throw(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("cannot read '" + path + "': no such file");
  cv::Mat m;
  try {
    m = cv::imread(path, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw Error("cannot read '" + path + "': " + e.what());
  }
  if (m.empty()) throw Error("cannot read '" + path + "': not a decodable image");
  return m;
}

inline std::uint16_t quantize16(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

inline std::uint8_t quantize8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace detail

/// Reads a 3-channel PNG or TIFF into linear [0,1] values.
inline LinearImage load_image(const std::string& path, Encoding encoding = Encoding::automatic) {
  const cv::Mat m = detail::read_or_throw(path);
  if (m.channels() != 3) {
    throw Error("cannot load '" + path + "': wrong channel count " + std::to_string(m.channels()) + " (expected 3)");
  }
  const int depth = m.depth();
  if (encoding == Encoding::automatic) {
    encoding = depth == CV_8U ? Encoding::srgb8 : Encoding::linear16;
  }
  const bool depth_ok = encoding == Encoding::srgb8 ? depth == CV_8U
                                                     : (depth == CV_16U || depth == CV_32F || depth == CV_64F);
  if (!depth_ok) throw Error("cannot load '" + path + "': unsupported bit depth for requested encoding");

  LinearImage out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      Rgb p;
      for (int c = 0; c < 3; ++c) {
        const int src = 2 - c;  // OpenCV stores BGR
        double v = 0.0;
        switch (depth) {
          case CV_8U: v = srgb_to_linear(m.at<cv::Vec3b>(y, x)[src] / 255.0); break;
          case CV_16U: v = m.at<cv::Vec3w>(y, x)[src] / 65535.0; break;
          case CV_32F: v = m.at<cv::Vec3f>(y, x)[src]; break;
          default: v = m.at<cv::Vec3d>(y, x)[src]; break;
        }
        p[c] = v;
      }
      out(x, y) = p;
    }
  }
  require_valid(out);
  return out;
}

/// Writes a display-referred image: clamp to [0,1], sRGB encode, quantize to
/// 8 or 16 bits.
inline void save_display(const LinearImage& img, const std::string& path, int bits = 8) {
  require_valid(img);
  if (bits != 8 && bits != 16) throw Error("save_display: bits must be 8 or 16");
  cv::Mat m(img.height(), img.width(), bits == 8 ? CV_8UC3 : CV_16UC3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double e = linear_to_srgb(std::clamp(img(x, y)[c], 0.0, 1.0));
        if (bits == 8) {
          m.at<cv::Vec3b>(y, x)[2 - c] = detail::quantize8(e);
        } else {
          m.at<cv::Vec3w>(y, x)[2 - c] = detail::quantize16(e);
        }
      }
    }
  }
  detail::write_or_throw(path, m);
}

/// Writes scene-referred data as 16-bit linear (no transfer curve).
inline void save_linear16(const LinearImage& img, const std::string& path) {
  require_valid(img);
  cv::Mat m(img.height(), img.width(), CV_16UC3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) m.at<cv::Vec3w>(y, x)[2 - c] = detail::quantize16(img(x, y)[c]);
  detail::write_or_throw(path, m);
}

/// Plain-text dump: one row per line, space separated, 17 significant digits
/// so that values round-trip exactly. Non-finite entries print as nan/inf.
inline void save_map_text(const GrayMap& map, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  char buf[32];
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      std::snprintf(buf, sizeof(buf), "%.17g", map(x, y));
      if (x > 0) os << ' ';
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw Error("write failure on '" + path + "'");
}

inline GrayMap load_map_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read '" + path + "'");
  std::vector<double> values;
  int width = -1;
  int height = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string tok;
    int n = 0;
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw Error("'" + path + "' line " + std::to_string(height + 1) + ": bad number '" + tok + "'");
      }
      values.push_back(v);
      ++n;
    }
    if (width < 0) width = n;
    if (n != width) throw Error("'" + path + "' line " + std::to_string(height + 1) + ": ragged row");
    ++height;
  }
  if (height == 0 || width <= 0) throw Error("'" + path + "': empty map");
  return GrayMap(width, height, std::move(values));
}

/// Unit-range maps (transmission) are stored as 16-bit; metric maps
/// (distance) need float TIFF or text.
enum class MapKind { unit, metric };

inline void save_map(const GrayMap& map, const std::string& path, MapKind kind = MapKind::unit) {
  if (detail::is_text_path(path)) {
    save_map_text(map, path);
    return;
  }
  if (kind == MapKind::metric) {
    if (!detail::is_tiff_path(path)) throw Error("metric maps must be written as .tif/.tiff or .txt: '" + path + "'");
    cv::Mat m(map.height(), map.width(), CV_32FC1);
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x) m.at<float>(y, x) = static_cast<float>(map(x, y));
    detail::write_or_throw(path, m);
    return;
  }
  cv::Mat m(map.height(), map.width(), CV_16UC1);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) m.at<std::uint16_t>(y, x) = detail::quantize16(map(x, y));
  detail::write_or_throw(path, m);
}

/// Reads .txt dumps, float TIFFs (raw values) and 8/16-bit single-channel
/// images (normalized to [0,1]).
inline GrayMap load_map(const std::string& path) {
  if (detail::is_text_path(path)) return load_map_text(path);
  const cv::Mat m = detail::read_or_throw(path);
  if (m.channels() != 1) throw Error("cannot load map '" + path + "': expected a single channel");
  GrayMap out(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      switch (m.depth()) {
        case CV_8U: out(x, y) = m.at<std::uint8_t>(y, x) / 255.0; break;
        case CV_16U: out(x, y) = m.at<std::uint16_t>(y, x) / 65535.0; break;
        case CV_32F: out(x, y) = m.at<float>(y, x); break;
        case CV_64F: out(x, y) = m.at<double>(y, x); break;
        default: throw Error("cannot load map '" + path + "': unsupported bit depth");
      }
    }
  }
  return out;
}

/// Any nonzero channel marks the pixel.
inline PixelMask load_mask(const std::string& path) {
  const cv::Mat m = detail::read_or_throw(path);
  cv::Mat gray;
  if (m.channels() == 1) {
    gray = m;
  } else {
    std::vector<cv::Mat> planes;
    cv::split(m, planes);
    gray = planes[0] != 0;
    for (std::size_t i = 1; i < planes.size(); ++i) gray |= (planes[i] != 0);
  }
  PixelMask out(gray.cols, gray.rows);
  cv::Mat nz = gray != 0;
  for (int y = 0; y < gray.rows; ++y)
    for (int x = 0; x < gray.cols; ++x) out(x, y) = nz.at<std::uint8_t>(y, x) ? 1 : 0;
  return out;
}

inline void save_mask(const PixelMask& mask, const std::string& path) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) m.at<std::uint8_t>(y, x) = mask(x, y) ? 255 : 0;
  detail::write_or_throw(path, m);
}

}  // namespace uwhl
