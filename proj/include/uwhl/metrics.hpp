#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "uwhl/chart.hpp"
#include "uwhl/config.hpp"
#include "uwhl/image.hpp"
#include "uwhl/image_io.hpp"
#include "uwhl/restoration.hpp"
#include "uwhl/transmission.hpp"
#include "uwhl/water_types.hpp"

namespace uwhl {

/// Pearson correlation, accumulated in a single pass with Welford-style
/// co-moment updates.
class PearsonAccumulator {
 public:
  void add(double x, double y) {
    ++n_;
    const double dx = x - mean_x_;
    mean_x_ += dx / static_cast<double>(n_);
    const double dy = y - mean_y_;
    mean_y_ += dy / static_cast<double>(n_);
    m2_x_ += dx * (x - mean_x_);
    m2_y_ += dy * (y - mean_y_);
    c_xy_ += dx * (y - mean_y_);
  }

  [[nodiscard]] std::size_t count() const { return n_; }

  [[nodiscard]] double correlation() const {
    if (n_ < 2) throw Error("undefined correlation: fewer than 2 samples");
    if (!(m2_x_ > 0.0) || !(m2_y_ > 0.0)) throw Error("undefined correlation: zero variance");
    return std::clamp(c_xy_ / std::sqrt(m2_x_ * m2_y_), -1.0, 1.0);
  }

 private:
  std::size_t n_ = 0;
  double mean_x_ = 0.0;
  double mean_y_ = 0.0;
  double m2_x_ = 0.0;
  double m2_y_ = 0.0;
  double c_xy_ = 0.0;
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: series lengths differ");
  PearsonAccumulator acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add(x[i], y[i]);
  return acc.correlation();
}

/// Correlation between ground-truth distance and -log(t) over the valid
/// pixels. Non-finite distances are always skipped.
inline double transmission_correlation(const TransmissionMap& t, const GrayMap& z_gt, const PixelMask* valid = nullptr) {
  require_same_shape(t.map, z_gt, "correlation distance map");
  if (valid != nullptr) require_same_shape(t.map, *valid, "correlation valid mask");
  PearsonAccumulator acc;
  for (std::size_t i = 0; i < z_gt.size(); ++i) {
    if (valid != nullptr && !(*valid)[i]) continue;
    if (!std::isfinite(z_gt[i])) continue;
    if (!(t[i] > 0.0)) throw Error("transmission must be positive on valid pixels");
    acc.add(z_gt[i], -std::log(t[i]));
  }
  return acc.correlation();
}

/// Mean color of a rectangle.
inline Rgb patch_mean(const LinearImage& img, const Rect& r) {
  if (r.empty() || r.x < 0 || r.y < 0 || r.x + r.w > img.width() || r.y + r.h > img.height()) {
    throw Error("patch outside image bounds");
  }
  Rgb sum;
  for (int y = r.y; y < r.y + r.h; ++y)
    for (int x = r.x; x < r.x + r.w; ++x) sum += img(x, y);
  return sum * (1.0 / static_cast<double>(r.w * r.h));
}

/// Angle in degrees between a color and the achromatic axis.
inline double angle_to_gray(const Rgb& c) {
  const double n = norm(c);
  if (!(n > 0.0)) throw Error("zero patch color");
  const double cosine = std::clamp((c.r + c.g + c.b) / (n * std::sqrt(3.0)), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

/// Average angular reproduction error of the six gray patches, degrees.
inline double angular_error(const LinearImage& img, const ChartSpec& chart) {
  validate(chart, img.width(), img.height());
  double sum = 0.0;
  for (const auto& r : chart.patches) sum += angle_to_gray(patch_mean(img, r));
  return sum / static_cast<double>(kGrayPatches);
}

// ---------------------------------------------------------------------------
// Batch evaluation

struct ManifestItem {
  std::string id;
  std::string input;
  Encoding encoding = Encoding::automatic;
  std::optional<std::string> distance;
  std::optional<std::string> chart_mask;
  std::vector<ChartSpec> charts;
};

namespace detail {

inline Rect parse_rect(const std::string& s, const std::string& where) {
  Rect r;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream is(s);
  if (!(is >> r.x >> c1 >> r.y >> c2 >> r.w >> c3 >> r.h) || c1 != ',' || c2 != ',' || c3 != ',') {
    throw Error(where + ": bad rectangle '" + s + "' (expected x,y,w,h)");
  }
  std::string rest;
  if (is >> rest) throw Error(where + ": bad rectangle '" + s + "'");
  return r;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace detail

inline Rect parse_rect(const std::string& s) { return detail::parse_rect(s, "rectangle"); }

/// `id:x,y,w,h;x,y,w,h;...` with exactly six patch rectangles.
inline ChartSpec parse_chart(const std::string& s, const std::string& where = "chart") {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0) throw Error(where + ": chart must be 'id:rect;rect;...'");
  ChartSpec chart;
  chart.id = s.substr(0, colon);
  const auto rects = detail::split(s.substr(colon + 1), ';');
  if (rects.size() != kGrayPatches) {
    throw Error(where + ": chart '" + chart.id + "' needs exactly 6 patch rectangles, got " +
                std::to_string(rects.size()));
  }
  for (std::size_t i = 0; i < kGrayPatches; ++i) chart.patches[i] = detail::parse_rect(rects[i], where);
  return chart;
}

inline std::string format_chart(const ChartSpec& chart) {
  std::string out = chart.id + ":";
  for (std::size_t i = 0; i < kGrayPatches; ++i) {
    const auto& r = chart.patches[i];
    if (i > 0) out += ';';
    out += std::to_string(r.x) + "," + std::to_string(r.y) + "," + std::to_string(r.w) + "," + std::to_string(r.h);
  }
  return out;
}

/// One image per line as whitespace-separated key=value fields:
///   id=<name> input=<path> [encoding=auto|linear16|srgb8] [distance=<path>]
///   [chart_mask=<path>] [chart=<id>:<x,y,w,h;...six rects>]...
/// Relative paths resolve against `base_dir`. `#` starts a comment.
inline std::vector<ManifestItem> parse_manifest(std::istream& is, const std::filesystem::path& base_dir,
                                                const std::string& source = "manifest") {
  std::vector<ManifestItem> items;
  std::string line;
  int lineno = 0;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).string();
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string field;
    ManifestItem item;
    bool any = false;
    const std::string where = source + " line " + std::to_string(lineno);
    while (ls >> field) {
      any = true;
      const auto eq = field.find('=');
      if (eq == std::string::npos || eq == 0) throw Error(where + ": expected key=value, got '" + field + "'");
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "id") {
        item.id = value;
      } else if (key == "input") {
        item.input = resolve(value);
      } else if (key == "encoding") {
        item.encoding = parse_encoding(value);
      } else if (key == "distance") {
        item.distance = resolve(value);
      } else if (key == "chart_mask") {
        item.chart_mask = resolve(value);
      } else if (key == "chart") {
        item.charts.push_back(parse_chart(value, where));
      } else {
        throw Error(where + ": unknown key '" + key + "'");
      }
    }
    if (!any) continue;
    if (item.input.empty()) throw Error(where + ": missing input=");
    if (item.id.empty()) item.id = std::filesystem::path(item.input).stem().string();
    items.push_back(std::move(item));
  }
  return items;
}

inline std::vector<ManifestItem> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot read manifest '" + path + "'");
  return parse_manifest(is, std::filesystem::path(path).parent_path(), path);
}

struct ChartEval {
  std::string id;
  double input_error = 0.0;
  double restored_error = 0.0;
};

struct ImageEval {
  std::string id;
  std::string selected_type;
  std::optional<double> rho;
  std::vector<ChartEval> charts;
};

struct EvalReport {
  std::vector<ImageEval> per_image;

  /// Mean restored angular error over every chart, if any chart was evaluated.
  [[nodiscard]] std::optional<double> mean_error() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& im : per_image)
      for (const auto& c : im.charts) {
        sum += c.restored_error;
        ++n;
      }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

/// Restores one image with its charts masked and scores it.
inline ImageEval evaluate_item(const ManifestItem& item, const WaterTypeLibrary& library, const RunConfig& config,
                               const std::optional<std::filesystem::path>& output_dir = std::nullopt) {
  const LinearImage img = load_image(item.input, item.encoding);
  std::optional<PixelMask> mask;
  if (item.chart_mask) {
    mask = load_mask(*item.chart_mask);
    require_same_shape(img, *mask, "chart mask");
  } else if (!item.charts.empty()) {
    mask = PixelMask(img.width(), img.height());
    // Without a mask, drop each chart's patch box grown by half a patch to
    // cover the frame around the patches.
    for (const auto& c : item.charts) {
      validate(c, img.width(), img.height());
      const auto b = c.bounds();
      int m = b.w;
      for (const auto& p : c.patches) m = std::min({m, p.w, p.h});
      m = std::max(1, m / 2);
      for (int y = std::max(0, b.y - m); y < std::min(img.height(), b.y + b.h + m); ++y)
        for (int x = std::max(0, b.x - m); x < std::min(img.width(), b.x + b.w + m); ++x) (*mask)(x, y) = 1;
    }
  }

  const auto result = restore_auto(img, library, config, mask ? &*mask : nullptr, RestoreOptions{false});
  const auto& best = result.best();
  ImageEval ev;
  ev.id = item.id;
  ev.selected_type = best.water_type.name;
  if (item.distance) {
    const GrayMap z = load_map(*item.distance);
    require_same_shape(img, z, "distance map");
    ev.rho = transmission_correlation(best.transmission, z);
  }
  for (const auto& c : item.charts) {
    ev.charts.push_back({c.id, angular_error(img, c), angular_error(best.restored, c)});
  }
  if (output_dir) {
    std::filesystem::create_directories(*output_dir);
    save_display(best.restored, (*output_dir / (item.id + "_restored.png")).string());
    save_map(best.transmission.map, (*output_dir / (item.id + "_transmission.png")).string());
  }
  return ev;
}

inline EvalReport evaluate_batch(const std::string& manifest, const WaterTypeLibrary& library,
                                 const RunConfig& config = {},
                                 const std::optional<std::filesystem::path>& output_dir = std::nullopt) {
  EvalReport report;
  for (const auto& item : load_manifest(manifest)) report.per_image.push_back(evaluate_item(item, library, config, output_dir));
  return report;
}

namespace detail {
inline std::string fixed(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}
}  // namespace detail

/// Two tables: rho per image (columns = images) and angular error per chart
/// (rows = "<image> #<chart>", columns = input / restored).
inline void write_report_text(std::ostream& os, const EvalReport& report) {
  os << "Transmission accuracy: Pearson correlation between distance and -log(t)\n";
  os << "Image   ";
  for (const auto& im : report.per_image) os << "\t" << im.id;
  os << "\nrho     ";
  for (const auto& im : report.per_image) os << "\t" << (im.rho ? detail::fixed(*im.rho) : std::string("-"));
  os << "\nselected";
  for (const auto& im : report.per_image) os << "\t" << im.selected_type;
  os << "\n\nColor reproduction: average angular error of gray patches (degrees)\n";
  os << "Chart\tInput\tRestored\n";
  for (const auto& im : report.per_image)
    for (const auto& c : im.charts)
      os << im.id << " #" << c.id << "\t" << detail::fixed(c.input_error) << "\t" << detail::fixed(c.restored_error)
         << "\n";
  if (const auto m = report.mean_error()) os << "mean\t\t" << detail::fixed(*m) << "\n";
}

/// One row per (image, chart); images without charts get a single row with chart "-".
inline void write_report_tsv(std::ostream& os, const EvalReport& report) {
  char buf[64];
  auto num = [&](std::optional<double> v) -> std::string {
    if (!v) return "nan";
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
  };
  os << "image\tchart\tselected_type\trho\tpsi_input\tpsi_restored\n";
  for (const auto& im : report.per_image) {
    if (im.charts.empty()) {
      os << im.id << "\t-\t" << im.selected_type << "\t" << num(im.rho) << "\tnan\tnan\n";
      continue;
    }
    for (const auto& c : im.charts) {
      os << im.id << "\t" << c.id << "\t" << im.selected_type << "\t" << num(im.rho) << "\t" << num(c.input_error)
         << "\t" << num(c.restored_error) << "\n";
    }
  }
}

}  // namespace uwhl
