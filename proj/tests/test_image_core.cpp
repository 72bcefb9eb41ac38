#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "oracles.hpp"
#include "uwhl/uwhl.hpp"

using namespace uwhl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("uwhl_test_" + name);
  fs::create_directories(d);
  return d;
}

std::string write_png8(const fs::path& dir, const std::string& name, int r, int g, int b) {
  cv::Mat m(2, 3, CV_8UC3, cv::Scalar(b, g, r));
  const auto p = (dir / name).string();
  cv::imwrite(p, m);
  return p;
}

}  // namespace

TEST(SrgbCurve, KnownCodeValues) {
  // Hand-inverted transfer curve: ((188/255 + 0.055) / 1.055)^2.4.
  const double expected = std::pow((188.0 / 255.0 + 0.055) / 1.055, 2.4);
  EXPECT_NEAR(srgb_to_linear(188.0 / 255.0), expected, 1e-12);
  EXPECT_NEAR(srgb_to_linear(188.0 / 255.0), 0.5029, 5e-5);
  EXPECT_EQ(srgb_to_linear(0.0), 0.0);
  EXPECT_EQ(detail::quantize8(linear_to_srgb(0.5)), 188);
  EXPECT_EQ(detail::quantize8(linear_to_srgb(0.0)), 0);
  EXPECT_EQ(detail::quantize8(linear_to_srgb(1.0)), 255);
}

TEST(SrgbCurve, EightBitRoundTripIsExact) {
  for (int v = 0; v < 256; ++v) {
    EXPECT_EQ(detail::quantize8(linear_to_srgb(srgb_to_linear(v / 255.0))), v) << v;
  }
}

TEST(LoadImage, SixteenBitFullScaleIsOne) {
  const auto dir = scratch_dir("load16");
  cv::Mat m(2, 2, CV_16UC3, cv::Scalar(0, 32768, 65535));
  const auto p = (dir / "a.png").string();
  ASSERT_TRUE(cv::imwrite(p, m));
  const auto img = load_image(p, Encoding::linear16);
  EXPECT_EQ(img.width(), 2);
  EXPECT_DOUBLE_EQ(img(0, 0).r, 1.0);
  EXPECT_NEAR(img(1, 1).g, 32768.0 / 65535.0, 1e-15);
  EXPECT_DOUBLE_EQ(img(0, 1).b, 0.0);
}

TEST(LoadImage, SrgbLinearizes) {
  const auto dir = scratch_dir("load8");
  const auto p = write_png8(dir, "a.png", 188, 0, 255);
  const auto img = load_image(p, Encoding::srgb8);
  EXPECT_NEAR(img(0, 0).r, 0.5029, 5e-5);
  EXPECT_EQ(img(0, 0).g, 0.0);
  EXPECT_DOUBLE_EQ(img(0, 0).b, 1.0);
}

TEST(LoadImage, SaveDisplayRoundTripsEightBit) {
  const auto dir = scratch_dir("roundtrip8");
  cv::Mat m(16, 16, CV_8UC3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) m.at<cv::Vec3b>(y, x) = cv::Vec3b(x * 16 + y, y * 16 + x, (x * 7 + y * 3) % 256);
  const auto in = (dir / "in.png").string();
  const auto out = (dir / "out.png").string();
  cv::imwrite(in, m);
  save_display(load_image(in, Encoding::srgb8), out);
  const cv::Mat back = cv::imread(out, cv::IMREAD_UNCHANGED);
  ASSERT_EQ(back.type(), CV_8UC3);
  EXPECT_EQ(cv::norm(back, m, cv::NORM_INF), 0.0);
}

TEST(LoadImage, Errors) {
  const auto dir = scratch_dir("loaderr");
  EXPECT_THROW(load_image((dir / "missing.png").string()), Error);
  const auto gray = (dir / "gray.png").string();
  cv::imwrite(gray, cv::Mat(4, 4, CV_8UC1, cv::Scalar(3)));
  EXPECT_THROW(load_image(gray), Error);
  const auto p8 = write_png8(dir, "rgb8.png", 1, 2, 3);
  EXPECT_THROW(load_image(p8, Encoding::linear16), Error);
  const auto junk = (dir / "junk.png").string();
  std::ofstream(junk) << "not an image";
  EXPECT_THROW(load_image(junk), Error);
}

TEST(ContrastStretch, ConstantImageIsDegenerate) {
  LinearImage img(8, 8, {0.3, 0.4, 0.5});
  std::array<bool, 3> flat{};
  const auto out = contrast_stretch(img, 1, 99, &flat);
  EXPECT_EQ(out, img);
  EXPECT_TRUE(flat[0] && flat[1] && flat[2]);
}

TEST(ContrastStretch, EndpointsMapToZeroAndOne) {
  LinearImage img(11, 1);
  for (int x = 0; x < 11; ++x) img(x, 0) = {0.2 + 0.02 * x, 0.5, 0.2 + 0.02 * x};
  std::array<bool, 3> flat{};
  const auto out = contrast_stretch(img, 0, 100, &flat);
  EXPECT_FALSE(flat[0]);
  EXPECT_TRUE(flat[1]);
  EXPECT_NEAR(out(0, 0).r, 0.0, 1e-12);
  EXPECT_NEAR(out(10, 0).r, 1.0, 1e-12);
  EXPECT_NEAR(out(5, 0).r, 0.5, 1e-12);
  EXPECT_EQ(out(3, 0).g, 0.5);
}

TEST(ContrastStretch, InteriorValueMapsAffinely) {
  // 101 samples 0.1 .. 0.6 in steps of 0.005: the 0th and 100th percentiles
  // are the endpoints, and 0.35 falls halfway.
  LinearImage img(101, 1);
  for (int x = 0; x <= 100; ++x) img(x, 0) = Rgb{1, 1, 1} * (0.1 + 0.005 * x);
  const auto out = contrast_stretch(img, 0, 100);
  EXPECT_NEAR(out(50, 0).g, (0.35 - 0.1) / (0.6 - 0.1), 1e-12);
}

TEST(ContrastStretch, IdempotentAtFullRange) {
  std::mt19937_64 rng(3);
  const auto img = oracle::random_image(rng, 20, 13, 0.1, 0.7);
  const auto once = contrast_stretch(img, 0, 100);
  const auto twice = contrast_stretch(once, 0, 100);
  for (std::size_t i = 0; i < once.size(); ++i)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(once[i][c], twice[i][c], 1e-12);
  EXPECT_EQ(once.width(), 20);
  EXPECT_EQ(once.height(), 13);
}

TEST(ContrastStretch, RejectsBadPercentiles) {
  LinearImage img(2, 2);
  EXPECT_THROW(contrast_stretch(img, 50, 50), Error);
  EXPECT_THROW(contrast_stretch(img, -1, 50), Error);
  EXPECT_THROW(contrast_stretch(img, 1, 101), Error);
}

TEST(Image, RejectsBadShapes) {
  EXPECT_THROW(LinearImage(0, 3), Error);
  EXPECT_THROW(GrayMap(2, 2, std::vector<double>(3)), Error);
  LinearImage nan(1, 1, {std::nan(""), 0, 0});
  EXPECT_THROW(require_valid(nan), Error);
}

TEST(MapIo, TextDumpRoundTripsBitExact) {
  const auto dir = scratch_dir("maptext");
  GrayMap m(5, 3);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-0.37 * static_cast<double>(i)) / 3.0;
  const auto p = (dir / "m.txt").string();
  save_map(m, p);
  EXPECT_EQ(load_map(p), m);
}

TEST(MapIo, SixteenBitUnitMap) {
  const auto dir = scratch_dir("map16");
  GrayMap m(4, 4, 0.25);
  m(1, 2) = 1.0;
  const auto p = (dir / "m.png").string();
  save_map(m, p);
  const auto back = load_map(p);
  EXPECT_NEAR(back(0, 0), 0.25, 1.0 / 65535.0);
  EXPECT_DOUBLE_EQ(back(1, 2), 1.0);
}

TEST(MapIo, MetricMapKeepsMeters) {
  const auto dir = scratch_dir("mapmetric");
  GrayMap m(3, 2, 7.5);
  m(0, 0) = 0.5;
  const auto p = (dir / "z.tif").string();
  save_map(m, p, MapKind::metric);
  const auto back = load_map(p);
  EXPECT_FLOAT_EQ(static_cast<float>(back(0, 0)), 0.5f);
  EXPECT_FLOAT_EQ(static_cast<float>(back(2, 1)), 7.5f);
  EXPECT_THROW(save_map(m, (dir / "z.png").string(), MapKind::metric), Error);
}

TEST(MapIo, RaggedTextIsRejected) {
  const auto dir = scratch_dir("ragged");
  const auto p = (dir / "r.txt").string();
  std::ofstream(p) << "1 2 3\n4 5\n";
  EXPECT_THROW(load_map(p), Error);
}
