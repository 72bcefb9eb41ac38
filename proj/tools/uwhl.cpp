// uwhl: restore underwater images, synthesize test scenes, evaluate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uwhl/uwhl.hpp"

namespace {

using namespace uwhl;

struct PipelineFlags {
  RunConfig config;
  std::string veiling_rect;
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f) {
  RunConfig& c = f.config;
  app->add_option("--water-types", c.water_types, "Water-type library file, or 'builtin'")
      ->envname("UWHL_WATER_TYPES")
      ->capture_default_str();
  app->add_option("--force-type", c.force_type, "Run a single water type instead of selecting one");
  app->add_option("--edge-threshold", c.edge_threshold, "Edge-map threshold for veiling-light detection")
      ->capture_default_str();
  app->add_option("--min-vl-frac", c.min_vl_frac, "Smallest veiling-light region, as a fraction of the image")
      ->capture_default_str();
  app->add_option("--veiling-rect", f.veiling_rect, "Manual veiling-light region x,y,w,h");
  app->add_option("--stretch-low", c.stretch_low, "Contrast-stretch low percentile")->capture_default_str();
  app->add_option("--stretch-high", c.stretch_high, "Contrast-stretch high percentile")->capture_default_str();
  app->add_option("--n-hazelines", c.n_hazelines, "Number of haze-line directions")->capture_default_str();
  app->add_option("--min-line-size", c.min_line_size, "Haze-lines with fewer pixels use the global radius")
      ->capture_default_str();
  app->add_option("--t-floor", c.t_floor, "Lowest transmission")->capture_default_str();
  app->add_option("--gf-radius", c.gf_radius, "Guided-filter radius, 0 for max(8, width/50)")->capture_default_str();
  app->add_option("--gf-eps", c.gf_eps, "Guided-filter regularization")->capture_default_str();
  app->add_option("--clip-max", c.clip_max, "Radiance clip before white balance")->capture_default_str();
}

RunConfig finish(const PipelineFlags& f) {
  RunConfig c = f.config;
  if (!f.veiling_rect.empty()) c.veiling_rect = parse_rect(f.veiling_rect);
  validate(c);
  return c;
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw CLI::RequiredError(flag);
}

struct RestoreArgs {
  PipelineFlags pipeline;
  std::string input, output, out_transmission, chart_mask, report, encoding = "auto";
  int bit_depth = 8;
};

int run_restore(const RestoreArgs& a) {
  const RunConfig config = finish(a.pipeline);
  const auto library = resolve_library(config.water_types);
  const LinearImage img = load_image(a.input, parse_encoding(a.encoding));
  std::optional<PixelMask> mask;
  if (!a.chart_mask.empty()) mask = load_mask(a.chart_mask);

  const auto result = restore_auto(img, library, config, mask ? &*mask : nullptr, RestoreOptions{false});
  const auto& best = result.best();
  save_display(best.restored, a.output, a.bit_depth);
  if (!a.out_transmission.empty()) save_map(best.transmission.map, a.out_transmission);
  if (!a.report.empty()) {
    std::ofstream os(a.report);
    if (!os) throw Error("cannot write '" + a.report + "'");
    write_restore_report(os, result);
  }
  std::cout << "selected " << best.water_type.name << "\n";
  return 0;
}

struct SynthArgs {
  std::string kind, water_type = "3C", water_types = "builtin";
  std::uint64_t seed = 0;
  double beta_b = 0.0, noise = 0.0;
  int width = 256, height = 256;
  std::string out_image, out_distance, out_truth, out_transmission, out_chart_mask, out_manifest;
};

int run_synthesize(const SynthArgs& a) {
  SceneOptions opt;
  opt.width = a.width;
  opt.height = a.height;
  opt.water_type = resolve_library(a.water_types).at(a.water_type);
  opt.beta_b = a.beta_b;
  opt.noise_sigma = a.noise;
  const auto scene = make_test_scene(parse_scene_kind(a.kind), a.seed, opt);

  save_linear16(synthesize(scene), a.out_image);
  if (!a.out_distance.empty()) save_map(scene.distance, a.out_distance, MapKind::metric);
  if (!a.out_truth.empty()) save_linear16(scene.radiance, a.out_truth);
  if (!a.out_transmission.empty()) save_map(true_transmission(scene).map, a.out_transmission);
  if (!a.out_chart_mask.empty()) {
    if (scene.charts.empty()) throw Error("scene kind '" + a.kind + "' has no charts");
    save_mask(scene.chart_mask, a.out_chart_mask);
  }
  if (!a.out_manifest.empty()) {
    namespace fs = std::filesystem;
    const fs::path base = fs::absolute(a.out_manifest).parent_path();
    auto rel = [&](const std::string& p) { return fs::relative(fs::absolute(p), base).generic_string(); };
    std::ofstream os(a.out_manifest);
    if (!os) throw Error("cannot write '" + a.out_manifest + "'");
    os << "id=" << a.kind << "_" << a.water_type << "_" << a.seed << " input=" << rel(a.out_image)
       << " encoding=linear16";
    if (!a.out_distance.empty()) os << " distance=" << rel(a.out_distance);
    if (!a.out_chart_mask.empty()) os << " chart_mask=" << rel(a.out_chart_mask);
    for (const auto& c : scene.charts) os << " chart=" << format_chart(c);
    os << "\n";
  }
  return 0;
}

struct EvalArgs {
  PipelineFlags pipeline;
  std::string manifest, report, method_output_dir;
};

int run_evaluate(const EvalArgs& a) {
  const RunConfig config = finish(a.pipeline);
  const auto library = resolve_library(config.water_types);
  std::optional<std::filesystem::path> outdir;
  if (!a.method_output_dir.empty()) outdir = a.method_output_dir;
  const auto report = evaluate_batch(a.manifest, library, config, outdir);

  auto write = [&](std::ostream& os) {
    if (detail::lower_extension(a.report) == ".tsv") {
      write_report_tsv(os, report);
    } else {
      write_report_text(os, report);
    }
  };
  if (a.report.empty() || a.report == "-") {
    write(std::cout);
  } else {
    std::ofstream os(a.report);
    if (!os) throw Error("cannot write '" + a.report + "'");
    write(os);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underwater color restoration and transmission estimation with haze-lines"};
  app.name("uwhl");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit")->configurable(false);

  RestoreArgs ra;
  auto* restore = app.add_subcommand("restore", "Restore one image, selecting the water type automatically");
  restore->add_option("--input", ra.input, "Input image (PNG/TIFF)");
  restore->add_option("--output", ra.output, "Restored image, sRGB");
  restore->add_option("--out-transmission", ra.out_transmission, "Blue-channel transmission map");
  restore->add_option("--chart-mask", ra.chart_mask, "Mask of regions excluded from all statistics");
  restore->add_option("--report", ra.report, "Per-type scores and the selected type");
  restore->add_option("--encoding", ra.encoding, "Input encoding: auto, linear16 or srgb8")->capture_default_str();
  restore->add_option("--bit-depth", ra.bit_depth, "Output bits per channel")
      ->check(CLI::IsMember({8, 16}))
      ->capture_default_str();
  add_pipeline_flags(restore, ra.pipeline);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synthesize", "Render a synthetic underwater test scene");
  synth->add_option("--kind", sa.kind, "planes, ramp or charts");
  synth->add_option("--seed", sa.seed, "Scene seed")->capture_default_str();
  synth->add_option("--water-type", sa.water_type, "Generating water type")->capture_default_str();
  synth->add_option("--water-types", sa.water_types, "Library the water type is taken from")
      ->envname("UWHL_WATER_TYPES")
      ->capture_default_str();
  synth->add_option("--beta-b", sa.beta_b, "Blue attenuation in 1/m, 0 puts the nearest objects at 1 m")
      ->capture_default_str();
  synth->add_option("--noise", sa.noise, "Additive Gaussian noise std")->capture_default_str();
  synth->add_option("--width", sa.width, "Image width")->capture_default_str();
  synth->add_option("--height", sa.height, "Image height")->capture_default_str();
  synth->add_option("--out-image", sa.out_image, "Rendered image, 16-bit linear");
  synth->add_option("--out-distance", sa.out_distance, "Distance map in meters (float TIFF or .txt)");
  synth->add_option("--out-truth", sa.out_truth, "True radiance, 16-bit linear");
  synth->add_option("--out-transmission", sa.out_transmission, "True blue transmission");
  synth->add_option("--out-chart-mask", sa.out_chart_mask, "Chart mask (charts scenes)");
  synth->add_option("--out-manifest", sa.out_manifest, "Single-item evaluation manifest");

  EvalArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Score restorations against distance maps and gray charts");
  eval->add_option("--manifest", ea.manifest, "Manifest of images, distance maps and charts");
  eval->add_option("--report", ea.report, "Report file (.tsv for tab-separated), '-' for stdout");
  eval->add_option("--method-output-dir", ea.method_output_dir, "Directory for restored images and maps");
  add_pipeline_flags(eval, ea.pipeline);

  std::string wt_source = "builtin";
  auto* types = app.add_subcommand("water-types", "Print the active water-type library");
  types->add_option("--water-types", wt_source, "Library file, or 'builtin'")
      ->envname("UWHL_WATER_TYPES")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "uwhl: " << e.what() << "\n" << app.help();
    return 2;
  }

  if (print_config) {
    std::cout << app.config_to_str(true, false);
    return 0;
  }

  try {
    if (*restore) {
      require(ra.input, "--input");
      require(ra.output, "--output");
      return run_restore(ra);
    }
    if (*synth) {
      require(sa.kind, "--kind");
      require(sa.out_image, "--out-image");
      return run_synthesize(sa);
    }
    if (*eval) {
      require(ea.manifest, "--manifest");
      return run_evaluate(ea);
    }
    if (*types) {
      write_library(std::cout, resolve_library(wt_source));
      return 0;
    }
  } catch (const CLI::RequiredError& e) {
    std::cerr << "uwhl: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "uwhl: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
