// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "uwhl/uwhl.hpp"

using namespace uwhl;

namespace {

constexpr std::uint64_t kRampSeed = 1;
constexpr std::uint64_t kChartSeed = 7;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s AC%d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Random radiance at random distances in [0.5, 10] m, two scenes per type.
std::vector<SyntheticScene> round_trip_scenes(const WaterTypeLibrary& lib) {
  std::vector<SyntheticScene> scenes;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uz(0.5, 10.0);
  for (int k = 0; k < 20; ++k) {
    const auto& wt = lib[static_cast<std::size_t>(k) % lib.size()];
    SyntheticScene s;
    s.water_type = wt;
    s.beta_b = k < 10 ? kJerlovTable[static_cast<std::size_t>(k)].k475 : 0.1;
    s.veiling = typical_veiling_light(wt);
    s.radiance = oracle::random_image(rng, 256, 256);
    s.distance = GrayMap(256, 256);
    for (auto& z : s.distance.pixels()) z = uz(rng);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

struct SceneRun {
  std::string type;
  SyntheticScene scene;
  LinearImage input;
  RestorationResult result;
};

SceneRun run_scene(SceneKind kind, std::uint64_t seed, const WaterType& wt, const WaterTypeLibrary& lib,
                   double noise = 0.0, const RunConfig& config = {}, double scale = 1.0) {
  SceneOptions o;
  o.water_type = wt;
  o.noise_sigma = noise;
  SceneRun r{wt.name, make_test_scene(kind, seed, o), {}, {}};
  r.input = synthesize(r.scene);
  if (scale != 1.0)
    for (auto& p : r.input.pixels()) p = p * scale;
  const PixelMask* mask = r.scene.charts.empty() ? nullptr : &r.scene.chart_mask;
  r.result = restore_auto(r.input, lib, config, mask);
  return r;
}

}  // namespace

int main() {
  const auto lib = builtin_library();

  // AC1 and AC2: exact inversion of the image formation model.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scenes = round_trip_scenes(lib);
    double max_err = 0.0;
    double max_comp = 0.0;
    double min_z = 1e9, max_z = 0.0;
    std::vector<LinearImage> inputs;
    for (const auto& s : scenes) {
      const auto img = synthesize(s);
      const auto t = true_transmission(s);
      const auto j = recover_radiance(img, s.veiling, t, s.water_type);
      for (std::size_t i = 0; i < img.size(); ++i) {
        for (int c = 0; c < 3; ++c) max_err = std::max(max_err, std::abs(j[i][c] - s.radiance[i][c]));
        min_z = std::min(min_z, s.distance[i]);
        max_z = std::max(max_z, s.distance[i]);
      }
      inputs.push_back(img);
    }
    const double elapsed = seconds_since(t0);
    report(1, max_err <= 1e-5 && elapsed < 5.0, "round-trip exactness",
           fmt("20 scenes, z in [%.2f, %.2f] m, max |J - J_true| = %.2e, %.2f s", min_z, max_z, max_err, elapsed));

    for (std::size_t k = 0; k < scenes.size(); ++k) {
      const auto& s = scenes[k];
      const auto ci = medium_compensate(inputs[k], s.veiling, s.water_type);
      const auto cj = medium_compensate(s.radiance, s.veiling, s.water_type);
      const auto t = true_transmission(s);
      for (std::size_t i = 0; i < ci.size(); ++i)
        for (int c = 0; c < 3; ++c) max_comp = std::max(max_comp, std::abs(ci[i][c] - t[i] * cj[i][c]));
    }
    report(2, max_comp <= 1e-6, "compensated-space identity", fmt("max deviation %.2e over 20 scenes", max_comp));
  }

  // Full pipeline runs shared by AC3, AC4, AC5 and AC7.
  std::vector<SceneRun> ramps[2];
  std::vector<SceneRun> charts;
  {
    const double noise[2] = {0.0, 0.005};
    double min_rho[2] = {1.0, 1.0};
    std::string worst[2];
    for (int n = 0; n < 2; ++n) {
      for (const auto& wt : lib.entries()) {
        auto r = run_scene(SceneKind::ramp, kRampSeed, wt, lib, noise[n]);
        const double rho = transmission_correlation(r.result.best().transmission, r.scene.distance);
        if (rho < min_rho[n]) {
          min_rho[n] = rho;
          worst[n] = wt.name;
        }
        ramps[n].push_back(std::move(r));
      }
    }
    report(3, min_rho[0] >= 0.95 && min_rho[1] >= 0.85, "transmission quality on ramp scenes",
           fmt("min rho %.4f noiseless (>= 0.95), %.4f at sigma 0.005 (>= 0.85)", min_rho[0], min_rho[1]) +
               ", worst " + worst[0] + " / " + worst[1]);
  }
  {
    int hits = 0;
    std::string misses;
    double worst_restored = 0.0;
    double best_input = 180.0;
    for (const auto& wt : lib.entries()) {
      auto r = run_scene(SceneKind::charts, kChartSeed, wt, lib);
      // The generating type is in the library, so it is also the nearest one.
      const auto& selected = r.result.best().water_type.name;
      if (selected == wt.name) {
        ++hits;
      } else {
        misses += " " + wt.name + "->" + selected;
      }
      for (const auto& c : r.scene.charts) {
        worst_restored = std::max(worst_restored, angular_error(r.result.best().restored, c));
        best_input = std::min(best_input, angular_error(r.input, c));
      }
      charts.push_back(std::move(r));
    }
    report(4, hits >= 8, "water-type selection",
           std::to_string(hits) + "/10 generating types selected (>= 8)" + (misses.empty() ? "" : ", missed" + misses));
    report(5, worst_restored <= 3.0 && best_input >= 15.0, "gray-patch angular error",
           fmt("restored max %.3f deg (<= 3), input min %.3f deg (>= 15), %.0f charts", worst_restored, best_input,
               static_cast<double>(charts.size() * charts[0].scene.charts.size())));
  }

  // AC6: oracle equivalences.
  {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> side(1, 16);
    std::uniform_int_distribution<std::size_t> pick(0, lib.size() - 1);
    const int ns[] = {2, 3, 17, 100, 500};
    std::size_t mismatches = 0, pixels = 0;
    for (int k = 0; k < 100; ++k) {
      const auto img = oracle::random_image(rng, side(rng), side(rng));
      const Rgb a = oracle::random_image(rng, 1, 1, 0.05, 0.95)[0];
      const auto comp = medium_compensate(img, a, lib[pick(rng)]);
      const auto dirs = sphere_directions(ns[k % 5]);
      const auto cl = cluster_pixels(comp, dirs);
      for (std::size_t i = 0; i < comp.size(); ++i) {
        mismatches += cl.assignment[i] != oracle::nearest_by_angle(comp[i], dirs);
        ++pixels;
      }
    }

    double gf_err = 0.0;
    const std::pair<int, double> params[] = {{1, 1e-3}, {4, 1e-3}, {8, 1e-3}, {8, 1e-1}};
    for (const auto& [radius, eps] : params) {
      const auto guide = oracle::random_image(rng, 64, 64);
      GrayMap p(64, 64);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& v : p.pixels()) v = u(rng);
      gf_err = std::max(gf_err, oracle::max_abs_diff(guided_filter(p, guide, radius, eps),
                                                     oracle::guided_filter(p, guide, radius, eps)));
    }
    {
      // A real guide and matted map from a synthetic scene, cropped to 64x64.
      const auto& run = charts[6];
      const TransmissionEstimator est(run.input, run.result.veiling);
      TransmissionStages st;
      (void)est.estimate(run.scene.water_type, &st);
      LinearImage guide(64, 64);
      GrayMap p(64, 64);
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
          guide(x, y) = est.guidance()(x + 96, y + 40);
          p(x, y) = st.matted(x + 96, y + 40);
        }
      gf_err = std::max(gf_err, oracle::max_abs_diff(guided_filter(p, guide, 8, 1e-3),
                                                     oracle::guided_filter(p, guide, 8, 1e-3)));
    }

    double rho_err = 0.0;
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t len : {2u, 5u, 64u, 1000u, 100000u}) {
      std::vector<double> x(len), y(len);
      for (std::size_t i = 0; i < len; ++i) {
        x[i] = 10.0 + nd(rng);
        y[i] = -0.5 * x[i] + nd(rng);
      }
      rho_err = std::max(rho_err, std::abs(pearson(x, y) - oracle::pearson_two_pass(x, y)));
    }
    for (const auto& r : ramps[1]) {
      std::vector<double> x, y;
      const auto& t = r.result.best().transmission;
      for (std::size_t i = 0; i < t.map.size(); ++i)
        if (std::isfinite(r.scene.distance[i])) {
          x.push_back(r.scene.distance[i]);
          y.push_back(-std::log(t[i]));
        }
      rho_err = std::max(rho_err, std::abs(transmission_correlation(t, r.scene.distance) -
                                           oracle::pearson_two_pass(x, y)));
    }
    report(6, mismatches == 0 && gf_err <= 1e-6 && rho_err <= 1e-12, "oracle equivalences",
           std::to_string(mismatches) + "/" + std::to_string(pixels) + " haze-line mismatches over 100 images" +
               fmt(", guided filter max diff %.2e (<= 1e-6), Pearson max diff %.2e (<= 1e-12)", gf_err, rho_err));
  }

  // AC7: invariants.
  {
    std::vector<std::string> broken;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // t within [t_floor, 1] for every candidate of every run.
    const double floor = RunConfig{}.t_floor;
    bool t_ok = true;
    auto check_t = [&](const std::vector<SceneRun>& runs) {
      for (const auto& r : runs)
        for (const auto& c : r.result.candidates)
          for (double v : c.transmission.map.pixels()) t_ok = t_ok && v >= floor && v <= 1.0;
    };
    check_t(ramps[0]);
    check_t(ramps[1]);
    check_t(charts);
    if (!t_ok) broken.push_back("t range");

    bool lb_ok = true, matte_ok = true;
    for (int k = 0; k < 20; ++k) {
      const auto img = oracle::random_image(rng, 32, 32);
      const Rgb a = oracle::random_image(rng, 1, 1, 0.05, 1.0)[0];
      const auto lb = lower_bound(img, a, lib[static_cast<std::size_t>(k) % lib.size()]);
      for (double v : lb.pixels()) lb_ok = lb_ok && v >= 0.0 && v <= 1.0;

      GrayMap init(32, 32), dm(32, 32);
      for (std::size_t i = 0; i < dm.size(); ++i) {
        init[i] = u(rng);
        dm[i] = 6.0 * u(rng);
      }
      VeilingLightEstimate est;
      est.dm_mean = 2.0 * u(rng);
      est.dm_std = u(rng);
      est.dm_max = est.dm_mean + 3.0 * u(rng);
      const auto m = soft_matte(init, lb, dm, est);
      for (std::size_t i = 0; i < m.size(); ++i)
        matte_ok = matte_ok && m[i] >= std::min(init[i], lb[i]) && m[i] <= std::max(init[i], lb[i]);
    }
    if (!lb_ok) broken.push_back("lower bound range");
    if (!matte_ok) broken.push_back("soft matte interval");

    double wb_err = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto img = oracle::random_image(rng, 40, 30, 0.001, 1.5);
      PixelMask mask(40, 30);
      for (auto& v : mask.pixels()) v = u(rng) < 0.5;
      mask[0] = 1;
      const Rgb mu = channel_means(white_balance(img, mask), mask);
      const double level = (mu.r + mu.g + mu.b) / 3.0;
      for (int c = 0; c < 3; ++c) wb_err = std::max(wb_err, std::abs(mu[c] - level) / level);
    }
    for (const auto& r : charts) {
      const Rgb mu = channel_means(r.result.best().restored, r.result.object_mask);
      const double level = (mu.r + mu.g + mu.b) / 3.0;
      // Restored images are clipped at clip_max; only check unclipped runs.
      bool clipped = false;
      for (const auto& p : r.result.best().restored.pixels())
        for (int c = 0; c < 3; ++c) clipped = clipped || p[c] >= RunConfig{}.clip_max;
      if (!clipped)
        for (int c = 0; c < 3; ++c) wb_err = std::max(wb_err, std::abs(mu[c] - level) / level);
    }
    if (!(wb_err <= 1e-9)) broken.push_back("white balance");

    double psi_err = 0.0;
    for (const auto& r : charts) {
      for (double s : {0.5, 2.0, 10.0}) {
        LinearImage scaled = r.result.best().restored;
        for (auto& p : scaled.pixels()) p = p * s;
        for (const auto& c : r.scene.charts)
          psi_err = std::max(psi_err, std::abs(angular_error(scaled, c) - angular_error(r.result.best().restored, c)));
      }
    }
    if (!(psi_err <= 1e-9)) broken.push_back("psi scale");

    double rho_err = 0.0;
    for (const auto& r : ramps[0]) {
      std::vector<double> x, y;
      const auto& t = r.result.best().transmission;
      for (std::size_t i = 0; i < t.map.size(); ++i)
        if (std::isfinite(r.scene.distance[i])) {
          x.push_back(r.scene.distance[i]);
          y.push_back(-std::log(t[i]));
        }
      const double rho = pearson(x, y);
      for (auto& v : x) v = 3.28084 * v + 1.5;
      for (auto& v : y) v = 0.25 * v - 4.0;
      rho_err = std::max(rho_err, std::abs(pearson(x, y) - rho));
    }
    if (!(rho_err <= 1e-12)) broken.push_back("rho affine");

    // Scaling the input scales A with it. Clipping is the only step that is
    // not scale-equivariant, so it is lifted for this comparison.
    RunConfig unclipped;
    unclipped.clip_max = 1e9;
    int moved = 0;
    for (const auto& wt : lib.entries()) {
      const auto base = run_scene(SceneKind::charts, kChartSeed, wt, lib, 0.0, unclipped).result.selected;
      for (double s : {0.5, 2.0}) {
        const auto sel = run_scene(SceneKind::charts, kChartSeed, wt, lib, 0.0, unclipped, s).result.selected;
        if (sel != base) {
          ++moved;
          broken.push_back("selection " + wt.name + fmt(" x%.1f", s));
        }
      }
    }

    std::string detail = fmt("wb %.1e, psi %.1e, rho %.1e", wb_err, psi_err, rho_err) +
                         ", selection changed in " + std::to_string(moved) + "/20 scaled runs";
    for (const auto& b : broken) detail += "; broken: " + b;
    report(7, broken.empty(), "invariants", detail);
  }

  return failures == 0 ? 0 : 1;
}
