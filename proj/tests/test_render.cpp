#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "golden_cases.hpp"
#include "test_support.hpp"
#include "vsc/colormap.hpp"
#include "vsc/hash.hpp"
#include "vsc/png.hpp"
#include "vsc/render.hpp"

using namespace vsc;
using namespace vsc::testing;

namespace {

SpectrogramMatrix db_matrix(std::uint64_t seed = 3) {
  return pattern_matrix(1025, 216, MatrixUnit::kDb, seed);
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("colormap table endpoints") {
  CHECK(colormap_entry(ColormapName::kViridis, 0) == Rgb{68, 1, 84});
  CHECK(colormap_entry(ColormapName::kViridis, 255) == Rgb{253, 231, 37});
  CHECK(colormap_entry(ColormapName::kMagma, 0) == Rgb{0, 0, 4});
  CHECK(colormap_entry(ColormapName::kMagma, 255) == Rgb{252, 253, 191});
  CHECK(colormap_lookup(0.0, ColormapName::kViridis) == colormap_entry(ColormapName::kViridis, 0));
  CHECK(colormap_lookup(1.0, "magma") == colormap_entry(ColormapName::kMagma, 255));
  CHECK(colormap_lookup(-3.0, ColormapName::kViridis) == colormap_lookup(0.0, ColormapName::kViridis));
  CHECK(colormap_lookup(7.0, ColormapName::kViridis) == colormap_lookup(1.0, ColormapName::kViridis));
  VSC_CHECK_THROWS_KIND(colormap_lookup(0.5, "jet"), ErrorKind::kConfig);
}

TEST_CASE("colormap interpolation lies between neighbouring entries") {
  for (auto name : {ColormapName::kViridis, ColormapName::kMagma}) {
    for (int i = 0; i < 255; ++i) {
      const Rgb a = colormap_entry(name, i);
      const Rgb b = colormap_entry(name, i + 1);
      const Rgb m = colormap_lookup((i + 0.5) / 255.0, name);
      CHECK(m.r >= std::min(a.r, b.r));
      CHECK(m.r <= std::max(a.r, b.r));
      CHECK(m.g >= std::min(a.g, b.g));
      CHECK(m.g <= std::max(a.g, b.g));
    }
  }
}

TEST_CASE("rendering is byte-deterministic and the PNG decodes to the raster") {
  const auto m = db_matrix();
  const SpectrogramConfig cfg;
  const auto a = render(m, cfg, "clip");
  const auto b = render(m, cfg, "clip");
  CHECK(a.image_bytes == b.image_bytes);
  CHECK(a.config_hash == b.config_hash);
  CHECK(decode_png(a.image_bytes) == a.raster);
  CHECK(a.image_bytes[1] == 'P');
}

TEST_CASE("PNG encoder round-trips arbitrary rasters") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    RgbImage img(1 + static_cast<int>(rng.below(70)), 1 + static_cast<int>(rng.below(40)));
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.below(trial == 0 ? 2 : 256));
    CHECK(decode_png(encode_png(img)) == img);
  }
  std::vector<std::uint8_t> junk = {1, 2, 3};
  VSC_CHECK_THROWS_KIND(decode_png(junk), ErrorKind::kDecode);
}

TEST_CASE("canvas size follows the detail level") {
  SpectrogramConfig cfg;
  const auto std_img = render(db_matrix(), cfg);
  CHECK(std_img.width_px == 640);
  CHECK(std_img.height_px == 480);
  cfg.detail = Detail::kLow;
  const auto low = render(db_matrix(), cfg);
  CHECK(low.width_px == 320);
  CHECK(low.height_px == 240);
}

TEST_CASE("hidden labels leave only colormap pixels outside the plot") {
  SpectrogramConfig cfg;
  cfg.show_labels = false;
  const auto m = db_matrix();
  const auto img = rasterize(m, cfg);
  const PlotRect r = plot_rect(cfg);
  const Rgb zero = colormap_lookup(0.0, cfg.colormap);
  int off = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!r.contains(x, y) && !(img.get(x, y) == zero)) ++off;
    }
  }
  CHECK(off == 0);

  cfg.show_labels = true;
  const auto labelled = rasterize(m, cfg);
  int inside_diff = 0;
  int outside_ink = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (r.contains(x, y)) {
        inside_diff += !(img.get(x, y) == labelled.get(x, y));
      } else {
        outside_ink += labelled.get(x, y) == Rgb{0, 0, 0};
      }
    }
  }
  CHECK(inside_diff == 0);
  CHECK(outside_ink > 200);
}

TEST_CASE("per-image normalization spans the colormap") {
  const SpectrogramConfig cfg;
  const auto m = db_matrix();
  const auto img = rasterize(m, cfg);
  const PlotRect r = plot_rect(cfg);
  std::set<std::uint32_t> seen;
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) {
      const Rgb c = img.get(x, y);
      seen.insert((c.r << 16) | (c.g << 8) | c.b);
    }
  }
  CHECK(seen.size() > 50);

  auto shifted = m;
  for (auto& v : shifted.values) v = 2.0 * v + 17.0;
  CHECK(rasterize(shifted, cfg) == img);

  SpectrogramMatrix constant = m;
  std::fill(constant.values.begin(), constant.values.end(), -12.5);
  const auto flat = rasterize(constant, cfg);
  const Rgb zero = colormap_lookup(0.0, cfg.colormap);
  for (int y = r.y0; y < r.y1; y += 7) {
    for (int x = r.x0; x < r.x1; x += 7) CHECK(flat.get(x, y) == zero);
  }
}

TEST_CASE("extreme values map to the colormap ends") {
  SpectrogramConfig cfg;
  cfg.show_labels = false;
  cfg.freq_axis = FrequencyAxis::kLinear;
  SpectrogramMatrix m = pattern_matrix(4, 4, MatrixUnit::kDb, 1);
  std::fill(m.values.begin(), m.values.end(), -40.0);
  m.at(0, 0) = -80.0;
  m.at(3, 3) = 0.0;
  const auto img = rasterize(m, cfg);
  const PlotRect r = plot_rect(cfg);
  CHECK(img.get(r.x0, r.y1 - 1) == colormap_lookup(0.0, cfg.colormap));
  CHECK(img.get(r.x1 - 1, r.y0) == colormap_lookup(1.0, cfg.colormap));
  CHECK(img.get(r.x0 + r.width() / 2, r.y0 + r.height() / 2) == colormap_lookup(0.5, cfg.colormap));
}

TEST_CASE("rasterize rejects empty or inconsistent matrices") {
  const SpectrogramConfig cfg;
  VSC_CHECK_THROWS_KIND(rasterize(SpectrogramMatrix{}, cfg), ErrorKind::kEmptyInput);
  auto m = pattern_matrix(4, 4, MatrixUnit::kDb, 1);
  m.bin_frequencies_hz.pop_back();
  VSC_CHECK_THROWS_KIND(rasterize(m, cfg), ErrorKind::kConfig);
  SpectrogramConfig tiny;
  tiny.image_width_px = 40;
  tiny.image_height_px = 30;
  VSC_CHECK_THROWS_KIND(rasterize(pattern_matrix(4, 4, MatrixUnit::kDb, 1), tiny), ErrorKind::kConfig);
}

TEST_CASE("ablation grid has nine single-field variants with distinct corpus hashes") {
  const auto grid = ablation_grid();
  REQUIRE(grid.size() == 9);
  CHECK(grid[0].name == "default");
  CHECK(grid[0].config == SpectrogramConfig{});
  std::set<std::string> hashes;
  for (const auto& e : grid) hashes.insert(corpus_hash(e.config));
  CHECK(hashes.size() == 9);
  CHECK(image_config_hash(grid[0].config, "a") != image_config_hash(grid[0].config, "b"));
  CHECK(corpus_hash(grid[0].config) == corpus_hash(SpectrogramConfig{}));
}

TEST_CASE("every grid configuration renders at the expected size") {
  for (const auto& c : golden_cases()) {
    if (c.name.rfind("edge/", 0) == 0) continue;
    CAPTURE(c.name);
    const auto out = render(c.matrix, c.config);
    const auto [w, h] = canvas_size(c.config);
    CHECK(out.width_px == w);
    CHECK(out.height_px == h);
  }
}

TEST_CASE("renders match the committed golden hashes") {
  std::ifstream in(fixture_dir() / "golden_render.json");
  REQUIRE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const auto cases = golden_cases();
  CHECK(golden.size() == cases.size());
  for (const auto& c : cases) {
    CAPTURE(c.name);
    REQUIRE(golden.contains(c.name));
    CHECK(sha256_hex(render(c.matrix, c.config).image_bytes) == golden[c.name].get<std::string>());
  }
}

}
