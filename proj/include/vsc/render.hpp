#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsc/dsp.hpp"
#include "vsc/image.hpp"

namespace vsc {

// Fixed layout constants, in pixels. They apply at both detail levels; only
// the canvas size changes with detail.
struct PlotLayout {
  int margin_left = 52;
  int margin_right = 12;
  int margin_top = 8;
  int margin_bottom = 34;
  int colorbar_gap = 8;
  int colorbar_width = 12;
  int colorbar_label_area = 36;
  int tick_length = 4;
};

inline constexpr int kLayoutVersion = 1;

struct PlotRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;  // exclusive
  int y1 = 0;  // exclusive
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Canvas size after applying detail (low halves both dimensions).
std::pair<int, int> canvas_size(const SpectrogramConfig& cfg);
/// Where the spectrogram itself lands on the canvas.
PlotRect plot_rect(const SpectrogramConfig& cfg);

struct RenderedSpectrogram {
  std::vector<std::uint8_t> image_bytes;  // PNG
  std::string config_hash;
  int width_px = 0;
  int height_px = 0;
  RgbImage raster;
};

/// Hash of the config, dsp decisions and layout version. Identifies a corpus
/// of images rendered the same way.
std::string corpus_hash(const SpectrogramConfig& cfg);
/// corpus_hash plus the clip identity.
std::string image_config_hash(const SpectrogramConfig& cfg, const std::string& clip_id);

/// Rasterizes a matrix: per-image min-max normalization, colormap lookup,
/// nearest-bin frequency mapping (log spacing from the first nonzero bin when
/// freq_axis = log; MFCC matrices always use a linear coefficient axis),
/// optional axes/labels and colorbar.
RgbImage rasterize(const SpectrogramMatrix& m, const SpectrogramConfig& cfg);

RenderedSpectrogram render(const SpectrogramMatrix& m, const SpectrogramConfig& cfg,
                           const std::string& clip_id = "");

struct AblationEntry {
  std::string name;   // slug, used for directory names
  std::string title;  // row label as reported
  SpectrogramConfig config;
};

/// The nine ablation configurations, "default" first; each differs from base
/// only in its named field.
std::vector<AblationEntry> ablation_grid(const SpectrogramConfig& base = {});

}  // namespace vsc
