#include "vsc/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "vsc/colormap.hpp"
#include "vsc/error.hpp"
#include "vsc/hash.hpp"
#include "vsc/png.hpp"

namespace vsc {
namespace {

constexpr Rgb kInk = {0, 0, 0};
constexpr Rgb kCanvas = {255, 255, 255};
constexpr PlotLayout kLayout{};

std::string format_hz(double f) {
  char buf[32];
  if (f >= 1000.0) {
    const double k = f / 1000.0;
    if (std::abs(k - std::round(k)) < 1e-9) {
      std::snprintf(buf, sizeof buf, "%dk", static_cast<int>(std::round(k)));
    } else {
      std::snprintf(buf, sizeof buf, "%.1fk", k);
    }
  } else {
    std::snprintf(buf, sizeof buf, "%d", static_cast<int>(std::round(f)));
  }
  return buf;
}

std::string format_value(double v) {
  char buf[32];
  if (std::abs(v) < 1e-12) v = 0.0;
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// 1-2-5 stepped ticks covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> ticks;
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(t);
  }
  return ticks;
}

bool uses_log_axis(const SpectrogramMatrix& m, const SpectrogramConfig& cfg) {
  return cfg.freq_axis == FrequencyAxis::kLog && m.unit != MatrixUnit::kMfccCoeff;
}

std::size_t first_positive_bin(const SpectrogramMatrix& m) {
  for (std::size_t b = 0; b < m.bin_frequencies_hz.size(); ++b) {
    if (m.bin_frequencies_hz[b] > 0.0) return b;
  }
  return 0;
}

std::size_t nearest_bin(const std::vector<double>& freqs, double f) {
  auto it = std::lower_bound(freqs.begin(), freqs.end(), f);
  if (it == freqs.begin()) return 0;
  if (it == freqs.end()) return freqs.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - freqs.begin());
  return (f - freqs[hi - 1] <= freqs[hi] - f) ? hi - 1 : hi;
}

/// Bin shown on plot row y (0 = bottom) of a plot with `rows` rows.
std::vector<std::size_t> row_bins(const SpectrogramMatrix& m, const SpectrogramConfig& cfg,
                                  int rows) {
  std::vector<std::size_t> bins(static_cast<std::size_t>(rows));
  const double span = rows > 1 ? rows - 1 : 1;
  if (uses_log_axis(m, cfg) && m.n_bins > 1) {
    const std::size_t first = first_positive_bin(m);
    const double f_lo = m.bin_frequencies_hz[first];
    const double f_hi = m.bin_frequencies_hz.back();
    for (int y = 0; y < rows; ++y) {
      const double f = f_lo * std::pow(f_hi / f_lo, y / span);
      bins[y] = std::max(first, nearest_bin(m.bin_frequencies_hz, f));
    }
  } else {
    for (int y = 0; y < rows; ++y) {
      bins[y] = static_cast<std::size_t>(std::lround(y * double(m.n_bins - 1) / span));
    }
  }
  return bins;
}

/// Fractional plot row (0 = bottom) at which frequency f (or coefficient
/// index, for MFCC) appears; negative when outside the plotted range.
double row_of(const SpectrogramMatrix& m, const SpectrogramConfig& cfg, double f, int rows) {
  const double span = rows > 1 ? rows - 1 : 1;
  if (m.unit == MatrixUnit::kMfccCoeff) {
    return m.n_bins > 1 ? f / double(m.n_bins - 1) * span : 0.0;
  }
  const auto& freqs = m.bin_frequencies_hz;
  if (uses_log_axis(m, cfg)) {
    const double f_lo = freqs[first_positive_bin(m)];
    const double f_hi = freqs.back();
    if (f < f_lo || f > f_hi || f_hi <= f_lo) return -1.0;
    return std::log(f / f_lo) / std::log(f_hi / f_lo) * span;
  }
  if (f < freqs.front() || f > freqs.back() || m.n_bins < 2) return -1.0;
  auto it = std::lower_bound(freqs.begin(), freqs.end(), f);
  std::size_t hi = std::max<std::size_t>(1, static_cast<std::size_t>(it - freqs.begin()));
  hi = std::min(hi, freqs.size() - 1);
  const double frac = (f - freqs[hi - 1]) / (freqs[hi] - freqs[hi - 1]);
  return (double(hi - 1) + frac) / double(m.n_bins - 1) * span;
}

void draw_axes(RgbImage& img, const SpectrogramMatrix& m, const SpectrogramConfig& cfg,
               const PlotRect& r) {
  const int th = text_height();
  // Frame
  img.fill_rect(r.x0 - 1, r.y0 - 1, r.x1 + 1, r.y0, kInk);
  img.fill_rect(r.x0 - 1, r.y1, r.x1 + 1, r.y1 + 1, kInk);
  img.fill_rect(r.x0 - 1, r.y0 - 1, r.x0, r.y1 + 1, kInk);
  img.fill_rect(r.x1, r.y0 - 1, r.x1 + 1, r.y1 + 1, kInk);

  // Time axis: one tick per whole second.
  const double t0 = m.frame_times_s.empty() ? 0.0 : m.frame_times_s.front();
  const double t1 = m.frame_times_s.empty() ? 0.0 : m.frame_times_s.back();
  int last_label_end = -1000;
  for (double t = std::ceil(t0); t <= t1 + 1e-9; t += 1.0) {
    const int x = r.x0 + (t1 > t0 ? static_cast<int>(std::lround((t - t0) / (t1 - t0) *
                                                                 (r.width() - 1)))
                                  : 0);
    img.fill_rect(x, r.y1 + 1, x + 1, r.y1 + 1 + kLayout.tick_length, kInk);
    const std::string label = format_value(t);
    const int lx = x - text_width(label) / 2;
    if (lx > last_label_end + 2) {
      draw_text(img, lx, r.y1 + 2 + kLayout.tick_length, label, kInk);
      last_label_end = lx + text_width(label);
    }
  }
  const std::string x_title = "Time (s)";
  draw_text(img, r.x0 + (r.width() - text_width(x_title)) / 2,
            r.y1 + 4 + kLayout.tick_length + th, x_title, kInk);

  // Frequency axis.
  std::vector<std::pair<double, std::string>> ticks;
  if (m.unit == MatrixUnit::kMfccCoeff) {
    for (std::size_t k = 0; k < m.n_bins; k += 5) ticks.emplace_back(double(k), format_value(double(k)));
  } else if (uses_log_axis(m, cfg)) {
    for (double f = 32.0; f <= 16384.0; f *= 2.0) ticks.emplace_back(f, format_hz(f));
  } else {
    for (double f : nice_ticks(m.bin_frequencies_hz.front(), m.bin_frequencies_hz.back(), 5)) {
      ticks.emplace_back(f, format_hz(f));
    }
  }
  int last_label_top = 1 << 20;
  for (const auto& [value, label] : ticks) {
    const double row = row_of(m, cfg, value, r.height());
    if (row < 0.0) continue;
    const int y = r.y1 - 1 - static_cast<int>(std::lround(row));
    img.fill_rect(r.x0 - 1 - kLayout.tick_length, y, r.x0 - 1, y + 1, kInk);
    const int ly = y - th / 2;
    if (ly + th < last_label_top - 1) {
      draw_text(img, r.x0 - 3 - kLayout.tick_length - text_width(label), ly, label, kInk);
      last_label_top = ly;
    }
  }
  const std::string y_title = m.unit == MatrixUnit::kMfccCoeff ? "MFCC" : "Hz";
  draw_text_vertical(img, 2, r.y0 + (r.height() - text_width(y_title)) / 2, y_title, kInk);
}

void draw_colorbar(RgbImage& img, const SpectrogramConfig& cfg, const PlotRect& r,
                   double lo, double hi) {
  const int x0 = r.x1 + kLayout.colorbar_gap;
  const int x1 = x0 + kLayout.colorbar_width;
  const int h = r.height();
  for (int y = 0; y < h; ++y) {
    const double v = h > 1 ? 1.0 - double(y) / (h - 1) : 0.0;
    img.fill_rect(x0, r.y0 + y, x1, r.y0 + y + 1, colormap_lookup(v, cfg.colormap));
  }
  img.fill_rect(x0 - 1, r.y0 - 1, x1 + 1, r.y0, kInk);
  img.fill_rect(x0 - 1, r.y1, x1 + 1, r.y1 + 1, kInk);
  img.fill_rect(x0 - 1, r.y0 - 1, x0, r.y1 + 1, kInk);
  img.fill_rect(x1, r.y0 - 1, x1 + 1, r.y1 + 1, kInk);

  const int th = text_height();
  std::vector<double> ticks = hi > lo ? nice_ticks(lo, hi, 5) : std::vector<double>{lo};
  int last_label_top = 1 << 20;
  for (double t : ticks) {
    const double frac = hi > lo ? (t - lo) / (hi - lo) : 0.0;
    const int y = r.y1 - 1 - static_cast<int>(std::lround(frac * (h - 1)));
    img.fill_rect(x1 + 1, y, x1 + 1 + kLayout.tick_length, y + 1, kInk);
    const int ly = y - th / 2;
    if (ly + th < last_label_top - 1) {
      draw_text(img, x1 + 3 + kLayout.tick_length, ly, format_value(t), kInk);
      last_label_top = ly;
    }
  }
}

std::string short_hash(const nlohmann::json& j) { return sha256_hex(j.dump()).substr(0, 16); }

nlohmann::json corpus_descriptor(const SpectrogramConfig& cfg) {
  return {{"config", cfg},
          {"dsp", dsp_decisions()},
          {"layout_version", kLayoutVersion},
          {"normalization", "per_image_min_max"},
          {"image_format", "png_rgb8"}};
}

}  // namespace

std::pair<int, int> canvas_size(const SpectrogramConfig& cfg) {
  if (cfg.detail == Detail::kLow) return {cfg.image_width_px / 2, cfg.image_height_px / 2};
  return {cfg.image_width_px, cfg.image_height_px};
}

PlotRect plot_rect(const SpectrogramConfig& cfg) {
  const auto [w, h] = canvas_size(cfg);
  int right = kLayout.margin_right;
  if (cfg.show_colorbar) {
    right += kLayout.colorbar_gap + kLayout.colorbar_width + kLayout.colorbar_label_area;
  }
  return {kLayout.margin_left, kLayout.margin_top, w - right, h - kLayout.margin_bottom};
}

std::string corpus_hash(const SpectrogramConfig& cfg) {
  return short_hash(corpus_descriptor(cfg));
}

std::string image_config_hash(const SpectrogramConfig& cfg, const std::string& clip_id) {
  auto j = corpus_descriptor(cfg);
  j["clip"] = clip_id;
  return short_hash(j);
}

RgbImage rasterize(const SpectrogramMatrix& m, const SpectrogramConfig& cfg) {
  validate(cfg);
  if (m.empty() || m.n_bins == 0 || m.n_frames == 0) {
    throw Error(ErrorKind::kEmptyInput, "cannot render an empty matrix");
  }
  if (m.values.size() != m.n_bins * m.n_frames || m.bin_frequencies_hz.size() != m.n_bins) {
    throw Error(ErrorKind::kConfig, "matrix dimensions are inconsistent");
  }
  const auto [w, h] = canvas_size(cfg);
  const PlotRect r = plot_rect(cfg);
  if (r.width() < 2 || r.height() < 2) throw Error(ErrorKind::kConfig, "image too small for layout");

  const Rgb background = cfg.show_labels ? kCanvas : colormap_lookup(0.0, cfg.colormap);
  RgbImage img(w, h, background);

  const auto [lo_it, hi_it] = std::minmax_element(m.values.begin(), m.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi - lo;

  const auto bins = row_bins(m, cfg, r.height());
  std::vector<std::size_t> frames(static_cast<std::size_t>(r.width()));
  for (int x = 0; x < r.width(); ++x) {
    frames[x] = static_cast<std::size_t>(
        std::lround(x * double(m.n_frames - 1) / double(r.width() - 1)));
  }
  for (int py = 0; py < r.height(); ++py) {
    const std::size_t bin = bins[static_cast<std::size_t>(r.height() - 1 - py)];
    for (int px = 0; px < r.width(); ++px) {
      const double v = range > 0.0 ? (m.at(bin, frames[px]) - lo) / range : 0.0;
      img.set(r.x0 + px, r.y0 + py, colormap_lookup(v, cfg.colormap));
    }
  }

  if (cfg.show_labels) draw_axes(img, m, cfg, r);
  if (cfg.show_colorbar) draw_colorbar(img, cfg, r, lo, hi);
  return img;
}

RenderedSpectrogram render(const SpectrogramMatrix& m, const SpectrogramConfig& cfg,
                           const std::string& clip_id) {
  RenderedSpectrogram out;
  out.raster = rasterize(m, cfg);
  out.image_bytes = encode_png(out.raster);
  out.width_px = out.raster.width();
  out.height_px = out.raster.height();
  out.config_hash = image_config_hash(cfg, clip_id);
  return out;
}

std::vector<AblationEntry> ablation_grid(const SpectrogramConfig& base) {
  validate(base);
  std::vector<AblationEntry> grid;
  auto add = [&](const char* name, const char* title, auto&& edit) {
    SpectrogramConfig c = base;
    edit(c);
    grid.push_back({name, title, c});
  };
  add("default", "Default parameters", [](SpectrogramConfig&) {});
  add("linear_frequency_axis", "Linear frequency axis",
      [](SpectrogramConfig& c) { c.freq_axis = FrequencyAxis::kLinear; });
  add("linear_amplitude_scale", "Linear amplitude scale",
      [](SpectrogramConfig& c) { c.amp_scale = AmplitudeScale::kLinear; });
  add("remove_labels", "Remove labels", [](SpectrogramConfig& c) { c.show_labels = false; });
  add("show_colorbar", "Show colorbar", [](SpectrogramConfig& c) { c.show_colorbar = true; });
  add("magma_colormap", "Magma colormap",
      [](SpectrogramConfig& c) { c.colormap = ColormapName::kMagma; });
  add("mel_spectrogram", "Mel spectrogram",
      [](SpectrogramConfig& c) { c.style = SpectrogramStyle::kMel; });
  add("mfccs", "MFCCs", [](SpectrogramConfig& c) { c.style = SpectrogramStyle::kMfcc; });
  add("low_resolution", "Low resolution", [](SpectrogramConfig& c) { c.detail = Detail::kLow; });
  return grid;
}

}  // namespace vsc
