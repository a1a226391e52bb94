#include "vsc/image.hpp"

#include <algorithm>
#include <array>

#include "vsc/error.hpp"

namespace vsc {
namespace {
#include "vsc/detail/font_6x11.inc"

const std::array<std::uint8_t, 11>& glyph(char c) {
  if (c < kFirstGlyph || c > '~') c = '?';
  return kGlyphs[static_cast<std::size_t>(c - kFirstGlyph)];
}
}  // namespace

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::kConfig, "image must be non-empty");
  data_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Rgb RgbImage::get(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

void RgbImage::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, width_);
  y1 = std::min(y1, height_);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) set(x, y, c);
  }
}

int text_width(std::string_view text) { return kGlyphWidth * static_cast<int>(text.size()); }
int text_height() { return kGlyphHeight; }

void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color) {
  for (char c : text) {
    const auto& rows = glyph(c);
    for (int gy = 0; gy < kGlyphHeight; ++gy) {
      for (int gx = 0; gx < kGlyphWidth; ++gx) {
        if (rows[gy] & (1u << (kGlyphWidth - 1 - gx))) img.set(x + gx, y + gy, color);
      }
    }
    x += kGlyphWidth;
  }
}

void draw_text_vertical(RgbImage& img, int x, int y, std::string_view text, Rgb color) {
  // Reading bottom to top: character i occupies rows [bottom - (i+1)*w, bottom - i*w).
  const int bottom = y + text_width(text);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& rows = glyph(text[i]);
    const int cell_bottom = bottom - static_cast<int>(i) * kGlyphWidth;
    for (int gy = 0; gy < kGlyphHeight; ++gy) {
      for (int gx = 0; gx < kGlyphWidth; ++gx) {
        if (rows[gy] & (1u << (kGlyphWidth - 1 - gx))) {
          img.set(x + gy, cell_bottom - 1 - gx, color);
        }
      }
    }
  }
}

}  // namespace vsc
