#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "vsc/colormap.hpp"

namespace vsc {

/// 8-bit RGB raster, row-major, origin top-left.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {255, 255, 255});

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  Rgb get(int x, int y) const;
  void set(int x, int y, Rgb c);
  /// Clipped to the image bounds.
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Text uses the embedded 6x11 bitmap font; characters outside printable ASCII
// render as '?'.
int text_width(std::string_view text);
int text_height();
/// Draws with the glyph cell's top-left corner at (x, y).
void draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color);
/// Rotated 90 degrees counter-clockwise, reading bottom to top; (x, y) is the
/// top-left of the rotated bounding box.
void draw_text_vertical(RgbImage& img, int x, int y, std::string_view text, Rgb color);

}  // namespace vsc
