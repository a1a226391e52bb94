#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "vsc/dsp.hpp"

namespace vsc {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using ColormapTable = std::array<std::array<double, 3>, 256>;

/// The published 256-entry table for a map, channels in [0, 1].
const ColormapTable& colormap_table(ColormapName name);

/// Table entry i quantized to 8 bits per channel.
Rgb colormap_entry(ColormapName name, int i);

/// Linear interpolation between adjacent table entries at position v * 255,
/// then rounded to 8 bits. v is clamped to [0, 1].
Rgb colormap_lookup(double v, ColormapName name);
Rgb colormap_lookup(double v, const std::string& name);

}  // namespace vsc
