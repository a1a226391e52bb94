#include "vsc/colormap.hpp"

#include <algorithm>
#include <cmath>

#include "vsc/error.hpp"

namespace vsc {
namespace {
#include "vsc/detail/colormap_tables.inc"

std::uint8_t quantize(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}
}  // namespace

const ColormapTable& colormap_table(ColormapName name) {
  return name == ColormapName::kMagma ? kMagmaTable : kViridisTable;
}

Rgb colormap_entry(ColormapName name, int i) {
  const auto& e = colormap_table(name)[static_cast<std::size_t>(std::clamp(i, 0, 255))];
  return {quantize(e[0]), quantize(e[1]), quantize(e[2])};
}

Rgb colormap_lookup(double v, ColormapName name) {
  const auto& table = colormap_table(name);
  const double pos = std::clamp(v, 0.0, 1.0) * 255.0;
  const int i = std::min(static_cast<int>(pos), 254);
  const double frac = pos - i;
  const auto& a = table[static_cast<std::size_t>(i)];
  const auto& b = table[static_cast<std::size_t>(i + 1)];
  if (frac == 0.0) return {quantize(a[0]), quantize(a[1]), quantize(a[2])};
  if (frac == 1.0) return {quantize(b[0]), quantize(b[1]), quantize(b[2])};
  return {quantize(a[0] + frac * (b[0] - a[0])), quantize(a[1] + frac * (b[1] - a[1])),
          quantize(a[2] + frac * (b[2] - a[2]))};
}

Rgb colormap_lookup(double v, const std::string& name) {
  return colormap_lookup(v, parse_colormap(name));
}

}  // namespace vsc
