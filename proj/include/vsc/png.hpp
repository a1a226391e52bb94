#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vsc/image.hpp"

namespace vsc {

/// Encodes an 8-bit RGB PNG. The compressor is a self-contained deflate
/// (greedy LZ77, fixed Huffman codes) so identical rasters produce identical
/// bytes regardless of which zlib build is installed.
std::vector<std::uint8_t> encode_png(const RgbImage& img);

/// Decodes non-interlaced 8-bit grayscale, RGB and RGBA PNGs (alpha dropped).
RgbImage decode_png(std::span<const std::uint8_t> bytes);

/// Raw deflate stream wrapped in a zlib header and Adler-32 trailer.
std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> data);

}  // namespace vsc
