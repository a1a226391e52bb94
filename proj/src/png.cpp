#include "vsc/png.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>

#include <zlib.h>

#include "vsc/error.hpp"

namespace vsc {
namespace {

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  // LSB-first, as deflate packs data elements.
  void put(std::uint32_t value, int bits) {
    acc_ |= static_cast<std::uint64_t>(value) << count_;
    count_ += bits;
    while (count_ >= 8) {
      out_.push_back(static_cast<std::uint8_t>(acc_));
      acc_ >>= 8;
      count_ -= 8;
    }
  }

  // Huffman codes are defined MSB-first.
  void put_code(std::uint32_t code, int bits) {
    std::uint32_t rev = 0;
    for (int i = 0; i < bits; ++i) rev |= ((code >> i) & 1u) << (bits - 1 - i);
    put(rev, bits);
  }

  void flush() {
    if (count_ > 0) out_.push_back(static_cast<std::uint8_t>(acc_));
    acc_ = 0;
    count_ = 0;
  }

 private:
  std::vector<std::uint8_t>& out_;
  std::uint64_t acc_ = 0;
  int count_ = 0;
};

void put_literal(BitWriter& w, int sym) {
  if (sym <= 143) {
    w.put_code(0x30 + sym, 8);
  } else if (sym <= 255) {
    w.put_code(0x190 + (sym - 144), 9);
  } else if (sym <= 279) {
    w.put_code(sym - 256, 7);
  } else {
    w.put_code(0xc0 + (sym - 280), 8);
  }
}

constexpr std::array<int, 29> kLengthBase = {3,  4,  5,  6,  7,  8,  9,  10, 11,  13,
                                             15, 17, 19, 23, 27, 31, 35, 43, 51,  59,
                                             67, 83, 99, 115, 131, 163, 195, 227, 258};
constexpr std::array<int, 29> kLengthExtra = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2,
                                              2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0};
constexpr std::array<int, 30> kDistBase = {1,    2,    3,    4,    5,    7,     9,     13,
                                           17,   25,   33,   49,   65,   97,    129,   193,
                                           257,  385,  513,  769,  1025, 1537,  2049,  3073,
                                           4097, 6145, 8193, 12289, 16385, 24577};
constexpr std::array<int, 30> kDistExtra = {0, 0, 0, 0, 1, 1, 2,  2,  3,  3,  4,  4,  5,  5,  6,
                                            6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13};

void put_match(BitWriter& w, int length, int distance) {
  int li = 28;
  while (kLengthBase[li] > length) --li;
  put_literal(w, 257 + li);
  if (kLengthExtra[li]) w.put(static_cast<std::uint32_t>(length - kLengthBase[li]), kLengthExtra[li]);
  int di = 29;
  while (kDistBase[di] > distance) --di;
  w.put_code(static_cast<std::uint32_t>(di), 5);
  if (kDistExtra[di]) w.put(static_cast<std::uint32_t>(distance - kDistBase[di]), kDistExtra[di]);
}

constexpr int kWindow = 32768;
constexpr int kMinMatch = 3;
constexpr int kMaxMatch = 258;
constexpr int kHashBits = 15;
constexpr int kMaxChain = 64;

std::uint32_t hash3(const std::uint8_t* p) {
  return ((std::uint32_t(p[0]) << 16 | std::uint32_t(p[1]) << 8 | p[2]) * 2654435761u) >>
         (32 - kHashBits);
}

void deflate_fixed(std::span<const std::uint8_t> data, std::vector<std::uint8_t>& out) {
  BitWriter w(out);
  w.put(1, 1);  // BFINAL
  w.put(1, 2);  // BTYPE = fixed Huffman
  const int n = static_cast<int>(data.size());
  std::vector<int> head(1 << kHashBits, -1);
  std::vector<int> prev(static_cast<std::size_t>(std::max(n, 1)), -1);

  auto insert = [&](int pos) {
    if (pos + kMinMatch > n) return;
    const std::uint32_t h = hash3(&data[pos]);
    prev[pos] = head[h];
    head[h] = pos;
  };

  int i = 0;
  while (i < n) {
    int best_len = 0;
    int best_dist = 0;
    if (i + kMinMatch <= n) {
      const int limit = std::min(kMaxMatch, n - i);
      int cand = head[hash3(&data[i])];
      for (int chain = 0; cand >= 0 && i - cand <= kWindow && chain < kMaxChain; ++chain) {
        int len = 0;
        while (len < limit && data[cand + len] == data[i + len]) ++len;
        if (len > best_len) {
          best_len = len;
          best_dist = i - cand;
          if (len == limit) break;
        }
        cand = prev[cand];
      }
    }
    if (best_len >= kMinMatch) {
      put_match(w, best_len, best_dist);
      for (int k = 0; k < best_len; ++k) insert(i + k);
      i += best_len;
    } else {
      put_literal(w, data[i]);
      insert(i);
      ++i;
    }
  }
  put_literal(w, 256);
  w.flush();
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 | p[3];
}

void put_chunk(std::vector<std::uint8_t>& out, const char* type,
               std::span<const std::uint8_t> payload) {
  put_be32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc = ::crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> data) {
  std::vector<std::uint8_t> out = {0x78, 0x01};
  deflate_fixed(data, out);
  put_be32(out, static_cast<std::uint32_t>(
                    ::adler32(1L, data.data(), static_cast<uInt>(data.size()))));
  return out;
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  const int w = img.width();
  const int h = img.height();
  const std::size_t stride = static_cast<std::size_t>(w) * 3;
  const auto& px = img.data();

  // Per row, pick the filter with the smallest sum of absolute residuals.
  std::vector<std::uint8_t> filtered;
  filtered.reserve((stride + 1) * h);
  std::vector<std::uint8_t> candidate(stride);
  std::vector<std::uint8_t> best(stride);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = &px[y * stride];
    const std::uint8_t* up = y > 0 ? &px[(y - 1) * stride] : nullptr;
    long best_score = -1;
    int best_filter = 0;
    for (int f = 0; f < 5; ++f) {
      long score = 0;
      for (std::size_t i = 0; i < stride; ++i) {
        const int a = i >= 3 ? row[i - 3] : 0;
        const int b = up ? up[i] : 0;
        const int c = (up && i >= 3) ? up[i - 3] : 0;
        int pred = 0;
        switch (f) {
          case 1: pred = a; break;
          case 2: pred = b; break;
          case 3: pred = (a + b) / 2; break;
          case 4: pred = paeth(a, b, c); break;
          default: break;
        }
        const auto r = static_cast<std::uint8_t>(row[i] - pred);
        candidate[i] = r;
        score += r < 128 ? r : 256 - r;
      }
      if (best_score < 0 || score < best_score) {
        best_score = score;
        best_filter = f;
        best.swap(candidate);
      }
    }
    filtered.push_back(static_cast<std::uint8_t>(best_filter));
    filtered.insert(filtered.end(), best.begin(), best.end());
  }

  std::vector<std::uint8_t> out(std::begin(kSignature), std::end(kSignature));
  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(w));
  put_be32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit, truecolor, deflate, adaptive, no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", zlib_compress(filtered));
  put_chunk(out, "IEND", {});
  return out;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0) {
    throw Error(ErrorKind::kDecode, "not a PNG file");
  }
  int w = 0;
  int h = 0;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = read_be32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw Error(ErrorKind::kDecode, "truncated PNG chunk");
    const std::uint8_t* type = &bytes[pos + 4];
    const std::uint8_t* body = &bytes[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      w = static_cast<int>(read_be32(body));
      h = static_cast<int>(read_be32(body + 4));
      if (body[8] != 8 || body[12] != 0) {
        throw Error(ErrorKind::kDecode, "only 8-bit non-interlaced PNGs are supported");
      }
      color_type = body[9];
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), body, body + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  int channels = 0;
  switch (color_type) {
    case 0: channels = 1; break;
    case 2: channels = 3; break;
    case 6: channels = 4; break;
    default: throw Error(ErrorKind::kDecode, "unsupported PNG color type");
  }
  if (w <= 0 || h <= 0) throw Error(ErrorKind::kDecode, "PNG has no IHDR");

  const std::size_t stride = static_cast<std::size_t>(w) * channels;
  std::vector<std::uint8_t> raw((stride + 1) * h);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (::uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size()) {
    throw Error(ErrorKind::kDecode, "corrupt PNG image data");
  }

  std::vector<std::uint8_t> pixels(stride * h);
  for (int y = 0; y < h; ++y) {
    const int filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* row = &pixels[y * stride];
    const std::uint8_t* up = y > 0 ? &pixels[(y - 1) * stride] : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(channels) ? row[i - channels] : 0;
      const int b = up ? up[i] : 0;
      const int c = (up && i >= static_cast<std::size_t>(channels)) ? up[i - channels] : 0;
      int pred = 0;
      switch (filter) {
        case 0: break;
        case 1: pred = a; break;
        case 2: pred = b; break;
        case 3: pred = (a + b) / 2; break;
        case 4: pred = paeth(a, b, c); break;
        default: throw Error(ErrorKind::kDecode, "bad PNG filter type");
      }
      row[i] = static_cast<std::uint8_t>(src[i] + pred);
    }
  }

  RgbImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = &pixels[y * stride + static_cast<std::size_t>(x) * channels];
      img.set(x, y, channels == 1 ? Rgb{p[0], p[0], p[0]} : Rgb{p[0], p[1], p[2]});
    }
  }
  return img;
}

}  // namespace vsc
