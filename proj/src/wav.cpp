#include "vsc/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "vsc/error.hpp"

namespace vsc {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      std::uint32_t u = read_u32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = std::uint64_t(read_u32(p)) | std::uint64_t(read_u32(p + 4)) << 32;
    return std::bit_cast<double>(u);
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(
          std::uint32_t(p[0]) << 8 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 24);
      return (v >> 8) / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
  }
}

}  // namespace

WavData decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kDecode, "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0;
  int channels = 0;
  int rate = 0;
  int bits = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    std::size_t size = read_u32(chunk + 4);
    std::size_t avail = bytes.size() - pos - 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) throw Error(ErrorKind::kDecode, "truncated fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = static_cast<int>(read_u32(chunk + 12));
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorKind::kDecode, "truncated extensible fmt chunk");
        format = read_u16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min(size, avail);  // tolerate writers that leave size unset
    }
    pos += 8 + size + (size & 1);
  }

  if (format == 0) throw Error(ErrorKind::kDecode, "missing fmt chunk");
  if (data == nullptr) throw Error(ErrorKind::kDecode, "missing data chunk");
  const bool int_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!int_ok && !float_ok) {
    throw Error(ErrorKind::kDecode, "unsupported WAV encoding (format " +
                                        std::to_string(format) + ", " +
                                        std::to_string(bits) + " bits)");
  }
  if (channels <= 0 || rate <= 0) throw Error(ErrorKind::kDecode, "invalid WAV header");

  const std::size_t width = static_cast<std::size_t>(bits / 8);
  const std::size_t frame = width * static_cast<std::size_t>(channels);
  const std::size_t frames = data_size / frame;

  WavData out;
  out.sample_rate_hz = rate;
  out.channels = channels;
  out.samples.resize(frames * static_cast<std::size_t>(channels));
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = decode_sample(data + i * width, format, bits);
  }
  return out;
}

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open audio file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_wav(const std::filesystem::path& path, const WavData& data,
               WavEncoding encoding) {
  const bool is_float = encoding == WavEncoding::kFloat32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint32_t block = static_cast<std::uint32_t>(data.channels) * bits / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(data.samples.size()) * bits / 8;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  put_u16(out, static_cast<std::uint16_t>(data.channels));
  put_u32(out, static_cast<std::uint32_t>(data.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(data.sample_rate_hz) * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (double s : data.samples) {
    if (is_float) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    } else {
      double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32768.0))));
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

std::vector<double> downmix_to_mono(const WavData& data) {
  const std::size_t channels = static_cast<std::size_t>(data.channels);
  std::vector<double> mono(data.frames());
  if (channels == 1) {
    mono = data.samples;
    return mono;
  }
  for (std::size_t f = 0; f < mono.size(); ++f) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += data.samples[f * channels + c];
    mono[f] = sum / static_cast<double>(channels);
  }
  return mono;
}

}  // namespace vsc
