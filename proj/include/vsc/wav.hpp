#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vsc {

struct WavData {
  int sample_rate_hz = 0;
  int channels = 0;
  /// Interleaved samples scaled to [-1, 1].
  std::vector<double> samples;

  std::size_t frames() const {
    return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
  }
};

/// Decodes RIFF/WAVE files holding 8/16/24/32-bit integer PCM or 32/64-bit
/// float samples, including WAVE_FORMAT_EXTENSIBLE headers.
WavData read_wav(const std::filesystem::path& path);
WavData decode_wav(const std::vector<std::uint8_t>& bytes);

enum class WavEncoding { kPcm16, kFloat32 };

void write_wav(const std::filesystem::path& path, const WavData& data,
               WavEncoding encoding = WavEncoding::kPcm16);

/// Arithmetic mean across channels.
std::vector<double> downmix_to_mono(const WavData& data);

}  // namespace vsc
