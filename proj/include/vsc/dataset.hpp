#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vsc {

inline constexpr int kDefaultSampleRateHz = 22050;
inline constexpr double kClipSeconds = 5.0;

struct ClipMeta {
  std::string filename;
  int fold = 0;
  int target = 0;
  std::string category;
  bool esc10 = false;

  friend bool operator==(const ClipMeta&, const ClipMeta&) = default;
};

struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 0;
  ClipMeta source;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

/// Parses an ESC-50 layout metadata table. Columns beyond the five required
/// ones are ignored; row order is preserved.
std::vector<ClipMeta> load_manifest(const std::filesystem::path& path);
std::vector<ClipMeta> parse_manifest(const std::string& text);

/// Writes the ESC-50 column layout (filename,fold,target,category,esc10).
std::string format_manifest(const std::vector<ClipMeta>& rows);

/// Rows with esc10 = true.
std::vector<ClipMeta> esc10_view(const std::vector<ClipMeta>& rows);

/// Decodes, downmixes, resamples and (when fixed_seconds is set) zero-pads or
/// truncates to exactly fixed_seconds at the target rate.
AudioClip load_audio(const ClipMeta& meta, const std::filesystem::path& root,
                     int target_rate_hz = kDefaultSampleRateHz,
                     std::optional<double> fixed_seconds = kClipSeconds);

/// Two fold-1 clips per category for all 50 ESC-50 categories, drawn without
/// replacement with a per-category stream derived from seed. Returned in
/// manifest order.
std::vector<ClipMeta> esc50_subset(const std::vector<ClipMeta>& manifest,
                                   std::uint64_t seed);

/// Category names in order of first appearance.
std::vector<std::string> class_list(const std::vector<ClipMeta>& rows);

std::vector<ClipMeta> fold_items(const std::vector<ClipMeta>& rows, int fold);
/// The exemplar pool for a test fold: every row outside it.
std::vector<ClipMeta> pool_excluding(const std::vector<ClipMeta>& rows, int fold);

}  // namespace vsc
