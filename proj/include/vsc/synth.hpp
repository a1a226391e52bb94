#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vsc/dataset.hpp"

namespace vsc {

/// ESC-10 categories with their ESC-50 target ids, in the order rows are
/// emitted.
struct SynthClass {
  const char* category;
  int target;
};
const std::vector<SynthClass>& synthetic_classes();

/// 400-row ESC-10-shaped manifest: 10 classes x 5 folds x 8 clips, filenames
/// "{fold}-{source}-A-{target}.wav", esc10 = true.
std::vector<ClipMeta> synthetic_manifest();

/// Deterministic 5 s clip whose texture depends on the category; the
/// per-clip variation is drawn from (seed, filename).
AudioClip synthesize_clip(const ClipMeta& meta, int sample_rate_hz, std::uint64_t seed);

/// Writes audio/<filename> (16-bit PCM) and meta/esc50.csv under root.
std::vector<ClipMeta> write_synthetic_dataset(const std::filesystem::path& root,
                                              int sample_rate_hz, std::uint64_t seed);

}  // namespace vsc
