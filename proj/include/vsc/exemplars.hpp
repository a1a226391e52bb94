#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vsc/dataset.hpp"

namespace vsc {

inline constexpr std::uint64_t kDefaultSeed = 42;

enum class SelectionMethod { kRandom, kKMeans, kHandpicked };
enum class FeatureKind { kMel, kAmp, kNone };

const char* to_string(SelectionMethod m);
const char* to_string(FeatureKind f);
SelectionMethod parse_selection_method(const std::string& s);
FeatureKind parse_feature_kind(const std::string& s);

struct ClassExemplars {
  std::string category;
  std::vector<ClipMeta> clips;
};

/// Few-shot examples per class, in class-list order.
struct ExemplarSet {
  std::vector<ClassExemplars> per_class;
  SelectionMethod method = SelectionMethod::kRandom;
  FeatureKind feature = FeatureKind::kNone;
  int k = 0;
  int per_class_count = 0;
  int excluded_fold = 0;
  std::uint64_t seed = kDefaultSeed;

  std::size_t size() const;
  /// (category, clip) pairs in prompt order: class by class.
  std::vector<std::pair<std::string, ClipMeta>> ordered() const;
};

void to_json(nlohmann::json& j, const ExemplarSet& set);
void from_json(const nlohmann::json& j, ExemplarSet& set);

/// Throws kValidation if any clip sits in the excluded fold or any class in
/// `classes` lacks exactly per_class_count entries.
void validate_exemplars(const ExemplarSet& set, const std::vector<std::string>& classes);

struct FeatureVector {
  ClipMeta clip;
  std::vector<double> values;
};

/// mel: dB mel spectrogram (128 x 216 for a 5 s clip) flattened row-major;
/// amp: dB magnitude spectrogram (1025 x 216) flattened row-major.
FeatureVector featurize(const AudioClip& clip, FeatureKind feature);

using ClipLoader = std::function<AudioClip(const ClipMeta&)>;

struct KMeansSelectionParams {
  int per_class_count = 1;
  int k = 3;
  FeatureKind feature = FeatureKind::kMel;
  std::uint64_t seed = kDefaultSeed;
  int excluded_fold = 0;
};

/// Per class: cluster that class's features, rank clusters by size
/// (descending) then centroid norm (ascending), and take the clip nearest each
/// of the first per_class_count centroids, ties to the lowest filename.
ExemplarSet select_kmeans(const std::vector<ClipMeta>& pool,
                          const std::vector<std::string>& classes,
                          const KMeansSelectionParams& params, const ClipLoader& load);
ExemplarSet select_kmeans(const std::vector<AudioClip>& pool,
                          const std::vector<std::string>& classes,
                          const KMeansSelectionParams& params);

ExemplarSet select_random(const std::vector<ClipMeta>& pool,
                          const std::vector<std::string>& classes, int per_class_count,
                          std::uint64_t seed, int excluded_fold);

/// Parses "category: file[, file...]" lines; blank lines and '#' comments are
/// skipped.
std::map<std::string, std::vector<std::string>> parse_handpicked_listing(const std::string& text);

ExemplarSet select_handpicked(const std::map<std::string, std::vector<std::string>>& listing,
                              const std::vector<ClipMeta>& manifest,
                              const std::vector<std::string>& classes, int test_fold);

}  // namespace vsc
