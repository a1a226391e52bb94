#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vsc/dataset.hpp"
#include "vsc/vlm.hpp"

namespace vsc {

struct PredictionRecord {
  ClipMeta item;
  std::string truth;
  std::optional<std::string> predicted;
  ResponseStatus status = ResponseStatus::kUnparseable;
  std::string source;

  bool correct() const { return status == ResponseStatus::kOk && predicted == truth; }

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

void to_json(nlohmann::json& j, const PredictionRecord& r);
void from_json(const nlohmann::json& j, PredictionRecord& r);

struct EvalResult {
  std::vector<std::string> classes;
  int n_items = 0;
  int n_answered = 0;
  int n_correct = 0;
  double accuracy_answered = 0.0;
  double accuracy_all = 0.0;
  /// confusion[truth][predicted], answered items only.
  std::vector<std::vector<int>> confusion;
  /// Correct over all items of the class (non-ok counted wrong).
  std::map<std::string, double> per_class_accuracy;
  std::map<std::string, int> status_counts;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

void to_json(nlohmann::json& j, const EvalResult& r);

/// Throws kEmptyInput on no records, kValidation on a truth or prediction
/// outside `classes` or a record whose label presence disagrees with status.
EvalResult evaluate(const std::vector<PredictionRecord>& records,
                    const std::vector<std::string>& classes);

struct CrossValidationSummary {
  std::vector<int> folds;
  std::vector<EvalResult> per_fold;
  /// evaluate() over the concatenation of all fold records.
  EvalResult pooled;
  std::vector<PredictionRecord> records;
};

void to_json(nlohmann::json& j, const CrossValidationSummary& s);

CrossValidationSummary cross_validate(
    const std::function<std::vector<PredictionRecord>(int fold)>& run_fn,
    const std::vector<int>& folds, const std::vector<std::string>& classes);

/// Items are matched by filename; both sequences must cover the same items
/// and be fully answered. Throws kAlignment, kIncomplete, or kDegenerate when
/// chance agreement is 1 but the labels differ.
double cohen_kappa(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b);

/// Unweighted mean over all unordered annotator pairs.
double mean_pairwise_kappa(const std::vector<std::vector<PredictionRecord>>& annotators);

inline constexpr const char* kEnsembleSource = "ensemble";

/// Per item the modal ok label; ties broken by a seeded uniform draw among the
/// tied labels (sorted by name), salted by the item filename. Output follows
/// the first annotator's item order. Items without any ok vote stay
/// unparseable. Throws kAlignment on differing item sets.
std::vector<PredictionRecord> ensemble_majority(
    const std::vector<std::vector<PredictionRecord>>& annotators, std::uint64_t seed);

}  // namespace vsc
