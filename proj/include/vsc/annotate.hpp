#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsc/eval.hpp"
#include "vsc/exemplars.hpp"

namespace vsc {

struct StudyConfig {
  std::vector<std::string> classes;
  /// Clips eligible as test items; a session uses the rows of its test fold.
  std::vector<ClipMeta> manifest;
  std::string corpus_hash;
  /// Directory holding "<stem>.png" for every clip in the manifest.
  std::filesystem::path image_dir;
  /// Exemplar set and fold used by sessions created over HTTP.
  ExemplarSet exemplars;
  int test_fold = 1;
  std::uint64_t seed = kDefaultSeed;
};

enum class SessionState { kOpen, kComplete };
const char* to_string(SessionState s);

struct Answer {
  std::string category;
  std::string timestamp;
};

struct AnnotationSession {
  std::string session_id;
  std::string expert_id;
  int test_fold = 0;
  std::uint64_t seed = 0;
  ExemplarSet exemplars;
  std::vector<ClipMeta> item_order;
  std::map<std::size_t, Answer> answers;  // keyed by index into item_order
  SessionState state = SessionState::kOpen;

  std::size_t total() const { return item_order.size(); }
  std::size_t answered() const { return answers.size(); }
};

struct FinalizeResult {
  std::vector<PredictionRecord> records;
  EvalResult result;
};

/// Digest-based name under which a clip's image is served.
std::string opaque_image_name(const std::string& corpus_hash, const std::string& filename);

/// Session bookkeeping for the expert study. Every mutation is appended to
/// <sessions_dir>/<session_id>.jsonl before it is acknowledged; the
/// constructor replays existing logs.
class AnnotationStore {
 public:
  AnnotationStore(StudyConfig config, std::filesystem::path sessions_dir);

  const StudyConfig& config() const { return config_; }

  /// Throws kValidation if the exemplars overlap the test fold or do not
  /// cover the class list.
  AnnotationSession create_session(const std::string& expert_id, int test_fold,
                                   const ExemplarSet& exemplars, std::uint64_t seed);
  AnnotationSession get_session(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

  /// Item payload: test image reference, exemplar grid, class list, progress,
  /// and the expert's current answer. Throws kNotFound / kRange.
  nlohmann::json get_item(const std::string& session_id, std::size_t index) const;
  /// Session overview without ground truth.
  nlohmann::json describe(const std::string& session_id) const;

  /// Last write wins. Returns the number of answered items. Throws kNotFound,
  /// kRange, kValidation (unknown category) or kState (session complete).
  std::size_t submit_answer(const std::string& session_id, std::size_t index,
                            const std::string& category);

  /// Joins ground truth. Throws kIncomplete listing unanswered indices.
  /// Finalizing a complete session returns the same records again.
  FinalizeResult finalize(const std::string& session_id);

  /// Image file for a served name, or nullopt.
  std::optional<std::filesystem::path> image_path(const std::string& corpus_hash,
                                                  const std::string& name) const;

 private:
  struct Entry {
    AnnotationSession session;
    mutable std::mutex mu;
  };

  std::shared_ptr<Entry> find(const std::string& session_id) const;
  void append_event(const std::string& session_id, const nlohmann::json& event) const;
  void replay(const std::filesystem::path& log);
  nlohmann::json image_ref(const ClipMeta& clip) const;
  FinalizeResult build_records(const AnnotationSession& s) const;

  StudyConfig config_;
  std::filesystem::path sessions_dir_;
  std::map<std::string, ClipMeta> by_filename_;
  std::map<std::string, std::string> image_names_;  // opaque name -> filename
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace vsc
