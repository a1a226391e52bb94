#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsc/dataset.hpp"
#include "vsc/eval.hpp"
#include "vsc/exemplars.hpp"
#include "vsc/render.hpp"
#include "vsc/report.hpp"
#include "vsc/vlm.hpp"

namespace vsc {

inline constexpr const char* kToolVersion = "0.1.0";

using ClipSource = std::function<AudioClip(const ClipMeta&)>;

/// Loads clips from an ESC-style directory (see load_audio).
ClipSource disk_source(std::filesystem::path root, int sample_rate_hz = kDefaultSampleRateHz);
/// Synthesizes clips in memory (see synthesize_clip).
ClipSource synthetic_source(std::uint64_t seed, int sample_rate_hz = kDefaultSampleRateHz);

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). The first exception is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

struct CorpusEntry {
  ClipMeta clip;
  std::filesystem::path image;
  std::string config_hash;
  bool rendered = false;  // false when an up-to-date image was reused
};

struct CorpusResult {
  std::filesystem::path dir;
  std::string corpus_hash;
  std::vector<CorpusEntry> entries;
  int n_rendered = 0;
  int n_skipped = 0;
};

/// Renders every clip into <image_root>/<corpus_hash>/<stem>.png with a
/// <stem>.json sidecar, skipping images whose sidecar hash and bytes are
/// current. Writes corpus.json describing the configuration.
CorpusResult render_corpus(const std::vector<ClipMeta>& clips, const ClipSource& source,
                           const SpectrogramConfig& cfg, const std::filesystem::path& image_root,
                           unsigned threads = 0);

RenderedSpectrogram load_rendered(const CorpusEntry& entry);

struct EvalDataset {
  nlohmann::json descriptor = nlohmann::json::object();
  /// Rows that supply test items and the exemplar pool.
  std::vector<ClipMeta> rows;
  /// When set, test items for fold f are these clips in fold f instead of
  /// every row in fold f.
  std::optional<std::vector<ClipMeta>> fixed_test_items;
  std::vector<std::string> classes;
  ClipSource source;

  std::vector<ClipMeta> test_items(int fold) const;
};

struct EvalRunOptions {
  int shots = 0;
  SelectionMethod select = SelectionMethod::kKMeans;
  FeatureKind feature = FeatureKind::kMel;
  int k = 3;
  std::filesystem::path handpicked;
  std::vector<int> folds = {1};
  SpectrogramConfig config;
  std::uint64_t seed = kDefaultSeed;
  Accounting accounting = Accounting::kAllItems;
  bool dry_run = false;
  int max_in_flight = 4;
  unsigned threads = 0;
  std::filesystem::path out_dir = "results";
  std::filesystem::path image_root = "images";
  std::filesystem::path cache_dir = "cache";
  RetryPolicy retry;
  ParseOptions parse;
  nlohmann::json extra_manifest = nlohmann::json::object();
};

struct DryRunStats {
  std::size_t requests = 0;
  std::size_t cached = 0;
  std::size_t to_send = 0;
  std::size_t payload_bytes = 0;
  std::size_t images = 0;
};

struct EvalRunOutcome {
  std::string run_id;
  std::filesystem::path run_dir;
  nlohmann::json manifest;
  CrossValidationSummary summary;
  std::vector<ModelResponse> responses;  // aligned with summary.records
  std::size_t transport_errors = 0;
  DryRunStats dry;
};

/// Per-fold exemplar selection under the options; shots = 0 yields an empty
/// set. Throws kConfig if shots is not a multiple of the class count.
ExemplarSet select_exemplars(const EvalDataset& data, const EvalRunOptions& options, int test_fold);

/// Full query loop: select exemplars, render stimuli, build prompts, query
/// through the cache, evaluate, and write manifest.json, records.jsonl and the
/// report files into <out_dir>/<run_id>/. With dry_run set nothing is sent and
/// nothing is written under out_dir.
EvalRunOutcome run_eval(const EvalDataset& data, ProviderClient& provider,
                        const EvalRunOptions& options);

struct SweepRow {
  std::string name;
  std::string title;
  EvalRunOutcome outcome;
};

/// One run_eval per ablation configuration; writes sweep.json and sweep.txt
/// into <out_dir>/sweep-<id>/.
std::vector<SweepRow> run_sweep(const EvalDataset& data, ProviderClient& provider,
                                const EvalRunOptions& options,
                                std::filesystem::path* sweep_dir = nullptr);

struct AuditReport {
  int manifests = 0;
  int fold_runs = 0;
  int exemplars_checked = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks that no exemplar shares a fold or a filename with the test items of
/// the run it was used in.
AuditReport audit_run_manifest(const nlohmann::json& manifest);
/// Audits every manifest.json below root.
AuditReport audit_results(const std::filesystem::path& root);

}  // namespace vsc
