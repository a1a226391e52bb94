#include "vsc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vsc/error.hpp"
#include "vsc/hash.hpp"
#include "vsc/png.hpp"
#include "vsc/prompt.hpp"
#include "vsc/providers.hpp"
#include "vsc/synth.hpp"

namespace vsc {

using nlohmann::json;

ClipSource disk_source(std::filesystem::path root, int sample_rate_hz) {
  return [root = std::move(root), sample_rate_hz](const ClipMeta& meta) {
    return load_audio(meta, root, sample_rate_hz);
  };
}

ClipSource synthetic_source(std::uint64_t seed, int sample_rate_hz) {
  return [seed, sample_rate_hz](const ClipMeta& meta) {
    return synthesize_clip(meta, sample_rate_hz, seed);
  };
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  if (n > 0) worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomically(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  write_binary_file(tmp, bytes);
  std::filesystem::rename(tmp, path);
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

CorpusResult render_corpus(const std::vector<ClipMeta>& clips, const ClipSource& source,
                           const SpectrogramConfig& cfg, const std::filesystem::path& image_root,
                           unsigned threads) {
  validate(cfg);
  CorpusResult out;
  out.corpus_hash = corpus_hash(cfg);
  out.dir = image_root / out.corpus_hash;
  std::filesystem::create_directories(out.dir);
  const json descriptor = {{"corpus_hash", out.corpus_hash},
                           {"config", cfg},
                           {"dsp", dsp_decisions()},
                           {"layout_version", kLayoutVersion},
                           {"image_format", "png"}};
  const auto descriptor_path = out.dir / "corpus.json";
  if (!std::filesystem::exists(descriptor_path)) {
    write_atomically(descriptor_path, to_bytes(descriptor.dump(2) + "\n"));
  }

  out.entries.resize(clips.size());
  std::atomic<int> rendered{0};
  parallel_for(
      clips.size(),
      [&](std::size_t i) {
        const ClipMeta& meta = clips[i];
        const std::string stem = std::filesystem::path(meta.filename).stem().string();
        CorpusEntry& e = out.entries[i];
        e.clip = meta;
        e.image = out.dir / (stem + ".png");
        e.config_hash = image_config_hash(cfg, meta.filename);
        const auto sidecar = out.dir / (stem + ".json");
        if (std::filesystem::exists(sidecar) && std::filesystem::exists(e.image)) {
          try {
            const json side = json::parse(read_text_file(sidecar));
            if (side.at("config_hash") == e.config_hash &&
                side.at("sha256") == sha256_hex(read_bytes(e.image))) {
              return;
            }
          } catch (const json::exception&) {
          }
        }
        const AudioClip clip = source(meta);
        const RenderedSpectrogram r = render(compute_spectrogram(clip, cfg), cfg, meta.filename);
        write_atomically(e.image, r.image_bytes);
        const json side = {{"config_hash", r.config_hash},
                           {"corpus_hash", out.corpus_hash},
                           {"filename", meta.filename},
                           {"sha256", sha256_hex(r.image_bytes)},
                           {"width", r.width_px},
                           {"height", r.height_px}};
        write_atomically(sidecar, to_bytes(side.dump(2) + "\n"));
        e.rendered = true;
        ++rendered;
      },
      threads);
  out.n_rendered = rendered.load();
  out.n_skipped = static_cast<int>(clips.size()) - out.n_rendered;
  return out;
}

RenderedSpectrogram load_rendered(const CorpusEntry& entry) {
  RenderedSpectrogram r;
  r.image_bytes = read_bytes(entry.image);
  r.config_hash = entry.config_hash;
  auto sidecar = entry.image;
  sidecar.replace_extension(".json");
  const json side = json::parse(read_text_file(sidecar));
  r.width_px = side.at("width").get<int>();
  r.height_px = side.at("height").get<int>();
  return r;
}

std::vector<ClipMeta> EvalDataset::test_items(int fold) const {
  if (!fixed_test_items) return fold_items(rows, fold);
  std::vector<ClipMeta> out;
  for (const auto& m : *fixed_test_items) {
    if (m.fold == fold) out.push_back(m);
  }
  return out;
}

ExemplarSet select_exemplars(const EvalDataset& data, const EvalRunOptions& options, int test_fold) {
  if (options.shots == 0) {
    ExemplarSet empty;
    empty.excluded_fold = test_fold;
    empty.seed = options.seed;
    return empty;
  }
  const int n_classes = static_cast<int>(data.classes.size());
  if (options.shots < 0 || n_classes == 0 || options.shots % n_classes != 0) {
    throw Error(ErrorKind::kConfig, "shots (" + std::to_string(options.shots) +
                                        ") must be a positive multiple of the class count (" +
                                        std::to_string(n_classes) + ")");
  }
  const int per_class = options.shots / n_classes;
  const auto pool = pool_excluding(data.rows, test_fold);
  ExemplarSet set;
  switch (options.select) {
    case SelectionMethod::kKMeans: {
      KMeansSelectionParams p;
      p.per_class_count = per_class;
      p.k = options.k;
      p.feature = options.feature;
      p.seed = options.seed;
      p.excluded_fold = test_fold;
      set = select_kmeans(pool, data.classes, p, data.source);
      break;
    }
    case SelectionMethod::kRandom:
      set = select_random(pool, data.classes, per_class, options.seed, test_fold);
      break;
    case SelectionMethod::kHandpicked: {
      if (options.handpicked.empty()) {
        throw Error(ErrorKind::kConfig, "hand-picked selection needs a listing file");
      }
      const auto listing = parse_handpicked_listing(read_text_file(options.handpicked));
      set = select_handpicked(listing, data.rows, data.classes, test_fold);
      if (static_cast<int>(set.size()) != options.shots) {
        throw Error(ErrorKind::kConfig, "hand-picked listing has " + std::to_string(set.size()) +
                                            " clips but shots = " + std::to_string(options.shots));
      }
      break;
    }
  }
  validate_exemplars(set, data.classes);
  return set;
}

namespace {

json record_line(const PredictionRecord& r, const ModelResponse& resp) {
  json j = r;
  j["raw_text"] = resp.raw_text;
  j["request_hash"] = resp.request_hash;
  return j;
}

}  // namespace

EvalRunOutcome run_eval(const EvalDataset& data, ProviderClient& provider,
                        const EvalRunOptions& options) {
  validate(options.config);
  if (options.folds.empty()) throw Error(ErrorKind::kConfig, "no test folds selected");
  if (data.classes.empty()) throw Error(ErrorKind::kInsufficientData, "dataset has no classes");

  ResponseCache cache(options.cache_dir, provider.name(), provider.model());
  QueryOptions qopts;
  qopts.cache = &cache;
  qopts.retry = options.retry;
  qopts.parse = options.parse;

  auto* mock = dynamic_cast<MockNearestExemplarProvider*>(&provider);
  std::set<std::string> registered;

  json manifest = {
      {"tool_version", kToolVersion},
      {"prompt_template_version", kPromptTemplateVersion},
      {"dataset", data.descriptor},
      {"classes", data.classes},
      {"config", options.config},
      {"dsp", dsp_decisions()},
      {"corpus_hash", corpus_hash(options.config)},
      {"layout_version", kLayoutVersion},
      {"provider", provider.name()},
      {"model", provider.model()},
      {"shots", options.shots},
      {"selection",
       {{"method", options.shots > 0 ? to_string(options.select) : "none"},
        {"feature", options.shots > 0 ? to_string(options.feature) : "none"},
        {"k", options.k},
        {"handpicked", options.handpicked.filename().string()}}},
      {"seeds", {{"selection", options.seed}}},
      {"accounting", to_string(options.accounting)},
      {"parse", {{"salvage", options.parse.salvage}, {"refusal_phrases", options.parse.refusal_phrases}}},
      {"retry",
       {{"max_attempts", options.retry.max_attempts},
        {"initial_delay_ms", options.retry.initial_delay.count()},
        {"max_delay_ms", options.retry.max_delay.count()},
        {"multiplier", options.retry.multiplier}}},
      {"folds", json::array()}};
  for (const auto& [k, v] : options.extra_manifest.items()) manifest[k] = v;

  EvalRunOutcome outcome;
  const std::string source_label = provider.name() + "/" + provider.model();
  const std::string detail = options.config.detail == Detail::kLow ? "low" : "auto";
  const std::size_t batch =
      static_cast<std::size_t>(std::max(16, 4 * std::max(1, options.max_in_flight)));

  auto run_fold = [&](int fold) {
    const auto tests = data.test_items(fold);
    if (tests.empty()) {
      throw Error(ErrorKind::kInsufficientData, "no test items in fold " + std::to_string(fold));
    }
    const ExemplarSet exemplars = select_exemplars(data, options, fold);
    std::vector<ClipMeta> needed = tests;
    std::set<std::string> seen;
    for (const auto& m : tests) seen.insert(m.filename);
    for (const auto& [category, clip] : exemplars.ordered()) {
      if (seen.insert(clip.filename).second) needed.push_back(clip);
    }
    const CorpusResult corpus =
        render_corpus(needed, data.source, options.config, options.image_root, options.threads);
    std::map<std::string, const CorpusEntry*> by_name;
    for (const auto& e : corpus.entries) by_name[e.clip.filename] = &e;

    if (mock) {
      std::vector<const CorpusEntry*> todo;
      for (const auto& e : corpus.entries) {
        if (registered.insert(e.clip.filename).second) todo.push_back(&e);
      }
      std::vector<std::vector<double>> features(todo.size());
      parallel_for(
          todo.size(),
          [&](std::size_t i) {
            features[i] = featurize(data.source(todo[i]->clip), FeatureKind::kMel).values;
          },
          options.threads);
      for (std::size_t i = 0; i < todo.size(); ++i) {
        mock->register_image(read_bytes(todo[i]->image), std::move(features[i]));
      }
    }

    std::vector<std::pair<std::string, RenderedSpectrogram>> exemplar_images;
    for (const auto& [category, clip] : exemplars.ordered()) {
      exemplar_images.emplace_back(category, load_rendered(*by_name.at(clip.filename)));
    }

    json test_list = json::array();
    for (const auto& m : tests) test_list.push_back({{"filename", m.filename}, {"fold", m.fold}});
    manifest["folds"].push_back(
        {{"test_fold", fold},
         {"n_items", tests.size()},
         {"test_items", test_list},
         {"exemplars", options.shots > 0 ? json(exemplars) : json()}});

    std::vector<PredictionRecord> records;
    for (std::size_t start = 0; start < tests.size(); start += batch) {
      const std::size_t end = std::min(tests.size(), start + batch);
      std::vector<Prompt> prompts;
      for (std::size_t i = start; i < end; ++i) {
        const RenderedSpectrogram test_image = load_rendered(*by_name.at(tests[i].filename));
        Prompt p = options.shots > 0
                       ? build_few_shot_prompt(exemplar_images, test_image, data.classes)
                       : build_zero_shot_prompt(test_image, data.classes);
        p.image_detail = detail;
        prompts.push_back(std::move(p));
      }
      if (options.dry_run) {
        for (const auto& p : prompts) {
          ++outcome.dry.requests;
          outcome.dry.images += p.image_count();
          const auto body = serialize_prompt(p);
          if (cache.lookup(request_hash(provider.name(), provider.model(), p))) {
            ++outcome.dry.cached;
          } else {
            ++outcome.dry.to_send;
            outcome.dry.payload_bytes += body.size();
          }
        }
        continue;
      }
      const auto responses = query_all(provider, prompts, qopts, options.max_in_flight);
      for (std::size_t i = start; i < end; ++i) {
        const ModelResponse& resp = responses[i - start];
        PredictionRecord r;
        r.item = tests[i];
        r.truth = tests[i].category;
        r.status = resp.status;
        if (resp.status == ResponseStatus::kOk) r.predicted = resp.parsed_label;
        r.source = source_label;
        if (resp.status == ResponseStatus::kTransportError) ++outcome.transport_errors;
        records.push_back(std::move(r));
        outcome.responses.push_back(resp);
      }
    }
    return records;
  };

  if (options.dry_run) {
    for (int fold : options.folds) run_fold(fold);
    outcome.manifest = manifest;
    return outcome;
  }

  outcome.summary = cross_validate(run_fold, options.folds, data.classes);
  outcome.run_id = sha256_hex(manifest.dump()).substr(0, 16);
  manifest["run_id"] = outcome.run_id;
  outcome.manifest = manifest;
  outcome.run_dir = options.out_dir / outcome.run_id;
  std::filesystem::create_directories(outcome.run_dir);
  write_json_file(outcome.run_dir / "manifest.json", manifest);

  std::string lines;
  for (std::size_t i = 0; i < outcome.summary.records.size(); ++i) {
    lines += record_line(outcome.summary.records[i], outcome.responses[i]).dump() + "\n";
  }
  write_text_file(outcome.run_dir / "records.jsonl", lines);

  json per_fold = json::array();
  for (std::size_t i = 0; i < outcome.summary.folds.size(); ++i) {
    per_fold.push_back({{"fold", outcome.summary.folds[i]},
                        {"headline_accuracy",
                         headline_accuracy(outcome.summary.per_fold[i], options.accounting)},
                        {"result", outcome.summary.per_fold[i]}});
  }
  write_report(outcome.run_dir, outcome.summary.pooled, options.accounting,
               {{"run_id", outcome.run_id},
                {"provider", provider.name()},
                {"model", provider.model()},
                {"shots", options.shots},
                {"per_fold", per_fold},
                {"transport_errors", outcome.transport_errors}});
  return outcome;
}

std::vector<SweepRow> run_sweep(const EvalDataset& data, ProviderClient& provider,
                                const EvalRunOptions& options, std::filesystem::path* sweep_dir) {
  std::vector<SweepRow> rows;
  std::string ids;
  for (const auto& entry : ablation_grid(options.config)) {
    EvalRunOptions o = options;
    o.config = entry.config;
    o.extra_manifest["ablation"] = entry.name;
    rows.push_back({entry.name, entry.title, run_eval(data, provider, o)});
    ids += rows.back().outcome.run_id;
  }
  if (options.dry_run) return rows;

  const auto dir = options.out_dir / ("sweep-" + sha256_hex(ids).substr(0, 16));
  std::filesystem::create_directories(dir);
  json doc = {{"accounting", to_string(options.accounting)},
              {"provider", provider.name()},
              {"model", provider.model()},
              {"rows", json::array()}};
  std::ostringstream table;
  std::size_t width = 9;
  for (const auto& r : rows) width = std::max(width, r.title.size());
  table << "Parameter" << std::string(width - 9 + 2, ' ') << "Accuracy (%)\n";
  for (const auto& r : rows) {
    const double acc = headline_accuracy(r.outcome.summary.pooled, options.accounting);
    doc["rows"].push_back({{"name", r.name},
                           {"title", r.title},
                           {"run_id", r.outcome.run_id},
                           {"accuracy_all", r.outcome.summary.pooled.accuracy_all},
                           {"accuracy_answered", r.outcome.summary.pooled.accuracy_answered}});
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * acc);
    table << r.title << std::string(width - r.title.size() + 2, ' ') << buf << '\n';
  }
  write_json_file(dir / "sweep.json", doc);
  write_text_file(dir / "sweep.txt", table.str());
  if (sweep_dir) *sweep_dir = dir;
  return rows;
}

AuditReport audit_run_manifest(const json& manifest) {
  AuditReport report;
  report.manifests = 1;
  const std::string run = manifest.value("run_id", std::string("<unnamed>"));
  for (const auto& fold : manifest.at("folds")) {
    ++report.fold_runs;
    const int test_fold = fold.at("test_fold").get<int>();
    std::set<std::string> tests;
    for (const auto& t : fold.at("test_items")) {
      tests.insert(t.at("filename").get<std::string>());
      if (t.at("fold").get<int>() != test_fold) {
        report.violations.push_back(run + ": test item " + t.at("filename").get<std::string>() +
                                    " is not in test fold " + std::to_string(test_fold));
      }
    }
    const auto& ex = fold.at("exemplars");
    if (ex.is_null()) continue;
    if (ex.at("excluded_fold").get<int>() != test_fold) {
      report.violations.push_back(run + ": exemplar set excludes fold " +
                                  std::to_string(ex.at("excluded_fold").get<int>()) +
                                  " but tests fold " + std::to_string(test_fold));
    }
    for (const auto& c : ex.at("per_class")) {
      for (const auto& clip : c.at("clips")) {
        ++report.exemplars_checked;
        const auto name = clip.at("filename").get<std::string>();
        if (clip.at("fold").get<int>() == test_fold) {
          report.violations.push_back(run + ": exemplar " + name + " is in test fold " +
                                      std::to_string(test_fold));
        }
        if (tests.count(name)) {
          report.violations.push_back(run + ": exemplar " + name + " is also a test item");
        }
      }
    }
  }
  return report;
}

AuditReport audit_results(const std::filesystem::path& root) {
  AuditReport total;
  if (!std::filesystem::exists(root)) {
    throw Error(ErrorKind::kNotFound, "no results directory at " + root.string());
  }
  std::vector<std::filesystem::path> manifests;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
  }
  std::sort(manifests.begin(), manifests.end());
  for (const auto& path : manifests) {
    json doc;
    try {
      doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      total.violations.push_back(path.string() + ": unreadable manifest: " + e.what());
      continue;
    }
    const AuditReport r = audit_run_manifest(doc);
    total.manifests += r.manifests;
    total.fold_runs += r.fold_runs;
    total.exemplars_checked += r.exemplars_checked;
    total.violations.insert(total.violations.end(), r.violations.begin(), r.violations.end());
  }
  return total;
}

}  // namespace vsc
