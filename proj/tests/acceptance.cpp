// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "fixture_prompts.hpp"
#include "golden_cases.hpp"
#include "metric_cases.hpp"
#include "oracles.hpp"
#include "vsc/eval.hpp"
#include "vsc/hash.hpp"
#include "vsc/kmeans.hpp"
#include "vsc/pipeline.hpp"
#include "vsc/providers.hpp"
#include "vsc/report.hpp"

using namespace vsc;
using namespace vsc::testing;

namespace {

constexpr double kFrameRelTol = 1e-6;
constexpr double kMelTol = 1e-9;
constexpr double kMfccTol = 1e-9;
constexpr double kDspBudgetSeconds = 30.0;
constexpr int kKMeansTrials = 100;
constexpr int kKMeansRequired = 95;
constexpr double kKMeansTol = 1e-9;
constexpr double kKappaTol = 1e-12;
constexpr double kAccuracyTol = 1e-12;
constexpr double kRandomKappaBound = 0.05;
constexpr double kOfflineFloor = 0.30;
// Measured with the synthetic dataset (seed 42), mock provider, 10-shot
// k-means mel selection, test fold 1.
constexpr double kCommittedOfflineAccuracy = 0.65;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome dsp_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2048);
  double worst = 0.0;
  for (int frame = 0; frame < 50; ++frame) {
    AudioClip clip;
    clip.sample_rate_hz = 22050;
    clip.samples.resize(2048);
    for (auto& s : clip.samples) s = 2.0 * rng.uniform() - 1.0;
    const auto m = stft_magnitude(clip, SpectrogramConfig{});
    const std::size_t t = rng.below(m.n_frames);
    const auto ref = oracle::stft_frame(clip.samples, 2048, 512, t);
    double scale = 0.0;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    for (std::size_t b = 0; b < m.n_bins; ++b) worst = std::max(worst, std::abs(m.at(b, t) - ref[b]) / scale);
  }
  const auto fb = mel_filterbank(22050, 2048, 128, 11025.0);
  const auto fb_ref = oracle::mel_filterbank(22050.0, 2048, 128, 11025.0);
  double mel_err = 0.0;
  for (std::size_t m = 0; m < 128; ++m) {
    for (std::size_t k = 0; k < 1025; ++k) mel_err = std::max(mel_err, std::abs(fb[m * 1025 + k] - fb_ref[m][k]));
  }
  AudioClip clip;
  clip.sample_rate_hz = 22050;
  clip.samples.resize(22050);
  for (auto& s : clip.samples) s = 2.0 * rng.uniform() - 1.0;
  SpectrogramConfig cfg;
  cfg.style = SpectrogramStyle::kMfcc;
  const auto c = mfcc(clip, cfg);
  cfg.style = SpectrogramStyle::kMel;
  const auto log_mel = mel_spectrogram(clip, cfg);
  double mfcc_err = 0.0;
  for (std::size_t t = 0; t < c.n_frames; ++t) {
    std::vector<double> column(128);
    for (std::size_t m = 0; m < 128; ++m) column[m] = log_mel.at(m, t);
    for (std::size_t k = 0; k < c.n_bins; ++k) mfcc_err = std::max(mfcc_err, std::abs(c.at(k, t) - oracle::dct2(column, k)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = worst < kFrameRelTol && mel_err < kMelTol && mfcc_err < kMfccTol && secs < kDspBudgetSeconds;
  return {pass, "stft rel " + fmt("%.2e", worst) + ", mel " + fmt("%.2e", mel_err) + ", mfcc " +
                    fmt("%.2e", mfcc_err) + ", " + fmt("%.1f s", secs)};
}

Outcome frame_count() {
  AudioClip clip;
  clip.sample_rate_hz = 22050;
  clip.samples.assign(110250, 0.25);
  const auto m = compute_spectrogram(clip, SpectrogramConfig{});
  return {m.n_bins == 1025 && m.n_frames == 216,
          std::to_string(m.n_bins) + " x " + std::to_string(m.n_frames)};
}

Outcome golden_renders() {
  std::ifstream in(fixture_dir() / "golden_render.json");
  if (!in) return {false, "golden_render.json missing"};
  const auto golden = nlohmann::json::parse(in);
  int match = 0;
  const auto cases = golden_cases();
  for (const auto& c : cases) {
    if (golden.contains(c.name) &&
        golden[c.name] == sha256_hex(render(c.matrix, c.config).image_bytes)) {
      ++match;
    }
  }
  return {match == static_cast<int>(cases.size()) && golden.size() == cases.size(),
          std::to_string(match) + "/" + std::to_string(cases.size()) + " hashes match"};
}

Outcome kmeans_optimum() {
  int exact = 0;
  bool monotone = true;
  for (int trial = 0; trial < kKMeansTrials; ++trial) {
    const auto pts = oracle::kmeans_trial_points(1000 + static_cast<std::uint64_t>(trial));
    const auto km = kmeans(pts, 3, static_cast<std::uint64_t>(trial));
    const double best = oracle::exhaustive_kmeans_optimum(pts, 3);
    if (std::abs(km.inertia - best) <= kKMeansTol * std::max(1.0, best)) ++exact;
    for (std::size_t i = 1; i < km.inertia_history.size(); ++i) {
      if (km.inertia_history[i] > km.inertia_history[i - 1] + kKMeansTol) monotone = false;
    }
  }
  return {exact >= kKMeansRequired && monotone,
          std::to_string(exact) + "/" + std::to_string(kKMeansTrials) + " at optimum, inertia " +
              (monotone ? "monotone" : "NOT monotone")};
}

Outcome prompt_fidelity() {
  const auto rows = synthetic_manifest();
  const auto classes = class_list(rows);
  const auto zs = fold1_items().front().prompt;
  bool ok = zs.image_count() == 1 && zs.system_text == kSystemPrompt &&
            zs.parts[0].text == std::string(kZeroShotIntro) + format_class_list(classes) + kZeroShotOutro;
  std::string detail = "zero-shot images " + std::to_string(zs.image_count());
  for (int per_class : {1, 2}) {
    std::vector<std::pair<std::string, RenderedSpectrogram>> ex;
    for (const auto& c : classes) {
      for (int i = 0; i < per_class; ++i) {
        ClipMeta m;
        m.filename = c + std::to_string(i);
        ex.emplace_back(c, fixture_image(m));
      }
    }
    ClipMeta test;
    test.filename = "test";
    const auto p = build_few_shot_prompt(ex, fixture_image(test), classes);
    const std::size_t n = ex.size();
    bool order = p.parts.front().text == kFewShotIntro && p.parts[p.parts.size() - 2].text == kFewShotOutro;
    for (std::size_t i = 0; i < n; ++i) {
      order = order && p.parts[1 + 2 * i].text == "Spectrogram for " + ex[i].first + ":" &&
              p.parts[2 + 2 * i].data_base64 == base64_encode(ex[i].second.image_bytes);
    }
    ok = ok && order && p.image_count() == n + 1 && p.text_count() == n + 2 &&
         deserialize_prompt(serialize_prompt(p)) == p;
    detail += ", " + std::to_string(n) + "-shot images " + std::to_string(p.image_count());
  }
  return {ok, detail};
}

EvalResult replay(const std::string& model, const std::vector<FixtureItem>& items, std::size_t* calls) {
  OfflineProvider offline(kFixtureProvider, model);
  ResponseCache cache(replay_cache_root(), kFixtureProvider, model);
  QueryOptions o;
  o.cache = &cache;
  std::vector<PredictionRecord> records;
  for (const auto& it : items) {
    const auto r = query(offline, it.prompt, o);
    PredictionRecord rec;
    rec.item = it.clip;
    rec.truth = it.clip.category;
    rec.status = r.status;
    if (r.status == ResponseStatus::kOk) rec.predicted = r.parsed_label;
    rec.source = model;
    records.push_back(rec);
  }
  *calls += offline.network_calls();
  return evaluate(records, items.front().prompt.class_list);
}

Outcome fixture_replay() {
  std::size_t calls = 0;
  const auto fold1 = replay(kFold1Model, fold1_items(), &calls);
  const auto classes = class_list(synthetic_manifest());
  const auto cv = cross_validate(
      [&](int fold) {
        std::vector<PredictionRecord> recs;
        OfflineProvider offline(kFixtureProvider, kCrossValModel);
        ResponseCache cache(replay_cache_root(), kFixtureProvider, kCrossValModel);
        QueryOptions o;
        o.cache = &cache;
        for (const auto& it : cross_val_items(fold)) {
          const auto r = query(offline, it.prompt, o);
          PredictionRecord rec;
          rec.item = it.clip;
          rec.truth = it.clip.category;
          rec.status = r.status;
          if (r.status == ResponseStatus::kOk) rec.predicted = r.parsed_label;
          rec.source = kCrossValModel;
          recs.push_back(rec);
        }
        calls += offline.network_calls();
        return recs;
      },
      {1, 2, 3, 4, 5}, classes);
  const bool pass = std::abs(fold1.accuracy_all - 0.675) < kAccuracyTol &&
                    std::abs(cv.pooled.accuracy_all - 0.59) < kAccuracyTol && calls == 0;
  return {pass, "fold 1 " + fmt("%.2f%%", 100.0 * fold1.accuracy_all) + ", 5-fold pooled " +
                    fmt("%.2f%%", 100.0 * cv.pooled.accuracy_all) + ", network calls " + std::to_string(calls)};
}

Outcome metric_oracles() {
  double worst = 0.0;
  for (const auto& t : kappa_tables()) {
    const auto [a, b] = annotators_from_table(t);
    worst = std::max(worst, std::abs(cohen_kappa(a, b) - t.expected));
  }
  Rng rng(2024);
  double sum = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PredictionRecord> a, b;
    for (std::size_t i = 0; i < 400; ++i) {
      a.push_back(answer(i, "c0", label_name(rng.below(10)), "a"));
      b.push_back(answer(i, "c0", label_name(rng.below(10)), "b"));
    }
    sum += cohen_kappa(a, b);
  }
  const double mean_random = sum / 200.0;
  std::vector<PredictionRecord> e1, e2, e3;
  for (std::size_t i = 0; i < 20; ++i) {
    e1.push_back(answer(i, "c0", "c1", "e1"));
    e2.push_back(answer(i, "c0", "c1", "e2"));
    e3.push_back(answer(i, "c0", "c2", "e3"));
  }
  bool ensemble_ok = true;
  for (const auto& r : ensemble_majority({e1, e2, e3}, 42)) ensemble_ok = ensemble_ok && r.predicted == "c1";
  const auto acc = evaluate(scored_records(80, 76, 57), ten_labels());
  const bool acc_ok = std::abs(acc.accuracy_all - 0.7125) < kAccuracyTol &&
                      std::abs(acc.accuracy_answered - 0.75) < kAccuracyTol;
  return {worst < kKappaTol && std::abs(mean_random) < kRandomKappaBound && ensemble_ok && acc_ok,
          std::to_string(kappa_tables().size()) + " kappa tables max err " + fmt("%.1e", worst) +
              ", random-annotator mean kappa " + fmt("%.4f", mean_random) + ", ensemble " +
              (ensemble_ok ? "ok" : "wrong") + ", dual accounting " + (acc_ok ? "ok" : "wrong")};
}

struct E2E {
  EvalRunOutcome run;
  std::filesystem::path out_dir;
};

Outcome offline_end_to_end(TempDir& dir, E2E& e2e) {
  EvalDataset data;
  data.rows = synthetic_manifest();
  data.classes = class_list(data.rows);
  data.source = synthetic_source(42);
  data.descriptor = {{"kind", "synthetic"}, {"seed", 42}, {"protocol", "esc10"}, {"sample_rate_hz", 22050}};
  EvalRunOptions o;
  o.shots = 10;
  o.select = SelectionMethod::kKMeans;
  o.feature = FeatureKind::kMel;
  o.out_dir = dir / "results";
  o.image_root = dir / "images";
  o.cache_dir = dir / "cache";
  MockNearestExemplarProvider mock;
  e2e.run = run_eval(data, mock, o);
  e2e.out_dir = o.out_dir;
  const double acc = e2e.run.summary.pooled.accuracy_all;

  OfflineProvider offline(mock.name(), mock.model());
  auto o2 = o;
  o2.out_dir = dir / "replay";
  const auto again = run_eval(data, offline, o2);
  const bool identical = read_text_file(again.run_dir / "records.jsonl") ==
                             read_text_file(e2e.run.run_dir / "records.jsonl") &&
                         offline.network_calls() == 0;
  const bool pass = acc > kOfflineFloor && std::abs(acc - kCommittedOfflineAccuracy) < kAccuracyTol && identical;
  return {pass, fmt("%.2f%%", 100.0 * acc) + " (" + std::to_string(e2e.run.summary.pooled.n_correct) + "/" +
                    std::to_string(e2e.run.summary.pooled.n_items) + "), committed " +
                    fmt("%.2f%%", 100.0 * kCommittedOfflineAccuracy) + ", offline replay " +
                    (identical ? "identical" : "DIFFERS")};
}

Outcome partition_audit(const E2E& e2e) {
  if (e2e.out_dir.empty()) return {false, "no end-to-end run to audit"};
  const auto clean = audit_results(e2e.out_dir);
  auto bad = e2e.run.manifest;
  bad["folds"][0]["exemplars"]["per_class"][0]["clips"][0]["fold"] = 1;
  const auto injected = audit_run_manifest(bad);
  return {clean.ok() && clean.exemplars_checked == 10 && !injected.ok(),
          std::to_string(clean.manifests) + " manifest(s), " + std::to_string(clean.exemplars_checked) +
              " exemplars, " + std::to_string(clean.violations.size()) + " violations; injected overlap " +
              (injected.ok() ? "MISSED" : "detected")};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  TempDir dir("acceptance");
  E2E e2e;
  report("dsp_oracles", dsp_oracles);
  report("frame_count", frame_count);
  report("golden_renders", golden_renders);
  report("kmeans_optimum", kmeans_optimum);
  report("prompt_fidelity", prompt_fidelity);
  report("fixture_replay", fixture_replay);
  report("metric_oracles", metric_oracles);
  report("offline_end_to_end", [&] { return offline_end_to_end(dir, e2e); });
  report("partition_audit", [&] { return partition_audit(e2e); });
  return failures;
}
