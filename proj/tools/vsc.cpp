#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vsc/annotate.hpp"
#include "vsc/annotate_server.hpp"
#include "vsc/dataset.hpp"
#include "vsc/error.hpp"
#include "vsc/eval.hpp"
#include "vsc/hash.hpp"
#include "vsc/pipeline.hpp"
#include "vsc/providers.hpp"
#include "vsc/report.hpp"
#include "vsc/synth.hpp"

namespace {

using nlohmann::json;
using namespace vsc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::kConfig ? kExitConfig : kExitData; }

struct DatasetFlags {
  std::string root;
  std::string manifest;
  bool synthetic = false;
  std::uint64_t synth_seed = kDefaultSeed;
  std::string protocol = "esc10";
  std::uint64_t subset_seed = kDefaultSeed;
  int sample_rate = kDefaultSampleRateHz;

  void add(CLI::App* cmd) {
    cmd->add_option("--dataset-root", root, "ESC-50 checkout (audio/ and meta/esc50.csv)");
    cmd->add_option("--manifest", manifest, "Manifest CSV (default <root>/meta/esc50.csv)");
    cmd->add_flag("--synthetic", synthetic, "Use the built-in synthetic ESC-10-shaped dataset");
    cmd->add_option("--synth-seed", synth_seed, "Seed for the synthetic dataset");
    cmd->add_option("--protocol", protocol, "esc10 or esc50-subset")
        ->check(CLI::IsMember({"esc10", "esc50-subset"}));
    cmd->add_option("--subset-seed", subset_seed, "Seed for the ESC-50 two-per-class draw");
    cmd->add_option("--sample-rate", sample_rate, "Analysis sample rate in Hz");
  }

  EvalDataset load() const {
    EvalDataset d;
    if (synthetic) {
      if (protocol != "esc10") {
        throw Error(ErrorKind::kConfig, "the synthetic dataset only supports the esc10 protocol");
      }
      d.rows = synthetic_manifest();
      d.source = synthetic_source(synth_seed, sample_rate);
      d.descriptor = {{"kind", "synthetic"}, {"seed", synth_seed}, {"protocol", protocol},
                      {"sample_rate_hz", sample_rate}};
    } else {
      if (root.empty()) {
        throw Error(ErrorKind::kConfig, "pass --dataset-root (or --synthetic)");
      }
      const std::filesystem::path manifest_path =
          manifest.empty() ? std::filesystem::path(root) / "meta" / "esc50.csv" : std::filesystem::path(manifest);
      const auto all = load_manifest(manifest_path);
      d.source = disk_source(root, sample_rate);
      d.descriptor = {{"kind", "esc"},
                      {"manifest_sha256", sha256_hex(read_text_file(manifest_path))},
                      {"protocol", protocol},
                      {"sample_rate_hz", sample_rate}};
      if (protocol == "esc10") {
        d.rows = esc10_view(all);
        if (d.rows.empty()) throw Error(ErrorKind::kInsufficientData, "manifest has no esc10 rows");
      } else {
        d.rows = all;
        d.fixed_test_items = esc50_subset(all, subset_seed);
        d.descriptor["subset_seed"] = subset_seed;
      }
    }
    d.classes = class_list(d.rows);
    return d;
  }
};

struct ConfigFlags {
  SpectrogramConfig cfg;
  std::string style = "amplitude";
  std::string amp_scale = "log_db";
  std::string freq_axis = "log";
  std::string colormap = "viridis";
  std::string detail = "standard";
  bool no_labels = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--style", style, "amplitude, mel or mfcc");
    cmd->add_option("--amp-scale", amp_scale, "log_db or linear");
    cmd->add_option("--freq-axis", freq_axis, "log or linear");
    cmd->add_option("--colormap", colormap, "viridis or magma");
    cmd->add_option("--detail", detail, "standard or low");
    cmd->add_flag("--no-labels", no_labels, "Hide axes, ticks and titles");
    cmd->add_flag("--colorbar", cfg.show_colorbar, "Draw a colorbar");
    cmd->add_option("--n-fft", cfg.n_fft);
    cmd->add_option("--hop", cfg.hop);
    cmd->add_option("--window", cfg.window);
    cmd->add_option("--n-mels", cfg.n_mels);
    cmd->add_option("--n-mfcc", cfg.n_mfcc);
    cmd->add_option("--width", cfg.image_width_px);
    cmd->add_option("--height", cfg.image_height_px);
  }

  SpectrogramConfig resolve() const {
    SpectrogramConfig c = cfg;
    c.style = parse_style(style);
    c.amp_scale = parse_amp_scale(amp_scale);
    c.freq_axis = parse_freq_axis(freq_axis);
    c.colormap = parse_colormap(colormap);
    c.detail = parse_detail(detail);
    c.show_labels = !no_labels;
    validate(c);
    return c;
  }
};

struct SelectionFlags {
  int shots = 0;
  std::string select = "kmeans";
  std::string feature = "mel";
  int k = 3;
  std::string handpicked;
  std::uint64_t seed = kDefaultSeed;

  void add(CLI::App* cmd, int default_shots) {
    shots = default_shots;
    cmd->add_option("--shots", shots, "Total exemplars per prompt (multiple of the class count)");
    cmd->add_option("--select", select, "random, kmeans or handpicked");
    cmd->add_option("--feature", feature, "mel or amp (kmeans features)");
    cmd->add_option("--k", k, "Clusters per class for kmeans selection");
    cmd->add_option("--handpicked", handpicked, "Listing file for hand-picked exemplars");
    cmd->add_option("--seed", seed, "Selection and tie-break seed");
  }

  void apply(EvalRunOptions& o) const {
    o.shots = shots;
    o.select = parse_selection_method(select);
    o.feature = parse_feature_kind(feature);
    o.k = k;
    o.handpicked = handpicked;
    o.seed = seed;
  }
};

struct RunFlags {
  std::string provider = "mock";
  std::string model;
  std::vector<int> folds;
  bool cross_validate = false;
  bool dry_run = false;
  bool offline = false;
  bool debug_wire = false;
  bool no_salvage = false;
  std::string cache_dir = "cache";
  std::string out_dir = "results";
  std::string image_root = "images";
  std::string accounting = "all";
  int max_in_flight = 4;
  unsigned threads = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--provider", provider, "mock, openai, anthropic or gemini");
    cmd->add_option("--model", model, "Provider model id");
    cmd->add_option("--fold", folds, "Test fold(s); default 1");
    cmd->add_flag("--cross-validate", cross_validate, "Run all five folds and pool");
    cmd->add_flag("--dry-run", dry_run, "Count requests and payload bytes without sending");
    cmd->add_flag("--offline", offline, "Serve responses from the cache only");
    cmd->add_flag("--debug-wire", debug_wire, "Log request bodies (credentials redacted)");
    cmd->add_flag("--no-salvage", no_salvage, "Disable the single-class-mention salvage rule");
    cmd->add_option("--cache-dir", cache_dir);
    cmd->add_option("--out-dir", out_dir);
    cmd->add_option("--image-root", image_root);
    cmd->add_option("--accounting", accounting, "all or answered")
        ->check(CLI::IsMember({"all", "all_items", "answered"}));
    cmd->add_option("--max-in-flight", max_in_flight);
    cmd->add_option("--threads", threads, "Render/feature threads (0 = all cores)");
  }

  void apply(EvalRunOptions& o) const {
    o.folds = cross_validate ? std::vector<int>{1, 2, 3, 4, 5}
                             : (folds.empty() ? std::vector<int>{1} : folds);
    o.dry_run = dry_run;
    o.cache_dir = cache_dir;
    o.out_dir = out_dir;
    o.image_root = image_root;
    o.accounting = parse_accounting(accounting);
    o.max_in_flight = max_in_flight;
    o.threads = threads;
    o.parse.salvage = !no_salvage;
  }

  std::unique_ptr<ProviderClient> client(EvalRunOptions& o) const {
    if (provider == "mock") {
      if (!model.empty() && model != MockNearestExemplarProvider::kModel) {
        throw Error(ErrorKind::kConfig, std::string("the mock provider only offers model ") +
                                            MockNearestExemplarProvider::kModel);
      }
      return std::make_unique<MockNearestExemplarProvider>();
    }
    if (model.empty()) throw Error(ErrorKind::kConfig, "--model is required for " + provider);
    dialect_for(provider);
    HttpProviderOptions defaults;
    o.extra_manifest["sampling"] = {{"temperature", defaults.temperature},
                                    {"max_tokens", defaults.max_tokens}};
    if (offline || dry_run) return std::make_unique<OfflineProvider>(provider, model);
    return make_http_provider(provider, model, debug_wire);
  }
};

void print_outcome(const EvalRunOutcome& out, Accounting accounting) {
  for (std::size_t i = 0; i < out.summary.folds.size(); ++i) {
    const auto& r = out.summary.per_fold[i];
    std::printf("fold %d: %d/%d correct, %d answered, accuracy %.2f%% (%s)\n",
                out.summary.folds[i], r.n_correct, r.n_items, r.n_answered,
                100.0 * headline_accuracy(r, accounting), to_string(accounting));
  }
  const auto& p = out.summary.pooled;
  std::printf("pooled: %d/%d correct, accuracy_all %.2f%%, accuracy_answered %.2f%%\n", p.n_correct,
              p.n_items, 100.0 * p.accuracy_all, 100.0 * p.accuracy_answered);
  if (out.transport_errors > 0) {
    std::printf("transport errors: %zu (run is partial)\n", out.transport_errors);
  }
  std::printf("run: %s\n", out.run_dir.string().c_str());
}

void print_dry(const EvalRunOutcome& out) {
  std::printf("requests: %zu\ncached: %zu\nto send: %zu\nimages: %zu\npayload bytes: %zu\n",
              out.dry.requests, out.dry.cached, out.dry.to_send, out.dry.images,
              out.dry.payload_bytes);
}

AnnotationServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

StudyConfig study_config(const EvalDataset& data, const SpectrogramConfig& cfg,
                         const std::filesystem::path& image_root, int fold) {
  StudyConfig sc;
  sc.classes = data.classes;
  sc.manifest = data.rows;
  sc.corpus_hash = corpus_hash(cfg);
  sc.image_dir = image_root / sc.corpus_hash;
  sc.test_fold = fold;
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual spectrogram classification benchmark"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write the synthetic ESC-10-shaped dataset");
  std::string synth_out;
  int synth_rate = 44100;
  std::uint64_t synth_seed = kDefaultSeed;
  synth->add_option("--out", synth_out, "Destination directory")->required();
  synth->add_option("--rate", synth_rate, "Sample rate of the written WAV files");
  synth->add_option("--seed", synth_seed);

  auto* render_cmd = app.add_subcommand("render", "Render spectrogram corpora");
  DatasetFlags render_data;
  ConfigFlags render_cfg;
  std::vector<int> render_folds;
  bool ablation = false;
  std::string render_root = "images";
  unsigned render_threads = 0;
  render_data.add(render_cmd);
  render_cfg.add(render_cmd);
  render_cmd->add_option("--fold", render_folds, "Folds to render (default all)");
  render_cmd->add_flag("--ablation-grid", ablation, "Render one corpus per ablation configuration");
  render_cmd->add_option("--image-root", render_root);
  render_cmd->add_option("--threads", render_threads);

  auto* select_cmd = app.add_subcommand("select", "Select few-shot exemplars for a test fold");
  DatasetFlags select_data;
  SelectionFlags select_sel;
  int select_fold = 1;
  std::string select_out;
  select_data.add(select_cmd);
  select_sel.add(select_cmd, 10);
  select_cmd->add_option("--fold", select_fold, "Test fold to exclude");
  select_cmd->add_option("--out", select_out, "Write the exemplar set JSON here");

  auto* eval_cmd = app.add_subcommand("eval", "Run a zero- or few-shot evaluation");
  DatasetFlags eval_data;
  ConfigFlags eval_cfg;
  SelectionFlags eval_sel;
  RunFlags eval_run;
  eval_data.add(eval_cmd);
  eval_cfg.add(eval_cmd);
  eval_sel.add(eval_cmd, 0);
  eval_run.add(eval_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every ablation configuration");
  DatasetFlags sweep_data;
  SelectionFlags sweep_sel;
  RunFlags sweep_run;
  sweep_data.add(sweep_cmd);
  sweep_sel.add(sweep_cmd, 0);
  sweep_run.add(sweep_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Host the expert annotation study");
  DatasetFlags serve_data;
  ConfigFlags serve_cfg;
  SelectionFlags serve_sel;
  ServerOptions serve_opts;
  int serve_fold = 1;
  std::string serve_sessions = "sessions";
  std::string serve_images = "images";
  std::string serve_static;
  serve_data.add(serve_cmd);
  serve_cfg.add(serve_cmd);
  serve_sel.add(serve_cmd, 10);
  serve_cmd->add_option("--host", serve_opts.host);
  serve_cmd->add_option("--port", serve_opts.port);
  serve_cmd->add_option("--fold", serve_fold, "Test fold shown to experts");
  serve_cmd->add_option("--sessions-dir", serve_sessions);
  serve_cmd->add_option("--image-root", serve_images);
  serve_cmd->add_option("--static-dir", serve_static, "Browser client build to serve at /");

  auto* study_cmd = app.add_subcommand("study-report", "Agreement and ensemble report over finalized sessions");
  DatasetFlags study_data;
  std::string study_sessions = "sessions";
  std::string study_out = "results/study";
  std::uint64_t study_seed = kDefaultSeed;
  study_data.add(study_cmd);
  study_cmd->add_option("--sessions-dir", study_sessions);
  study_cmd->add_option("--out-dir", study_out);
  study_cmd->add_option("--seed", study_seed, "Ensemble tie-break seed");

  auto* audit_cmd = app.add_subcommand("audit", "Check run manifests for exemplar/test fold overlap");
  std::string audit_root = "results";
  audit_cmd->add_option("--results", audit_root);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      const auto rows = write_synthetic_dataset(synth_out, synth_rate, synth_seed);
      std::printf("wrote %zu clips to %s\n", rows.size(), synth_out.c_str());
      return kExitOk;
    }

    if (render_cmd->parsed()) {
      const EvalDataset data = render_data.load();
      std::vector<ClipMeta> clips;
      if (render_folds.empty()) {
        clips = data.fixed_test_items ? *data.fixed_test_items : data.rows;
      } else {
        for (int f : render_folds) {
          const auto items = data.test_items(f);
          clips.insert(clips.end(), items.begin(), items.end());
        }
      }
      std::vector<AblationEntry> configs;
      if (ablation) {
        configs = ablation_grid(render_cfg.resolve());
      } else {
        configs.push_back({"selected", "Selected configuration", render_cfg.resolve()});
      }
      for (const auto& entry : configs) {
        const auto corpus = render_corpus(clips, data.source, entry.config, render_root, render_threads);
        std::printf("%-24s %s rendered %d, up to date %d\n", entry.name.c_str(),
                    corpus.dir.string().c_str(), corpus.n_rendered, corpus.n_skipped);
      }
      return kExitOk;
    }

    if (select_cmd->parsed()) {
      const EvalDataset data = select_data.load();
      EvalRunOptions o;
      select_sel.apply(o);
      const ExemplarSet set = select_exemplars(data, o, select_fold);
      const std::string text = json(set).dump(2) + "\n";
      if (select_out.empty()) {
        std::cout << text;
      } else {
        write_text_file(select_out, text);
      }
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      const EvalDataset data = eval_data.load();
      EvalRunOptions o;
      o.config = eval_cfg.resolve();
      eval_sel.apply(o);
      eval_run.apply(o);
      auto client = eval_run.client(o);
      const auto out = run_eval(data, *client, o);
      if (o.dry_run) {
        print_dry(out);
        return kExitOk;
      }
      print_outcome(out, o.accounting);
      return out.transport_errors > 0 ? kExitPartial : kExitOk;
    }

    if (sweep_cmd->parsed()) {
      const EvalDataset data = sweep_data.load();
      EvalRunOptions o;
      sweep_sel.apply(o);
      sweep_run.apply(o);
      auto client = sweep_run.client(o);
      std::filesystem::path dir;
      const auto rows = run_sweep(data, *client, o, &dir);
      std::size_t errors = 0;
      for (const auto& r : rows) {
        errors += r.outcome.transport_errors;
        if (o.dry_run) {
          std::printf("%s\n", r.title.c_str());
          print_dry(r.outcome);
        } else {
          std::printf("%-24s %6.2f%%\n", r.title.c_str(),
                      100.0 * headline_accuracy(r.outcome.summary.pooled, o.accounting));
        }
      }
      if (!o.dry_run) std::printf("sweep: %s\n", dir.string().c_str());
      return errors > 0 ? kExitPartial : kExitOk;
    }

    if (serve_cmd->parsed()) {
      const EvalDataset data = serve_data.load();
      const SpectrogramConfig cfg = serve_cfg.resolve();
      EvalRunOptions o;
      serve_sel.apply(o);
      StudyConfig sc = study_config(data, cfg, serve_images, serve_fold);
      sc.seed = serve_sel.seed;
      sc.exemplars = select_exemplars(data, o, serve_fold);
      std::vector<ClipMeta> clips = data.test_items(serve_fold);
      for (const auto& [category, clip] : sc.exemplars.ordered()) clips.push_back(clip);
      const auto corpus = render_corpus(clips, data.source, cfg, serve_images);
      std::printf("stimuli: %s (%d rendered, %d up to date)\n", corpus.dir.string().c_str(),
                  corpus.n_rendered, corpus.n_skipped);
      AnnotationStore store(sc, serve_sessions);
      serve_opts.static_dir = serve_static;
      AnnotationServer server(store, serve_opts);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::printf("serving on http://%s:%d (unauthenticated; trusted networks only)\n",
                  serve_opts.host.c_str(), port);
      std::fflush(stdout);
      server.listen();
      g_server = nullptr;
      std::printf("stopped; sessions kept in %s\n", serve_sessions.c_str());
      return kExitOk;
    }

    if (study_cmd->parsed()) {
      const EvalDataset data = study_data.load();
      StudyConfig sc = study_config(data, SpectrogramConfig{}, "images", 1);
      AnnotationStore store(sc, study_sessions);
      std::vector<std::vector<PredictionRecord>> experts;
      std::vector<std::string> names;
      json per_expert = json::array();
      for (const auto& id : store.session_ids()) {
        const auto s = store.get_session(id);
        if (s.state != SessionState::kComplete) continue;
        auto fin = store.finalize(id);
        names.push_back(s.expert_id);
        per_expert.push_back({{"session_id", id}, {"expert_id", s.expert_id}, {"result", fin.result}});
        std::printf("%-16s %.2f%%\n", s.expert_id.c_str(), 100.0 * fin.result.accuracy_all);
        experts.push_back(std::move(fin.records));
      }
      if (experts.size() < 2) {
        throw Error(ErrorKind::kInsufficientData, "need at least two finalized sessions");
      }
      json kappa = json::array();
      for (std::size_t i = 0; i < experts.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < experts.size(); ++j) {
          row.push_back(i == j ? 1.0 : cohen_kappa(experts[i], experts[j]));
        }
        kappa.push_back(row);
      }
      const double mean_kappa = mean_pairwise_kappa(experts);
      const auto ensemble = ensemble_majority(experts, study_seed);
      const EvalResult ens = evaluate(ensemble, data.classes);
      std::printf("%-16s %.2f%%\nmean kappa %.4f\n", "ensemble", 100.0 * ens.accuracy_all, mean_kappa);
      write_report(study_out, ens, Accounting::kAllItems,
                   {{"experts", per_expert},
                    {"expert_ids", names},
                    {"kappa_matrix", kappa},
                    {"mean_pairwise_kappa", mean_kappa},
                    {"ensemble_rule", "majority vote, seeded uniform tie-break"},
                    {"ensemble_seed", study_seed}});
      std::printf("report: %s\n", study_out.c_str());
      return kExitOk;
    }

    if (audit_cmd->parsed()) {
      const auto report = audit_results(audit_root);
      for (const auto& v : report.violations) std::printf("VIOLATION %s\n", v.c_str());
      std::printf("manifests %d, fold runs %d, exemplars checked %d, violations %zu\n",
                  report.manifests, report.fold_runs, report.exemplars_checked,
                  report.violations.size());
      return report.ok() ? kExitOk : kExitData;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
