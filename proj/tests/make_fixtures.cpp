// Regenerates the committed test fixtures under tests/fixtures.
#include <cstdio>
#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "fixture_prompts.hpp"
#include "golden_cases.hpp"
#include "vsc/hash.hpp"
#include "vsc/report.hpp"
#include "vsc/vlm.hpp"

using namespace vsc;
using namespace vsc::testing;

namespace {

std::string title_case(std::string s) {
  bool start = true;
  for (char& c : s) {
    if (c == '_') {
      c = ' ';
      start = true;
    } else if (start) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      start = false;
    }
  }
  return s;
}

std::string correct_text(const std::string& label, std::size_t i) {
  switch (i % 5) {
    case 0: return label;
    case 1: return title_case(label) + ".";
    case 2: return "The spectrogram most closely resembles " + label;
    case 3: return "  " + label + "\n";
    default: return "**" + label + "**";
  }
}

std::string wrong_text(const std::vector<std::string>& classes, const std::string& truth, std::size_t i) {
  const auto it = std::find(classes.begin(), classes.end(), truth);
  const auto idx = static_cast<std::size_t>(it - classes.begin());
  const std::string other = classes[(idx + 1 + i % 3) % classes.size()];
  switch (i % 7) {
    case 5: return "It could be " + truth + " or " + other + ".";
    case 6: return "I'm sorry, I can't classify this spectrogram.";
    default: return i % 2 ? other : title_case(other);
  }
}

void write_cache(const std::string& model, const std::vector<FixtureItem>& items, int n_correct,
                 bool fresh) {
  if (fresh) std::filesystem::remove(replay_cache_root() / kFixtureProvider / (model + ".jsonl"));
  ResponseCache cache(replay_cache_root(), kFixtureProvider, model);
  const auto classes = items.front().prompt.class_list;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const bool correct = static_cast<int>((i * 7) % items.size()) < n_correct;
    const std::string truth = items[i].clip.category;
    ModelResponse r;
    r.raw_text = correct ? correct_text(truth, i) : wrong_text(classes, truth, i);
    const auto parsed = parse_label(r.raw_text, classes);
    r.parsed_label = parsed.label;
    r.status = parsed.status;
    r.provider = kFixtureProvider;
    r.latency_ms = 400 + static_cast<std::int64_t>((i * 37) % 900);
    r.request_hash = request_hash(kFixtureProvider, model, items[i].prompt);
    if (correct != (r.parsed_label == truth)) {
      std::fprintf(stderr, "fixture text for item %zu does not parse as intended\n", i);
      std::exit(1);
    }
    cache.append({r.request_hash, r, "2026-01-01T00:00:00Z"});
  }
}

}  // namespace

int main() {
  nlohmann::json golden = nlohmann::json::object();
  for (const auto& c : golden_cases()) {
    golden[c.name] = sha256_hex(render(c.matrix, c.config).image_bytes);
  }
  write_json_file(fixture_dir() / "golden_render.json", golden);
  std::printf("golden cases: %zu\n", golden.size());

  write_cache(kFold1Model, fold1_items(), 54, true);
  const int per_fold[] = {56, 48, 44, 44, 44};
  for (int fold = 1; fold <= 5; ++fold) {
    write_cache(kCrossValModel, cross_val_items(fold), per_fold[fold - 1], fold == 1);
  }
  return 0;
}
