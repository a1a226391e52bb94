#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "metric_cases.hpp"
#include "test_support.hpp"
#include "vsc/eval.hpp"
#include "vsc/image.hpp"
#include "vsc/png.hpp"
#include "vsc/report.hpp"

using namespace vsc;
using namespace vsc::testing;

namespace {

/// Kappa from the agreement table with floating-point marginals.
double kappa_oracle(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b) {
  std::map<std::string, double> pa, pb;
  double agree = 0.0;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[*a[i].predicted] += 1.0 / n;
    pb[*b[i].predicted] += 1.0 / n;
    if (a[i].predicted == b[i].predicted) agree += 1.0 / n;
  }
  double pe = 0.0;
  for (const auto& [label, p] : pa) pe += p * (pb.count(label) ? pb[label] : 0.0);
  return (agree - pe) / (1.0 - pe);
}

std::vector<PredictionRecord> random_annotator(std::size_t n, Rng& rng, const std::string& source) {
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(answer(i, "c0", label_name(rng.below(10)), source));
  }
  return out;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("accuracy over all items and over answered items") {
  const auto r = evaluate(scored_records(80, 80, 54), ten_labels());
  CHECK(r.n_correct == 54);
  CHECK(r.accuracy_all == doctest::Approx(0.675).epsilon(1e-12));
  CHECK(r.accuracy_answered == doctest::Approx(0.675).epsilon(1e-12));

  const auto partial = evaluate(scored_records(80, 76, 57), ten_labels());
  CHECK(partial.n_answered == 76);
  CHECK(partial.accuracy_answered == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(partial.accuracy_all == doctest::Approx(0.7125).epsilon(1e-12));
  CHECK(partial.status_counts.at("ok") == 76);
  CHECK(partial.status_counts.at("refused") + partial.status_counts.at("unparseable") == 4);
  CHECK(headline_accuracy(partial, Accounting::kAllItems) == partial.accuracy_all);
  CHECK(headline_accuracy(partial, Accounting::kAnswered) == partial.accuracy_answered);

  int total = 0, diag = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) total += partial.confusion[i][j];
    diag += partial.confusion[i][i];
  }
  CHECK(total == 76);
  CHECK(diag == 57);
}

TEST_CASE("per-class accuracy counts unanswered items as wrong") {
  auto recs = scored_records(20, 20, 20);
  recs[0].predicted.reset();
  recs[0].status = ResponseStatus::kRefused;
  const auto r = evaluate(recs, ten_labels());
  CHECK(r.per_class_accuracy.at("c0") == doctest::Approx(0.5));
  CHECK(r.per_class_accuracy.at("c1") == doctest::Approx(1.0));
}

TEST_CASE("evaluate validates its input") {
  VSC_CHECK_THROWS_KIND(evaluate({}, ten_labels()), ErrorKind::kEmptyInput);
  auto recs = scored_records(10, 10, 10);
  recs[0].predicted = "cat";
  VSC_CHECK_THROWS_KIND(evaluate(recs, ten_labels()), ErrorKind::kValidation);
  recs = scored_records(10, 10, 10);
  recs[0].truth = "cat";
  VSC_CHECK_THROWS_KIND(evaluate(recs, ten_labels()), ErrorKind::kValidation);
  recs = scored_records(10, 10, 10);
  recs[0].status = ResponseStatus::kRefused;
  VSC_CHECK_THROWS_KIND(evaluate(recs, ten_labels()), ErrorKind::kValidation);
}

TEST_CASE("prediction records round-trip through JSON") {
  for (const auto& r : scored_records(12, 9, 5)) {
    const nlohmann::json j = r;
    CHECK(j.get<PredictionRecord>() == r);
    CHECK(j.contains("predicted"));
  }
}

TEST_CASE("cross-validation pools the fold records") {
  const int correct[] = {56, 48, 44, 44, 44};
  const auto s = cross_validate([&](int fold) { return scored_records(80, 80, correct[fold - 1], fold); },
                                {1, 2, 3, 4, 5}, ten_labels());
  REQUIRE(s.per_fold.size() == 5);
  CHECK(s.per_fold[0].accuracy_all == doctest::Approx(0.70));
  CHECK(s.per_fold[1].accuracy_all == doctest::Approx(0.60));
  CHECK(s.per_fold[4].accuracy_all == doctest::Approx(0.55));
  CHECK(s.pooled.n_items == 400);
  CHECK(s.pooled.n_correct == 236);
  CHECK(s.pooled.accuracy_all == doctest::Approx(0.59).epsilon(1e-12));
  CHECK(s.records.size() == 400);
}

TEST_CASE("kappa matches hand-computed tables") {
  for (const auto& t : kappa_tables()) {
    const auto [a, b] = annotators_from_table(t);
    CAPTURE(t.expected);
    CHECK(std::abs(cohen_kappa(a, b) - t.expected) < 1e-12);
    CHECK(std::abs(kappa_oracle(a, b) - t.expected) < 1e-12);
  }
}

TEST_CASE("kappa is symmetric and invariant to item order") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_annotator(60, rng, "a");
    auto b = random_annotator(60, rng, "b");
    for (std::size_t i = 0; i < b.size(); i += 2) b[i].predicted = a[i].predicted;
    const double ab = cohen_kappa(a, b);
    CHECK(ab == cohen_kappa(b, a));
    CHECK(std::abs(ab - kappa_oracle(a, b)) < 1e-12);
    auto shuffled = b;
    rng.shuffle(shuffled);
    CHECK(cohen_kappa(a, shuffled) == ab);
    CHECK(cohen_kappa(a, a) == 1.0);
  }
}

TEST_CASE("independent random annotators have kappa near zero") {
  Rng rng(2024);
  double sum = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto a = random_annotator(400, rng, "a");
    const auto b = random_annotator(400, rng, "b");
    sum += cohen_kappa(a, b);
  }
  CHECK(std::abs(sum / trials) < 0.05);
}

TEST_CASE("kappa rejects misaligned, incomplete or degenerate input") {
  auto [a, b] = annotators_from_table(kappa_tables()[1]);
  auto shorter = b;
  shorter.pop_back();
  VSC_CHECK_THROWS_KIND(cohen_kappa(a, shorter), ErrorKind::kAlignment);
  auto renamed = b;
  renamed[3].item.filename = "other.wav";
  VSC_CHECK_THROWS_KIND(cohen_kappa(a, renamed), ErrorKind::kAlignment);
  auto gap = b;
  gap[0].predicted.reset();
  gap[0].status = ResponseStatus::kUnparseable;
  VSC_CHECK_THROWS_KIND(cohen_kappa(a, gap), ErrorKind::kIncomplete);

  std::vector<PredictionRecord> x = {answer(0, "c0", "c0", "x"), answer(1, "c0", "c0", "x")};
  CHECK(cohen_kappa(x, x) == 1.0);
  VSC_CHECK_THROWS_KIND(mean_pairwise_kappa({x}), ErrorKind::kInsufficientData);
}

TEST_CASE("mean pairwise kappa averages unordered pairs") {
  Rng rng(3);
  const auto a = random_annotator(80, rng, "a");
  const auto b = random_annotator(80, rng, "b");
  const auto c = random_annotator(80, rng, "c");
  const double expected = (cohen_kappa(a, b) + cohen_kappa(a, c) + cohen_kappa(b, c)) / 3.0;
  CHECK(mean_pairwise_kappa({a, b, c}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("majority ensemble takes the modal label") {
  std::vector<PredictionRecord> e1, e2, e3;
  for (std::size_t i = 0; i < 30; ++i) {
    e1.push_back(answer(i, "c0", "c1", "e1"));
    e2.push_back(answer(i, "c0", "c1", "e2"));
    e3.push_back(answer(i, "c0", "c2", "e3"));
  }
  const auto ens = ensemble_majority({e1, e2, e3}, 42);
  REQUIRE(ens.size() == 30);
  for (const auto& r : ens) {
    CHECK(r.predicted == "c1");
    CHECK(r.status == ResponseStatus::kOk);
    CHECK(r.source == kEnsembleSource);
  }
}

TEST_CASE("ensemble ties are broken by a seeded draw and non-answers abstain") {
  std::vector<PredictionRecord> e1, e2, e3;
  for (std::size_t i = 0; i < 200; ++i) {
    e1.push_back(answer(i, "c0", "c1", "e1"));
    e2.push_back(answer(i, "c0", "c2", "e2"));
    auto r = answer(i, "c0", "c3", "e3");
    r.predicted.reset();
    r.status = ResponseStatus::kRefused;
    e3.push_back(r);
  }
  const auto a = ensemble_majority({e1, e2, e3}, 42);
  const auto b = ensemble_majority({e1, e2, e3}, 42);
  CHECK(a == b);
  int c1 = 0;
  for (const auto& r : a) {
    REQUIRE(r.predicted.has_value());
    CHECK((r.predicted == "c1" || r.predicted == "c2"));
    c1 += r.predicted == "c1";
  }
  CHECK(c1 > 60);
  CHECK(c1 < 140);
  const auto other_seed = ensemble_majority({e1, e2, e3}, 43);
  CHECK(other_seed != a);

  auto silent = e3;
  const auto none = ensemble_majority({e3, silent}, 1);
  for (const auto& r : none) {
    CHECK(!r.predicted);
    CHECK(r.status == ResponseStatus::kUnparseable);
  }
  auto shuffled = e2;
  Rng rng(1);
  rng.shuffle(shuffled);
  CHECK(ensemble_majority({e1, shuffled, e3}, 42) == a);
  VSC_CHECK_THROWS_KIND(ensemble_majority({e1}, 1), ErrorKind::kInsufficientData);
  auto missing = e2;
  missing.pop_back();
  VSC_CHECK_THROWS_KIND(ensemble_majority({e1, missing}, 1), ErrorKind::kAlignment);
}

TEST_CASE("accounting names parse") {
  CHECK(parse_accounting("all") == Accounting::kAllItems);
  CHECK(parse_accounting("all_items") == Accounting::kAllItems);
  CHECK(parse_accounting("answered") == Accounting::kAnswered);
  CHECK(std::string(to_string(Accounting::kAnswered)) == "answered");
  VSC_CHECK_THROWS_KIND(parse_accounting("some"), ErrorKind::kConfig);
}

TEST_CASE("reports are deterministic and the heatmap diagonal peaks") {
  const auto r = evaluate(scored_records(80, 80, 80), ten_labels());
  TempDir a("report-a");
  TempDir b("report-b");
  write_report(a.path(), r, Accounting::kAllItems, {{"run_id", "x"}});
  write_report(b.path(), r, Accounting::kAllItems, {{"run_id", "x"}});
  for (const char* f : {"summary.json", "confusion.txt", "confusion.png"}) {
    CHECK(read_text_file(a.path() / f) == read_text_file(b.path() / f));
  }
  const auto summary = nlohmann::json::parse(read_text_file(a.path() / "summary.json"));
  CHECK(summary["accounting"] == "all_items");
  CHECK(summary["headline_accuracy"] == 1.0);
  CHECK(summary["run_id"] == "x");

  const auto table = confusion_table(r);
  CHECK(table.find("c9") != std::string::npos);

  const auto img = confusion_heatmap(r);
  int label_w = 0;
  for (const auto& c : r.classes) label_w = std::max(label_w, text_width(c));
  const int left = label_w + 8;
  const int top = 6;
  const int cell = kConfusionCellPx;
  for (int i = 0; i < 10; ++i) {
    CHECK(img.get(left + i * cell + cell / 2, top + i * cell + cell / 2) ==
          colormap_lookup(1.0, ColormapName::kViridis));
    const int j = (i + 1) % 10;
    CHECK(img.get(left + j * cell + cell / 2, top + i * cell + cell / 2) ==
          colormap_lookup(0.0, ColormapName::kViridis));
  }
  CHECK(decode_png(std::vector<std::uint8_t>(
            [&] {
              const auto s = read_text_file(a.path() / "confusion.png");
              return std::vector<std::uint8_t>(s.begin(), s.end());
            }())) == img);
  VSC_CHECK_THROWS_KIND(write_report("/proc/definitely/not/here", r, Accounting::kAllItems), ErrorKind::kIo);
}

}
