#pragma once

#include <string>
#include <vector>

#include "vsc/eval.hpp"

namespace vsc::testing {

struct KappaTable {
  std::vector<std::vector<int>> counts;  // counts[label of a][label of b]
  double expected;
};

/// Agreement tables with hand-computed kappa.
inline std::vector<KappaTable> kappa_tables() {
  return {
      {{{15, 10}, {10, 15}}, 0.2},
      {{{20, 5}, {10, 15}}, 0.4},
      {{{5, 5, 0}, {0, 5, 5}, {5, 0, 5}}, 0.25},
      {{{0, 10}, {10, 0}}, -1.0},
      {{{25, 25}, {25, 25}}, 0.0},
      {{{7, 0, 0}, {0, 3, 0}, {0, 0, 11}}, 1.0},
  };
}

inline std::string label_name(std::size_t i) { return "c" + std::to_string(i); }

inline ClipMeta item_meta(std::size_t i) {
  ClipMeta m;
  m.filename = "item-" + std::to_string(1000 + i) + ".wav";
  m.fold = 1;
  m.category = label_name(0);
  return m;
}

inline PredictionRecord answer(std::size_t item, const std::string& truth, const std::string& label,
                               const std::string& source) {
  PredictionRecord r;
  r.item = item_meta(item);
  r.item.category = truth;
  r.truth = truth;
  r.predicted = label;
  r.status = ResponseStatus::kOk;
  r.source = source;
  return r;
}

/// Two annotators realizing a table; truth is set to annotator a's label.
inline std::pair<std::vector<PredictionRecord>, std::vector<PredictionRecord>> annotators_from_table(
    const KappaTable& t) {
  std::vector<PredictionRecord> a, b;
  std::size_t item = 0;
  for (std::size_t i = 0; i < t.counts.size(); ++i) {
    for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
      for (int n = 0; n < t.counts[i][j]; ++n, ++item) {
        a.push_back(answer(item, label_name(i), label_name(i), "a"));
        b.push_back(answer(item, label_name(i), label_name(j), "b"));
      }
    }
  }
  return {a, b};
}

/// Records with n_correct right answers among n_answered, the rest of the
/// n_items unanswered; over ten classes c0..c9.
inline std::vector<PredictionRecord> scored_records(int n_items, int n_answered, int n_correct, int fold = 1) {
  std::vector<PredictionRecord> out;
  for (int i = 0; i < n_items; ++i) {
    const std::string truth = label_name(static_cast<std::size_t>(i % 10));
    auto r = answer(static_cast<std::size_t>(fold * 1000 + i), truth, truth, "model");
    r.item.fold = fold;
    if (i >= n_answered) {
      r.predicted.reset();
      r.status = i % 2 ? ResponseStatus::kRefused : ResponseStatus::kUnparseable;
    } else if (i >= n_correct) {
      r.predicted = label_name(static_cast<std::size_t>((i + 1) % 10));
    }
    out.push_back(r);
  }
  return out;
}

inline std::vector<std::string> ten_labels() {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < 10; ++i) out.push_back(label_name(i));
  return out;
}

}  // namespace vsc::testing
