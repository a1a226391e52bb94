#include "vsc/eval.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "vsc/error.hpp"
#include "vsc/rng.hpp"

namespace vsc {

void to_json(nlohmann::json& j, const PredictionRecord& r) {
  j = {{"filename", r.item.filename},
       {"fold", r.item.fold},
       {"target", r.item.target},
       {"category", r.item.category},
       {"esc10", r.item.esc10},
       {"truth", r.truth},
       {"predicted", r.predicted ? nlohmann::json(*r.predicted) : nlohmann::json()},
       {"status", to_string(r.status)},
       {"source", r.source}};
}

void from_json(const nlohmann::json& j, PredictionRecord& r) {
  r.item.filename = j.at("filename").get<std::string>();
  r.item.fold = j.at("fold").get<int>();
  r.item.target = j.at("target").get<int>();
  r.item.category = j.at("category").get<std::string>();
  r.item.esc10 = j.value("esc10", false);
  r.truth = j.at("truth").get<std::string>();
  const auto& p = j.at("predicted");
  r.predicted = p.is_null() ? std::nullopt : std::optional(p.get<std::string>());
  r.status = parse_response_status(j.at("status").get<std::string>());
  r.source = j.value("source", "");
}

void to_json(nlohmann::json& j, const EvalResult& r) {
  j = {{"classes", r.classes},
       {"n_items", r.n_items},
       {"n_answered", r.n_answered},
       {"n_correct", r.n_correct},
       {"accuracy_answered", r.accuracy_answered},
       {"accuracy_all", r.accuracy_all},
       {"confusion", r.confusion},
       {"per_class_accuracy", r.per_class_accuracy},
       {"status_counts", r.status_counts}};
}

namespace {

std::size_t class_index(const std::vector<std::string>& classes, const std::string& label,
                        const char* what) {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) {
    throw Error(ErrorKind::kValidation, std::string(what) + " '" + label + "' is not in the class list");
  }
  return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace

EvalResult evaluate(const std::vector<PredictionRecord>& records,
                    const std::vector<std::string>& classes) {
  if (records.empty()) throw Error(ErrorKind::kEmptyInput, "evaluate: no records");
  EvalResult r;
  r.classes = classes;
  const std::size_t k = classes.size();
  r.confusion.assign(k, std::vector<int>(k, 0));
  std::vector<int> class_total(k, 0);
  std::vector<int> class_correct(k, 0);
  for (const auto& rec : records) {
    const std::size_t t = class_index(classes, rec.truth, "truth");
    ++class_total[t];
    ++r.n_items;
    ++r.status_counts[to_string(rec.status)];
    const bool ok = rec.status == ResponseStatus::kOk;
    if (ok != rec.predicted.has_value()) {
      throw Error(ErrorKind::kValidation,
                  "record for " + rec.item.filename + " has status " + to_string(rec.status) +
                      (rec.predicted ? " but a prediction" : " but no prediction"));
    }
    if (!ok) continue;
    const std::size_t p = class_index(classes, *rec.predicted, "prediction");
    ++r.n_answered;
    ++r.confusion[t][p];
    if (t == p) {
      ++r.n_correct;
      ++class_correct[t];
    }
  }
  r.accuracy_all = static_cast<double>(r.n_correct) / r.n_items;
  r.accuracy_answered = r.n_answered > 0 ? static_cast<double>(r.n_correct) / r.n_answered : 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    r.per_class_accuracy[classes[i]] =
        class_total[i] > 0 ? static_cast<double>(class_correct[i]) / class_total[i] : 0.0;
  }
  return r;
}

void to_json(nlohmann::json& j, const CrossValidationSummary& s) {
  j = {{"folds", s.folds}, {"per_fold", s.per_fold}, {"pooled", s.pooled}};
}

CrossValidationSummary cross_validate(
    const std::function<std::vector<PredictionRecord>(int fold)>& run_fn,
    const std::vector<int>& folds, const std::vector<std::string>& classes) {
  if (folds.empty()) throw Error(ErrorKind::kEmptyInput, "cross_validate: no folds");
  CrossValidationSummary s;
  s.folds = folds;
  for (int fold : folds) {
    auto records = run_fn(fold);
    s.per_fold.push_back(evaluate(records, classes));
    s.records.insert(s.records.end(), records.begin(), records.end());
  }
  s.pooled = evaluate(s.records, classes);
  return s;
}

namespace {

std::map<std::string, std::string> answered_by_item(const std::vector<PredictionRecord>& recs,
                                                    const char* who) {
  std::map<std::string, std::string> out;
  for (const auto& r : recs) {
    if (r.status != ResponseStatus::kOk || !r.predicted) {
      throw Error(ErrorKind::kIncomplete,
                  std::string(who) + " has no answer for " + r.item.filename);
    }
    if (!out.emplace(r.item.filename, *r.predicted).second) {
      throw Error(ErrorKind::kAlignment, std::string(who) + " repeats item " + r.item.filename);
    }
  }
  return out;
}

}  // namespace

double cohen_kappa(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b) {
  const auto la = answered_by_item(a, "first annotator");
  const auto lb = answered_by_item(b, "second annotator");
  if (la.empty()) throw Error(ErrorKind::kEmptyInput, "cohen_kappa: no items");
  if (la.size() != lb.size()) {
    throw Error(ErrorKind::kAlignment, "cohen_kappa: annotators cover different item sets");
  }
  std::map<std::string, std::int64_t> na;
  std::map<std::string, std::int64_t> nb;
  std::int64_t agree = 0;
  for (const auto& [item, label] : la) {
    auto it = lb.find(item);
    if (it == lb.end()) {
      throw Error(ErrorKind::kAlignment, "cohen_kappa: item " + item + " missing from second annotator");
    }
    ++na[label];
    ++nb[it->second];
    if (label == it->second) ++agree;
  }
  const auto n = static_cast<std::int64_t>(la.size());
  std::int64_t chance = 0;
  for (const auto& [label, count] : na) {
    auto it = nb.find(label);
    if (it != nb.end()) chance += count * it->second;
  }
  const std::int64_t denom = n * n - chance;
  if (denom == 0) {
    if (agree == n) return 1.0;
    throw Error(ErrorKind::kDegenerate, "cohen_kappa: chance agreement is 1 but labels differ");
  }
  return static_cast<double>(n * agree - chance) / static_cast<double>(denom);
}

double mean_pairwise_kappa(const std::vector<std::vector<PredictionRecord>>& annotators) {
  if (annotators.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "mean_pairwise_kappa: need at least two annotators");
  }
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < annotators.size(); ++i) {
    for (std::size_t j = i + 1; j < annotators.size(); ++j) {
      sum += cohen_kappa(annotators[i], annotators[j]);
      ++pairs;
    }
  }
  return sum / pairs;
}

std::vector<PredictionRecord> ensemble_majority(
    const std::vector<std::vector<PredictionRecord>>& annotators, std::uint64_t seed) {
  if (annotators.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "ensemble_majority: need at least two annotators");
  }
  std::vector<std::map<std::string, const PredictionRecord*>> index(annotators.size());
  for (std::size_t a = 0; a < annotators.size(); ++a) {
    for (const auto& r : annotators[a]) {
      if (!index[a].emplace(r.item.filename, &r).second) {
        throw Error(ErrorKind::kAlignment, "ensemble_majority: annotator " + std::to_string(a) +
                                               " repeats item " + r.item.filename);
      }
    }
    if (index[a].size() != index[0].size()) {
      throw Error(ErrorKind::kAlignment, "ensemble_majority: annotators cover different item sets");
    }
  }
  std::vector<PredictionRecord> out;
  out.reserve(annotators[0].size());
  for (const auto& first : annotators[0]) {
    std::map<std::string, int> votes;
    for (std::size_t a = 0; a < annotators.size(); ++a) {
      auto it = index[a].find(first.item.filename);
      if (it == index[a].end()) {
        throw Error(ErrorKind::kAlignment, "ensemble_majority: item " + first.item.filename +
                                               " missing from annotator " + std::to_string(a));
      }
      const PredictionRecord& r = *it->second;
      if (r.truth != first.truth) {
        throw Error(ErrorKind::kAlignment,
                    "ensemble_majority: annotators disagree on the truth of " + first.item.filename);
      }
      if (r.status == ResponseStatus::kOk && r.predicted) ++votes[*r.predicted];
    }
    PredictionRecord rec;
    rec.item = first.item;
    rec.truth = first.truth;
    rec.source = kEnsembleSource;
    if (votes.empty()) {
      rec.status = ResponseStatus::kUnparseable;
      out.push_back(std::move(rec));
      continue;
    }
    int best = 0;
    for (const auto& [label, count] : votes) best = std::max(best, count);
    std::vector<std::string> tied;
    for (const auto& [label, count] : votes) {
      if (count == best) tied.push_back(label);
    }
    std::size_t pick = 0;
    if (tied.size() > 1) {
      Rng rng(salted_seed(seed, first.item.filename));
      pick = static_cast<std::size_t>(rng.below(tied.size()));
    }
    rec.predicted = tied[pick];
    rec.status = ResponseStatus::kOk;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace vsc
