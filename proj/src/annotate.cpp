#include "vsc/annotate.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>

#include "vsc/error.hpp"
#include "vsc/hash.hpp"
#include "vsc/report.hpp"
#include "vsc/rng.hpp"

namespace vsc {

using nlohmann::json;

const char* to_string(SessionState s) { return s == SessionState::kOpen ? "open" : "complete"; }

std::string opaque_image_name(const std::string& corpus_hash, const std::string& filename) {
  return sha256_hex(corpus_hash + "/" + filename).substr(0, 16) + ".png";
}

namespace {

std::string now_iso() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

std::string random_token() {
  std::random_device rd;
  std::string out;
  static const char* kHex = "0123456789abcdef";
  for (int i = 0; i < 4; ++i) {
    std::uint32_t v = rd();
    for (int b = 0; b < 4; ++b) {
      out.push_back(kHex[(v >> 4) & 0xF]);
      out.push_back(kHex[v & 0xF]);
      v >>= 8;
    }
  }
  return out;
}

bool valid_token(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string stem_of(const std::string& filename) {
  return std::filesystem::path(filename).stem().string();
}

}  // namespace

AnnotationStore::AnnotationStore(StudyConfig config, std::filesystem::path sessions_dir)
    : config_(std::move(config)), sessions_dir_(std::move(sessions_dir)) {
  for (const auto& m : config_.manifest) {
    by_filename_[m.filename] = m;
    image_names_[opaque_image_name(config_.corpus_hash, m.filename)] = m.filename;
  }
  for (const auto& [category, clip] : config_.exemplars.ordered()) {
    by_filename_.emplace(clip.filename, clip);
    image_names_[opaque_image_name(config_.corpus_hash, clip.filename)] = clip.filename;
  }
  std::filesystem::create_directories(sessions_dir_);
  std::vector<std::filesystem::path> logs;
  for (const auto& e : std::filesystem::directory_iterator(sessions_dir_)) {
    if (e.path().extension() == ".jsonl") logs.push_back(e.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& log : logs) replay(log);
}

void AnnotationStore::replay(const std::filesystem::path& log) {
  const std::string text = read_text_file(log);
  auto entry = std::make_shared<Entry>();
  AnnotationSession& s = entry->session;
  std::size_t line_no = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? text.size() : nl;
    const std::string line = text.substr(pos, end - pos);
    const std::size_t start = pos;
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::exception&) {
      if (pos >= text.size()) {
        // torn final write: drop it so later appends start on a clean line
        std::filesystem::resize_file(log, start);
        break;
      }
      throw Error(ErrorKind::kDecode, log.string() + ":" + std::to_string(line_no) + ": bad event");
    }
    const std::string type = ev.at("event").get<std::string>();
    if (type == "created") {
      s.session_id = ev.at("session_id").get<std::string>();
      s.expert_id = ev.at("expert_id").get<std::string>();
      s.test_fold = ev.at("test_fold").get<int>();
      s.seed = ev.at("seed").get<std::uint64_t>();
      s.exemplars = ev.at("exemplars").get<ExemplarSet>();
      for (const auto& f : ev.at("item_order")) {
        auto it = by_filename_.find(f.get<std::string>());
        if (it == by_filename_.end()) {
          throw Error(ErrorKind::kValidation,
                      log.string() + ": item " + f.get<std::string>() + " is not in the study manifest");
        }
        s.item_order.push_back(it->second);
      }
    } else if (type == "answer") {
      s.answers[ev.at("index").get<std::size_t>()] = {ev.at("category").get<std::string>(),
                                                     ev.at("timestamp").get<std::string>()};
    } else if (type == "finalized") {
      s.state = SessionState::kComplete;
    }
  }
  if (s.session_id.empty()) {
    throw Error(ErrorKind::kDecode, log.string() + ": missing creation event");
  }
  sessions_[s.session_id] = entry;
}

void AnnotationStore::append_event(const std::string& session_id, const json& event) const {
  const auto path = sessions_dir_ / (session_id + ".jsonl");
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorKind::kIo, "cannot append to " + path.string());
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

AnnotationSession AnnotationStore::create_session(const std::string& expert_id, int test_fold,
                                                  const ExemplarSet& exemplars, std::uint64_t seed) {
  if (expert_id.empty()) throw Error(ErrorKind::kValidation, "expert_id must be non-empty");
  for (const auto& [category, clip] : exemplars.ordered()) {
    if (clip.fold == test_fold) {
      throw Error(ErrorKind::kValidation, "exemplar " + clip.filename + " is in test fold " +
                                              std::to_string(test_fold));
    }
  }
  validate_exemplars(exemplars, config_.classes);

  auto entry = std::make_shared<Entry>();
  AnnotationSession& s = entry->session;
  s.expert_id = expert_id;
  s.test_fold = test_fold;
  s.seed = seed;
  s.exemplars = exemplars;
  for (const auto& m : config_.manifest) {
    if (m.fold == test_fold) s.item_order.push_back(m);
  }
  if (s.item_order.empty()) {
    throw Error(ErrorKind::kInsufficientData, "no study items in fold " + std::to_string(test_fold));
  }
  Rng rng(salted_seed(seed, expert_id));
  rng.shuffle(s.item_order);

  json order = json::array();
  for (const auto& m : s.item_order) order.push_back(m.filename);

  std::unique_lock lock(mu_);
  do {
    s.session_id = random_token();
  } while (sessions_.count(s.session_id));
  append_event(s.session_id, {{"event", "created"},
                              {"session_id", s.session_id},
                              {"expert_id", expert_id},
                              {"test_fold", test_fold},
                              {"seed", seed},
                              {"exemplars", exemplars},
                              {"item_order", order},
                              {"timestamp", now_iso()}});
  for (const auto& [category, clip] : exemplars.ordered()) {
    by_filename_.emplace(clip.filename, clip);
    image_names_[opaque_image_name(config_.corpus_hash, clip.filename)] = clip.filename;
  }
  sessions_[s.session_id] = entry;
  return s;
}

std::shared_ptr<AnnotationStore::Entry> AnnotationStore::find(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  auto it = valid_token(session_id) ? sessions_.find(session_id) : sessions_.end();
  if (it == sessions_.end()) throw Error(ErrorKind::kNotFound, "unknown session");
  return it->second;
}

AnnotationSession AnnotationStore::get_session(const std::string& session_id) const {
  auto e = find(session_id);
  std::lock_guard lock(e->mu);
  return e->session;
}

std::vector<std::string> AnnotationStore::session_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

json AnnotationStore::image_ref(const ClipMeta& clip) const {
  return "/images/" + config_.corpus_hash + "/" + opaque_image_name(config_.corpus_hash, clip.filename);
}

namespace {

json progress_json(const AnnotationSession& s) {
  return {{"answered", s.answered()}, {"total", s.total()}};
}

}  // namespace

json AnnotationStore::describe(const std::string& session_id) const {
  auto e = find(session_id);
  std::lock_guard lock(e->mu);
  const auto& s = e->session;
  json answers = json::object();
  for (const auto& [index, a] : s.answers) answers[std::to_string(index)] = a.category;
  json grid = json::array();
  for (const auto& [category, clip] : s.exemplars.ordered()) {
    grid.push_back({{"category", category}, {"image", image_ref(clip)}});
  }
  std::size_t first_unanswered = s.total();
  for (std::size_t i = 0; i < s.total(); ++i) {
    if (!s.answers.count(i)) {
      first_unanswered = i;
      break;
    }
  }
  return {{"session_id", s.session_id},
          {"expert_id", s.expert_id},
          {"test_fold", s.test_fold},
          {"state", to_string(s.state)},
          {"progress", progress_json(s)},
          {"first_unanswered", first_unanswered},
          {"answers", answers},
          {"classes", config_.classes},
          {"exemplars", grid}};
}

json AnnotationStore::get_item(const std::string& session_id, std::size_t index) const {
  auto e = find(session_id);
  std::lock_guard lock(e->mu);
  const auto& s = e->session;
  if (index >= s.total()) {
    throw Error(ErrorKind::kRange, "item index " + std::to_string(index) + " out of range [0, " +
                                       std::to_string(s.total()) + ")");
  }
  json grid = json::array();
  for (const auto& [category, clip] : s.exemplars.ordered()) {
    grid.push_back({{"category", category}, {"image", image_ref(clip)}});
  }
  auto it = s.answers.find(index);
  return {{"session_id", s.session_id},
          {"index", index},
          {"image", image_ref(s.item_order[index])},
          {"exemplars", grid},
          {"classes", config_.classes},
          {"progress", progress_json(s)},
          {"answer", it == s.answers.end() ? json() : json(it->second.category)},
          {"state", to_string(s.state)},
          {"review", s.state == SessionState::kComplete}};
}

std::size_t AnnotationStore::submit_answer(const std::string& session_id, std::size_t index,
                                           const std::string& category) {
  auto e = find(session_id);
  std::lock_guard lock(e->mu);
  auto& s = e->session;
  if (s.state == SessionState::kComplete) {
    throw Error(ErrorKind::kState, "session is complete; answers can no longer change");
  }
  if (index >= s.total()) {
    throw Error(ErrorKind::kRange, "item index " + std::to_string(index) + " out of range");
  }
  if (std::find(config_.classes.begin(), config_.classes.end(), category) == config_.classes.end()) {
    throw Error(ErrorKind::kValidation, "'" + category + "' is not in the class list");
  }
  const std::string ts = now_iso();
  append_event(s.session_id,
               {{"event", "answer"}, {"index", index}, {"category", category}, {"timestamp", ts}});
  s.answers[index] = {category, ts};
  return s.answered();
}

FinalizeResult AnnotationStore::build_records(const AnnotationSession& s) const {
  FinalizeResult out;
  for (std::size_t i = 0; i < s.total(); ++i) {
    const auto& clip = s.item_order[i];
    PredictionRecord r;
    r.item = clip;
    r.truth = clip.category;
    r.predicted = s.answers.at(i).category;
    r.status = ResponseStatus::kOk;
    r.source = s.expert_id;
    out.records.push_back(std::move(r));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              return a.item.filename < b.item.filename;
            });
  out.result = evaluate(out.records, config_.classes);
  return out;
}

FinalizeResult AnnotationStore::finalize(const std::string& session_id) {
  auto e = find(session_id);
  std::lock_guard lock(e->mu);
  auto& s = e->session;
  if (s.state == SessionState::kOpen) {
    std::string missing;
    int n_missing = 0;
    for (std::size_t i = 0; i < s.total(); ++i) {
      if (!s.answers.count(i)) {
        if (n_missing++) missing += ",";
        missing += std::to_string(i);
      }
    }
    if (n_missing > 0) {
      throw Error(ErrorKind::kIncomplete,
                  std::to_string(n_missing) + " unanswered items: " + missing);
    }
    append_event(s.session_id, {{"event", "finalized"}, {"timestamp", now_iso()}});
    s.state = SessionState::kComplete;
  }
  return build_records(s);
}

std::optional<std::filesystem::path> AnnotationStore::image_path(const std::string& corpus_hash,
                                                                 const std::string& name) const {
  if (corpus_hash != config_.corpus_hash) return std::nullopt;
  std::shared_lock lock(mu_);
  auto it = image_names_.find(name);
  if (it == image_names_.end()) return std::nullopt;
  auto path = config_.image_dir / (stem_of(it->second) + ".png");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return path;
}

}  // namespace vsc
