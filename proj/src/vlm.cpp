#include "vsc/vlm.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <ctime>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "vsc/error.hpp"
#include "vsc/hash.hpp"

namespace vsc {

const char* to_string(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::kOk: return "ok";
    case ResponseStatus::kUnparseable: return "unparseable";
    case ResponseStatus::kRefused: return "refused";
    case ResponseStatus::kTransportError: return "transport_error";
  }
  return "?";
}

ResponseStatus parse_response_status(const std::string& s) {
  if (s == "ok") return ResponseStatus::kOk;
  if (s == "unparseable") return ResponseStatus::kUnparseable;
  if (s == "refused") return ResponseStatus::kRefused;
  if (s == "transport_error") return ResponseStatus::kTransportError;
  throw Error(ErrorKind::kDecode, "unknown response status '" + s + "'");
}

void to_json(nlohmann::json& j, const ModelResponse& r) {
  j = {{"raw_text", r.raw_text},
       {"parsed_label", r.parsed_label ? nlohmann::json(*r.parsed_label) : nlohmann::json()},
       {"status", to_string(r.status)},
       {"provider", r.provider},
       {"latency_ms", r.latency_ms},
       {"request_hash", r.request_hash}};
}

void from_json(const nlohmann::json& j, ModelResponse& r) {
  r.raw_text = j.at("raw_text").get<std::string>();
  const auto& label = j.at("parsed_label");
  r.parsed_label = label.is_null() ? std::nullopt : std::optional(label.get<std::string>());
  r.status = parse_response_status(j.at("status").get<std::string>());
  r.provider = j.value("provider", "");
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.request_hash = j.value("request_hash", "");
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

bool is_edge_punct(unsigned char c) {
  return std::isspace(c) || (std::ispunct(c) && c != '_');
}

std::string normalize(const std::string& raw) {
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && is_edge_punct(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && is_edge_punct(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  bool pending_space = false;
  for (std::size_t i = b; i < e; ++i) {
    const unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back('_');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ParsedLabel parse_label(const std::string& raw, const std::vector<std::string>& classes,
                        const ParseOptions& options) {
  const std::string norm = normalize(raw);
  for (const auto& c : classes) {
    if (norm == normalize(c)) return {c, ResponseStatus::kOk};
  }
  const std::string text = lower(replace_all(raw, "\xE2\x80\x99", "'"));
  for (const auto& phrase : options.refusal_phrases) {
    if (!phrase.empty() && text.find(lower(phrase)) != std::string::npos) {
      return {std::nullopt, ResponseStatus::kRefused};
    }
  }
  if (options.salvage) {
    const auto hay = words(raw);
    std::optional<std::string> found;
    int hits = 0;
    for (const auto& c : classes) {
      if (contains_sequence(hay, words(c))) {
        ++hits;
        found = c;
      }
    }
    if (hits == 1) return {found, ResponseStatus::kOk};
  }
  return {std::nullopt, ResponseStatus::kUnparseable};
}

std::string request_hash(const std::string& provider, const std::string& model,
                         const Prompt& prompt) {
  return sha256_hex(provider + "\n" + model + "\n" + serialize_prompt(prompt));
}

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  const double ms = static_cast<double>(initial_delay.count()) * std::pow(multiplier, attempt);
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(std::min(ms, static_cast<double>(max_delay.count()))));
}

ModelResponse query(ProviderClient& provider, const Prompt& prompt, const QueryOptions& options) {
  const std::string hash = request_hash(provider.name(), provider.model(), prompt);
  if (options.cache) {
    if (auto hit = options.cache->lookup(hash)) return *hit;
  }
  auto now = [&] {
    return options.clock ? options.clock() : std::chrono::steady_clock::now();
  };
  const auto start = now();

  ProviderReply reply;
  const int attempts = std::max(1, options.retry.max_attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    reply = provider.send(prompt);
    if (reply.outcome != ProviderReply::Outcome::kRetryable) break;
    if (attempt + 1 == attempts) break;
    auto delay = options.retry.backoff(attempt);
    if (reply.retry_after) delay = std::min(*reply.retry_after, options.retry.max_delay);
    if (options.sleep) {
      options.sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }

  ModelResponse r;
  r.provider = provider.name();
  r.request_hash = hash;
  r.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now() - start).count();
  if (reply.outcome == ProviderReply::Outcome::kOk) {
    r.raw_text = reply.text;
    if (reply.refused) {
      r.status = ResponseStatus::kRefused;
    } else {
      auto parsed = parse_label(reply.text, prompt.class_list, options.parse);
      r.parsed_label = parsed.label;
      r.status = parsed.status;
    }
    if (options.cache) options.cache->append({hash, r, utc_timestamp()});
  } else {
    r.status = ResponseStatus::kTransportError;
    r.raw_text = reply.error;
  }
  return r;
}

std::vector<ModelResponse> query_all(ProviderClient& provider, const std::vector<Prompt>& prompts,
                                     const QueryOptions& options, int max_in_flight) {
  std::vector<ModelResponse> out(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      out[i] = query(provider, prompts[i], options);
    }
  };
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_in_flight)), prompts.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace vsc
