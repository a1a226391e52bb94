#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vsc/prompt.hpp"

namespace vsc {

enum class ResponseStatus { kOk, kUnparseable, kRefused, kTransportError };
const char* to_string(ResponseStatus s);
ResponseStatus parse_response_status(const std::string& s);

struct ModelResponse {
  std::string raw_text;
  std::optional<std::string> parsed_label;
  ResponseStatus status = ResponseStatus::kUnparseable;
  std::string provider;
  std::int64_t latency_ms = 0;
  std::string request_hash;

  friend bool operator==(const ModelResponse&, const ModelResponse&) = default;
};

void to_json(nlohmann::json& j, const ModelResponse& r);
void from_json(const nlohmann::json& j, ModelResponse& r);

struct ParseOptions {
  bool salvage = true;
  std::vector<std::string> refusal_phrases = {
      "i cannot", "i can't", "i can not", "unable to", "i'm sorry", "i am sorry",
      "i apologize", "cannot determine", "not possible to determine"};
};

struct ParsedLabel {
  std::optional<std::string> label;
  ResponseStatus status = ResponseStatus::kUnparseable;
};

/// Trim, strip trailing punctuation, lowercase, spaces to underscores, then
/// exact match; otherwise refusal detection; otherwise (when salvage is on)
/// accept the single class whose name occurs as a whole word sequence.
ParsedLabel parse_label(const std::string& raw, const std::vector<std::string>& classes,
                        const ParseOptions& options = {});

/// sha256 over provider, model and the canonical prompt serialization.
std::string request_hash(const std::string& provider, const std::string& model,
                         const Prompt& prompt);

struct CacheEntry {
  std::string request_hash;
  ModelResponse response;
  std::string timestamp;  // ISO 8601 UTC
};

/// Append-only JSONL store at <root>/<provider>/<model>.jsonl. Safe for
/// concurrent use; writes are serialized.
class ResponseCache {
 public:
  ResponseCache(std::filesystem::path root, std::string provider, std::string model);

  std::optional<ModelResponse> lookup(const std::string& hash) const;
  void append(const CacheEntry& entry);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, ModelResponse> entries_;
};

/// Result of one transport attempt.
struct ProviderReply {
  enum class Outcome { kOk, kRetryable, kFatal };
  Outcome outcome = Outcome::kFatal;
  std::string text;
  bool refused = false;  // the provider itself declined (safety filter etc.)
  int http_status = 0;
  std::string error;
  std::optional<std::chrono::milliseconds> retry_after;
};

class ProviderClient {
 public:
  virtual ~ProviderClient() = default;
  virtual std::string name() const = 0;
  virtual std::string model() const = 0;
  /// One attempt; must be safe to call from several threads.
  virtual ProviderReply send(const Prompt& prompt) = 0;
  /// Number of times send() reached the transport.
  virtual std::size_t network_calls() const { return 0; }
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_delay{1000};
  std::chrono::milliseconds max_delay{30000};
  double multiplier = 2.0;

  /// Delay before attempt `attempt + 1` (attempt counts from 0).
  std::chrono::milliseconds backoff(int attempt) const;
};

struct QueryOptions {
  ResponseCache* cache = nullptr;
  RetryPolicy retry;
  ParseOptions parse;
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
  std::function<std::chrono::steady_clock::time_point()> clock;  // defaults to steady_clock
};

/// Cache lookup, then up to retry.max_attempts sends with exponential backoff
/// on retryable failures. Never throws for transport problems: exhausted or
/// fatal attempts yield status kTransportError, which is not cached.
ModelResponse query(ProviderClient& provider, const Prompt& prompt,
                    const QueryOptions& options = {});

/// Runs query() over all prompts with at most max_in_flight concurrent
/// requests; results are in prompt order.
std::vector<ModelResponse> query_all(ProviderClient& provider, const std::vector<Prompt>& prompts,
                                     const QueryOptions& options, int max_in_flight);

}  // namespace vsc
