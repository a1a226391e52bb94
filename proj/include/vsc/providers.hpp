#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vsc/vlm.hpp"

namespace vsc {

enum class WireDialect { kOpenAiChat, kAnthropicMessages, kGeminiGenerateContent };

struct HttpProviderOptions {
  std::string provider;  // "openai", "anthropic", "gemini"
  std::string model;
  std::string api_key;
  std::string base_url;  // scheme://host[:port]
  double temperature = 0.0;
  int max_tokens = 64;
  int timeout_seconds = 120;
  bool debug_wire = false;
};

/// Provider-native request body for a prompt.
nlohmann::json build_request_body(WireDialect dialect, const Prompt& prompt,
                                  const HttpProviderOptions& options);
/// Extracts the reply text (and refusal flag) from a provider response body.
ProviderReply parse_response_body(WireDialect dialect, const std::string& body);

WireDialect dialect_for(const std::string& provider);
/// Environment variable holding the credential for a provider.
const char* credential_env_var(const std::string& provider);
std::string default_base_url(const std::string& provider);

class HttpProvider : public ProviderClient {
 public:
  HttpProvider(WireDialect dialect, HttpProviderOptions options);

  std::string name() const override { return options_.provider; }
  std::string model() const override { return options_.model; }
  ProviderReply send(const Prompt& prompt) override;
  std::size_t network_calls() const override { return calls_.load(); }

  std::string request_path() const;

 private:
  WireDialect dialect_;
  HttpProviderOptions options_;
  std::atomic<std::size_t> calls_{0};
};

/// Offline provider answering few-shot prompts with the category of the
/// exemplar whose mel feature is nearest (Euclidean) to the test image's.
/// Images are identified by the SHA-256 of their PNG bytes. Zero-shot prompts
/// get a class chosen by hashing the test image; unknown images get a refusal.
class MockNearestExemplarProvider : public ProviderClient {
 public:
  static constexpr const char* kName = "mock";
  static constexpr const char* kModel = "nearest-mel";

  void register_image(const std::vector<std::uint8_t>& png, std::vector<double> feature);
  std::size_t registered() const { return features_.size(); }

  std::string name() const override { return kName; }
  std::string model() const override { return kModel; }
  ProviderReply send(const Prompt& prompt) override;
  std::size_t network_calls() const override { return calls_.load(); }

 private:
  std::map<std::string, std::vector<double>> features_;
  std::atomic<std::size_t> calls_{0};
};

/// Fails every send without retry; replays a run purely from cache.
class OfflineProvider : public ProviderClient {
 public:
  OfflineProvider(std::string name, std::string model)
      : name_(std::move(name)), model_(std::move(model)) {}
  std::string name() const override { return name_; }
  std::string model() const override { return model_; }
  ProviderReply send(const Prompt&) override;
  std::size_t network_calls() const override { return calls_.load(); }

 private:
  std::string name_;
  std::string model_;
  std::atomic<std::size_t> calls_{0};
};

/// Builds an HTTP provider, reading the credential from the environment.
/// Throws kConfig if the credential is missing or the provider is unknown.
std::unique_ptr<HttpProvider> make_http_provider(const std::string& provider,
                                                 const std::string& model,
                                                 bool debug_wire = false);

}  // namespace vsc
