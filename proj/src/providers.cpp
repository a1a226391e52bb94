#include "vsc/providers.hpp"

#include <cctype>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vsc/error.hpp"
#include "vsc/hash.hpp"

namespace vsc {

using nlohmann::json;

WireDialect dialect_for(const std::string& provider) {
  if (provider == "openai") return WireDialect::kOpenAiChat;
  if (provider == "anthropic") return WireDialect::kAnthropicMessages;
  if (provider == "gemini") return WireDialect::kGeminiGenerateContent;
  throw Error(ErrorKind::kConfig, "unknown provider '" + provider + "'");
}

const char* credential_env_var(const std::string& provider) {
  switch (dialect_for(provider)) {
    case WireDialect::kOpenAiChat: return "OPENAI_API_KEY";
    case WireDialect::kAnthropicMessages: return "ANTHROPIC_API_KEY";
    case WireDialect::kGeminiGenerateContent: return "GEMINI_API_KEY";
  }
  return "";
}

std::string default_base_url(const std::string& provider) {
  switch (dialect_for(provider)) {
    case WireDialect::kOpenAiChat: return "https://api.openai.com";
    case WireDialect::kAnthropicMessages: return "https://api.anthropic.com";
    case WireDialect::kGeminiGenerateContent: return "https://generativelanguage.googleapis.com";
  }
  return "";
}

json build_request_body(WireDialect dialect, const Prompt& prompt,
                        const HttpProviderOptions& options) {
  json parts = json::array();
  switch (dialect) {
    case WireDialect::kOpenAiChat: {
      for (const auto& p : prompt.parts) {
        if (p.kind == PromptPart::Kind::kText) {
          parts.push_back({{"type", "text"}, {"text", p.text}});
        } else {
          parts.push_back(
              {{"type", "image_url"},
               {"image_url",
                {{"url", "data:" + p.media_type + ";base64," + p.data_base64},
                 {"detail", prompt.image_detail}}}});
        }
      }
      json messages = json::array();
      if (!prompt.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", prompt.system_text}});
      }
      messages.push_back({{"role", "user"}, {"content", parts}});
      return {{"model", options.model},
              {"messages", messages},
              {"temperature", options.temperature},
              {"max_tokens", options.max_tokens}};
    }
    case WireDialect::kAnthropicMessages: {
      for (const auto& p : prompt.parts) {
        if (p.kind == PromptPart::Kind::kText) {
          parts.push_back({{"type", "text"}, {"text", p.text}});
        } else {
          parts.push_back({{"type", "image"},
                           {"source",
                            {{"type", "base64"},
                             {"media_type", p.media_type},
                             {"data", p.data_base64}}}});
        }
      }
      json body = {{"model", options.model},
                   {"max_tokens", options.max_tokens},
                   {"temperature", options.temperature},
                   {"messages", json::array({{{"role", "user"}, {"content", parts}}})}};
      if (!prompt.system_text.empty()) body["system"] = prompt.system_text;
      return body;
    }
    case WireDialect::kGeminiGenerateContent: {
      for (const auto& p : prompt.parts) {
        if (p.kind == PromptPart::Kind::kText) {
          parts.push_back({{"text", p.text}});
        } else {
          parts.push_back({{"inlineData", {{"mimeType", p.media_type}, {"data", p.data_base64}}}});
        }
      }
      json body = {{"contents", json::array({{{"role", "user"}, {"parts", parts}}})},
                   {"generationConfig",
                    {{"temperature", options.temperature},
                     {"maxOutputTokens", options.max_tokens}}}};
      if (!prompt.system_text.empty()) {
        body["systemInstruction"] = {{"parts", json::array({{{"text", prompt.system_text}}})}};
      }
      return body;
    }
  }
  return {};
}

ProviderReply parse_response_body(WireDialect dialect, const std::string& body) {
  ProviderReply r;
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    r.outcome = ProviderReply::Outcome::kFatal;
    r.error = std::string("malformed response body: ") + e.what();
    return r;
  }
  r.outcome = ProviderReply::Outcome::kOk;
  try {
    switch (dialect) {
      case WireDialect::kOpenAiChat: {
        const auto& choice = j.at("choices").at(0);
        const auto& msg = choice.at("message");
        if (msg.contains("content") && msg["content"].is_string()) {
          r.text = msg["content"].get<std::string>();
        }
        if (msg.contains("refusal") && msg["refusal"].is_string()) {
          r.refused = true;
          if (r.text.empty()) r.text = msg["refusal"].get<std::string>();
        }
        if (choice.value("finish_reason", json()).is_string() &&
            choice["finish_reason"] == "content_filter") {
          r.refused = true;
        }
        break;
      }
      case WireDialect::kAnthropicMessages: {
        for (const auto& block : j.at("content")) {
          if (block.value("type", "") == "text") r.text += block.value("text", "");
        }
        if (j.value("stop_reason", json()).is_string() && j["stop_reason"] == "refusal") {
          r.refused = true;
        }
        break;
      }
      case WireDialect::kGeminiGenerateContent: {
        if (j.contains("promptFeedback") && j["promptFeedback"].contains("blockReason")) {
          r.refused = true;
          break;
        }
        const auto& cand = j.at("candidates").at(0);
        if (cand.contains("content") && cand["content"].contains("parts")) {
          for (const auto& part : cand["content"]["parts"]) {
            if (part.contains("text") && !part.value("thought", false)) {
              r.text += part["text"].get<std::string>();
            }
          }
        }
        const std::string finish = cand.value("finishReason", "");
        if (finish == "SAFETY" || finish == "PROHIBITED_CONTENT" || finish == "BLOCKLIST") {
          r.refused = true;
        }
        break;
      }
    }
  } catch (const json::exception& e) {
    r.outcome = ProviderReply::Outcome::kFatal;
    r.error = std::string("unexpected response shape: ") + e.what();
  }
  return r;
}

HttpProvider::HttpProvider(WireDialect dialect, HttpProviderOptions options)
    : dialect_(dialect), options_(std::move(options)) {
  if (options_.base_url.empty()) options_.base_url = default_base_url(options_.provider);
}

std::string HttpProvider::request_path() const {
  switch (dialect_) {
    case WireDialect::kOpenAiChat: return "/v1/chat/completions";
    case WireDialect::kAnthropicMessages: return "/v1/messages";
    case WireDialect::kGeminiGenerateContent:
      return "/v1beta/models/" + options_.model + ":generateContent";
  }
  return "/";
}

namespace {

bool is_retryable_status(int status) {
  return status == 408 || status == 409 || status == 429 || status == 529 ||
         (status >= 500 && status <= 599);
}

std::mutex& wire_log_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

ProviderReply HttpProvider::send(const Prompt& prompt) {
  ++calls_;
  httplib::Headers headers;
  switch (dialect_) {
    case WireDialect::kOpenAiChat:
      headers.emplace("Authorization", "Bearer " + options_.api_key);
      break;
    case WireDialect::kAnthropicMessages:
      headers.emplace("x-api-key", options_.api_key);
      headers.emplace("anthropic-version", "2023-06-01");
      break;
    case WireDialect::kGeminiGenerateContent:
      headers.emplace("x-goog-api-key", options_.api_key);
      break;
  }
  const std::string body = build_request_body(dialect_, prompt, options_).dump();
  const std::string path = request_path();

  if (options_.debug_wire) {
    std::lock_guard lock(wire_log_mutex());
    std::cerr << "[wire] POST " << options_.base_url << path << '\n';
    for (const auto& [k, v] : headers) {
      const bool secret = k == "Authorization" || k == "x-api-key" || k == "x-goog-api-key";
      std::cerr << "[wire] " << k << ": " << (secret ? "<redacted>" : v) << '\n';
    }
    std::cerr << "[wire] " << body << '\n';
  }

  httplib::Client client(options_.base_url);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(std::chrono::seconds(options_.timeout_seconds));
  client.set_write_timeout(std::chrono::seconds(options_.timeout_seconds));
  auto res = client.Post(path, headers, body, "application/json");

  ProviderReply reply;
  if (!res) {
    reply.outcome = ProviderReply::Outcome::kRetryable;
    reply.error = "transport: " + httplib::to_string(res.error());
    return reply;
  }
  reply.http_status = res->status;
  if (options_.debug_wire) {
    std::lock_guard lock(wire_log_mutex());
    std::cerr << "[wire] <- " << res->status << ' ' << res->body << '\n';
  }
  if (res->status == 200) {
    reply = parse_response_body(dialect_, res->body);
    reply.http_status = 200;
    return reply;
  }
  reply.outcome = is_retryable_status(res->status) ? ProviderReply::Outcome::kRetryable
                                                   : ProviderReply::Outcome::kFatal;
  reply.error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
  if (res->has_header("Retry-After")) {
    try {
      const double secs = std::stod(res->get_header_value("Retry-After"));
      if (secs >= 0) reply.retry_after = std::chrono::milliseconds(static_cast<std::int64_t>(secs * 1000));
    } catch (const std::exception&) {
    }
  }
  return reply;
}

namespace {

std::string image_key(const std::string& data_base64) { return sha256_hex(data_base64); }

}  // namespace

void MockNearestExemplarProvider::register_image(const std::vector<std::uint8_t>& png,
                                                 std::vector<double> feature) {
  features_[image_key(base64_encode(png))] = std::move(feature);
}

ProviderReply MockNearestExemplarProvider::send(const Prompt& prompt) {
  ++calls_;
  static const std::string kRefusal = "I cannot determine the class from this image.";
  static const std::string kMarker = "Spectrogram for ";

  ProviderReply reply;
  reply.outcome = ProviderReply::Outcome::kOk;
  reply.http_status = 200;

  std::vector<std::pair<std::string, const std::vector<double>*>> exemplars;
  const std::vector<double>* test = nullptr;
  std::string test_key;
  std::string pending;
  for (const auto& part : prompt.parts) {
    if (part.kind == PromptPart::Kind::kText) {
      const auto pos = part.text.rfind(kMarker);
      pending.clear();
      if (pos != std::string::npos) {
        std::string label = part.text.substr(pos + kMarker.size());
        while (!label.empty() && (label.back() == ':' || std::isspace(static_cast<unsigned char>(label.back())))) {
          label.pop_back();
        }
        pending = label;
      }
      continue;
    }
    const std::string key = image_key(part.data_base64);
    auto it = features_.find(key);
    const std::vector<double>* feature = it == features_.end() ? nullptr : &it->second;
    if (!pending.empty()) {
      if (feature) exemplars.emplace_back(pending, feature);
    } else {
      test_key = key;
      test = feature;
    }
    pending.clear();
  }

  if (prompt.shot_count == 0 && exemplars.empty()) {
    if (test_key.empty() || prompt.class_list.empty()) {
      reply.text = kRefusal;
      return reply;
    }
    const auto idx = std::stoull(test_key.substr(0, 12), nullptr, 16) % prompt.class_list.size();
    reply.text = prompt.class_list[idx];
    return reply;
  }
  if (!test || exemplars.empty()) {
    reply.text = kRefusal;
    return reply;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [label, feature] : exemplars) {
    if (feature->size() != test->size()) continue;
    double d = 0.0;
    for (std::size_t i = 0; i < feature->size(); ++i) {
      const double diff = (*feature)[i] - (*test)[i];
      d += diff * diff;
    }
    if (d < best) {
      best = d;
      reply.text = label;
    }
  }
  if (reply.text.empty()) reply.text = kRefusal;
  return reply;
}

ProviderReply OfflineProvider::send(const Prompt&) {
  ++calls_;
  ProviderReply r;
  r.outcome = ProviderReply::Outcome::kFatal;
  r.error = "offline: response not in cache";
  return r;
}

std::unique_ptr<HttpProvider> make_http_provider(const std::string& provider,
                                                 const std::string& model, bool debug_wire) {
  const WireDialect dialect = dialect_for(provider);
  HttpProviderOptions opts;
  opts.provider = provider;
  opts.model = model;
  opts.debug_wire = debug_wire;
  const char* key = std::getenv(credential_env_var(provider));
  if ((!key || !*key) && dialect == WireDialect::kGeminiGenerateContent) {
    key = std::getenv("GOOGLE_API_KEY");
  }
  if (!key || !*key) {
    throw Error(ErrorKind::kConfig, std::string("missing credential: set ") +
                                        credential_env_var(provider) + " for provider " + provider);
  }
  opts.api_key = key;
  std::string env_name = "VSC_" + provider + "_BASE_URL";
  for (char& c : env_name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (const char* base = std::getenv(env_name.c_str()); base && *base) opts.base_url = base;
  return std::make_unique<HttpProvider>(dialect, std::move(opts));
}

}  // namespace vsc
