#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vsc/render.hpp"

namespace vsc {

inline constexpr const char* kPromptTemplateVersion = "vsc-prompts-v1";

// Template text, reproduced verbatim.
extern const char* const kSystemPrompt;
extern const char* const kZeroShotIntro;
extern const char* const kZeroShotOutro;
extern const char* const kFewShotIntro;
extern const char* const kFewShotOutro;

struct PromptPart {
  enum class Kind { kText, kImage };
  Kind kind = Kind::kText;
  std::string text;
  std::string media_type;  // images only
  std::string data_base64;  // images only

  static PromptPart Text(std::string t);
  static PromptPart Image(const std::vector<std::uint8_t>& png);

  friend bool operator==(const PromptPart&, const PromptPart&) = default;
};

struct Prompt {
  std::string system_text;
  std::vector<PromptPart> parts;
  std::vector<std::string> class_list;
  int shot_count = 0;
  /// Image resolution hint for providers that accept one ("auto" or "low").
  std::string image_detail = "auto";

  std::size_t image_count() const;
  std::size_t text_count() const;

  friend bool operator==(const Prompt&, const Prompt&) = default;
};

void to_json(nlohmann::json& j, const Prompt& p);
void from_json(const nlohmann::json& j, Prompt& p);

/// Canonical serialization (sorted keys, no whitespace); the request hash is
/// computed over this.
std::string serialize_prompt(const Prompt& p);
Prompt deserialize_prompt(const std::string& text);

/// "['dog', 'chainsaw', ...]"
std::string format_class_list(const std::vector<std::string>& classes);

Prompt build_zero_shot_prompt(const RenderedSpectrogram& test_image,
                              const std::vector<std::string>& classes);

/// One "Spectrogram for {category}:" text and image per exemplar, in the given
/// order, then the closing instruction and the test image. The class list is
/// the exemplar categories in first-appearance order unless given.
Prompt build_few_shot_prompt(
    const std::vector<std::pair<std::string, RenderedSpectrogram>>& exemplar_images,
    const RenderedSpectrogram& test_image, std::vector<std::string> classes = {});

}  // namespace vsc
