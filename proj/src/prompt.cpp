#include "vsc/prompt.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "vsc/error.hpp"
#include "vsc/hash.hpp"

namespace vsc {

const char* const kSystemPrompt =
    "You are a helpful assistant with expertise in recognizing patterns and identifying "
    "classes based on visual representations of audio data.";

const char* const kZeroShotIntro =
    "Your task is to analyze a spectrogram, which is a visual representation of the frequency "
    "spectrum of sound over time, and determine the most likely sound class from a given list "
    "of possibilities. Analyze the spectrogram image, considering factors such as frequency "
    "patterns, intensity, and time variations. Focus solely on the patterns presented in the "
    "spectrogram. Do not let any assumptions about common sounds or environmental settings "
    "influence your decision. Here are the classes: ";

const char* const kZeroShotOutro =
    ". Your response must always contain the exact name of the class only. For example, if you "
    "believe the spectrogram matches best with rain, your response would be rain. Here is the "
    "spectrogram:";

const char* const kFewShotIntro =
    "Your task is to analyze spectrograms, which are visual representations of the frequency "
    "spectrum of sound over time, and determine the most likely sound class for a given "
    "spectrogram.\nHere are examples of spectrograms for different sound classes:";

const char* const kFewShotOutro =
    "\nNow, given a new spectrogram, analyze it considering factors such as frequency patterns, "
    "intensity, and time variations. Focus solely on the patterns presented in the spectrogram. "
    "Do not let any assumptions about common sounds or environmental settings influence your "
    "decision.\nYour task is to determine which of the example classes the new spectrogram most "
    "closely resembles. Your response must contain only the exact name of the class.\nHere is "
    "the new spectrogram to classify:";

PromptPart PromptPart::Text(std::string t) {
  PromptPart p;
  p.kind = Kind::kText;
  p.text = std::move(t);
  return p;
}

PromptPart PromptPart::Image(const std::vector<std::uint8_t>& png) {
  PromptPart p;
  p.kind = Kind::kImage;
  p.media_type = "image/png";
  p.data_base64 = base64_encode(png);
  return p;
}

std::size_t Prompt::image_count() const {
  return static_cast<std::size_t>(std::count_if(parts.begin(), parts.end(), [](const PromptPart& p) {
    return p.kind == PromptPart::Kind::kImage;
  }));
}

std::size_t Prompt::text_count() const { return parts.size() - image_count(); }

void to_json(nlohmann::json& j, const Prompt& p) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& part : p.parts) {
    if (part.kind == PromptPart::Kind::kText) {
      parts.push_back({{"type", "text"}, {"text", part.text}});
    } else {
      parts.push_back({{"type", "image"}, {"media_type", part.media_type}, {"data", part.data_base64}});
    }
  }
  j = {{"system", p.system_text},
       {"parts", parts},
       {"classes", p.class_list},
       {"shot_count", p.shot_count},
       {"image_detail", p.image_detail}};
}

void from_json(const nlohmann::json& j, Prompt& p) {
  p.system_text = j.at("system").get<std::string>();
  p.class_list = j.at("classes").get<std::vector<std::string>>();
  p.shot_count = j.at("shot_count").get<int>();
  p.image_detail = j.value("image_detail", "auto");
  p.parts.clear();
  for (const auto& part : j.at("parts")) {
    const auto type = part.at("type").get<std::string>();
    PromptPart out;
    if (type == "text") {
      out.kind = PromptPart::Kind::kText;
      out.text = part.at("text").get<std::string>();
    } else if (type == "image") {
      out.kind = PromptPart::Kind::kImage;
      out.media_type = part.at("media_type").get<std::string>();
      out.data_base64 = part.at("data").get<std::string>();
    } else {
      throw Error(ErrorKind::kDecode, "unknown prompt part type '" + type + "'");
    }
    p.parts.push_back(std::move(out));
  }
}

std::string serialize_prompt(const Prompt& p) { return nlohmann::json(p).dump(); }

Prompt deserialize_prompt(const std::string& text) {
  return nlohmann::json::parse(text).get<Prompt>();
}

std::string format_class_list(const std::vector<std::string>& classes) {
  std::string out = "[";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i) out += ", ";
    out += "'" + classes[i] + "'";
  }
  return out + "]";
}

Prompt build_zero_shot_prompt(const RenderedSpectrogram& test_image,
                              const std::vector<std::string>& classes) {
  Prompt p;
  p.system_text = kSystemPrompt;
  p.class_list = classes;
  p.shot_count = 0;
  p.parts.push_back(PromptPart::Text(std::string(kZeroShotIntro) + format_class_list(classes) +
                                     kZeroShotOutro));
  p.parts.push_back(PromptPart::Image(test_image.image_bytes));
  return p;
}

Prompt build_few_shot_prompt(
    const std::vector<std::pair<std::string, RenderedSpectrogram>>& exemplar_images,
    const RenderedSpectrogram& test_image, std::vector<std::string> classes) {
  if (exemplar_images.empty()) {
    throw Error(ErrorKind::kConfig, "few-shot prompt needs at least one exemplar");
  }
  if (classes.empty()) {
    for (const auto& [category, image] : exemplar_images) {
      if (std::find(classes.begin(), classes.end(), category) == classes.end()) {
        classes.push_back(category);
      }
    }
  } else {
    for (const auto& [category, image] : exemplar_images) {
      if (std::find(classes.begin(), classes.end(), category) == classes.end()) {
        throw Error(ErrorKind::kConfig, "exemplar category '" + category + "' is not a class");
      }
    }
  }
  Prompt p;
  p.system_text = kSystemPrompt;
  p.class_list = std::move(classes);
  p.shot_count = static_cast<int>(exemplar_images.size());
  p.parts.push_back(PromptPart::Text(kFewShotIntro));
  for (const auto& [category, image] : exemplar_images) {
    p.parts.push_back(PromptPart::Text("Spectrogram for " + category + ":"));
    p.parts.push_back(PromptPart::Image(image.image_bytes));
  }
  p.parts.push_back(PromptPart::Text(kFewShotOutro));
  p.parts.push_back(PromptPart::Image(test_image.image_bytes));
  return p;
}

}  // namespace vsc
