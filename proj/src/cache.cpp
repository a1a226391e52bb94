#include <fstream>

#include <nlohmann/json.hpp>

#include "vsc/error.hpp"
#include "vsc/vlm.hpp"

namespace vsc {
namespace {

std::string safe_component(std::string s) {
  for (char& c : s) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return s;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path root, std::string provider, std::string model)
    : path_(root / safe_component(provider) / (safe_component(model) + ".jsonl")) {
  std::ifstream in(path_);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries_[j.at("request_hash").get<std::string>()] = j.at("response").get<ModelResponse>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kDecode, path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<ModelResponse> ResponseCache::lookup(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::append(const CacheEntry& entry) {
  const nlohmann::json j = {{"request_hash", entry.request_hash},
                            {"response", entry.response},
                            {"timestamp", entry.timestamp}};
  std::lock_guard lock(mu_);
  std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorKind::kIo, "cannot append to cache " + path_.string());
  out << j.dump() << '\n';
  out.flush();
  entries_[entry.request_hash] = entry.response;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

}  // namespace vsc
