#include "vsc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vsc/error.hpp"
#include "vsc/resample.hpp"
#include "vsc/rng.hpp"
#include "vsc/wav.hpp"

namespace vsc {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

int parse_int(const std::string& text, const char* column, std::size_t row) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::kRowParse, "manifest row " + std::to_string(row) + ": " +
                                          column + " '" + text + "' is not an integer");
  }
  return value;
}

bool parse_bool(std::string text, std::size_t row) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no" || text.empty()) return false;
  throw Error(ErrorKind::kRowParse, "manifest row " + std::to_string(row) +
                                        ": esc10 '" + text + "' is not a boolean");
}

}  // namespace

std::vector<ClipMeta> parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kManifestSchema, "manifest has no header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[trim(header[i])] = i;

  const char* required[] = {"filename", "fold", "target", "category", "esc10"};
  std::size_t col[5];
  for (int i = 0; i < 5; ++i) {
    auto it = index.find(required[i]);
    if (it == index.end()) {
      throw Error(ErrorKind::kManifestSchema,
                  std::string("manifest is missing column '") + required[i] + "'");
    }
    col[i] = it->second;
  }

  std::vector<ClipMeta> rows;
  std::set<std::string> seen;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < header.size()) {
      throw Error(ErrorKind::kRowParse, "manifest row " + std::to_string(row_number) +
                                            ": expected " + std::to_string(header.size()) +
                                            " fields, got " + std::to_string(fields.size()));
    }
    ClipMeta m;
    m.filename = trim(fields[col[0]]);
    m.fold = parse_int(trim(fields[col[1]]), "fold", row_number);
    m.target = parse_int(trim(fields[col[2]]), "target", row_number);
    m.category = trim(fields[col[3]]);
    m.esc10 = parse_bool(trim(fields[col[4]]), row_number);
    if (m.fold < 1 || m.fold > 5) {
      throw Error(ErrorKind::kRowParse, "manifest row " + std::to_string(row_number) +
                                            ": fold " + std::to_string(m.fold) +
                                            " outside 1..5");
    }
    if (m.category.empty()) {
      throw Error(ErrorKind::kRowParse,
                  "manifest row " + std::to_string(row_number) + ": empty category");
    }
    if (!seen.insert(m.filename).second) {
      throw Error(ErrorKind::kRowParse, "manifest row " + std::to_string(row_number) +
                                            ": duplicate filename " + m.filename);
    }
    rows.push_back(std::move(m));
  }
  return rows;
}

std::vector<ClipMeta> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

std::string format_manifest(const std::vector<ClipMeta>& rows) {
  std::string out = "filename,fold,target,category,esc10\n";
  for (const auto& r : rows) {
    out += r.filename + "," + std::to_string(r.fold) + "," + std::to_string(r.target) +
           "," + r.category + "," + (r.esc10 ? "True" : "False") + "\n";
  }
  return out;
}

std::vector<ClipMeta> esc10_view(const std::vector<ClipMeta>& rows) {
  std::vector<ClipMeta> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [](const ClipMeta& m) { return m.esc10; });
  return out;
}

AudioClip load_audio(const ClipMeta& meta, const std::filesystem::path& root,
                     int target_rate_hz, std::optional<double> fixed_seconds) {
  if (target_rate_hz <= 0) throw Error(ErrorKind::kConfig, "target rate must be positive");
  std::filesystem::path path = root / meta.filename;
  if (!std::filesystem::exists(path) && std::filesystem::exists(root / "audio" / meta.filename)) {
    path = root / "audio" / meta.filename;
  }
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kIo, "audio file not found: " + path.string());
  }
  WavData wav = read_wav(path);
  AudioClip clip;
  clip.source = meta;
  clip.sample_rate_hz = target_rate_hz;
  clip.samples = resample(downmix_to_mono(wav), wav.sample_rate_hz, target_rate_hz);
  if (fixed_seconds) {
    const auto n = static_cast<std::size_t>(std::llround(*fixed_seconds * target_rate_hz));
    clip.samples.resize(n, 0.0);
  }
  return clip;
}

std::vector<ClipMeta> esc50_subset(const std::vector<ClipMeta>& manifest,
                                   std::uint64_t seed) {
  constexpr std::size_t kCategories = 50;
  constexpr std::size_t kPerCategory = 2;

  std::map<std::string, std::vector<std::string>> fold1;
  for (const auto& m : manifest) {
    auto& files = fold1[m.category];
    if (m.fold == 1) files.push_back(m.filename);
  }
  if (fold1.size() != kCategories) {
    throw Error(ErrorKind::kInsufficientData,
                "ESC-50 subset needs 50 categories, manifest has " +
                    std::to_string(fold1.size()));
  }
  std::set<std::string> chosen;
  for (auto& [category, files] : fold1) {
    if (files.size() < kPerCategory) {
      throw Error(ErrorKind::kInsufficientData,
                  "category '" + category + "' has fewer than 2 fold-1 clips");
    }
    std::sort(files.begin(), files.end());
    Rng rng(salted_seed(seed, category));
    rng.shuffle(files);
    chosen.insert(files.begin(), files.begin() + kPerCategory);
  }
  std::vector<ClipMeta> out;
  for (const auto& m : manifest) {
    if (chosen.count(m.filename)) out.push_back(m);
  }
  return out;
}

std::vector<std::string> class_list(const std::vector<ClipMeta>& rows) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& m : rows) {
    if (seen.insert(m.category).second) out.push_back(m.category);
  }
  return out;
}

std::vector<ClipMeta> fold_items(const std::vector<ClipMeta>& rows, int fold) {
  std::vector<ClipMeta> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [fold](const ClipMeta& m) { return m.fold == fold; });
  return out;
}

std::vector<ClipMeta> pool_excluding(const std::vector<ClipMeta>& rows, int fold) {
  std::vector<ClipMeta> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [fold](const ClipMeta& m) { return m.fold != fold; });
  return out;
}

}  // namespace vsc
