#include "vsc/exemplars.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vsc/dsp.hpp"
#include "vsc/error.hpp"
#include "vsc/kmeans.hpp"
#include "vsc/rng.hpp"

namespace vsc {

const char* to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::kRandom: return "random";
    case SelectionMethod::kKMeans: return "kmeans";
    case SelectionMethod::kHandpicked: return "handpicked";
  }
  return "?";
}

const char* to_string(FeatureKind f) {
  switch (f) {
    case FeatureKind::kMel: return "mel";
    case FeatureKind::kAmp: return "amp";
    case FeatureKind::kNone: return "none";
  }
  return "?";
}

SelectionMethod parse_selection_method(const std::string& s) {
  if (s == "random") return SelectionMethod::kRandom;
  if (s == "kmeans") return SelectionMethod::kKMeans;
  if (s == "handpicked") return SelectionMethod::kHandpicked;
  throw Error(ErrorKind::kConfig, "unknown selection method '" + s + "'");
}

FeatureKind parse_feature_kind(const std::string& s) {
  if (s == "mel") return FeatureKind::kMel;
  if (s == "amp") return FeatureKind::kAmp;
  if (s == "none") return FeatureKind::kNone;
  throw Error(ErrorKind::kConfig, "unknown feature '" + s + "'");
}

std::size_t ExemplarSet::size() const {
  std::size_t n = 0;
  for (const auto& c : per_class) n += c.clips.size();
  return n;
}

std::vector<std::pair<std::string, ClipMeta>> ExemplarSet::ordered() const {
  std::vector<std::pair<std::string, ClipMeta>> out;
  for (const auto& c : per_class) {
    for (const auto& clip : c.clips) out.emplace_back(c.category, clip);
  }
  return out;
}

void to_json(nlohmann::json& j, const ExemplarSet& set) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : set.per_class) {
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& m : c.clips) {
      clips.push_back({{"filename", m.filename}, {"fold", m.fold}, {"target", m.target},
                       {"category", m.category}});
    }
    classes.push_back({{"category", c.category}, {"clips", clips}});
  }
  j = {{"method", to_string(set.method)},
       {"feature", to_string(set.feature)},
       {"k", set.k},
       {"per_class_count", set.per_class_count},
       {"excluded_fold", set.excluded_fold},
       {"seed", set.seed},
       {"per_class", classes}};
}

void from_json(const nlohmann::json& j, ExemplarSet& set) {
  set.method = parse_selection_method(j.at("method").get<std::string>());
  set.feature = parse_feature_kind(j.at("feature").get<std::string>());
  set.k = j.at("k").get<int>();
  set.per_class_count = j.at("per_class_count").get<int>();
  set.excluded_fold = j.at("excluded_fold").get<int>();
  set.seed = j.at("seed").get<std::uint64_t>();
  set.per_class.clear();
  for (const auto& c : j.at("per_class")) {
    ClassExemplars ce;
    ce.category = c.at("category").get<std::string>();
    for (const auto& m : c.at("clips")) {
      ClipMeta meta;
      meta.filename = m.at("filename").get<std::string>();
      meta.fold = m.at("fold").get<int>();
      meta.target = m.value("target", 0);
      meta.category = m.value("category", ce.category);
      ce.clips.push_back(meta);
    }
    set.per_class.push_back(std::move(ce));
  }
}

void validate_exemplars(const ExemplarSet& set, const std::vector<std::string>& classes) {
  for (const auto& c : set.per_class) {
    for (const auto& m : c.clips) {
      if (m.fold == set.excluded_fold) {
        throw Error(ErrorKind::kValidation, "exemplar " + m.filename + " is in test fold " +
                                                std::to_string(set.excluded_fold));
      }
    }
  }
  for (const auto& name : classes) {
    auto it = std::find_if(set.per_class.begin(), set.per_class.end(),
                           [&](const ClassExemplars& c) { return c.category == name; });
    if (it == set.per_class.end()) {
      throw Error(ErrorKind::kValidation, "no exemplars for class '" + name + "'");
    }
    if (static_cast<int>(it->clips.size()) != set.per_class_count) {
      throw Error(ErrorKind::kValidation, "class '" + name + "' has " +
                                              std::to_string(it->clips.size()) +
                                              " exemplars, expected " +
                                              std::to_string(set.per_class_count));
    }
  }
}

FeatureVector featurize(const AudioClip& clip, FeatureKind feature) {
  SpectrogramConfig cfg;
  cfg.amp_scale = AmplitudeScale::kLogDb;
  SpectrogramMatrix m;
  switch (feature) {
    case FeatureKind::kMel:
      m = mel_spectrogram(clip, cfg);
      break;
    case FeatureKind::kAmp:
      m = to_db(stft_magnitude(clip, cfg));
      break;
    case FeatureKind::kNone:
      throw Error(ErrorKind::kConfig, "featurize needs a mel or amp feature");
  }
  return {clip.source, std::move(m.values)};
}

namespace {

std::vector<ClipMeta> class_members(const std::vector<ClipMeta>& pool, const std::string& name) {
  std::vector<ClipMeta> out;
  std::copy_if(pool.begin(), pool.end(), std::back_inserter(out),
               [&](const ClipMeta& m) { return m.category == name; });
  std::sort(out.begin(), out.end(),
            [](const ClipMeta& a, const ClipMeta& b) { return a.filename < b.filename; });
  return out;
}

std::vector<ClipMeta> pick_from_clusters(const std::vector<ClipMeta>& members,
                                         const std::vector<Point>& points,
                                         const KMeansResult& km, int count) {
  const std::size_t k = km.centroids.size();
  std::vector<std::size_t> sizes(k, 0);
  for (int a : km.assignments) ++sizes[static_cast<std::size_t>(a)];
  std::vector<double> norms(k);
  for (std::size_t c = 0; c < k; ++c) {
    norms[c] = std::sqrt(std::inner_product(km.centroids[c].begin(), km.centroids[c].end(),
                                            km.centroids[c].begin(), 0.0));
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
    return norms[a] < norms[b];
  });

  // members are sorted by filename, so the first strict minimum wins ties.
  auto nearest = [&](std::size_t c, const std::set<std::size_t>& taken, bool in_cluster) {
    std::size_t best = members.size();
    double best_d = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (taken.count(i)) continue;
      if (in_cluster && static_cast<std::size_t>(km.assignments[i]) != c) continue;
      const double d = squared_distance(points[i], km.centroids[c]);
      if (best == members.size() || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    return best;
  };

  std::set<std::size_t> taken;
  std::vector<ClipMeta> picked;
  for (std::size_t c : order) {
    if (static_cast<int>(picked.size()) == count) break;
    if (sizes[c] == 0) continue;
    const std::size_t i = nearest(c, taken, true);
    taken.insert(i);
    picked.push_back(members[i]);
  }
  // Fewer non-empty clusters than requested (duplicate clips): fall back to
  // the next-nearest unused clips around the top-ranked centroid.
  while (static_cast<int>(picked.size()) < count) {
    const std::size_t i = nearest(order.front(), taken, false);
    taken.insert(i);
    picked.push_back(members[i]);
  }
  return picked;
}

}  // namespace

ExemplarSet select_kmeans(const std::vector<ClipMeta>& pool,
                          const std::vector<std::string>& classes,
                          const KMeansSelectionParams& params, const ClipLoader& load) {
  if (params.feature == FeatureKind::kNone) {
    throw Error(ErrorKind::kConfig, "k-means selection needs a mel or amp feature");
  }
  if (params.k < 1) throw Error(ErrorKind::kConfig, "k must be at least 1");
  if (params.per_class_count < 1 || params.per_class_count > params.k) {
    throw Error(ErrorKind::kConfig, "per_class_count must be in 1..k");
  }
  ExemplarSet set;
  set.method = SelectionMethod::kKMeans;
  set.feature = params.feature;
  set.k = params.k;
  set.per_class_count = params.per_class_count;
  set.excluded_fold = params.excluded_fold;
  set.seed = params.seed;

  for (const auto& name : classes) {
    auto members = class_members(pool, name);
    std::erase_if(members, [&](const ClipMeta& m) { return m.fold == params.excluded_fold; });
    if (static_cast<int>(members.size()) < params.k) {
      throw Error(ErrorKind::kInsufficientData,
                  "class '" + name + "' has " + std::to_string(members.size()) +
                      " pool clips, fewer than k = " + std::to_string(params.k));
    }
    std::vector<std::future<Point>> jobs;
    jobs.reserve(members.size());
    for (const auto& m : members) {
      jobs.push_back(std::async(std::launch::async, [&load, &m, feature = params.feature] {
        return featurize(load(m), feature).values;
      }));
    }
    std::vector<Point> points;
    points.reserve(members.size());
    for (auto& j : jobs) points.push_back(j.get());

    const KMeansResult km = kmeans(points, params.k, salted_seed(params.seed, name));
    set.per_class.push_back({name, pick_from_clusters(members, points, km, params.per_class_count)});
  }
  return set;
}

ExemplarSet select_kmeans(const std::vector<AudioClip>& pool,
                          const std::vector<std::string>& classes,
                          const KMeansSelectionParams& params) {
  std::vector<ClipMeta> metas;
  std::map<std::string, const AudioClip*> by_name;
  for (const auto& c : pool) {
    metas.push_back(c.source);
    by_name[c.source.filename] = &c;
  }
  return select_kmeans(metas, classes, params,
                       [&](const ClipMeta& m) { return *by_name.at(m.filename); });
}

ExemplarSet select_random(const std::vector<ClipMeta>& pool,
                          const std::vector<std::string>& classes, int per_class_count,
                          std::uint64_t seed, int excluded_fold) {
  if (per_class_count < 1) throw Error(ErrorKind::kConfig, "per_class_count must be positive");
  ExemplarSet set;
  set.method = SelectionMethod::kRandom;
  set.feature = FeatureKind::kNone;
  set.per_class_count = per_class_count;
  set.excluded_fold = excluded_fold;
  set.seed = seed;
  for (const auto& name : classes) {
    auto members = class_members(pool, name);
    std::erase_if(members, [&](const ClipMeta& m) { return m.fold == excluded_fold; });
    if (static_cast<int>(members.size()) < per_class_count) {
      throw Error(ErrorKind::kInsufficientData,
                  "class '" + name + "' has " + std::to_string(members.size()) +
                      " pool clips, need " + std::to_string(per_class_count));
    }
    Rng rng(salted_seed(seed, name));
    rng.shuffle(members);
    members.resize(static_cast<std::size_t>(per_class_count));
    set.per_class.push_back({name, std::move(members)});
  }
  return set;
}

std::map<std::string, std::vector<std::string>> parse_handpicked_listing(const std::string& text) {
  std::map<std::string, std::vector<std::string>> listing;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorKind::kValidation,
                  "hand-picked listing line " + std::to_string(line_no) + " has no ':'");
    }
    const std::string category = trim(line.substr(0, colon));
    std::stringstream files(line.substr(colon + 1));
    std::string file;
    while (std::getline(files, file, ',')) {
      file = trim(file);
      if (!file.empty()) listing[category].push_back(file);
    }
  }
  return listing;
}

ExemplarSet select_handpicked(const std::map<std::string, std::vector<std::string>>& listing,
                              const std::vector<ClipMeta>& manifest,
                              const std::vector<std::string>& classes, int test_fold) {
  std::map<std::string, const ClipMeta*> by_name;
  for (const auto& m : manifest) by_name[m.filename] = &m;

  ExemplarSet set;
  set.method = SelectionMethod::kHandpicked;
  set.feature = FeatureKind::kMel;
  set.excluded_fold = test_fold;
  set.seed = 0;
  for (const auto& [category, files] : listing) {
    if (std::find(classes.begin(), classes.end(), category) == classes.end()) {
      throw Error(ErrorKind::kValidation, "hand-picked listing names unknown class '" + category + "'");
    }
  }
  for (const auto& name : classes) {
    auto it = listing.find(name);
    if (it == listing.end() || it->second.empty()) {
      throw Error(ErrorKind::kValidation, "hand-picked listing is missing class '" + name + "'");
    }
    ClassExemplars ce{name, {}};
    for (const auto& file : it->second) {
      auto m = by_name.find(file);
      if (m == by_name.end()) {
        throw Error(ErrorKind::kValidation, "hand-picked file not in manifest: " + file);
      }
      if (m->second->fold == test_fold) {
        throw Error(ErrorKind::kValidation, "hand-picked file " + file + " is in test fold " +
                                                std::to_string(test_fold));
      }
      if (m->second->category != name) {
        throw Error(ErrorKind::kValidation, "hand-picked file " + file + " belongs to '" +
                                                m->second->category + "', listed under '" +
                                                name + "'");
      }
      ce.clips.push_back(*m->second);
    }
    if (set.per_class_count == 0) set.per_class_count = static_cast<int>(ce.clips.size());
    if (static_cast<int>(ce.clips.size()) != set.per_class_count) {
      throw Error(ErrorKind::kValidation,
                  "hand-picked listing has unequal counts per class ('" + name + "')");
    }
    set.per_class.push_back(std::move(ce));
  }
  return set;
}

}  // namespace vsc
