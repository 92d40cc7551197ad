#include "moodnet/dataset.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "moodnet/errors.hpp"

namespace moodnet {

namespace {

using nlohmann::json;

constexpr std::array<const char*, kNumClasses> kLabels = {"I", "II", "III", "IV", "V"};

json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("manifest " + path.string() + " line " + std::to_string(lineno) +
                  " is not valid JSON: " + e.what());
  }
}

void check_keys(const json& obj, const std::vector<std::string>& keys,
                const std::filesystem::path& path, std::size_t lineno) {
  if (!obj.is_object()) {
    throw IoError("manifest " + path.string() + " line " + std::to_string(lineno) +
                  " is not a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw IoError("manifest " + path.string() + " line " + std::to_string(lineno) +
                    " has unknown key \"" + key + "\"");
    }
  }
  for (const std::string& key : keys) {
    if (!obj.contains(key)) {
      throw IoError("manifest " + path.string() + " line " + std::to_string(lineno) +
                    " is missing key \"" + key + "\"");
    }
  }
}

std::string get_string(const json& obj, const char* key, const std::filesystem::path& path,
                       std::size_t lineno) {
  if (!obj.at(key).is_string()) {
    throw IoError("manifest " + path.string() + " line " + std::to_string(lineno) + " key \"" +
                  key + "\" must be a string");
  }
  return obj.at(key).get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path fp(p);
  return fp.is_absolute() ? fp : (base / fp).lexically_normal();
}

}  // namespace

const char* split_name(Split s) { return s == Split::kTrain ? "train" : "val"; }

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  throw InputError("split must be \"train\" or \"val\", got \"" + name + "\"");
}

int label_to_index(const std::string& label) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (label == kLabels[static_cast<std::size_t>(i)]) return i;
  }
  throw InputError("label must be one of I, II, III, IV, V, got \"" + label + "\"");
}

const char* index_to_label(int index) {
  if (index < 0 || index >= kNumClasses) {
    throw InputError("class index " + std::to_string(index) + " out of range [0, " +
                     std::to_string(kNumClasses) + ")");
  }
  return kLabels[static_cast<std::size_t>(index)];
}

DatasetManifest load_dataset_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path()
                                                            : std::filesystem::current_path();

  DatasetManifest manifest;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  bool header_read = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json obj = parse_line(line, path, lineno);
    if (!header_read) {
      check_keys(obj, {"lines_max", "words_max"}, path, lineno);
      try {
        manifest.lines_max = obj.at("lines_max").get<Index>();
        manifest.words_max = obj.at("words_max").get<Index>();
      } catch (const json::exception&) {
        throw IoError("manifest " + path.string() + " header has non-integer grid values");
      }
      if (manifest.lines_max < 0 || manifest.words_max < 0) {
        throw IoError("manifest " + path.string() + " header grid values must be >= 0");
      }
      header_read = true;
      continue;
    }

    check_keys(obj, {"clip_id", "audio_feat", "lyrics_feat", "label", "split"}, path, lineno);
    DatasetRecord rec;
    rec.clip_id = get_string(obj, "clip_id", path, lineno);
    rec.audio_feat = get_string(obj, "audio_feat", path, lineno);
    rec.lyrics_feat = get_string(obj, "lyrics_feat", path, lineno);
    rec.label = label_to_index(get_string(obj, "label", path, lineno));
    rec.split = split_from_name(get_string(obj, "split", path, lineno));
    if (rec.clip_id.empty()) {
      throw InputError("manifest " + path.string() + " line " + std::to_string(lineno) +
                       " has an empty clip_id");
    }
    if (!seen_ids.insert(rec.clip_id).second) {
      throw InputError("duplicate clip_id \"" + rec.clip_id + "\" in manifest " + path.string());
    }
    rec.audio_path = resolve(base, rec.audio_feat);
    rec.lyrics_path = resolve(base, rec.lyrics_feat);
    for (const auto& fp : {rec.audio_path, rec.lyrics_path}) {
      if (!fp.empty() && !std::filesystem::exists(fp)) {
        throw IoError("manifest " + path.string() + " references missing feature file " +
                      fp.string() + " (clip " + rec.clip_id + ")");
      }
    }
    manifest.records.push_back(std::move(rec));
  }
  if (in.bad()) throw IoError("failed reading manifest: " + path.string());
  if (!header_read) {
    throw IoError("manifest " + path.string() + " is missing the {lines_max, words_max} header");
  }
  return manifest;
}

std::string serialize_dataset_manifest(const DatasetManifest& manifest) {
  std::ostringstream out;
  out << json{{"lines_max", manifest.lines_max}, {"words_max", manifest.words_max}}.dump() << "\n";
  for (const DatasetRecord& rec : manifest.records) {
    out << json{{"clip_id", rec.clip_id},
                {"audio_feat", rec.audio_feat},
                {"lyrics_feat", rec.lyrics_feat},
                {"label", index_to_label(rec.label)},
                {"split", split_name(rec.split)}}
               .dump()
        << "\n";
  }
  return out.str();
}

std::vector<RawAssetRecord> load_raw_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path()
                                                            : std::filesystem::current_path();

  std::vector<RawAssetRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json obj = parse_line(line, path, lineno);
    check_keys(obj, {"clip_id", "audio", "lyrics", "label", "split"}, path, lineno);
    RawAssetRecord rec;
    rec.clip_id = get_string(obj, "clip_id", path, lineno);
    rec.audio = get_string(obj, "audio", path, lineno);
    rec.lyrics = get_string(obj, "lyrics", path, lineno);
    rec.label = label_to_index(get_string(obj, "label", path, lineno));
    rec.split = split_from_name(get_string(obj, "split", path, lineno));
    if (rec.clip_id.empty()) {
      throw InputError("manifest " + path.string() + " line " + std::to_string(lineno) +
                       " has an empty clip_id");
    }
    if (!seen_ids.insert(rec.clip_id).second) {
      throw InputError("duplicate clip_id \"" + rec.clip_id + "\" in manifest " + path.string());
    }
    rec.audio_path = resolve(base, rec.audio);
    rec.lyrics_path = resolve(base, rec.lyrics);
    records.push_back(std::move(rec));
  }
  if (in.bad()) throw IoError("failed reading manifest: " + path.string());
  return records;
}

ModelConfig apply_manifest_grid(ModelConfig cfg, const DatasetManifest& manifest) {
  if (!cfg.use_lyrics) return cfg;
  if (cfg.lines_max == 0) {
    cfg.lines_max = manifest.lines_max;
  } else if (cfg.lines_max != manifest.lines_max) {
    throw ConfigError("config lines_max " + std::to_string(cfg.lines_max) +
                      " does not match manifest lines_max " + std::to_string(manifest.lines_max));
  }
  if (cfg.words_max == 0) {
    cfg.words_max = manifest.words_max;
  } else if (cfg.words_max != manifest.words_max) {
    throw ConfigError("config words_max " + std::to_string(cfg.words_max) +
                      " does not match manifest words_max " + std::to_string(manifest.words_max));
  }
  return cfg;
}

}  // namespace moodnet
