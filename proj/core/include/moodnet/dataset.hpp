#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moodnet/model_config.hpp"
#include "moodnet/tensor.hpp"

// Dataset manifests are JSON Lines. A feature manifest starts with a header
// object {"lines_max": L, "words_max": W}; every following line is one record
// {clip_id, audio_feat, lyrics_feat, label, split}. A raw-asset manifest (the
// featurize input) has no header; its records are {clip_id, audio, lyrics,
// label, split}. Relative paths are resolved against the manifest's
// directory.

namespace moodnet {

enum class Split { kTrain, kVal };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

/// Mood cluster labels are the roman numerals "I".."V" <-> indices 0..4.
int label_to_index(const std::string& label);
const char* index_to_label(int index);

struct DatasetRecord {
  std::string clip_id;
  std::string audio_feat;   // path as written; may be "" for a modality that
  std::string lyrics_feat;  // was never featurized
  std::filesystem::path audio_path;  // resolved; empty when audio_feat is ""
  std::filesystem::path lyrics_path;
  int label = 0;  // 0..4
  Split split = Split::kTrain;
};

struct DatasetManifest {
  Index lines_max = 0;
  Index words_max = 0;
  std::vector<DatasetRecord> records;
};

/// Strict parse: unknown or missing keys, a bad label/split, or a duplicate
/// clip_id fail the load; every non-empty feature path must exist on disk.
DatasetManifest load_dataset_manifest(const std::filesystem::path& path);

/// JSONL bytes of the manifest with paths exactly as recorded.
std::string serialize_dataset_manifest(const DatasetManifest& manifest);

struct RawAssetRecord {
  std::string clip_id;
  std::string audio;  // path as written
  std::string lyrics;
  std::filesystem::path audio_path;  // resolved
  std::filesystem::path lyrics_path;
  int label = 0;
  Split split = Split::kTrain;
};

/// Same strictness as the feature manifest, but referenced assets may be
/// missing; featurize reports those per record instead.
std::vector<RawAssetRecord> load_raw_manifest(const std::filesystem::path& path);

/// Adopts the manifest's lyrics grid into the model config: zero values take
/// the manifest's, nonzero values must match it (ConfigError otherwise).
/// No-op for audio-only configs.
ModelConfig apply_manifest_grid(ModelConfig cfg, const DatasetManifest& manifest);

}  // namespace moodnet
