#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "moodnet/model_config.hpp"
#include "moodnet/optim.hpp"

// Single-file run configuration: model architecture, optimizer
// hyperparameters, data paths, and numeric precision. Parsing is strict; an
// unknown key anywhere is a ConfigError, so typos never silently fall back
// to defaults.

namespace moodnet {

enum class Precision { kDouble, kSingle };

const char* precision_name(Precision p);
Precision precision_from_name(const std::string& name);

struct OptimizerConfig {
  AdamConfig adam;
  int batch = 16;
  int epochs = 50;
  /// Stop once training-split macro F1 reaches this value (checked per epoch).
  std::optional<double> early_stop_train_f1;
};

struct PathsConfig {
  std::string embeddings;
  std::string manifest;
  std::string feature_cache;
  std::string checkpoint_dir;
};

struct RunConfig {
  ModelConfig model;
  OptimizerConfig optimizer;
  PathsConfig paths;
  Precision precision = Precision::kDouble;
};

/// JSON forms of the model section, shared with checkpoint manifests.
nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Reads and parses the file, then resolves every relative path in `paths`
/// against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace moodnet
