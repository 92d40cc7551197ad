#include "moodnet/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "moodnet/errors.hpp"

namespace moodnet {

namespace {

using nlohmann::json;

void require_known_keys(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  return j;
}

template <typename V>
V get_or(const json& obj, const char* key, V fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<V>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for \"" + std::string(key) + "\" in " + where);
  }
}

template <typename V>
V get_required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError("missing required key \"" + std::string(key) + "\" in " + where);
  }
  try {
    return obj.at(key).get<V>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for \"" + std::string(key) + "\" in " + where);
  }
}

}  // namespace

const char* precision_name(Precision p) { return p == Precision::kDouble ? "double" : "single"; }

Precision precision_from_name(const std::string& name) {
  if (name == "double") return Precision::kDouble;
  if (name == "single") return Precision::kSingle;
  throw ConfigError("precision must be \"double\" or \"single\", got \"" + name + "\"");
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  json modalities = json::array();
  if (cfg.use_audio) modalities.push_back("audio");
  if (cfg.use_lyrics) modalities.push_back("lyrics");
  return json{{"depth", cfg.depth},
              {"modalities", modalities},
              {"lines_max", cfg.lines_max},
              {"words_max", cfg.words_max},
              {"dropout", cfg.dropout},
              {"classes", cfg.classes},
              {"seed", cfg.seed},
              {"audio_bins", cfg.audio_bins},
              {"audio_frames", cfg.audio_frames},
              {"channel_div", cfg.channel_div},
              {"head_div", cfg.head_div}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  require_object(j, "model");
  require_known_keys(j,
                     {"depth", "modalities", "lines_max", "words_max", "dropout", "classes", "seed",
                      "audio_bins", "audio_frames", "channel_div", "head_div"},
                     "model");
  ModelConfig cfg;
  cfg.depth = get_required<int>(j, "depth", "model");
  cfg.seed = get_required<std::uint64_t>(j, "seed", "model");

  const auto modalities = get_required<std::vector<std::string>>(j, "modalities", "model");
  cfg.use_audio = false;
  cfg.use_lyrics = false;
  for (const std::string& m : modalities) {
    if (m == "audio") {
      if (cfg.use_audio) throw ConfigError("duplicate modality \"audio\"");
      cfg.use_audio = true;
    } else if (m == "lyrics") {
      if (cfg.use_lyrics) throw ConfigError("duplicate modality \"lyrics\"");
      cfg.use_lyrics = true;
    } else {
      throw ConfigError("unknown modality \"" + m + "\" (expected audio, lyrics)");
    }
  }

  cfg.lines_max = get_or<Index>(j, "lines_max", 0, "model");
  cfg.words_max = get_or<Index>(j, "words_max", 0, "model");
  cfg.dropout = get_or<double>(j, "dropout", cfg.dropout, "model");
  cfg.classes = get_or<int>(j, "classes", cfg.classes, "model");
  cfg.audio_bins = get_or<Index>(j, "audio_bins", cfg.audio_bins, "model");
  cfg.audio_frames = get_or<Index>(j, "audio_frames", cfg.audio_frames, "model");
  cfg.channel_div = get_or<Index>(j, "channel_div", cfg.channel_div, "model");
  cfg.head_div = get_or<Index>(j, "head_div", cfg.head_div, "model");
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  json optimizer{{"alpha", cfg.optimizer.adam.alpha},
                 {"beta1", cfg.optimizer.adam.beta1},
                 {"beta2", cfg.optimizer.adam.beta2},
                 {"epsilon", cfg.optimizer.adam.epsilon},
                 {"batch", cfg.optimizer.batch},
                 {"epochs", cfg.optimizer.epochs}};
  if (cfg.optimizer.early_stop_train_f1) {
    optimizer["early_stop_train_f1"] = *cfg.optimizer.early_stop_train_f1;
  }
  return json{{"model", model_config_to_json(cfg.model)},
              {"optimizer", optimizer},
              {"paths",
               {{"embeddings", cfg.paths.embeddings},
                {"manifest", cfg.paths.manifest},
                {"feature_cache", cfg.paths.feature_cache},
                {"checkpoint_dir", cfg.paths.checkpoint_dir}}},
              {"precision", precision_name(cfg.precision)}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  require_object(j, "run config");
  require_known_keys(j, {"model", "optimizer", "paths", "precision"}, "run config");
  RunConfig cfg;
  if (!j.contains("model")) throw ConfigError("missing required key \"model\" in run config");
  cfg.model = model_config_from_json(j.at("model"));

  if (j.contains("optimizer")) {
    const json& o = require_object(j.at("optimizer"), "optimizer");
    require_known_keys(
        o, {"alpha", "beta1", "beta2", "epsilon", "batch", "epochs", "early_stop_train_f1"},
        "optimizer");
    cfg.optimizer.adam.alpha = get_or<double>(o, "alpha", cfg.optimizer.adam.alpha, "optimizer");
    cfg.optimizer.adam.beta1 = get_or<double>(o, "beta1", cfg.optimizer.adam.beta1, "optimizer");
    cfg.optimizer.adam.beta2 = get_or<double>(o, "beta2", cfg.optimizer.adam.beta2, "optimizer");
    cfg.optimizer.adam.epsilon =
        get_or<double>(o, "epsilon", cfg.optimizer.adam.epsilon, "optimizer");
    cfg.optimizer.batch = get_or<int>(o, "batch", cfg.optimizer.batch, "optimizer");
    cfg.optimizer.epochs = get_or<int>(o, "epochs", cfg.optimizer.epochs, "optimizer");
    if (o.contains("early_stop_train_f1")) {
      cfg.optimizer.early_stop_train_f1 =
          get_required<double>(o, "early_stop_train_f1", "optimizer");
    }
    if (cfg.optimizer.batch < 1) throw ConfigError("optimizer batch must be >= 1");
    if (cfg.optimizer.epochs < 0) throw ConfigError("optimizer epochs must be >= 0");
    validate_adam_config(cfg.optimizer.adam);
  }

  if (j.contains("paths")) {
    const json& p = require_object(j.at("paths"), "paths");
    require_known_keys(p, {"embeddings", "manifest", "feature_cache", "checkpoint_dir"}, "paths");
    cfg.paths.embeddings = get_or<std::string>(p, "embeddings", "", "paths");
    cfg.paths.manifest = get_or<std::string>(p, "manifest", "", "paths");
    cfg.paths.feature_cache = get_or<std::string>(p, "feature_cache", "", "paths");
    cfg.paths.checkpoint_dir = get_or<std::string>(p, "checkpoint_dir", "", "paths");
  }

  if (j.contains("precision")) {
    cfg.precision = precision_from_name(get_required<std::string>(j, "precision", "run config"));
  }
  return cfg;
}

namespace {

std::string resolve_against(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path fp(p);
  return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig cfg = run_config_from_json(j);
  const std::filesystem::path base = path.has_parent_path()
                                         ? path.parent_path()
                                         : std::filesystem::current_path();
  cfg.paths.embeddings = resolve_against(base, cfg.paths.embeddings);
  cfg.paths.manifest = resolve_against(base, cfg.paths.manifest);
  cfg.paths.feature_cache = resolve_against(base, cfg.paths.feature_cache);
  cfg.paths.checkpoint_dir = resolve_against(base, cfg.paths.checkpoint_dir);
  return cfg;
}

}  // namespace moodnet
