#include "moodnet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace moodnet {

namespace {

constexpr const char* kFormat = "moodnet-checkpoint";
constexpr int kVersion = 1;

}  // namespace

std::filesystem::path checkpoint_param_path(const std::filesystem::path& dir,
                                            const std::string& name) {
  return dir / "params" / (name + ".mnt");
}

std::filesystem::path checkpoint_moment_path(const std::filesystem::path& dir,
                                             const std::string& name, char which) {
  return dir / "adam" / (name + "." + which + ".mnt");
}

namespace detail {

void write_checkpoint_manifest(const std::filesystem::path& dir, const ModelConfig& config,
                               Precision precision, std::int64_t epoch, std::int64_t adam_t,
                               const std::vector<CheckpointParamInfo>& params) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["precision"] = precision_name(precision);
  j["epoch"] = epoch;
  j["adam_t"] = adam_t;
  j["model"] = model_config_to_json(config);
  j["params"] = nlohmann::json::array();
  for (const CheckpointParamInfo& p : params) {
    j["params"].push_back({{"name", p.name}, {"shape", p.shape}});
  }
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace detail

CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint manifest " + manifest_path.string() + " is not valid JSON: " +
                  e.what());
  }

  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw StateError(manifest_path.string() + " is not a checkpoint manifest");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw StateError("unsupported checkpoint version " + j.at("version").dump() + " in " +
                       manifest_path.string());
    }
    CheckpointInfo info;
    info.precision = precision_from_name(j.at("precision").get<std::string>());
    info.epoch = j.at("epoch").get<std::int64_t>();
    info.adam_t = j.at("adam_t").get<std::int64_t>();
    info.config = model_config_from_json(j.at("model"));
    validate(info.config);
    for (const nlohmann::json& p : j.at("params")) {
      info.params.push_back({p.at("name").get<std::string>(), p.at("shape").get<Shape>()});
    }

    const auto expected = expected_param_shapes(info.config);
    if (expected.size() != info.params.size()) {
      throw StateError("checkpoint records " + std::to_string(info.params.size()) +
                       " parameters, config implies " + std::to_string(expected.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i].first != info.params[i].name) {
        throw StateError("checkpoint parameter " + std::to_string(i) + " is \"" +
                         info.params[i].name + "\", config implies \"" + expected[i].first +
                         "\"");
      }
      if (expected[i].second != info.params[i].shape) {
        throw ShapeError("checkpoint parameter " + info.params[i].name + " has shape " +
                         detail::shape_str(info.params[i].shape) + ", config implies " +
                         detail::shape_str(expected[i].second));
      }
    }
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint manifest " + manifest_path.string() + " is malformed: " + e.what());
  }
}

}  // namespace moodnet
