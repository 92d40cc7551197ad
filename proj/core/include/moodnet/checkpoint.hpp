#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moodnet/errors.hpp"
#include "moodnet/model_config.hpp"
#include "moodnet/named_tensors.hpp"
#include "moodnet/optim.hpp"
#include "moodnet/run_config.hpp"
#include "moodnet/tensor_io.hpp"

// A checkpoint is a directory:
//   manifest.json            config, precision, epoch, adam step, param list
//   params/<name>.mnt        one tensor file per parameter
//   adam/<name>.m.mnt        first and second moment per parameter
//   adam/<name>.v.mnt
// Tensor files are written first and the manifest last, each atomically, so
// a crash mid-save never leaves a manifest pointing at stale tensors.

namespace moodnet {

namespace detail {

template <typename T>
constexpr Precision precision_of();
template <>
constexpr Precision precision_of<double>() {
  return Precision::kDouble;
}
template <>
constexpr Precision precision_of<float>() {
  return Precision::kSingle;
}

}  // namespace detail

struct CheckpointParamInfo {
  std::string name;
  Shape shape;
};

/// Everything manifest.json records, without touching tensor payloads.
struct CheckpointInfo {
  ModelConfig config;
  Precision precision = Precision::kDouble;
  std::int64_t epoch = 0;
  std::int64_t adam_t = 0;
  std::vector<CheckpointParamInfo> params;
};

template <typename T>
struct Checkpoint {
  ModelConfig config;
  std::int64_t epoch = 0;
  NamedTensors<T> params;
  AdamState<T> adam;
};

std::filesystem::path checkpoint_param_path(const std::filesystem::path& dir,
                                            const std::string& name);
std::filesystem::path checkpoint_moment_path(const std::filesystem::path& dir,
                                             const std::string& name, char which);

/// Parses manifest.json and cross-checks the recorded parameter list against
/// the shapes the config implies. Does not read tensor payloads.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir);

namespace detail {

void write_checkpoint_manifest(const std::filesystem::path& dir, const ModelConfig& config,
                               Precision precision, std::int64_t epoch, std::int64_t adam_t,
                               const std::vector<CheckpointParamInfo>& params);

}  // namespace detail

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const ModelConfig& config,
                     const NamedTensors<T>& params, const AdamState<T>& adam,
                     std::int64_t epoch) {
  std::filesystem::create_directories(dir / "params");
  std::filesystem::create_directories(dir / "adam");
  std::vector<CheckpointParamInfo> infos;
  infos.reserve(params.size());
  for (const auto& [name, value] : params) {
    write_tensor(checkpoint_param_path(dir, name), value);
    write_tensor(checkpoint_moment_path(dir, name, 'm'), adam.m.at(name));
    write_tensor(checkpoint_moment_path(dir, name, 'v'), adam.v.at(name));
    infos.push_back({name, value.shape()});
  }
  detail::write_checkpoint_manifest(dir, config, detail::precision_of<T>(), epoch, adam.t, infos);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& dir) {
  const CheckpointInfo info = read_checkpoint_info(dir);
  if (info.precision != detail::precision_of<T>()) {
    throw StateError(std::string("checkpoint ") + dir.string() + " stores " +
                     precision_name(info.precision) + " precision tensors, not " +
                     precision_name(detail::precision_of<T>()));
  }
  Checkpoint<T> ckpt;
  ckpt.config = info.config;
  ckpt.epoch = info.epoch;
  ckpt.adam.t = info.adam_t;
  for (const CheckpointParamInfo& p : info.params) {
    Tensor<T> value = read_tensor<T>(checkpoint_param_path(dir, p.name));
    if (value.shape() != p.shape) {
      throw ShapeError("checkpoint tensor " + p.name + " has shape " +
                       detail::shape_str(value.shape()) + ", manifest says " +
                       detail::shape_str(p.shape));
    }
    Tensor<T> m = read_tensor<T>(checkpoint_moment_path(dir, p.name, 'm'));
    Tensor<T> v = read_tensor<T>(checkpoint_moment_path(dir, p.name, 'v'));
    if (m.shape() != p.shape || v.shape() != p.shape) {
      throw ShapeError("checkpoint moments for " + p.name + " do not match its shape " +
                       detail::shape_str(p.shape));
    }
    ckpt.params.add(p.name, std::move(value));
    ckpt.adam.m.add(p.name, std::move(m));
    ckpt.adam.v.add(p.name, std::move(v));
  }
  return ckpt;
}

}  // namespace moodnet
