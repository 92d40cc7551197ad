#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "moodnet/checkpoint.hpp"
#include "moodnet/dataset.hpp"
#include "moodnet/errors.hpp"
#include "moodnet/featurize.hpp"
#include "moodnet/metrics.hpp"
#include "moodnet/model.hpp"
#include "moodnet/run_config.hpp"
#include "moodnet/tensor_io.hpp"
#include "moodnet/train.hpp"

namespace {

using namespace moodnet;

RunConfig load_config(const std::string& path) {
  RunConfig run = load_run_config(path);
  if (const char* cache = std::getenv("MOODNET_CACHE"); cache != nullptr && *cache != '\0') {
    run.paths.feature_cache = cache;
  }
  return run;
}

void require_path(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("paths.") + key + " is not set");
}

int cmd_featurize(const std::string& config_path, const std::string& raw_manifest) {
  const RunConfig run = load_config(config_path);
  require_path(run.paths.feature_cache, "feature_cache");
  require_path(run.paths.manifest, "manifest");
  const std::vector<RawAssetRecord> records = load_raw_manifest(raw_manifest);
  const FeaturizeResult res =
      featurize_corpus(run, records, run.paths.feature_cache, run.paths.manifest);
  for (const auto& [clip_id, reason] : res.failures) {
    std::cerr << "clip " << clip_id << ": " << reason << "\n";
  }
  if (run.model.use_lyrics) {
    std::cout << "lyrics grid " << res.lines_max << "x" << res.words_max << "\n";
  }
  std::cout << res.written << " written, " << res.skipped << " skipped, " << res.failures.size()
            << " failed\n";
  return res.failures.empty() ? 0 : 1;
}

template <typename T>
int run_train(const RunConfig& run) {
  const DatasetManifest manifest = load_dataset_manifest(run.paths.manifest);
  const TrainOutcome out = train_model<T>(run, manifest, run.paths.checkpoint_dir, &std::cout);
  std::cout << "completed " << out.epochs_run << " epoch(s); checkpoint in "
            << run.paths.checkpoint_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  const RunConfig run = load_config(config_path);
  require_path(run.paths.manifest, "manifest");
  require_path(run.paths.checkpoint_dir, "checkpoint_dir");
  return run.precision == Precision::kDouble ? run_train<double>(run) : run_train<float>(run);
}

/// Field-level comparison of the run config's model section against the
/// checkpoint's; seed is allowed to differ, and a zero lyrics grid in the run
/// config defers to the checkpoint.
void check_model_matches(const ModelConfig& run_cfg, const ModelConfig& ckpt_cfg) {
  auto diff = [](const char* field, auto run_v, auto ckpt_v) {
    if (run_v != ckpt_v) {
      std::ostringstream msg;
      msg << "config " << field << " is " << run_v << ", checkpoint was trained with " << ckpt_v;
      throw ConfigError(msg.str());
    }
  };
  diff("depth", run_cfg.depth, ckpt_cfg.depth);
  diff("audio modality", run_cfg.use_audio, ckpt_cfg.use_audio);
  diff("lyrics modality", run_cfg.use_lyrics, ckpt_cfg.use_lyrics);
  if (run_cfg.lines_max != 0) diff("lines_max", run_cfg.lines_max, ckpt_cfg.lines_max);
  if (run_cfg.words_max != 0) diff("words_max", run_cfg.words_max, ckpt_cfg.words_max);
  diff("dropout", run_cfg.dropout, ckpt_cfg.dropout);
  diff("classes", run_cfg.classes, ckpt_cfg.classes);
  diff("audio_bins", run_cfg.audio_bins, ckpt_cfg.audio_bins);
  diff("audio_frames", run_cfg.audio_frames, ckpt_cfg.audio_frames);
  diff("channel_div", run_cfg.channel_div, ckpt_cfg.channel_div);
  diff("head_div", run_cfg.head_div, ckpt_cfg.head_div);
}

template <typename T>
int run_eval(const std::filesystem::path& ckpt_dir, const std::filesystem::path& manifest_path,
             const std::string& out_dir) {
  const Checkpoint<T> ckpt = load_checkpoint<T>(ckpt_dir);
  const DatasetManifest manifest = load_dataset_manifest(manifest_path);
  const ModelConfig cfg = apply_manifest_grid(ckpt.config, manifest);
  const Model<T> model(cfg);
  const EvalReport report = evaluate_model(model, ckpt.params, manifest);
  const std::string json = report_to_json(report);
  std::cout << format_report_table(report) << json;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    detail::write_file_atomic(std::filesystem::path(out_dir) / "report.json", json);
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_flag,
             const std::string& manifest_flag, const std::string& out_dir) {
  const RunConfig run = load_config(config_path);
  const std::string ckpt_dir = checkpoint_flag.empty() ? run.paths.checkpoint_dir
                                                       : checkpoint_flag;
  const std::string manifest_path = manifest_flag.empty() ? run.paths.manifest : manifest_flag;
  if (ckpt_dir.empty()) throw ConfigError("no checkpoint: set paths.checkpoint_dir or pass --checkpoint");
  if (manifest_path.empty()) throw ConfigError("no manifest: set paths.manifest or pass --manifest");
  const CheckpointInfo info = read_checkpoint_info(ckpt_dir);
  check_model_matches(run.model, info.config);
  return info.precision == Precision::kDouble ? run_eval<double>(ckpt_dir, manifest_path, out_dir)
                                              : run_eval<float>(ckpt_dir, manifest_path, out_dir);
}

int cmd_inspect(const std::string& ckpt_dir) {
  const std::filesystem::path dir(ckpt_dir);
  const CheckpointInfo info = read_checkpoint_info(dir);
  const ModelConfig& cfg = info.config;
  std::cout << "checkpoint " << ckpt_dir << "\n"
            << "precision " << precision_name(info.precision) << ", epoch " << info.epoch
            << ", adam steps " << info.adam_t << "\n"
            << "depth " << cfg.depth << ", modalities";
  if (cfg.use_audio) std::cout << " audio(" << cfg.audio_bins << "x" << cfg.audio_frames << ")";
  if (cfg.use_lyrics) std::cout << " lyrics(" << cfg.lines_max << "x" << cfg.words_max << ")";
  std::cout << ", dropout " << cfg.dropout << ", seed " << cfg.seed;
  if (cfg.channel_div != 1) std::cout << ", channel_div " << cfg.channel_div;
  if (cfg.head_div != 1) std::cout << ", head_div " << cfg.head_div;
  std::cout << "\n\n";

  Index total = 0;
  for (const CheckpointParamInfo& p : info.params) {
    const Shape on_disk = read_tensor_shape(checkpoint_param_path(dir, p.name));
    if (on_disk != p.shape) {
      throw ShapeError("tensor file for " + p.name + " has shape " + detail::shape_str(on_disk) +
                       ", manifest says " + detail::shape_str(p.shape));
    }
    Index count = 1;
    for (Index e : p.shape) count *= e;
    total += count;
    std::cout << "  " << p.name << "  " << detail::shape_str(p.shape) << "  " << count << "\n";
  }
  std::cout << "\ntotal parameters " << total << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MoodNet: multimodal music mood classification"};
  app.require_subcommand(1);

  std::string config_path, raw_manifest, checkpoint_flag, manifest_flag, out_dir;

  CLI::App* feat = app.add_subcommand("featurize", "Build the feature cache and manifest");
  feat->add_option("--config", config_path, "run config file")->required();
  feat->add_option("--manifest", raw_manifest, "raw asset manifest (JSONL)")->required();

  CLI::App* train = app.add_subcommand("train", "Train from the config's manifest");
  train->add_option("--config", config_path, "run config file")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--config", config_path, "run config file")->required();
  eval->add_option("--checkpoint", checkpoint_flag, "checkpoint directory");
  eval->add_option("--manifest", manifest_flag, "feature manifest override");
  eval->add_option("--out", out_dir, "directory for report.json");

  CLI::App* inspect = app.add_subcommand("inspect", "List a checkpoint's parameters");
  inspect->add_option("--checkpoint", checkpoint_flag, "checkpoint directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(feat)) return cmd_featurize(config_path, raw_manifest);
    if (app.got_subcommand(train)) return cmd_train(config_path);
    if (app.got_subcommand(eval)) {
      return cmd_eval(config_path, checkpoint_flag, manifest_flag, out_dir);
    }
    return cmd_inspect(checkpoint_flag);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
