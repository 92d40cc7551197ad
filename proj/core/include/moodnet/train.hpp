#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "moodnet/checkpoint.hpp"
#include "moodnet/dataset.hpp"
#include "moodnet/errors.hpp"
#include "moodnet/metrics.hpp"
#include "moodnet/model.hpp"
#include "moodnet/optim.hpp"
#include "moodnet/rng.hpp"
#include "moodnet/run_config.hpp"
#include "moodnet/tensor_io.hpp"

namespace moodnet {

struct EpochStats {
  int epoch = 0;  // zero-based
  double loss = 0.0;
  double val_macro_f1 = 0.0;
};

struct TrainOutcome {
  std::vector<EpochStats> log;
  int epochs_run = 0;
  bool early_stopped = false;
};

namespace detail {

template <typename T>
struct SampleFeatures {
  std::optional<Tensor<T>> audio;
  std::optional<Tensor<T>> lyrics;
};

/// Reads the cached feature tensors a record's enabled modalities point at.
template <typename T>
SampleFeatures<T> load_features(const ModelConfig& cfg, const DatasetRecord& rec) {
  SampleFeatures<T> f;
  if (cfg.use_audio) f.audio = read_tensor<T>(rec.audio_path);
  if (cfg.use_lyrics) f.lyrics = read_tensor<T>(rec.lyrics_path);
  return f;
}

inline void preflight_records(const ModelConfig& cfg, const DatasetManifest& manifest) {
  for (const DatasetRecord& rec : manifest.records) {
    if (cfg.use_audio && rec.audio_feat.empty()) {
      throw InputError("clip " + rec.clip_id + " has no audio features but audio is enabled");
    }
    if (cfg.use_lyrics && rec.lyrics_feat.empty()) {
      throw InputError("clip " + rec.clip_id + " has no lyrics features but lyrics are enabled");
    }
  }
}

}  // namespace detail

/// Confusion-matrix evaluation over the manifest's records, restricted to one
/// split when given. Prediction is the argmax class, ties resolved to the
/// lowest index.
template <typename T>
EvalReport evaluate_model(const Model<T>& model, const NamedTensors<T>& params,
                          const DatasetManifest& manifest,
                          std::optional<Split> split = std::nullopt) {
  const ModelConfig& cfg = model.config();
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};
  for (const DatasetRecord& rec : manifest.records) {
    if (split && rec.split != *split) continue;
    const auto f = detail::load_features<T>(cfg, rec);
    const ForwardResult<T> out =
        model.forward(params, f.audio ? &*f.audio : nullptr, f.lyrics ? &*f.lyrics : nullptr,
                      RunMode::kEval);
    int pred = 0;
    for (int c = 1; c < cfg.classes; ++c) {
      if (out.probs.data()[c] > out.probs.data()[pred]) pred = c;
    }
    confusion[static_cast<std::size_t>(rec.label)][static_cast<std::size_t>(pred)] += 1;
  }
  return report_from_confusion(confusion);
}

/// Full training run: fresh parameters, the checkpoint directory rewritten
/// after every completed epoch (initial state included, so epochs=0 still
/// leaves a loadable checkpoint), and train_log.csv alongside it. The
/// manifest's lyrics grid is adopted into the model config first.
template <typename T>
TrainOutcome train_model(const RunConfig& run, const DatasetManifest& manifest,
                         const std::filesystem::path& checkpoint_dir,
                         std::ostream* progress = nullptr) {
  const ModelConfig cfg = apply_manifest_grid(run.model, manifest);
  detail::preflight_records(cfg, manifest);

  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (manifest.records[i].split == Split::kTrain) train_idx.push_back(i);
  }
  if (train_idx.empty()) throw InputError("manifest has no train-split records");

  Model<T> model(cfg);
  NamedTensors<T> params = model.init_params();
  AdamState<T> adam = AdamState<T>::init(params);

  std::filesystem::create_directories(checkpoint_dir);
  save_checkpoint(checkpoint_dir, cfg, params, adam, 0);

  std::ofstream log_file(checkpoint_dir / "train_log.csv", std::ios::trunc);
  if (!log_file) {
    throw IoError("cannot write train log in " + checkpoint_dir.string());
  }
  log_file << "epoch,loss,val_macro_f1\n";

  const std::uint64_t shuffle_root = mix_seed(cfg.seed, kStreamShuffle);
  const std::uint64_t dropout_root = mix_seed(cfg.seed, kStreamDropout);
  const int batch_size = run.optimizer.batch;

  TrainOutcome outcome;
  char buf[160];
  for (int epoch = 0; epoch < run.optimizer.epochs; ++epoch) {
    std::vector<std::size_t> order = train_idx;
    Rng shuffle_rng(mix_seed(shuffle_root, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::uint64_t j = shuffle_rng.bounded(static_cast<std::uint64_t>(i) + 1);
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    std::size_t pos = 0;
    int batch_no = 0;
    while (pos < order.size()) {
      const std::size_t batch_n = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                                        order.size() - pos);
      NamedTensors<T> grad_sum = params.zeros_like();
      for (std::size_t k = 0; k < batch_n; ++k) {
        const std::size_t rec_i = order[pos + k];
        const DatasetRecord& rec = manifest.records[rec_i];
        const auto f = detail::load_features<T>(cfg, rec);
        const std::uint64_t sample_seed =
            mix_seed(mix_seed(dropout_root, static_cast<std::uint64_t>(epoch)),
                     static_cast<std::uint64_t>(rec_i));
        ForwardResult<T> out =
            model.forward(params, f.audio ? &*f.audio : nullptr,
                          f.lyrics ? &*f.lyrics : nullptr, RunMode::kTrain, sample_seed);
        const double loss = cross_entropy(out.probs, rec.label);
        if (!std::isfinite(loss)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                              std::to_string(batch_no) + " (clip " + rec.clip_id + ")");
        }
        loss_sum += loss;
        NamedTensors<T> grads = model.backward(params, out.cache, rec.label);
        for (auto& [name, g] : grad_sum) {
          const Tensor<T>& gi = grads.at(name);
          T* acc = g.data();
          const T* src = gi.data();
          for (Index e = 0; e < g.size(); ++e) acc[e] += src[e];
        }
      }
      const T inv = static_cast<T>(1.0 / static_cast<double>(batch_n));
      for (auto& [name, g] : grad_sum) {
        T* p = g.data();
        for (Index e = 0; e < g.size(); ++e) p[e] *= inv;
      }
      adam_step(params, grad_sum, adam, run.optimizer.adam);
      pos += batch_n;
      ++batch_no;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(order.size());
    const EvalReport val = evaluate_model(model, params, manifest, Split::kVal);
    stats.val_macro_f1 = val.samples > 0 ? val.macro_f1 : 0.0;
    outcome.log.push_back(stats);
    outcome.epochs_run = epoch + 1;

    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", stats.epoch, stats.loss,
                  stats.val_macro_f1);
    log_file << buf;
    log_file.flush();
    if (progress) {
      std::snprintf(buf, sizeof(buf), "epoch %d  loss %.6f  val_f1 %.4f\n", stats.epoch,
                    stats.loss, stats.val_macro_f1);
      *progress << buf << std::flush;
    }

    save_checkpoint(checkpoint_dir, cfg, params, adam, epoch + 1);

    if (run.optimizer.early_stop_train_f1) {
      const EvalReport tr = evaluate_model(model, params, manifest, Split::kTrain);
      if (tr.macro_f1 >= *run.optimizer.early_stop_train_f1) {
        outcome.early_stopped = true;
        if (progress) {
          std::snprintf(buf, sizeof(buf), "early stop: train macro F1 %.4f at epoch %d\n",
                        tr.macro_f1, epoch);
          *progress << buf << std::flush;
        }
        break;
      }
    }
  }
  return outcome;
}

}  // namespace moodnet
