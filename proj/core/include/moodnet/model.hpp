#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moodnet/errors.hpp"
#include "moodnet/model_config.hpp"
#include "moodnet/named_tensors.hpp"
#include "moodnet/nn_ops.hpp"
#include "moodnet/optim.hpp"
#include "moodnet/rng.hpp"
#include "moodnet/tensor.hpp"

namespace moodnet {

enum class RunMode { kTrain, kEval };

template <typename T>
struct TowerCache {
  std::vector<Tensor<T>> conv_in;   // block inputs
  std::vector<Tensor<T>> conv_out;  // pre-activation conv outputs
  std::vector<Tensor<T>> pool_in;   // post-ReLU, zero-padded when the trace says so
  Tensor<T> spatial_out;            // last pooled activation [h, w, c]
  Tensor<T> proj_in;                // flattened global max (projected towers only)
  Tensor<T> vec;                    // tower output vector
};

template <typename T>
struct ForwardCache {
  bool train_mode = false;
  std::optional<TowerCache<T>> audio;
  std::optional<TowerCache<T>> text;
  std::vector<Tensor<T>> dense_in;  // inputs to head.dense1..4
  std::vector<Tensor<T>> dense_z;   // their pre-activations
  std::vector<Tensor<T>> masks;     // their dropout masks
  Tensor<T> out_in;                 // input to head.out
  Tensor<T> logits;
  Tensor<T> probs;
};

template <typename T>
struct ForwardResult {
  Tensor<T> probs;
  ForwardCache<T> cache;
};

/// The assembled network for one ModelConfig. Parameters live outside the
/// model in a NamedTensors collection, so the same instance serves training,
/// evaluation, and checkpoint inspection.
template <typename T>
class Model {
 public:
  explicit Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    if (cfg_.use_audio) audio_trace_ = trace_tower(cfg_, Modality::kAudio);
    if (cfg_.use_lyrics) text_trace_ = trace_tower(cfg_, Modality::kText);
  }

  const ModelConfig& config() const { return cfg_; }
  const std::optional<TowerTrace>& audio_trace() const { return audio_trace_; }
  const std::optional<TowerTrace>& text_trace() const { return text_trace_; }

  /// Glorot-uniform weights, zero biases; every weight tensor draws from its
  /// own stream derived from the config seed, so insertion order never
  /// perturbs sibling tensors.
  NamedTensors<T> init_params() const {
    NamedTensors<T> params;
    std::uint64_t stream = 0;
    for (const auto& [name, shape] : expected_param_shapes(cfg_)) {
      const bool is_weight = shape.size() > 1;
      if (!is_weight) {
        params.add(name, Tensor<T>::zeros(shape));
        continue;
      }
      double fan_in = 0.0, fan_out = 0.0;
      if (shape.size() == 4) {
        fan_in = static_cast<double>(shape[0] * shape[1] * shape[2]);
        fan_out = static_cast<double>(shape[0] * shape[1] * shape[3]);
      } else {
        fan_in = static_cast<double>(shape[0]);
        fan_out = static_cast<double>(shape[1]);
      }
      const T a = static_cast<T>(std::sqrt(6.0 / (fan_in + fan_out)));
      const std::uint64_t tensor_seed = mix_seed(mix_seed(cfg_.seed, kStreamInit), stream++);
      params.add(name, Tensor<T>::uniform(shape, -a, a, tensor_seed));
    }
    return params;
  }

  /// Runs the network on one sample. Train mode applies dropout (streams
  /// derived from sample_seed per head layer) and fills the cache needed by
  /// backward; eval mode is deterministic.
  ForwardResult<T> forward(const NamedTensors<T>& params, const Tensor<T>* audio,
                           const Tensor<T>* lyrics, RunMode mode,
                           std::uint64_t sample_seed = 0) const {
    ForwardCache<T> cache;
    cache.train_mode = mode == RunMode::kTrain;

    std::optional<Tensor<T>> audio_vec, text_vec;
    if (cfg_.use_audio) {
      if (audio == nullptr) throw InputError("model expects an audio input");
      cache.audio = run_tower(params, *audio_trace_, "audio", *audio);
      audio_vec = cache.audio->vec;
    }
    if (cfg_.use_lyrics) {
      if (lyrics == nullptr) throw InputError("model expects a lyrics input");
      cache.text = run_tower(params, *text_trace_, "text", *lyrics);
      text_vec = cache.text->vec;
    }

    Tensor<T> x = audio_vec && text_vec ? concat(*audio_vec, *text_vec)
                                        : (audio_vec ? std::move(*audio_vec) : std::move(*text_vec));
    const DropoutSpec spec{cfg_.dropout,
                           cache.train_mode ? DropoutMode::kTrain : DropoutMode::kEval};
    for (int i = 0; i < kHeadDenseCount; ++i) {
      const std::string name = "head.dense" + std::to_string(i + 1);
      cache.dense_in.push_back(std::move(x));
      Tensor<T> z = dense_forward(cache.dense_in.back(), params.at(name + ".weight"),
                                  params.at(name + ".bias"));
      Tensor<T> a = relu(z);
      cache.dense_z.push_back(std::move(z));
      DropoutResult<T> dr = dropout(a, spec, mix_seed(sample_seed, static_cast<std::uint64_t>(i)));
      cache.masks.push_back(std::move(dr.mask));
      x = std::move(dr.y);
    }
    cache.out_in = std::move(x);
    cache.logits = dense_forward(cache.out_in, params.at("head.out.weight"),
                                 params.at("head.out.bias"));
    cache.probs = softmax(cache.logits);

    ForwardResult<T> result{cache.probs, std::move(cache)};
    return result;
  }

  /// Gradients of the cross-entropy loss at `label` w.r.t. every parameter,
  /// name-congruent with init_params(). Requires a train-mode cache.
  NamedTensors<T> backward(const NamedTensors<T>& params, const ForwardCache<T>& cache,
                           Index label) const {
    if (!cache.train_mode) {
      throw StateError("backward needs a cache from a train-mode forward pass");
    }
    if (label < 0 || label >= static_cast<Index>(cfg_.classes)) {
      throw InputError("label " + std::to_string(label) + " out of range [0, " +
                       std::to_string(cfg_.classes) + ")");
    }

    NamedTensors<T> grads;
    for (const auto& [name, shape] : expected_param_shapes(cfg_)) {
      grads.add(name, Tensor<T>::zeros(shape));
    }

    Tensor<T> g = softmax_ce_grad(cache.probs, label);
    {
      DenseGrads<T> dg = dense_backward(cache.out_in, params.at("head.out.weight"), g);
      grads.at("head.out.weight") = std::move(dg.dweights);
      grads.at("head.out.bias") = std::move(dg.dbias);
      g = std::move(dg.dx);
    }
    for (int i = kHeadDenseCount - 1; i >= 0; --i) {
      g = hadamard(cache.masks[static_cast<std::size_t>(i)], g);
      g = relu_backward(cache.dense_z[static_cast<std::size_t>(i)], g);
      const std::string name = "head.dense" + std::to_string(i + 1);
      DenseGrads<T> dg = dense_backward(cache.dense_in[static_cast<std::size_t>(i)],
                                        params.at(name + ".weight"), g);
      grads.at(name + ".weight") = std::move(dg.dweights);
      grads.at(name + ".bias") = std::move(dg.dbias);
      g = std::move(dg.dx);
    }

    Index offset = 0;
    if (cfg_.use_audio) {
      tower_backward(params, grads, *audio_trace_, "audio", *cache.audio,
                     slice_vec(g, offset, audio_trace_->out_units));
      offset += audio_trace_->out_units;
    }
    if (cfg_.use_lyrics) {
      tower_backward(params, grads, *text_trace_, "text", *cache.text,
                     slice_vec(g, offset, text_trace_->out_units));
    }
    return grads;
  }

 private:
  TowerCache<T> run_tower(const NamedTensors<T>& params, const TowerTrace& trace,
                          const std::string& prefix, const Tensor<T>& input) const {
    if (input.shape() != trace.input) {
      throw ShapeError(prefix + " input shape " + detail::shape_str(input.shape()) +
                       " does not match configured " + detail::shape_str(trace.input));
    }
    const auto& pools = pool_schedule(trace.modality);
    TowerCache<T> cache;
    Tensor<T> x = input;
    for (int b = 0; b < cfg_.depth; ++b) {
      const BlockTrace& block = trace.blocks[static_cast<std::size_t>(b)];
      const std::string name = prefix + ".conv" + std::to_string(b + 1);
      cache.conv_in.push_back(std::move(x));
      Tensor<T> z = conv2d_forward(cache.conv_in.back(), params.at(name + ".kernel"),
                                   params.at(name + ".bias"));
      Tensor<T> a = relu(z);
      cache.conv_out.push_back(std::move(z));
      if (block.padded) a = zero_pad_hw(a, block.pool_in[0], block.pool_in[1]);
      x = maxpool2d_forward(a, pools[static_cast<std::size_t>(b)]);
      cache.pool_in.push_back(std::move(a));
    }
    cache.spatial_out = std::move(x);
    if (trace.projected) {
      const Shape& s = cache.spatial_out.shape();
      const Tensor<T> gmax = maxpool2d_forward(cache.spatial_out, PoolSpec{s[0], s[1]});
      cache.proj_in = gmax.flatten();
      cache.vec = dense_forward(cache.proj_in, params.at(prefix + ".proj.weight"),
                                params.at(prefix + ".proj.bias"));
    } else {
      cache.vec = cache.spatial_out.flatten();
    }
    return cache;
  }

  void tower_backward(const NamedTensors<T>& params, NamedTensors<T>& grads,
                      const TowerTrace& trace, const std::string& prefix,
                      const TowerCache<T>& cache, Tensor<T> dvec) const {
    const auto& pools = pool_schedule(trace.modality);
    Tensor<T> ds;
    if (trace.projected) {
      DenseGrads<T> dg = dense_backward(cache.proj_in, params.at(prefix + ".proj.weight"), dvec);
      grads.at(prefix + ".proj.weight") = std::move(dg.dweights);
      grads.at(prefix + ".proj.bias") = std::move(dg.dbias);
      const Shape& s = cache.spatial_out.shape();
      ds = maxpool2d_backward(cache.spatial_out, PoolSpec{s[0], s[1]},
                              dg.dx.reshape({1, 1, dg.dx.size()}));
    } else {
      ds = dvec.reshape(cache.spatial_out.shape());
    }
    for (int b = cfg_.depth - 1; b >= 0; --b) {
      const BlockTrace& block = trace.blocks[static_cast<std::size_t>(b)];
      const std::string name = prefix + ".conv" + std::to_string(b + 1);
      Tensor<T> da = maxpool2d_backward(cache.pool_in[static_cast<std::size_t>(b)],
                                        pools[static_cast<std::size_t>(b)], ds);
      if (block.padded) da = crop_hw(da, block.conv_out[0], block.conv_out[1]);
      const Tensor<T> dz = relu_backward(cache.conv_out[static_cast<std::size_t>(b)], da);
      ConvGrads<T> cg = conv2d_backward(cache.conv_in[static_cast<std::size_t>(b)],
                                        params.at(name + ".kernel"), dz);
      grads.at(name + ".kernel") = std::move(cg.dkernel);
      grads.at(name + ".bias") = std::move(cg.dbias);
      ds = std::move(cg.dx);
    }
  }

  static Tensor<T> slice_vec(const Tensor<T>& v, Index offset, Index count) {
    Tensor<T> out({count});
    for (Index i = 0; i < count; ++i) out[i] = v[offset + i];
    return out;
  }

  ModelConfig cfg_;
  std::optional<TowerTrace> audio_trace_;
  std::optional<TowerTrace> text_trace_;
};

}  // namespace moodnet
