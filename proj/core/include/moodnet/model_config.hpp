#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "moodnet/nn_ops.hpp"
#include "moodnet/tensor.hpp"

// Architecture description: twin convolutional towers (audio, lyrics) whose
// fixed-length output vectors feed a shared dense cascade ending in a 5-way
// softmax. Depth picks how many conv/pool blocks each tower stacks.

namespace moodnet {

inline constexpr int kNumClasses = 5;
inline constexpr int kMaxDepth = 5;
inline constexpr int kHeadDenseCount = 4;

/// Per-block output channels, divided by ModelConfig::channel_div.
inline constexpr std::array<Index, kMaxDepth> kTowerChannels = {128, 256, 512, 1024, 2048};
/// Every tower flattens or projects to this many units (after channel_div).
inline constexpr Index kTowerOutUnits = 2048;
/// Head dense widths, divided by ModelConfig::head_div.
inline constexpr std::array<Index, kHeadDenseCount> kHeadWidths = {2048, 1024, 512, 256};

inline constexpr std::array<PoolSpec, kMaxDepth> kAudioPools = {
    PoolSpec{2, 4}, PoolSpec{2, 4}, PoolSpec{2, 4}, PoolSpec{3, 5}, PoolSpec{4, 4}};
inline constexpr std::array<PoolSpec, kMaxDepth> kTextPools = {
    PoolSpec{2, 2}, PoolSpec{2, 2}, PoolSpec{2, 2}, PoolSpec{3, 2}, PoolSpec{4, 2}};

struct ModelConfig {
  int depth = 5;  // conv/pool blocks per tower: 3, 4, or 5
  bool use_audio = true;
  bool use_lyrics = true;
  Index lines_max = 0;  // lyrics grid; required >= 4 when use_lyrics
  Index words_max = 0;
  double dropout = 0.2;
  int classes = kNumClasses;
  std::uint64_t seed = 0;
  Index audio_bins = 96;
  Index audio_frames = 1366;
  Index channel_div = 1;  // divides every tower channel width
  Index head_div = 1;     // divides every head dense width
};

/// Throws ConfigError on any violated field constraint.
void validate(const ModelConfig& cfg);

enum class Modality { kAudio, kText };

struct BlockTrace {
  Index channels = 0;
  Shape conv_out;  // [h, w, c] after same-padded conv (input spatial kept)
  bool padded = false;
  Shape pool_in;  // conv_out zero-padded up to the pool window if needed
  Shape pool_out;
};

/// Shape-only walk of one tower; no tensor is materialized.
struct TowerTrace {
  Modality modality = Modality::kAudio;
  Shape input;  // [h, w, c]
  std::vector<BlockTrace> blocks;
  bool projected = false;  // global max-pool + dense to out_units
  Index flat = 0;          // vector width entering the head path
  Index out_units = 0;     // tower output width (kTowerOutUnits / channel_div)
};

TowerTrace trace_tower(const ModelConfig& cfg, Modality modality);

const std::array<PoolSpec, kMaxDepth>& pool_schedule(Modality modality);

/// Names and shapes of every learnable tensor, in canonical order:
/// audio tower, text tower, head. Checkpoints and gradient collections use
/// this exact ordering.
std::vector<std::pair<std::string, Shape>> expected_param_shapes(const ModelConfig& cfg);

/// Total learnable scalar count.
Index parameter_count(const ModelConfig& cfg);

}  // namespace moodnet
