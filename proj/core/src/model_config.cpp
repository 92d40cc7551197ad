#include "moodnet/model_config.hpp"

#include "moodnet/errors.hpp"
#include "moodnet/text_features.hpp"

namespace moodnet {

void validate(const ModelConfig& cfg) {
  if (cfg.depth < 3 || cfg.depth > kMaxDepth) {
    throw ConfigError("model depth must be 3, 4, or 5, got " + std::to_string(cfg.depth));
  }
  if (!cfg.use_audio && !cfg.use_lyrics) {
    throw ConfigError("at least one modality (audio, lyrics) must be enabled");
  }
  if (cfg.classes != kNumClasses) {
    throw ConfigError("class count is fixed at " + std::to_string(kNumClasses) + ", got " +
                      std::to_string(cfg.classes));
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(cfg.dropout));
  }
  if (cfg.use_audio && (cfg.audio_bins < 1 || cfg.audio_frames < 1)) {
    throw ConfigError("audio grid must be positive, got " + std::to_string(cfg.audio_bins) + "x" +
                      std::to_string(cfg.audio_frames));
  }
  if (cfg.use_lyrics && (cfg.lines_max < 4 || cfg.words_max < 4)) {
    throw ConfigError("lyrics grid must be at least 4x4, got " + std::to_string(cfg.lines_max) +
                      "x" + std::to_string(cfg.words_max));
  }
  if (cfg.channel_div < 1 || kTowerChannels[0] % cfg.channel_div != 0) {
    throw ConfigError("channel_div must divide " + std::to_string(kTowerChannels[0]) + ", got " +
                      std::to_string(cfg.channel_div));
  }
  if (cfg.head_div < 1 || kHeadWidths[kHeadDenseCount - 1] % cfg.head_div != 0) {
    throw ConfigError("head_div must divide " + std::to_string(kHeadWidths[kHeadDenseCount - 1]) +
                      ", got " + std::to_string(cfg.head_div));
  }
}

const std::array<PoolSpec, kMaxDepth>& pool_schedule(Modality modality) {
  return modality == Modality::kAudio ? kAudioPools : kTextPools;
}

TowerTrace trace_tower(const ModelConfig& cfg, Modality modality) {
  validate(cfg);
  TowerTrace trace;
  trace.modality = modality;
  trace.out_units = kTowerOutUnits / cfg.channel_div;
  trace.input = modality == Modality::kAudio
                    ? Shape{cfg.audio_bins, cfg.audio_frames, 1}
                    : Shape{cfg.lines_max, cfg.words_max, kEmbeddingDim};
  const auto& pools = pool_schedule(modality);

  Index h = trace.input[0], w = trace.input[1];
  for (int b = 0; b < cfg.depth; ++b) {
    BlockTrace block;
    block.channels = kTowerChannels[static_cast<std::size_t>(b)] / cfg.channel_div;
    block.conv_out = {h, w, block.channels};
    const PoolSpec& pool = pools[static_cast<std::size_t>(b)];
    const Index ph = std::max(h, pool.ph), pw = std::max(w, pool.pw);
    block.padded = ph != h || pw != w;
    block.pool_in = {ph, pw, block.channels};
    block.pool_out = maxpool2d_out_shape(block.pool_in, pool);
    h = block.pool_out[0];
    w = block.pool_out[1];
    trace.blocks.push_back(block);
  }

  const Index c = trace.blocks.back().channels;
  trace.projected = !(h == 1 && w == 1 && c == trace.out_units);
  trace.flat = trace.projected ? c : c * h * w;
  return trace;
}

namespace {

void tower_param_shapes(const ModelConfig& cfg, Modality modality,
                        std::vector<std::pair<std::string, Shape>>& out) {
  const std::string prefix = modality == Modality::kAudio ? "audio" : "text";
  const TowerTrace trace = trace_tower(cfg, modality);
  Index cin = trace.input[2];
  for (int b = 0; b < cfg.depth; ++b) {
    const Index cout = trace.blocks[static_cast<std::size_t>(b)].channels;
    const std::string name = prefix + ".conv" + std::to_string(b + 1);
    out.emplace_back(name + ".kernel", Shape{3, 3, cin, cout});
    out.emplace_back(name + ".bias", Shape{cout});
    cin = cout;
  }
  if (trace.projected) {
    out.emplace_back(prefix + ".proj.weight", Shape{trace.flat, trace.out_units});
    out.emplace_back(prefix + ".proj.bias", Shape{trace.out_units});
  }
}

}  // namespace

std::vector<std::pair<std::string, Shape>> expected_param_shapes(const ModelConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<std::string, Shape>> out;
  Index fused = 0;
  if (cfg.use_audio) {
    tower_param_shapes(cfg, Modality::kAudio, out);
    fused += kTowerOutUnits / cfg.channel_div;
  }
  if (cfg.use_lyrics) {
    tower_param_shapes(cfg, Modality::kText, out);
    fused += kTowerOutUnits / cfg.channel_div;
  }
  Index in = fused;
  for (int i = 0; i < kHeadDenseCount; ++i) {
    const Index width = kHeadWidths[static_cast<std::size_t>(i)] / cfg.head_div;
    const std::string name = "head.dense" + std::to_string(i + 1);
    out.emplace_back(name + ".weight", Shape{in, width});
    out.emplace_back(name + ".bias", Shape{width});
    in = width;
  }
  out.emplace_back("head.out.weight", Shape{in, static_cast<Index>(cfg.classes)});
  out.emplace_back("head.out.bias", Shape{static_cast<Index>(cfg.classes)});
  return out;
}

Index parameter_count(const ModelConfig& cfg) {
  Index total = 0;
  for (const auto& [name, shape] : expected_param_shapes(cfg)) {
    total += detail::checked_numel(shape);
  }
  return total;
}

}  // namespace moodnet
