#include "moodnet/featurize.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "moodnet/audio_features.hpp"
#include "moodnet/errors.hpp"
#include "moodnet/tensor_io.hpp"
#include "moodnet/text_features.hpp"
#include "moodnet/wav.hpp"

namespace moodnet {

namespace {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lyrics file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading lyrics file: " + path.string());
  return buf.str();
}

/// Writes atomically unless the file already holds exactly these bytes.
bool write_if_changed(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (std::filesystem::exists(path, ec) &&
      std::filesystem::file_size(path, ec) == bytes.size() && !ec) {
    std::ifstream in(path, std::ios::binary);
    std::string existing((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in && existing == bytes) return false;
  }
  detail::write_file_atomic(path, bytes);
  return true;
}

std::string relative_to(const std::filesystem::path& file, const std::filesystem::path& base) {
  std::error_code ec;
  const std::filesystem::path rel = std::filesystem::proximate(file, base, ec);
  return ec ? file.generic_string() : rel.generic_string();
}

}  // namespace

FeaturizeResult featurize_corpus(const RunConfig& run, const std::vector<RawAssetRecord>& records,
                                 const std::filesystem::path& cache_dir,
                                 const std::filesystem::path& out_manifest,
                                 std::ostream* log) {
  const ModelConfig& cfg = run.model;
  if (!cfg.use_audio && !cfg.use_lyrics) {
    throw ConfigError("at least one modality (audio, lyrics) must be enabled");
  }
  if (cfg.use_audio && (cfg.audio_bins != kMelBands || cfg.audio_frames != kFrames)) {
    throw ConfigError("the audio front end emits " + std::to_string(kMelBands) + "x" +
                      std::to_string(kFrames) + " spectrograms; config asks for " +
                      std::to_string(cfg.audio_bins) + "x" + std::to_string(cfg.audio_frames));
  }

  std::optional<EmbeddingTable> embeddings;
  if (cfg.use_lyrics) {
    if (run.paths.embeddings.empty()) {
      throw ConfigError("lyrics modality is enabled but paths.embeddings is not set");
    }
    embeddings = EmbeddingTable::load(run.paths.embeddings);
  }

  FeaturizeResult result;
  auto fail = [&](const RawAssetRecord& rec, const std::string& reason) {
    result.failures.emplace_back(rec.clip_id, reason);
    if (log) *log << "clip " << rec.clip_id << ": " << reason << "\n";
  };

  // First pass tokenizes every lyrics file so the corpus grid is known
  // before any tensor is built.
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> tokens;
  std::vector<const RawAssetRecord*> survivors;
  Index corpus_lines = 0;
  Index corpus_words = 0;
  for (const RawAssetRecord& rec : records) {
    if (rec.clip_id.find('/') != std::string::npos ||
        rec.clip_id.find('\\') != std::string::npos) {
      fail(rec, "clip_id must not contain path separators");
      continue;
    }
    if (cfg.use_lyrics) {
      std::vector<std::vector<std::string>> lines;
      try {
        lines = tokenize_lyrics(read_text_file(rec.lyrics_path));
      } catch (const IoError& e) {
        fail(rec, e.what());
        continue;
      }
      corpus_lines = std::max(corpus_lines, static_cast<Index>(lines.size()));
      for (const auto& line : lines) {
        corpus_words = std::max(corpus_words, static_cast<Index>(line.size()));
      }
      tokens.emplace(rec.clip_id, std::move(lines));
    }
    survivors.push_back(&rec);
  }

  result.lines_max = cfg.lines_max > 0 ? cfg.lines_max : corpus_lines;
  result.words_max = cfg.words_max > 0 ? cfg.words_max : corpus_words;
  if (cfg.use_lyrics && (result.lines_max < 1 || result.words_max < 1)) {
    throw ConfigError("corpus yields an empty lyrics grid; no clip has any tokens");
  }

  std::filesystem::create_directories(cache_dir);
  const std::filesystem::path manifest_dir = out_manifest.has_parent_path()
                                                 ? out_manifest.parent_path()
                                                 : std::filesystem::current_path();
  std::filesystem::create_directories(manifest_dir);

  DatasetManifest manifest;
  manifest.lines_max = result.lines_max;
  manifest.words_max = result.words_max;
  for (const RawAssetRecord* recp : survivors) {
    const RawAssetRecord& rec = *recp;
    DatasetRecord out;
    out.clip_id = rec.clip_id;
    out.label = rec.label;
    out.split = rec.split;
    try {
      if (cfg.use_audio) {
        const Tensor<float> mel = mel_spectrogram(standardize(read_wav(rec.audio_path)));
        const std::filesystem::path file = cache_dir / (rec.clip_id + ".mel.mnt");
        write_if_changed(file, serialize_tensor(mel)) ? ++result.written : ++result.skipped;
        out.audio_feat = relative_to(file, manifest_dir);
        out.audio_path = file;
      }
      if (cfg.use_lyrics) {
        const LyricsTensor lyr = build_lyrics_tensor(tokens.at(rec.clip_id), *embeddings,
                                                     result.lines_max, result.words_max);
        const std::filesystem::path file = cache_dir / (rec.clip_id + ".lyr.mnt");
        write_if_changed(file, serialize_tensor(lyr.values)) ? ++result.written
                                                             : ++result.skipped;
        out.lyrics_feat = relative_to(file, manifest_dir);
        out.lyrics_path = file;
      }
    } catch (const IoError& e) {
      fail(rec, e.what());
      continue;
    } catch (const InputError& e) {
      fail(rec, e.what());
      continue;
    }
    if (log) *log << "clip " << rec.clip_id << ": ok\n";
    manifest.records.push_back(std::move(out));
  }

  result.manifest_rewritten = write_if_changed(out_manifest, serialize_dataset_manifest(manifest));
  return result;
}

}  // namespace moodnet
