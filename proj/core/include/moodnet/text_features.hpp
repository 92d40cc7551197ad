#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "moodnet/tensor.hpp"

// Lyrics front end: pre-trained 100-d word embeddings plus the padded
// lines x words x 100 tensor the text tower consumes.

namespace moodnet {

inline constexpr Index kEmbeddingDim = 100;

/// Immutable token -> 100-d vector table. Lookup is case-insensitive (keys
/// are lowercased at load; lowercase the query before calling lookup).
class EmbeddingTable {
 public:
  /// Parses "token v1 .. v100" lines. Lines with a different value count are
  /// skipped and counted; a file with zero valid lines is an IoError.
  static EmbeddingTable load(const std::filesystem::path& path);

  /// Returns the 100-value vector for the token, or nullptr when out of
  /// vocabulary.
  const float* lookup(const std::string& token) const;

  std::size_t size() const { return table_.size(); }
  std::size_t skipped_lines() const { return skipped_; }

 private:
  std::unordered_map<std::string, std::vector<float>> table_;
  std::size_t skipped_ = 0;
};

/// Splits lyrics into lines of tokens: line breaks delimit lines; within a
/// line, lowercase, strip everything except word characters and apostrophes,
/// split on whitespace. Empty lines are dropped.
std::vector<std::vector<std::string>> tokenize_lyrics(const std::string& text);

/// values: [lines_max, words_max, 100]; mask: [lines_max, words_max] with 1
/// at real token positions (OOV included) and 0 at padding.
struct LyricsTensor {
  Tensor<float> values;
  Tensor<float> mask;
};

/// Places the embedding of token w of line l at (l, w); OOV tokens map to
/// the zero vector; lines/tokens beyond the grid are truncated; the rest is
/// zero padding. Throws ConfigError when lines_max or words_max < 1.
LyricsTensor build_lyrics_tensor(const std::vector<std::vector<std::string>>& lines,
                                 const EmbeddingTable& table, Index lines_max, Index words_max);

}  // namespace moodnet
