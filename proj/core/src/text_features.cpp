#include "moodnet/text_features.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "moodnet/errors.hpp"

namespace moodnet {

namespace {

std::string to_lower(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

/// Word characters, apostrophes, and any non-ASCII byte survive; everything
/// else becomes a separator. Multibyte UTF-8 sequences pass through intact.
bool keep_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '\'' || c >= 0x80;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());

  EmbeddingTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;

    std::vector<float> vec;
    vec.reserve(kEmbeddingDim);
    double v = 0.0;
    while (ls >> v) vec.push_back(static_cast<float>(v));
    if (static_cast<Index>(vec.size()) != kEmbeddingDim || !ls.eof()) {
      table.skipped_ += 1;
      continue;
    }
    table.table_.emplace(to_lower(token), std::move(vec));
  }
  if (in.bad()) throw IoError("failed reading embedding file: " + path.string());
  if (table.table_.empty()) {
    throw IoError("embedding file has no valid lines: " + path.string());
  }
  return table;
}

const float* EmbeddingTable::lookup(const std::string& token) const {
  auto it = table_.find(token);
  return it == table_.end() ? nullptr : it->second.data();
}

std::vector<std::vector<std::string>> tokenize_lyrics(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string cleaned = to_lower(raw);
    for (char& c : cleaned) {
      if (!keep_char(static_cast<unsigned char>(c))) c = ' ';
    }
    std::vector<std::string> tokens;
    std::istringstream ls(cleaned);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (!tokens.empty()) lines.push_back(std::move(tokens));
  }
  return lines;
}

LyricsTensor build_lyrics_tensor(const std::vector<std::vector<std::string>>& lines,
                                 const EmbeddingTable& table, Index lines_max, Index words_max) {
  if (lines_max < 1 || words_max < 1) {
    throw ConfigError("lyrics grid must be at least 1x1, got " + std::to_string(lines_max) + "x" +
                      std::to_string(words_max));
  }
  LyricsTensor out{Tensor<float>({lines_max, words_max, kEmbeddingDim}),
                   Tensor<float>({lines_max, words_max})};
  const Index n_lines = std::min<Index>(static_cast<Index>(lines.size()), lines_max);
  for (Index l = 0; l < n_lines; ++l) {
    const auto& line = lines[static_cast<std::size_t>(l)];
    const Index n_words = std::min<Index>(static_cast<Index>(line.size()), words_max);
    for (Index w = 0; w < n_words; ++w) {
      out.mask[l * words_max + w] = 1.0f;
      const float* vec = table.lookup(line[static_cast<std::size_t>(w)]);
      if (vec == nullptr) continue;
      float* dst = out.values.data() + (l * words_max + w) * kEmbeddingDim;
      for (Index d = 0; d < kEmbeddingDim; ++d) dst[d] = vec[d];
    }
  }
  return out;
}

}  // namespace moodnet
