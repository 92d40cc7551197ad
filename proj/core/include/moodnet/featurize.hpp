#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "moodnet/dataset.hpp"
#include "moodnet/run_config.hpp"

namespace moodnet {

struct FeaturizeResult {
  std::size_t written = 0;  // feature files actually (re)written
  std::size_t skipped = 0;  // feature files whose content was already current
  std::vector<std::pair<std::string, std::string>> failures;  // clip_id, reason
  Index lines_max = 0;
  Index words_max = 0;
  bool manifest_rewritten = false;
};

/// Turns raw WAV + lyrics assets into cached feature tensors plus a feature
/// manifest. Only the configured modalities are computed. The lyrics grid is
/// the corpus maximum unless the config pins nonzero values. Unreadable
/// assets fail per record (collected in the result) without aborting the
/// run; cache writes are skipped when the existing file already holds the
/// same bytes, and the manifest is only rewritten when its content changed.
FeaturizeResult featurize_corpus(const RunConfig& run, const std::vector<RawAssetRecord>& records,
                                 const std::filesystem::path& cache_dir,
                                 const std::filesystem::path& out_manifest,
                                 std::ostream* log = nullptr);

}  // namespace moodnet
