#pragma once

#include <filesystem>
#include <vector>

namespace moodnet {

/// Mono audio signal with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  double sample_rate = 0.0;
};

/// Reads a mono 16-bit PCM WAV file. Samples are scaled by 1/32768.
/// Throws IoError on unreadable or malformed files and InputError when the
/// format is not mono 16-bit PCM.
AudioClip read_wav(const std::filesystem::path& path);

}  // namespace moodnet
