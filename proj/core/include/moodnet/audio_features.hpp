#pragma once

#include "moodnet/tensor.hpp"
#include "moodnet/wav.hpp"

// Mel-spectrogram front end: resample/trim to a fixed-length 12 kHz clip,
// Hann STFT, triangular mel filterbank, log amplitude, per-clip min-max
// normalization. All internal math is double; the cached feature is float32.

namespace moodnet {

inline constexpr double kAudioSampleRate = 12000.0;
inline constexpr Index kClipSamples = 349440;  // 29.12 s at 12 kHz
inline constexpr Index kNfft = 512;
inline constexpr Index kHop = 256;
inline constexpr Index kFreqBins = kNfft / 2 + 1;              // 257
inline constexpr Index kFrames = kClipSamples / kHop + 1;      // 1366
inline constexpr Index kMelBands = 96;
inline constexpr double kMelFmin = 0.0;
inline constexpr double kMelFmax = 6000.0;

/// m = 2595 * log10(1 + f/700)
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Linear-interpolation resample to 12 kHz, then center-trim or zero-pad the
/// tail to exactly kClipSamples. Throws InputError on an empty signal or a
/// sample rate below 8 kHz.
AudioClip standardize(const AudioClip& clip);

/// Power spectrogram [kFreqBins x kFrames] of a standardized clip: centered
/// reflect-padded frames, periodic Hann window, nfft 512, hop 256, |X|^2.
Tensor<double> stft_power(const AudioClip& clip);

/// Triangular filterbank [n_mels x (nfft/2+1)]: n_mels+2 band edges equally
/// spaced on the mel scale over [fmin, fmax], row i the triangle over edges
/// (i, i+1, i+2), rescaled so each row's maximum over the discrete bins is
/// exactly 1. Throws ConfigError on an invalid frequency range.
Tensor<double> mel_filterbank(Index n_mels = kMelBands, Index nfft = kNfft,
                              double sample_rate = kAudioSampleRate, double fmin = kMelFmin,
                              double fmax = kMelFmax);

/// Full front end for a standardized clip: filterbank x power STFT, then
/// 10*log10(max(S, 1e-10)), then min-max to [0,1] (all zeros when the clip
/// has no dynamic range). Shape [96, 1366, 1].
Tensor<float> mel_spectrogram(const AudioClip& standardized);

}  // namespace moodnet
