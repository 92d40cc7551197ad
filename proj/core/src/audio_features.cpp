#include "moodnet/audio_features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "moodnet/errors.hpp"
#include "moodnet/fft.hpp"

namespace moodnet {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

AudioClip standardize(const AudioClip& clip) {
  if (clip.samples.empty()) throw InputError("cannot standardize an empty audio signal");
  if (clip.sample_rate < 8000.0) {
    throw InputError("sample rate " + std::to_string(clip.sample_rate) +
                     " Hz is below the 8 kHz minimum");
  }

  std::vector<double> resampled;
  if (clip.sample_rate == kAudioSampleRate) {
    resampled = clip.samples;
  } else {
    const double ratio = clip.sample_rate / kAudioSampleRate;
    const Index n_in = static_cast<Index>(clip.samples.size());
    const Index n_out = static_cast<Index>(static_cast<double>(n_in - 1) / ratio) + 1;
    resampled.resize(static_cast<std::size_t>(n_out));
    for (Index i = 0; i < n_out; ++i) {
      const double pos = static_cast<double>(i) * ratio;
      const Index lo = static_cast<Index>(pos);
      const Index hi = std::min<Index>(lo + 1, n_in - 1);
      const double frac = pos - static_cast<double>(lo);
      resampled[static_cast<std::size_t>(i)] =
          clip.samples[static_cast<std::size_t>(lo)] * (1.0 - frac) +
          clip.samples[static_cast<std::size_t>(hi)] * frac;
    }
  }

  AudioClip out;
  out.sample_rate = kAudioSampleRate;
  out.samples.assign(static_cast<std::size_t>(kClipSamples), 0.0);
  const Index n = static_cast<Index>(resampled.size());
  if (n >= kClipSamples) {
    const Index start = (n - kClipSamples) / 2;
    std::copy_n(resampled.begin() + start, kClipSamples, out.samples.begin());
  } else {
    std::copy(resampled.begin(), resampled.end(), out.samples.begin());
  }
  return out;
}

Tensor<double> stft_power(const AudioClip& clip) {
  if (clip.sample_rate != kAudioSampleRate ||
      static_cast<Index>(clip.samples.size()) != kClipSamples) {
    throw InputError("stft_power expects a standardized clip (12 kHz, " +
                     std::to_string(kClipSamples) + " samples)");
  }

  const Index pad = kNfft / 2;
  std::vector<double> x(static_cast<std::size_t>(kClipSamples + 2 * pad));
  for (Index i = 0; i < pad; ++i) {  // reflect about the first/last sample
    x[static_cast<std::size_t>(i)] = clip.samples[static_cast<std::size_t>(pad - i)];
    x[static_cast<std::size_t>(kClipSamples + pad + i)] =
        clip.samples[static_cast<std::size_t>(kClipSamples - 2 - i)];
  }
  std::copy(clip.samples.begin(), clip.samples.end(), x.begin() + pad);

  std::vector<double> window(static_cast<std::size_t>(kNfft));
  for (Index n = 0; n < kNfft; ++n) {
    window[static_cast<std::size_t>(n)] =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(n) / static_cast<double>(kNfft)));
  }

  Tensor<double> power({kFreqBins, kFrames});
  std::vector<std::complex<double>> frame(static_cast<std::size_t>(kNfft));
  for (Index t = 0; t < kFrames; ++t) {
    const Index start = t * kHop;
    for (Index n = 0; n < kNfft; ++n) {
      frame[static_cast<std::size_t>(n)] = {
          x[static_cast<std::size_t>(start + n)] * window[static_cast<std::size_t>(n)], 0.0};
    }
    fft_radix2(frame);
    for (Index k = 0; k < kFreqBins; ++k) {
      power.at({k, t}) = std::norm(frame[static_cast<std::size_t>(k)]);
    }
  }
  return power;
}

Tensor<double> mel_filterbank(Index n_mels, Index nfft, double sample_rate, double fmin,
                              double fmax) {
  if (n_mels < 1) throw ConfigError("mel filterbank needs at least one band");
  if (!(fmin >= 0.0) || !(fmax > fmin) || fmax > sample_rate / 2.0) {
    throw ConfigError("invalid mel frequency range [" + std::to_string(fmin) + ", " +
                      std::to_string(fmax) + "] for sample rate " + std::to_string(sample_rate));
  }

  const Index n_bins = nfft / 2 + 1;
  const Index n_edges = n_mels + 2;
  std::vector<double> edge_hz(static_cast<std::size_t>(n_edges));
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  for (Index e = 0; e < n_edges; ++e) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(e) /
                                    static_cast<double>(n_edges - 1);
    edge_hz[static_cast<std::size_t>(e)] = mel_to_hz(mel);
  }

  Tensor<double> fb({n_mels, n_bins});
  for (Index i = 0; i < n_mels; ++i) {
    const double f_lo = edge_hz[static_cast<std::size_t>(i)];
    const double f_mid = edge_hz[static_cast<std::size_t>(i + 1)];
    const double f_hi = edge_hz[static_cast<std::size_t>(i + 2)];
    double row_max = 0.0;
    for (Index k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      const double rise = (f - f_lo) / (f_mid - f_lo);
      const double fall = (f_hi - f) / (f_hi - f_mid);
      const double w = std::max(0.0, std::min(rise, fall));
      fb.at({i, k}) = w;
      row_max = std::max(row_max, w);
    }
    if (row_max <= 0.0) {
      throw ConfigError("mel band " + std::to_string(i) +
                        " covers no FFT bin; increase nfft or widen the range");
    }
    for (Index k = 0; k < n_bins; ++k) fb.at({i, k}) /= row_max;
  }
  return fb;
}

Tensor<float> mel_spectrogram(const AudioClip& standardized) {
  const Tensor<double> power = stft_power(standardized);
  const Tensor<double> fb = mel_filterbank();

  Tensor<double> logmel({kMelBands, kFrames});
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Index m = 0; m < kMelBands; ++m) {
    for (Index t = 0; t < kFrames; ++t) {
      double s = 0.0;
      for (Index k = 0; k < kFreqBins; ++k) s += fb[m * kFreqBins + k] * power[k * kFrames + t];
      const double db = 10.0 * std::log10(std::max(s, 1e-10));
      logmel[m * kFrames + t] = db;
      lo = std::min(lo, db);
      hi = std::max(hi, db);
    }
  }

  Tensor<float> out({kMelBands, kFrames, 1});
  if (hi > lo) {
    for (Index i = 0; i < logmel.size(); ++i) {
      out[i] = static_cast<float>((logmel[i] - lo) / (hi - lo));
    }
  }
  return out;
}

}  // namespace moodnet
