// Copyright (c) 2026 The snoreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "snoreid/dsp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "fft.h"
#include "snoreid/error.h"
#include "snoreid/kernels.h"

namespace snoreid {

std::string MfccConfig::Fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "mfcc:sr=" << sample_rate_hz << ",len=" << frame_length
     << ",shift=" << frame_shift << ",nfft=" << n_fft << ",mel=" << num_mel_bins
     << ",lo=" << low_freq_hz << ",hi=" << high_freq_hz << ",ceps=" << num_ceps
     << ",floor=" << log_floor;
  return os.str();
}

void MfccConfig::Validate() const {
  if (sample_rate_hz <= 0) {
    throw Error(ErrorCode::kBadSampleRate, "sample rate must be positive");
  }
  if (frame_length <= 1 || frame_shift <= 0 || n_fft < frame_length ||
      num_mel_bins <= 0 || num_ceps <= 0 || num_ceps > num_mel_bins ||
      low_freq_hz < 0.0 || high_freq_hz <= low_freq_hz ||
      high_freq_hz > 0.5 * sample_rate_hz || log_floor <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid MFCC config " + Fingerprint());
  }
}

double HtkMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double HtkMelInverse(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> HannWindow(int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / (length - 1)));
  }
  return w;
}

std::size_t NumFrames(std::size_t num_samples, const MfccConfig& config) {
  const auto len = static_cast<std::size_t>(config.frame_length);
  if (num_samples < len) return 0;
  return (num_samples - len) / config.frame_shift + 1;
}

Matrix FrameAndWindow(const AudioClip& clip, const MfccConfig& config) {
  config.Validate();
  if (clip.sample_rate_hz != config.sample_rate_hz) {
    throw Error(ErrorCode::kBadSampleRate,
                "clip rate " + std::to_string(clip.sample_rate_hz) +
                    " != configured " + std::to_string(config.sample_rate_hz));
  }
  const std::size_t num_frames = NumFrames(clip.samples.size(), config);
  if (num_frames == 0) {
    throw Error(ErrorCode::kClipTooShort,
                std::to_string(clip.samples.size()) + " samples < frame length " +
                    std::to_string(config.frame_length));
  }
  const std::vector<double> window = HannWindow(config.frame_length);
  Matrix frames(num_frames, config.frame_length);
  for (std::size_t t = 0; t < num_frames; ++t) {
    const std::size_t start = t * config.frame_shift;
    for (int n = 0; n < config.frame_length; ++n) {
      frames(t, n) = clip.samples[start + n] * window[n];
    }
  }
  return frames;
}

std::vector<double> PowerSpectrum(std::span<const double> frame, int n_fft) {
  std::vector<double> out(n_fft / 2 + 1);
  internal::RealPowerSpectrum(frame, n_fft, out);
  return out;
}

Matrix MelFilterbank(const MfccConfig& config) {
  config.Validate();
  const int num_mel = config.num_mel_bins;
  const double mel_lo = HtkMel(config.low_freq_hz);
  const double mel_hi = HtkMel(config.high_freq_hz);
  std::vector<double> edges(num_mel + 2);
  for (int i = 0; i < num_mel + 2; ++i) {
    edges[i] = HtkMelInverse(mel_lo + (mel_hi - mel_lo) * i / (num_mel + 1));
  }
  Matrix fb(num_mel, config.num_bins());
  const double bin_hz = static_cast<double>(config.sample_rate_hz) / config.n_fft;
  for (int m = 0; m < num_mel; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < config.num_bins(); ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f >= left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f <= right) {
        w = (right - f) / (right - center);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

Matrix DctMatrix(int num_ceps, int num_mel_bins) {
  Matrix dct(num_ceps, num_mel_bins);
  const double s0 = std::sqrt(1.0 / num_mel_bins);
  const double s = std::sqrt(2.0 / num_mel_bins);
  for (int i = 0; i < num_ceps; ++i) {
    for (int m = 0; m < num_mel_bins; ++m) {
      dct(i, m) = (i == 0 ? s0 : s) *
                  std::cos(std::numbers::pi * i * (2.0 * m + 1.0) / (2.0 * num_mel_bins));
    }
  }
  return dct;
}

MfccExtractor::MfccExtractor(MfccConfig config)
    : config_(config),
      window_(HannWindow(config.frame_length)),
      filterbank_(MelFilterbank(config)),
      dct_(DctMatrix(config.num_ceps, config.num_mel_bins)) {}

void MfccExtractor::CheckClip(const AudioClip& clip) const {
  if (clip.sample_rate_hz != config_.sample_rate_hz) {
    throw Error(ErrorCode::kBadSampleRate,
                "clip rate " + std::to_string(clip.sample_rate_hz) +
                    " != configured " + std::to_string(config_.sample_rate_hz));
  }
  if (NumFrames(clip.samples.size(), config_) == 0) {
    throw Error(ErrorCode::kClipTooShort,
                std::to_string(clip.samples.size()) + " samples < frame length " +
                    std::to_string(config_.frame_length));
  }
}

Matrix MfccExtractor::PowerSpectrogram(const AudioClip& clip) const {
  CheckClip(clip);
  return kernels::omp::FramePowerSpectra(clip.samples, window_, config_.frame_shift,
                                         config_.n_fft);
}

FeatureMatrix MfccExtractor::Extract(const AudioClip& clip) const {
  FeatureMatrix out;
  out.frames = kernels::omp::MelCepstra(PowerSpectrogram(clip), filterbank_, dct_,
                                        config_.log_floor);
  out.frame_hop_s = static_cast<double>(config_.frame_shift) / config_.sample_rate_hz;
  out.frame_len_s = static_cast<double>(config_.frame_length) / config_.sample_rate_hz;
  return out;
}

FeatureMatrix ExtractMfcc(const AudioClip& clip, const MfccConfig& config) {
  return MfccExtractor(config).Extract(clip);
}

StackedFeature StackContext(const FeatureMatrix& features, std::size_t center) {
  if (features.empty()) {
    throw Error(ErrorCode::kEmptyFeatureMatrix, "cannot stack an empty feature matrix");
  }
  const auto last = static_cast<long>(features.num_frames()) - 1;
  if (static_cast<long>(center) > last) {
    throw Error(ErrorCode::kInvalidArgument,
                "center " + std::to_string(center) + " out of range");
  }
  const std::size_t dim = features.dim();
  StackedFeature out;
  out.center_frame = center;
  out.vector.reserve(kContextFrames * dim);
  for (long offset = -kContextLeft; offset <= kContextRight; ++offset) {
    const long t = std::clamp(static_cast<long>(center) + offset, 0L, last);
    auto row = features.frames.row(static_cast<std::size_t>(t));
    out.vector.insert(out.vector.end(), row.begin(), row.end());
  }
  return out;
}

std::vector<std::size_t> ObservationCenters(std::size_t num_frames, int count,
                                            int stride) {
  if (num_frames == 0) {
    throw Error(ErrorCode::kEmptyFeatureMatrix, "no frames to select from");
  }
  if (count <= 0 || stride <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "count and stride must be positive");
  }
  std::vector<std::size_t> centers(count);
  for (int i = 0; i < count; ++i) {
    centers[i] = std::min(static_cast<std::size_t>(stride) * i, num_frames - 1);
  }
  return centers;
}

std::vector<StackedFeature> SelectObservations(const FeatureMatrix& features,
                                               int count, int stride) {
  std::vector<StackedFeature> out;
  for (std::size_t c : ObservationCenters(features.num_frames(), count, stride)) {
    out.push_back(StackContext(features, c));
  }
  return out;
}

namespace {

void WriteRows(std::ostream& out, const Matrix& m, const char* prefix) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    out << (c ? "," : "") << prefix << c;
  }
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", m(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace

void WriteFeatureCsv(std::ostream& out, const FeatureMatrix& features) {
  WriteRows(out, features.frames, "c");
}

void WriteSpectrogramCsv(std::ostream& out, const Matrix& spectrogram) {
  WriteRows(out, spectrogram, "bin");
}

}  // namespace snoreid
