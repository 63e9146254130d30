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

#ifndef SNOREID_DSP_H_
#define SNOREID_DSP_H_

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "snoreid/audio.h"
#include "snoreid/matrix.h"

namespace snoreid {

// MFCC front-end parameters. Defaults: 25 ms Hann frames with a 10 ms hop at
// 16 kHz, 512-point FFT, 40 HTK-mel triangles over 0-8 kHz with unit peak
// height, natural log with a floor, orthonormal DCT-II keeping c0..c24.
// No pre-emphasis, liftering, deltas or mean normalization.
struct MfccConfig {
  int sample_rate_hz = 16000;
  int frame_length = 400;
  int frame_shift = 160;
  int n_fft = 512;
  int num_mel_bins = 40;
  double low_freq_hz = 0.0;
  double high_freq_hz = 8000.0;
  int num_ceps = 25;
  double log_floor = 1e-10;

  int num_bins() const { return n_fft / 2 + 1; }
  // Stable text form; two configs extract identical features iff equal.
  std::string Fingerprint() const;
  void Validate() const;
};

// Per-utterance MFCC observations, one row per frame.
struct FeatureMatrix {
  Matrix frames;
  double frame_hop_s = 0.010;
  double frame_len_s = 0.025;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
  bool empty() const { return frames.rows() == 0; }
};

// Network input: 50 consecutive frames around a center, 24 to the left and
// 25 to the right, concatenated in time order.
inline constexpr int kContextLeft = 24;
inline constexpr int kContextRight = 25;
inline constexpr int kContextFrames = kContextLeft + 1 + kContextRight;

struct StackedFeature {
  std::vector<double> vector;
  std::size_t center_frame = 0;
};

double HtkMel(double hz);
double HtkMelInverse(double mel);

// w[n] = 0.5 * (1 - cos(2*pi*n / (N - 1))).
std::vector<double> HannWindow(int length);

// floor((num_samples - frame_length) / frame_shift) + 1, or 0 when the clip is
// shorter than one frame.
std::size_t NumFrames(std::size_t num_samples, const MfccConfig& config);

// Frame i covers samples [shift*i, shift*i + length), Hann-weighted.
Matrix FrameAndWindow(const AudioClip& clip, const MfccConfig& config = {});

// |DFT|^2 of the zero-padded frame for bins 0..n_fft/2.
std::vector<double> PowerSpectrum(std::span<const double> frame, int n_fft = 512);

// num_mel_bins x num_bins triangle weights.
Matrix MelFilterbank(const MfccConfig& config);

// num_ceps x num_mel_bins orthonormal DCT-II basis.
Matrix DctMatrix(int num_ceps, int num_mel_bins);

class MfccExtractor {
 public:
  explicit MfccExtractor(MfccConfig config = {});

  const MfccConfig& config() const { return config_; }
  const Matrix& filterbank() const { return filterbank_; }
  const Matrix& dct() const { return dct_; }
  const std::vector<double>& window() const { return window_; }

  FeatureMatrix Extract(const AudioClip& clip) const;
  // T x num_bins power spectra; the front half of Extract.
  Matrix PowerSpectrogram(const AudioClip& clip) const;

 private:
  void CheckClip(const AudioClip& clip) const;

  MfccConfig config_;
  std::vector<double> window_;
  Matrix filterbank_;
  Matrix dct_;
};

FeatureMatrix ExtractMfcc(const AudioClip& clip, const MfccConfig& config = {});

// Frames outside [0, T) are replaced by the nearest edge frame.
StackedFeature StackContext(const FeatureMatrix& features, std::size_t center);

// Centers min(stride * i, T - 1) for i in [0, count).
std::vector<std::size_t> ObservationCenters(std::size_t num_frames, int count = 15,
                                            int stride = 5);
std::vector<StackedFeature> SelectObservations(const FeatureMatrix& features,
                                               int count = 15, int stride = 5);

// One CSV row per frame, 9 significant digits, header c0..c{n-1}.
void WriteFeatureCsv(std::ostream& out, const FeatureMatrix& features);
// One CSV row per frame, header bin0..bin{n-1}.
void WriteSpectrogramCsv(std::ostream& out, const Matrix& spectrogram);

}  // namespace snoreid

#endif  // SNOREID_DSP_H_
