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

#ifndef SNOREID_AUDIO_H_
#define SNOREID_AUDIO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace snoreid {

// Mono PCM utterance with samples scaled to [-1, 1).
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 16000;
};

// Reads a RIFF/WAVE file holding 16-bit signed little-endian mono PCM.
// Any other encoding, channel count or bit depth is rejected with
// ErrorCode::kUnsupportedAudio; truncated or malformed files with kParseError.
AudioClip ReadWav(const std::filesystem::path& path);

// Writes 16-bit mono PCM. Samples are clipped to [-1, 1] and rounded.
void WriteWav(const std::filesystem::path& path, std::span<const double> samples,
              int sample_rate_hz);

std::vector<std::int16_t> QuantizePcm16(std::span<const double> samples);

}  // namespace snoreid

#endif  // SNOREID_AUDIO_H_
