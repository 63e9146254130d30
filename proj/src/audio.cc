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

#include "snoreid/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "snoreid/error.h"

namespace snoreid {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::string* out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xFF));
  out->push_back(static_cast<char>((v >> 8) & 0xFF));
}

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

AudioClip ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kParseError, name + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t size = ReadU32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate an oversized data chunk header (streamed writers) but
      // nothing else.
      if (std::memcmp(chunk, "data", 4) != 0) {
        throw Error(ErrorCode::kParseError, name + ": truncated chunk");
      }
      size = static_cast<std::uint32_t>(bytes.size() - body);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::kParseError, name + ": short fmt chunk");
      const unsigned char* f = bytes.data() + body;
      std::uint16_t format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = ReadU32(f + 4);
      bits = ReadU16(f + 14);
      if (format == kFormatExtensible && size >= 26) format = ReadU16(f + 24);
      if (format != kFormatPcm) {
        throw Error(ErrorCode::kUnsupportedAudio,
                    name + ": only linear PCM is supported (format tag " +
                        std::to_string(format) + ")");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw Error(ErrorCode::kParseError, name + ": missing fmt chunk");
  if (data == nullptr) throw Error(ErrorCode::kParseError, name + ": missing data chunk");
  if (channels != 1) {
    throw Error(ErrorCode::kUnsupportedAudio,
                name + ": expected mono, got " + std::to_string(channels) + " channels");
  }
  if (bits != 16) {
    throw Error(ErrorCode::kUnsupportedAudio,
                name + ": expected 16-bit samples, got " + std::to_string(bits));
  }
  if (rate == 0) throw Error(ErrorCode::kBadSampleRate, name + ": sample rate is zero");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  const std::size_t n = data_size / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = static_cast<std::int16_t>(ReadU16(data + 2 * i));
    clip.samples[i] = v / 32768.0;
  }
  return clip;
}

std::vector<std::int16_t> QuantizePcm16(std::span<const double> samples) {
  std::vector<std::int16_t> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double v = std::clamp(samples[i], -1.0, 1.0) * 32767.0;
    out[i] = static_cast<std::int16_t>(std::lround(v));
  }
  return out;
}

void WriteWav(const std::filesystem::path& path, std::span<const double> samples,
              int sample_rate_hz) {
  const std::vector<std::int16_t> pcm = QuantizePcm16(samples);
  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(&out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, kFormatPcm);
  PutU16(&out, 1);
  PutU32(&out, static_cast<std::uint32_t>(sample_rate_hz));
  PutU32(&out, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, data_bytes);
  for (std::int16_t s : pcm) PutU16(&out, static_cast<std::uint16_t>(s));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace snoreid
