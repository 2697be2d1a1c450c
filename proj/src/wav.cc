// src/wav.cc

// Copyright 2026  The SpeechSplit C++ Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "speechsplit/wav.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace speechsplit {

namespace {

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

}  // namespace

std::vector<float> resample_samples(const std::vector<float>& in, int rate_in,
                                    int rate_out) {
  if (rate_in == rate_out) return in;
  if (rate_in <= 0 || rate_out <= 0) throw DataError("resample: bad sample rate");
  const int kTaps = 16;
  double ratio = static_cast<double>(rate_in) / rate_out;
  double cutoff = ratio > 1.0 ? 1.0 / ratio : 1.0;  // anti-alias on decimation
  size_t n_out = static_cast<size_t>(
      std::floor(static_cast<double>(in.size()) * rate_out / rate_in));
  std::vector<float> out(n_out);
  for (size_t n = 0; n < n_out; ++n) {
    double pos = static_cast<double>(n) * ratio;
    int center = static_cast<int>(std::floor(pos));
    double acc = 0.0;
    for (int j = -kTaps; j <= kTaps + 1; ++j) {
      int i = center + j;
      if (i < 0 || i >= static_cast<int>(in.size())) continue;
      double d = pos - i;
      double window = 0.5 + 0.5 * std::cos(M_PI * d / (kTaps + 1));
      if (std::fabs(d) > kTaps + 1) window = 0.0;
      acc += in[i] * cutoff * sinc(cutoff * d) * window;
    }
    out[n] = static_cast<float>(acc);
  }
  return out;
}

Waveform load_waveform(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open audio file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  if (bytes.empty()) throw DataError("empty audio: " + path);
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;
  size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + off;
    uint32_t chunk_len = read_u32(hdr + 4);
    const uint8_t* body = hdr + 8;
    if (off + 8 + chunk_len > bytes.size())
      chunk_len = static_cast<uint32_t>(bytes.size() - off - 8);
    if (std::memcmp(hdr, "fmt ", 4) == 0 && chunk_len >= 16) {
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (data == nullptr || rate == 0) throw DataError("malformed WAV: " + path);
  if (data_len == 0) throw DataError("empty audio: " + path);
  if (channels != 1)
    throw DataError("unsupported channel count " + std::to_string(channels) +
                    " (mono required): " + path);

  std::vector<float> samples;
  if (format == 1 && bits == 16) {
    size_t n = data_len / 2;
    samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t v = static_cast<int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
      samples[i] = static_cast<float>(v) / 32768.0f;
    }
  } else if (format == 1 && bits == 8) {
    samples.resize(data_len);
    for (size_t i = 0; i < data_len; ++i)
      samples[i] = (static_cast<float>(data[i]) - 128.0f) / 128.0f;
  } else if (format == 3 && bits == 32) {
    size_t n = data_len / 4;
    samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      uint32_t u = read_u32(data + 4 * i);
      float v;
      std::memcpy(&v, &u, 4);
      samples[i] = v;
    }
  } else {
    throw DataError("unsupported WAV encoding (format " + std::to_string(format) +
                    ", " + std::to_string(bits) + " bit): " + path);
  }
  if (samples.empty()) throw DataError("empty audio: " + path);

  Waveform wave;
  wave.sample_rate = kSampleRate;
  wave.samples = resample_samples(samples, static_cast<int>(rate), kSampleRate);
  for (float& s : wave.samples) {
    if (!std::isfinite(s)) throw DataError("non-finite sample in " + path);
    if (s > 1.0f) s = 1.0f;
    if (s < -1.0f) s = -1.0f;
  }
  return wave;
}

void save_waveform(const std::string& path, const Waveform& wave) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write audio file: " + path);
  uint32_t n = static_cast<uint32_t>(wave.samples.size());
  uint32_t data_len = n * 2;
  uint32_t riff_len = 36 + data_len;
  uint32_t rate = static_cast<uint32_t>(wave.sample_rate);
  uint32_t byte_rate = rate * 2;
  auto put_u32 = [&f](uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                 static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    f.write(b, 4);
  };
  auto put_u16 = [&f](uint16_t v) {
    char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    f.write(b, 2);
  };
  f.write("RIFF", 4);
  put_u32(riff_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(rate);
  put_u32(byte_rate);
  put_u16(2);
  put_u16(16);
  f.write("data", 4);
  put_u32(data_len);
  for (float s : wave.samples) {
    float c = s > 1.0f ? 1.0f : (s < -1.0f ? -1.0f : s);
    int16_t v = static_cast<int16_t>(std::lrint(c * 32767.0f));
    put_u16(static_cast<uint16_t>(v));
  }
}

}  // namespace speechsplit
