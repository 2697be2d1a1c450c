// src/plot.cc

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

#include "speechsplit/plot.h"

#include <algorithm>
#include <cstdint>

#include "speechsplit/base.h"
#include "speechsplit/featureio.h"
#include "speechsplit/persistence.h"

namespace speechsplit {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

// Dark blue -> yellow heat ramp.
Rgb heat(float v) {
  v = std::clamp(v, 0.0f, 1.0f);
  auto lerp = [](float a, float b, float t) {
    return static_cast<uint8_t>(a + (b - a) * t);
  };
  if (v < 0.5f) {
    float t = v / 0.5f;
    return {lerp(10, 200, t), lerp(10, 60, t), lerp(60, 150, t)};
  }
  float t = (v - 0.5f) / 0.5f;
  return {lerp(200, 255, t), lerp(60, 230, t), lerp(150, 40, t)};
}

void write_bmp(const std::string& path, int width, int height,
               const std::vector<Rgb>& pixels) {
  const int row_bytes = (width * 3 + 3) & ~3;
  const uint32_t data_size = static_cast<uint32_t>(row_bytes) * height;
  const uint32_t file_size = 54 + data_size;
  std::string out;
  out.reserve(file_size);
  auto put16 = [&out](uint16_t v) {
    out.push_back(static_cast<char>(v));
    out.push_back(static_cast<char>(v >> 8));
  };
  auto put32 = [&out](uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
  };
  out += "BM";
  put32(file_size);
  put32(0);
  put32(54);
  put32(40);
  put32(static_cast<uint32_t>(width));
  put32(static_cast<uint32_t>(height));
  put16(1);
  put16(24);
  put32(0);
  put32(data_size);
  put32(2835);
  put32(2835);
  put32(0);
  put32(0);
  for (int y = height - 1; y >= 0; --y) {  // BMP rows run bottom-up
    size_t row_start = out.size();
    for (int x = 0; x < width; ++x) {
      const Rgb& p = pixels[static_cast<size_t>(y) * width + x];
      out.push_back(static_cast<char>(p.b));
      out.push_back(static_cast<char>(p.g));
      out.push_back(static_cast<char>(p.r));
    }
    while (out.size() - row_start < static_cast<size_t>(row_bytes))
      out.push_back('\0');
  }
  atomic_write_file(path, out);
}

}  // namespace

void render_feature_plot(const std::string& path, const Matf& mel,
                         const std::vector<uint16_t>& pitch_bins,
                         int time_scale) {
  if (mel.rows < 1) throw DataError("plot: empty spectrogram");
  const int bin_scale = 3;
  const int spec_h = mel.cols * bin_scale;
  const int contour_h = pitch_bins.empty() ? 0 : 96;
  const int gap = pitch_bins.empty() ? 0 : 4;
  const int width = mel.rows * time_scale;
  const int height = spec_h + gap + contour_h;
  std::vector<Rgb> img(static_cast<size_t>(width) * height, Rgb{30, 30, 30});

  for (int t = 0; t < mel.rows; ++t) {
    for (int b = 0; b < mel.cols; ++b) {
      Rgb c = heat(mel.at(t, b));
      for (int dy = 0; dy < bin_scale; ++dy) {
        int y = spec_h - 1 - (b * bin_scale + dy);  // low bins at the bottom
        for (int dx = 0; dx < time_scale; ++dx)
          img[static_cast<size_t>(y) * width + t * time_scale + dx] = c;
      }
    }
  }
  if (!pitch_bins.empty()) {
    if (static_cast<int>(pitch_bins.size()) != mel.rows)
      throw DataError("plot: contour length differs from spectrogram");
    for (int t = 0; t < mel.rows; ++t) {
      uint16_t bin = pitch_bins[static_cast<size_t>(t)];
      if (bin >= kUnvoicedBin) continue;
      int y = spec_h + gap + (contour_h - 1) -
              static_cast<int>(static_cast<double>(bin) / 255.0 * (contour_h - 1));
      for (int dx = 0; dx < time_scale; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          int yy = std::clamp(y + dy, spec_h + gap, height - 1);
          img[static_cast<size_t>(yy) * width + t * time_scale + dx] =
              Rgb{90, 220, 90};
        }
    }
  }
  write_bmp(path, width, height, img);
}

}  // namespace speechsplit
