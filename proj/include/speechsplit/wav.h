// speechsplit/wav.h

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

#ifndef SPEECHSPLIT_WAV_H_
#define SPEECHSPLIT_WAV_H_

#include <string>
#include <vector>

#include "speechsplit/base.h"

namespace speechsplit {

constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<float> samples;  // amplitudes in [-1, 1]
  int sample_rate = kSampleRate;
};

// Reads a mono PCM WAV (8/16-bit integer or 32-bit float) and resamples to
// 16 kHz if needed. Errors name the offending file.
Waveform load_waveform(const std::string& path);

// 16-bit PCM writer, for producing test fixtures and auditioning.
void save_waveform(const std::string& path, const Waveform& wave);

// Windowed-sinc rate conversion.
std::vector<float> resample_samples(const std::vector<float>& in, int rate_in,
                                    int rate_out);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_WAV_H_
