// speechsplit/featureio.h

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

#ifndef SPEECHSPLIT_FEATUREIO_H_
#define SPEECHSPLIT_FEATUREIO_H_

#include <memory>
#include <string>
#include <vector>

#include "speechsplit/matrix.h"
#include "speechsplit/wav.h"

namespace speechsplit {

constexpr int kMelBins = 80;
constexpr int kPitchBins = 257;          // 256 quantized levels + 1 unvoiced
constexpr int kUnvoicedBin = 256;

struct FeatureConfig {
  int sample_rate = kSampleRate;
  int frame_length = 1024;  // 64 ms at 16 kHz
  int frame_hop = 256;      // 16 ms
  int mel_bins = kMelBins;
  double mel_fmin_hz = 90.0;
  double mel_fmax_hz = 7600.0;
  double db_floor = -100.0;  // normalized 0.0
  double db_ceil = 0.0;      // normalized 1.0
  double pitch_fmin_hz = 50.0;
  double pitch_fmax_hz = 600.0;
  double voicing_threshold = 0.55;   // normalized autocorrelation peak
  double energy_gate_rms = 1e-4;     // frames quieter than this are unvoiced

  bool operator==(const FeatureConfig&) const = default;
};

// Framewise f0 in Hz; 0 marks unvoiced frames. One value per
// mel-spectrogram frame.
using PitchContour = std::vector<float>;

struct SpeakerStats {
  std::string speaker_id;
  double mean_f0 = 0.0;
  double std_f0 = 0.0;  // population convention, voiced frames only
};

// Pitch contour quantized into 256 bins plus the unvoiced bin (index 256).
struct QuantizedPitch {
  std::vector<uint16_t> bins;

  int frames() const { return static_cast<int>(bins.size()); }
  Matf onehot() const;
  static QuantizedPitch from_onehot(const Matf& rows);
};

// T x 80 normalized log-magnitude mel spectrogram,
// T = floor((N - frame_length) / hop) + 1.
Matf mel_spectrogram(const Waveform& wave, const FeatureConfig& cfg = {});

// Pitch tracker interface; the shipped default is autocorrelation-based with
// a 50-600 Hz search range and an energy voicing gate.
class PitchTracker {
 public:
  virtual ~PitchTracker() = default;
  virtual PitchContour extract(const Waveform& wave,
                               const FeatureConfig& cfg) const = 0;
};

class AutocorrPitchTracker : public PitchTracker {
 public:
  PitchContour extract(const Waveform& wave, const FeatureConfig& cfg) const override;
};

PitchContour extract_pitch(const Waveform& wave, const FeatureConfig& cfg = {});

// Mean/std of voiced f0 values pooled over the contours. Errors on an
// all-unvoiced corpus and on zero variance (both signal corrupt data).
SpeakerStats compute_speaker_stats(const std::string& speaker_id,
                                   const std::vector<PitchContour>& contours);

// v -> n = (v - mean) / (4 std) + 0.5, clipped to [0, 1];
// bin = min(floor(256 n), 255); unvoiced -> bin 256.
QuantizedPitch normalize_and_quantize(const PitchContour& contour,
                                      const SpeakerStats& stats);

uint16_t quantize_f0(double f0_hz, const SpeakerStats& stats);

// Bin center back to Hz. Inverse of quantize_f0 up to half a bin width
// whenever the value was not clipped.
double dequantize_bin(uint16_t bin, const SpeakerStats& stats);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_FEATUREIO_H_
