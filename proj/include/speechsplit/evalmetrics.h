// speechsplit/evalmetrics.h

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

#ifndef SPEECHSPLIT_EVALMETRICS_H_
#define SPEECHSPLIT_EVALMETRICS_H_

#include <string>
#include <vector>

#include "speechsplit/featureio.h"
#include "speechsplit/matrix.h"

namespace speechsplit {

// ---------------------------------------------------------------------------
// Objective pitch metrics. All return fractions in [0, 1] and reject
// unequal-length inputs rather than truncating.
// ---------------------------------------------------------------------------

// Among frames voiced in both contours, the fraction whose relative f0
// deviation exceeds tol; 0 when no frame is voiced in both.
double gpe(const PitchContour& ref, const PitchContour& est, double tol = 0.2);

// Fraction of frames whose voiced/unvoiced decision differs.
double vde(const PitchContour& ref, const PitchContour& est);

// Fraction of frames that are a voicing error or a both-voiced gross pitch
// error. Always >= vde.
double ffe(const PitchContour& ref, const PitchContour& est, double tol = 0.2);

// Full-scale reference values reported for the original system; recorded for
// context only, never used as desk-scale acceptance targets.
constexpr double kReferenceGpe = 0.0104;
constexpr double kReferenceVde = 0.0814;
constexpr double kReferenceFfe = 0.0886;

// ---------------------------------------------------------------------------
// Analysis of synthetic-feature spectrograms. The synthetic generator writes
// f0 as a movable bump inside the low mel band, so pitch can be estimated
// back from the spectrogram by locating the band's peak.
// ---------------------------------------------------------------------------

struct SynthAnalysisParams {
  int pitch_band = 16;          // mel bins [0, pitch_band) carry the f0 bump
  double center_lo = 1.5;       // bump center at u = 0
  double center_hi = 14.5;      // bump center at u = 1
  double nominal_f0_lo = 100.0; // u -> Hz mapping used for metric contours
  double nominal_f0_span = 300.0;
  double gap_ratio = 0.5;       // gap if band energy < gap_ratio * median
  double min_band_energy = 0.05;
  int min_syllable_frames = 4;
  int max_env_shift = 6;        // search range for envelope alignment
};

// Per-frame pitch-band energy (sum over the band).
std::vector<double> pitch_band_energy(const Matf& mel, const SynthAnalysisParams& ap);

// Normalized pitch estimate per frame (peak position in the band mapped to
// [0, 1]); negative for unvoiced frames.
std::vector<double> estimate_f0_norm(const Matf& mel, const SynthAnalysisParams& ap);

// Contour in nominal Hz (100 + 300u by default); 0 at unvoiced frames.
PitchContour estimate_f0_mel(const Matf& mel, const SynthAnalysisParams& ap);

struct Syllable {
  int start = 0;
  int length = 0;  // to the next syllable onset (includes the trailing gap)
  int voiced_length = 0;
};

// Voiced-run segmentation on the pitch band; syllable length runs to the
// next onset so recovered lengths are comparable with generator durations.
std::vector<Syllable> segment_syllables(const Matf& mel,
                                        const SynthAnalysisParams& ap);

// Mean normalized pitch per syllable (voiced frames only).
std::vector<double> syllable_pitches(const Matf& mel,
                                     const std::vector<Syllable>& syllables,
                                     const SynthAnalysisParams& ap);

// Time-mean log spectral envelope over the content band, voiced frames only.
std::vector<double> content_envelope(const Matf& mel, const SynthAnalysisParams& ap);

// ---------------------------------------------------------------------------
// Factor-recovery scores against synthetic ground truth. Each score is a
// margin: positive values mean the recovered factor is closer to the target
// utterance, negative closer to the source. Rhythm and pitch use Pearson
// correlation differences (range [-2, 2]); timbre uses an envelope
// classification margin in [-1, 1].
// ---------------------------------------------------------------------------

struct AspectScores {
  double rhythm = 0.0;
  double pitch = 0.0;
  double timbre = 0.0;
  bool valid = false;  // false when syllable segmentation failed
};

struct PairTruth {
  std::vector<double> source_durations, target_durations;
  std::vector<double> source_targets, target_targets;
  const Matf* source_mel = nullptr;
  const Matf* target_mel = nullptr;
};

AspectScores factor_recovery(const Matf& output, const PairTruth& truth,
                             const SynthAnalysisParams& ap);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_EVALMETRICS_H_
