// speechsplit/synthgen.h

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

#ifndef SPEECHSPLIT_SYNTHGEN_H_
#define SPEECHSPLIT_SYNTHGEN_H_

#include <vector>

#include "speechsplit/dataset.h"
#include "speechsplit/evalmetrics.h"
#include "speechsplit/resample.h"

namespace speechsplit {

// Synthetic utterances with fully observable factors. A frame is the sum of
// a content template (smooth bumps in the upper mel band, shifted by the
// speaker's envelope offset), an f0 bump in the low band whose position
// tracks the pitch target, all scaled by the speaker's spectral tilt.
// Factors are sampled independently, so the independence premise of the
// generative model holds by construction.

struct SynthConfig {
  int n_templates = 10;
  int template_bumps = 3;
  double template_sigma = 2.2;
  double pitch_bump_amp = 0.8;
  double pitch_bump_sigma = 1.3;
  int syllables_min = 6;
  int syllables_max = 9;
  int duration_min = 10;
  int duration_max = 40;
  double target_lo = 0.2;
  double target_hi = 0.8;
  int gap_frames = 2;  // trailing unvoiced frames inside each non-final syllable
  // Canonical normalization shared by every synthetic speaker; with it the
  // quantized contour is bit-identical across speakers for equal factors.
  double canonical_mean = 0.5;
  double canonical_std = 0.17320508075688773;  // std of U[0.2, 0.8]

  SynthAnalysisParams analysis;  // band layout shared with the metrics side
};

struct SynthSpeaker {
  int envelope_offset = 0;  // mel bins; shifts the content template bumps
  double tilt_slope = 0.0;  // multiplicative tilt exp(slope * (b - 40) / 40)
  double f0_base_hz = 0.0;  // f0 at target 0
  double f0_span_hz = 0.0;
  SpeakerStats stats;       // canonical-normalization stats in Hz
};

std::vector<SynthSpeaker> synth_speaker_table(int n_speakers);

// The fixed template bank (independent of the corpus seed).
std::vector<std::vector<double>> synth_templates(const SynthConfig& cfg);

// Renders one utterance; total frames equal the sum of durations.
Utterance generate(const SynthFactors& factors, const SynthConfig& cfg,
                   const std::vector<SynthSpeaker>& speakers);

// Ground-truth contour in the nominal Hz mapping used by the metrics.
PitchContour true_contour(const SynthFactors& factors, const SynthConfig& cfg);

SynthFactors sample_factors(int speaker, uint64_t seed, const SynthConfig& cfg);

// Desk corpus: n_utterances per speaker for training plus parallel test
// pairs. Pair members share content symbols but differ in durations, pitch
// targets and speaker; their duration/pitch vectors are redrawn until
// anti-correlated so factor-recovery margins discriminate.
Corpus sample_corpus(int n_speakers, int n_utterances, uint64_t seed,
                     const SynthConfig& cfg = {}, int n_pairs = 20);

// Empirical checks of the contamination premises on a synthetic corpus:
// content and pitch must survive random resampling (recovery >= 99%), and
// syllable durations must be visibly perturbed (> 10% deviation on >= 30%).
struct HarnessReport {
  double content_accuracy = 0.0;
  double pitch_within_one_bin = 0.0;
  double rhythm_perturbed_fraction = 0.0;
  int syllables_checked = 0;
  bool content_pass = false;
  bool pitch_pass = false;
  bool rhythm_pass = false;
  bool all_pass() const { return content_pass && pitch_pass && rhythm_pass; }
};

HarnessReport assumption_harness(const Corpus& corpus, Rng& rng,
                                 const SynthConfig& cfg = {},
                                 bool identity_plans = false);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_SYNTHGEN_H_
