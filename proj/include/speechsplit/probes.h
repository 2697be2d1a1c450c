// speechsplit/probes.h

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

#ifndef SPEECHSPLIT_PROBES_H_
#define SPEECHSPLIT_PROBES_H_

#include <string>
#include <vector>

#include "speechsplit/dataset.h"
#include "speechsplit/evalmetrics.h"
#include "speechsplit/network.h"
#include "speechsplit/trainer.h"

namespace speechsplit {

enum class Component { kRhythm, kContent, kPitch, kTimbre };

std::string component_name(Component c);

// Numeric stand-ins for the perceptual removal criteria. Raw values are
// always reported next to the pass/fail flags.
struct ProbeThresholds {
  double rhythm_energy_ratio = 0.10;   // rhythm removed -> near-blank output
  double pitch_f0_var_ratio = 0.10;    // pitch removed -> flat contour
  double content_env_corr = 0.5;       // content removed -> uninformative shape
  double content_energy_min = 0.3;     // ...but slots still carry energy
  double timbre_offset_shift = 1.0;    // timbre removed -> envelope moves
  double unused_path_mse = 0.05;       // probe changes output by < 5% MSE
  double trained_recon_corr = 0.8;     // below this the model counts as untrained
};

struct ZeroOutResult {
  Component component = Component::kRhythm;
  double energy_ratio = 0.0;      // output / input frame energy
  double env_corr = 0.0;          // mean per-frame correlation with the input
  double f0_variance = 0.0;       // variance of the estimated contour (voiced)
  double env_offset_shift = 0.0;  // envelope shift vs. plain reconstruction
  double mse_vs_recon = 0.0;      // distance from the plain reconstruction
  Matf output;
};

// Runs the model with the named input zeroed (all-zero spectrogram, all-zero
// contour matrix, or all-zero speaker label) and reports diagnostics against
// the utterance and its plain reconstruction.
ZeroOutResult zero_out(Component component, const Utterance& utt,
                       const SpeechSplitModel<float>& model,
                       const SynthAnalysisParams& ap);

struct BottleneckCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string hint;  // which dimension to nudge when the check fails
};

struct BottleneckReport {
  bool inconclusive = false;       // model looks untrained
  double recon_corr = 0.0;
  std::vector<BottleneckCheck> checks;
  bool all_pass() const;
  std::string to_text() const;
  std::string to_json() const;
};

BottleneckReport bottleneck_report(const SpeechSplitModel<float>& model,
                                   const std::vector<const Utterance*>& val_set,
                                   const ProbeThresholds& thresholds,
                                   const SynthAnalysisParams& ap);

// ---------------------------------------------------------------------------
// Reduced autoencoder probe: content encoder + decoder only, trained with
// random resampling on its input. Alignment of the reconstruction with the
// ground truth shows how much rhythm survives the contamination.
// ---------------------------------------------------------------------------

struct RrReconConfig {
  ModelConfig model;        // only content encoder + decoder fields are used
  TrainConfig train;
};

struct RrReconReport {
  double mean_abs_offset = 0.0;       // frames, energy-envelope cross-correlation
  double frac_within_8 = 0.0;
  double negative_control_offset = 0.0;  // shuffled-segment oracle
  double final_loss = 0.0;
  int utterances = 0;
};

// Cross-correlation lag (frames) between the two energy envelopes.
int envelope_alignment_offset(const Matf& a, const Matf& b, int max_lag);

RrReconReport rr_recon_probe(const Corpus& corpus, const RrReconConfig& cfg,
                             const SynthAnalysisParams& ap);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_PROBES_H_
