// speechsplit/evalrun.h

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

#ifndef SPEECHSPLIT_EVALRUN_H_
#define SPEECHSPLIT_EVALRUN_H_

#include <string>
#include <vector>

#include "speechsplit/converter.h"
#include "speechsplit/evalmetrics.h"
#include "speechsplit/synthgen.h"

namespace speechsplit {

// One CSV row per (pair, conversion type). The "none" row scores the raw
// source features with no model in the loop. Pitch metrics are computed
// against the target's true contour when rhythm is converted, against the
// aligned target contour for pitch-only style conversions, and against the
// source contour otherwise.
struct EvalRow {
  std::string pair_id;
  std::string conversion;
  double gpe_value = 0.0;
  double vde_value = 0.0;
  double ffe_value = 0.0;
  AspectScores scores;
};

std::vector<EvalRow> evaluate_pairs(const SpeechSplitModel<float>& model,
                                    int64_t steps_trained,
                                    const PitchMiniModel<float>* mini,
                                    int64_t mini_steps, const Corpus& corpus,
                                    const SynthConfig& synth_cfg = {},
                                    int max_pairs = -1);

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows);

PairTruth make_pair_truth(const Utterance& src, const Utterance& tgt);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_EVALRUN_H_
