// speechsplit/converter.h

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

#ifndef SPEECHSPLIT_CONVERTER_H_
#define SPEECHSPLIT_CONVERTER_H_

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "speechsplit/dataset.h"
#include "speechsplit/network.h"

namespace speechsplit {

enum class Aspect { kRhythm, kPitch, kTimbre };

std::string aspect_set_name(const std::set<Aspect>& aspects);
std::set<Aspect> parse_aspects(const std::string& csv);  // "rhythm,pitch,timbre"

struct ConversionRequest {
  std::string source_id;
  std::string target_id;
  std::set<Aspect> aspects;  // non-empty
};

// Rhythm-only conversion of the target contour onto the source clock: the
// mini model decodes with the rhythm code of source_mel and the pitch code
// of target_pitch, then a per-frame argmax yields a one-hot contour of
// source length.
Matf align_pitch_contour(const Matf& target_pitch_onehot, const Matf& source_mel,
                         const PitchMiniModel<float>& mini, int64_t mini_steps);

// Style transfer. The encoder for each aspect in the request reads the
// target utterance's input, everything else comes from the source; resampling
// plans are identities at inference. Output length follows the rhythm
// encoder's input.
Matf convert(const ConversionRequest& req, const SpeechSplitModel<float>& model,
             int64_t steps_trained, const PitchMiniModel<float>* mini,
             int64_t mini_steps, const Corpus& corpus);

// All seven non-empty aspect subsets, in a fixed order:
// rhythm, pitch, timbre, rhythm+pitch, rhythm+timbre, pitch+timbre, all.
std::vector<std::pair<std::string, Matf>> enumerate_conversions(
    const std::string& source_id, const std::string& target_id,
    const SpeechSplitModel<float>& model, int64_t steps_trained,
    const PitchMiniModel<float>* mini, int64_t mini_steps, const Corpus& corpus);

const std::vector<std::set<Aspect>>& all_aspect_subsets();

}  // namespace speechsplit

#endif  // SPEECHSPLIT_CONVERTER_H_
