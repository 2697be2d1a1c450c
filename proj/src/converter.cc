// src/converter.cc

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

#include "speechsplit/converter.h"

#include <algorithm>

#include "speechsplit/trainer.h"

namespace speechsplit {

std::string aspect_set_name(const std::set<Aspect>& aspects) {
  std::string name;
  auto append = [&name](const char* s) {
    if (!name.empty()) name += "+";
    name += s;
  };
  if (aspects.count(Aspect::kRhythm)) append("rhythm");
  if (aspects.count(Aspect::kPitch)) append("pitch");
  if (aspects.count(Aspect::kTimbre)) append("timbre");
  return name;
}

std::set<Aspect> parse_aspects(const std::string& csv) {
  std::set<Aspect> aspects;
  size_t pos = 0;
  while (pos <= csv.size()) {
    size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos
                                                                 : comma - pos);
    if (tok == "rhythm")
      aspects.insert(Aspect::kRhythm);
    else if (tok == "pitch")
      aspects.insert(Aspect::kPitch);
    else if (tok == "timbre")
      aspects.insert(Aspect::kTimbre);
    else if (!tok.empty())
      throw UsageError("unknown aspect '" + tok + "' (want rhythm,pitch,timbre)");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (aspects.empty()) throw UsageError("aspects must be non-empty");
  return aspects;
}

const std::vector<std::set<Aspect>>& all_aspect_subsets() {
  static const std::vector<std::set<Aspect>> kSubsets = {
      {Aspect::kRhythm},
      {Aspect::kPitch},
      {Aspect::kTimbre},
      {Aspect::kRhythm, Aspect::kPitch},
      {Aspect::kRhythm, Aspect::kTimbre},
      {Aspect::kPitch, Aspect::kTimbre},
      {Aspect::kRhythm, Aspect::kPitch, Aspect::kTimbre}};
  return kSubsets;
}

Matf align_pitch_contour(const Matf& target_pitch_onehot, const Matf& source_mel,
                         const PitchMiniModel<float>& mini, int64_t mini_steps) {
  if (mini_steps <= 0)
    throw DataError("align_pitch_contour: pitch mini model is untrained");
  Matf z_rhythm = mini.encode_rhythm(source_mel);
  Matf z_pitch = mini.encode_pitch(target_pitch_onehot);
  // The rhythm code sets the clock; pad or trim the pitch code to match.
  if (z_pitch.rows != z_rhythm.rows) z_pitch = fit_frames(z_pitch, z_rhythm.rows);
  Matf logits = mini.decode_codes(z_rhythm, z_pitch, source_mel.rows);
  Matf onehot(logits.rows, logits.cols);
  for (int t = 0; t < logits.rows; ++t) {
    const float* z = logits.row(t);
    int arg = 0;
    for (int c = 1; c < logits.cols; ++c)
      if (z[c] > z[arg]) arg = c;
    onehot.at(t, arg) = 1.0f;
  }
  return onehot;
}

Matf convert(const ConversionRequest& req, const SpeechSplitModel<float>& model,
             int64_t steps_trained, const PitchMiniModel<float>* mini,
             int64_t mini_steps, const Corpus& corpus) {
  if (req.aspects.empty()) throw UsageError("convert: aspects must be non-empty");
  if (steps_trained <= 0) throw DataError("convert: model is untrained");
  const Utterance& src = corpus.by_id(req.source_id);
  const Utterance& tgt = corpus.by_id(req.target_id);

  const bool conv_rhythm = req.aspects.count(Aspect::kRhythm) > 0;
  const bool conv_pitch = req.aspects.count(Aspect::kPitch) > 0;
  const bool conv_timbre = req.aspects.count(Aspect::kTimbre) > 0;

  const Matf& rhythm_in = conv_rhythm ? tgt.mel : src.mel;
  const int t_out = rhythm_in.rows;

  QuantizedPitch src_q, tgt_q;
  src_q.bins = src.pitch_bins;
  tgt_q.bins = tgt.pitch_bins;
  Matf pitch_in;
  if (conv_pitch) {
    if (mini == nullptr)
      throw DataError("convert: pitch conversion needs the pitch mini model");
    // The stored target contour is already normalized with the target
    // speaker's statistics; the alignment pre-pass re-times it to the clock
    // of the content-encoder input (the source utterance).
    pitch_in = align_pitch_contour(tgt_q.onehot(), src.mel, *mini, mini_steps);
  } else {
    pitch_in = src_q.onehot();
  }

  const int spk_index = conv_timbre ? tgt.speaker : src.speaker;
  SpeakerLabel spk = SpeakerLabel::make(spk_index, model.config().n_speakers);

  CodeBundle<float> bundle;
  bundle.rhythm = model.encode_rhythm(rhythm_in);
  bundle.content = model.encode_content(src.mel, nullptr);
  bundle.pitch = model.encode_pitch(pitch_in);
  const int k = model.config().rhythm.downsample_factor;
  bundle.fit_rows((t_out + k - 1) / k);
  return model.decode(bundle, spk, t_out);
}

std::vector<std::pair<std::string, Matf>> enumerate_conversions(
    const std::string& source_id, const std::string& target_id,
    const SpeechSplitModel<float>& model, int64_t steps_trained,
    const PitchMiniModel<float>* mini, int64_t mini_steps, const Corpus& corpus) {
  std::vector<std::pair<std::string, Matf>> out;
  for (const auto& aspects : all_aspect_subsets()) {
    ConversionRequest req{source_id, target_id, aspects};
    out.emplace_back(aspect_set_name(aspects),
                     convert(req, model, steps_trained, mini, mini_steps, corpus));
  }
  return out;
}

}  // namespace speechsplit
