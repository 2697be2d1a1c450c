// src/evalrun.cc

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

#include "speechsplit/evalrun.h"

#include <sstream>

#include "speechsplit/persistence.h"

namespace speechsplit {

PairTruth make_pair_truth(const Utterance& src, const Utterance& tgt) {
  if (!src.factors.has_value() || !tgt.factors.has_value())
    throw DataError("pair evaluation needs ground-truth factors");
  PairTruth truth;
  truth.source_durations.assign(src.factors->durations.begin(),
                                src.factors->durations.end());
  truth.target_durations.assign(tgt.factors->durations.begin(),
                                tgt.factors->durations.end());
  truth.source_targets = src.factors->pitch_targets;
  truth.target_targets = tgt.factors->pitch_targets;
  truth.source_mel = &src.mel;
  truth.target_mel = &tgt.mel;
  return truth;
}

std::vector<EvalRow> evaluate_pairs(const SpeechSplitModel<float>& model,
                                    int64_t steps_trained,
                                    const PitchMiniModel<float>* mini,
                                    int64_t mini_steps, const Corpus& corpus,
                                    const SynthConfig& synth_cfg, int max_pairs) {
  if (corpus.pairs.empty()) throw DataError("evaluate_pairs: corpus has no pairs");
  const SynthAnalysisParams& ap = synth_cfg.analysis;
  std::vector<EvalRow> rows;
  int n_pairs = static_cast<int>(corpus.pairs.size());
  if (max_pairs > 0) n_pairs = std::min(n_pairs, max_pairs);
  for (int p = 0; p < n_pairs; ++p) {
    const ParallelPair& pair = corpus.pairs[static_cast<size_t>(p)];
    const Utterance& src = corpus.by_id(pair.source_id);
    const Utterance& tgt = corpus.by_id(pair.target_id);
    PairTruth truth = make_pair_truth(src, tgt);
    PitchContour src_true = true_contour(*src.factors, synth_cfg);
    PitchContour tgt_true = true_contour(*tgt.factors, synth_cfg);
    const std::string pair_id = pair.source_id + ":" + pair.target_id;

    {
      EvalRow row;
      row.pair_id = pair_id;
      row.conversion = "none";
      PitchContour est = estimate_f0_mel(src.mel, ap);
      row.gpe_value = gpe(src_true, est);
      row.vde_value = vde(src_true, est);
      row.ffe_value = ffe(src_true, est);
      row.scores = factor_recovery(src.mel, truth, ap);
      rows.push_back(std::move(row));
    }

    for (const auto& aspects : all_aspect_subsets()) {
      ConversionRequest req{pair.source_id, pair.target_id, aspects};
      Matf out = convert(req, model, steps_trained, mini, mini_steps, corpus);
      EvalRow row;
      row.pair_id = pair_id;
      row.conversion = aspect_set_name(aspects);
      PitchContour est = estimate_f0_mel(out, ap);
      PitchContour ref;
      if (aspects.count(Aspect::kRhythm) > 0) {
        ref = tgt_true;
      } else if (aspects.count(Aspect::kPitch) > 0 && mini != nullptr) {
        // Reference on the source clock: the aligned target contour fed to
        // the pitch encoder, mapped to nominal Hz through the bin centers.
        QuantizedPitch tq;
        tq.bins = tgt.pitch_bins;
        Matf aligned = align_pitch_contour(tq.onehot(), src.mel, *mini, mini_steps);
        QuantizedPitch aq = QuantizedPitch::from_onehot(aligned);
        ref.assign(aq.bins.size(), 0.0f);
        for (size_t t = 0; t < aq.bins.size(); ++t) {
          if (aq.bins[t] == kUnvoicedBin) continue;
          double n = (aq.bins[t] + 0.5) / 256.0;
          double u = (n - 0.5) * 4.0 * synth_cfg.canonical_std +
                     synth_cfg.canonical_mean;
          ref[t] = static_cast<float>(ap.nominal_f0_lo + ap.nominal_f0_span * u);
        }
      } else {
        ref = src_true;
      }
      if (ref.size() == est.size()) {
        row.gpe_value = gpe(ref, est);
        row.vde_value = vde(ref, est);
        row.ffe_value = ffe(ref, est);
      } else {
        row.gpe_value = row.vde_value = row.ffe_value = 1.0;
      }
      row.scores = factor_recovery(out, truth, ap);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::ostringstream os;
  os << "pair_id,conversion,gpe,vde,ffe,rhythm_score,pitch_score,timbre_score,"
        "scores_valid\n";
  for (const auto& r : rows) {
    os << r.pair_id << "," << r.conversion << "," << r.gpe_value << ","
       << r.vde_value << "," << r.ffe_value << ",";
    if (r.scores.valid)
      os << r.scores.rhythm << "," << r.scores.pitch << "," << r.scores.timbre
         << ",1\n";
    else
      os << ",,,0\n";
  }
  atomic_write_file(path, os.str());
}

}  // namespace speechsplit
