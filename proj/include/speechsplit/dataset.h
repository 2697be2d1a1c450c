// speechsplit/dataset.h

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

#ifndef SPEECHSPLIT_DATASET_H_
#define SPEECHSPLIT_DATASET_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "speechsplit/persistence.h"

namespace speechsplit {

// Ground-truth factors of a synthetic utterance: the only place where the
// latent content/rhythm/pitch/timbre variables are observable.
struct SynthFactors {
  std::vector<int> content;            // template index per syllable
  std::vector<int> durations;          // frames per syllable, in [10, 40]
  std::vector<double> pitch_targets;   // normalized, in [0.2, 0.8]
  int speaker = 0;

  int total_frames() const {
    int t = 0;
    for (int d : durations) t += d;
    return t;
  }
  void validate() const;
};

struct Utterance {
  std::string id;
  int speaker = 0;  // index into Corpus::speaker_names
  Matf mel;
  std::vector<uint16_t> pitch_bins;
  std::optional<SynthFactors> factors;
  bool test_only = false;  // held out of training
};

struct ParallelPair {
  std::string source_id;
  std::string target_id;
};

struct Corpus {
  std::vector<std::string> speaker_names;
  std::vector<Utterance> utterances;
  std::vector<ParallelPair> pairs;
  std::map<std::string, SpeakerStats> speaker_stats;

  const Utterance& by_id(const std::string& id) const;
  std::vector<TrainItem> train_items() const;
};

// Directory layout: manifest.json, speaker_stats.json, pairs.json (optional),
// <id>.ssfc per utterance, factors/<id>.json for synthetic ground truth.
void save_corpus(const std::string& dir, const Corpus& corpus);
Corpus load_corpus(const std::string& dir);

std::string factors_to_json(const SynthFactors& f);
SynthFactors factors_from_json(const std::string& text);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_DATASET_H_
