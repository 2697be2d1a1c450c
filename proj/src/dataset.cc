// src/dataset.cc

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

#include "speechsplit/dataset.h"

#include <filesystem>

#include "json.hpp"

namespace speechsplit {

namespace fs = std::filesystem;
using nlohmann::json;

void SynthFactors::validate() const {
  if (content.size() != durations.size() ||
      durations.size() != pitch_targets.size())
    throw DataError("synth factors: per-syllable sequences have unequal counts");
  if (content.empty()) throw DataError("synth factors: no syllables");
  for (int d : durations)
    if (d < 10 || d > 40)
      throw DataError("synth factors: duration out of [10, 40]");
  for (double p : pitch_targets)
    if (p < 0.2 || p > 0.8)
      throw DataError("synth factors: pitch target out of [0.2, 0.8]");
}

const Utterance& Corpus::by_id(const std::string& id) const {
  for (const auto& u : utterances)
    if (u.id == id) return u;
  throw DataError("corpus: no utterance with id '" + id + "'");
}

std::vector<TrainItem> Corpus::train_items() const {
  std::vector<TrainItem> items;
  for (const auto& u : utterances) {
    if (u.test_only) continue;
    TrainItem it;
    it.mel = u.mel;
    it.pitch_bins = u.pitch_bins;
    it.speaker = u.speaker;
    items.push_back(std::move(it));
  }
  return items;
}

std::string factors_to_json(const SynthFactors& f) {
  json j;
  j["content"] = f.content;
  j["durations"] = f.durations;
  j["pitch_targets"] = f.pitch_targets;
  j["speaker"] = f.speaker;
  return j.dump(2);
}

SynthFactors factors_from_json(const std::string& text) {
  json j = json::parse(text);
  SynthFactors f;
  f.content = j.at("content").get<std::vector<int>>();
  f.durations = j.at("durations").get<std::vector<int>>();
  f.pitch_targets = j.at("pitch_targets").get<std::vector<double>>();
  f.speaker = j.at("speaker").get<int>();
  return f;
}

void save_corpus(const std::string& dir, const Corpus& corpus) {
  fs::create_directories(dir);
  fs::create_directories(fs::path(dir) / "factors");
  json manifest;
  manifest["format_version"] = 1;
  manifest["speakers"] = corpus.speaker_names;
  json utts = json::array();
  for (const auto& u : corpus.utterances) {
    FeatureRecord rec;
    rec.utterance_id = u.id;
    rec.speaker_id = corpus.speaker_names[static_cast<size_t>(u.speaker)];
    rec.mel = u.mel;
    rec.pitch_bins = u.pitch_bins;
    write_feature_record((fs::path(dir) / (u.id + ".ssfc")).string(), rec);
    if (u.factors.has_value())
      atomic_write_file((fs::path(dir) / "factors" / (u.id + ".json")).string(),
                        factors_to_json(*u.factors));
    utts.push_back(json{{"id", u.id},
                        {"speaker", u.speaker},
                        {"frames", u.mel.rows},
                        {"test_only", u.test_only}});
  }
  manifest["utterances"] = utts;
  atomic_write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(2));
  atomic_write_file((fs::path(dir) / "speaker_stats.json").string(),
                    speaker_stats_to_json(corpus.speaker_stats));
  if (!corpus.pairs.empty()) {
    json pairs = json::array();
    for (const auto& p : corpus.pairs)
      pairs.push_back(json{{"source", p.source_id}, {"target", p.target_id}});
    atomic_write_file((fs::path(dir) / "pairs.json").string(), pairs.dump(2));
  }
}

Corpus load_corpus(const std::string& dir) {
  Corpus corpus;
  json manifest = json::parse(read_file_bytes((fs::path(dir) / "manifest.json").string()));
  if (manifest.at("format_version").get<int>() != 1)
    throw DataError(dir + "/manifest.json: unsupported format version");
  corpus.speaker_names = manifest.at("speakers").get<std::vector<std::string>>();
  for (const auto& e : manifest.at("utterances")) {
    Utterance u;
    u.id = e.at("id").get<std::string>();
    u.speaker = e.at("speaker").get<int>();
    u.test_only = e.at("test_only").get<bool>();
    FeatureRecord rec =
        read_feature_record((fs::path(dir) / (u.id + ".ssfc")).string());
    if (rec.utterance_id != u.id)
      throw DataError(dir + ": feature record id mismatch for " + u.id);
    u.mel = std::move(rec.mel);
    u.pitch_bins = std::move(rec.pitch_bins);
    fs::path fpath = fs::path(dir) / "factors" / (u.id + ".json");
    if (fs::exists(fpath))
      u.factors = factors_from_json(read_file_bytes(fpath.string()));
    corpus.utterances.push_back(std::move(u));
  }
  fs::path stats_path = fs::path(dir) / "speaker_stats.json";
  if (fs::exists(stats_path))
    corpus.speaker_stats = speaker_stats_from_json(read_file_bytes(stats_path.string()));
  fs::path pairs_path = fs::path(dir) / "pairs.json";
  if (fs::exists(pairs_path)) {
    json pairs = json::parse(read_file_bytes(pairs_path.string()));
    for (const auto& p : pairs)
      corpus.pairs.push_back(
          {p.at("source").get<std::string>(), p.at("target").get<std::string>()});
  }
  return corpus;
}

}  // namespace speechsplit
