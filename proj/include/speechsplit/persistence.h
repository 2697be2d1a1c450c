// speechsplit/persistence.h

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

#ifndef SPEECHSPLIT_PERSISTENCE_H_
#define SPEECHSPLIT_PERSISTENCE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "speechsplit/featureio.h"
#include "speechsplit/network.h"
#include "speechsplit/trainer.h"

namespace speechsplit {

// Byte-level layouts are documented in docs/FORMATS.md. All binary payloads
// are little-endian with a format-version header and a CRC32 trailer.

uint32_t crc32(const uint8_t* data, size_t n);

std::string read_file_bytes(const std::string& path);
// Temp-file + rename, so concurrent readers never observe partial writes.
void atomic_write_file(const std::string& path, const std::string& bytes);

// ---- feature cache -------------------------------------------------------

struct FeatureRecord {
  std::string utterance_id;
  std::string speaker_id;
  Matf mel;                          // T x 80, float32
  std::vector<uint16_t> pitch_bins;  // length T, values 0..256
};

void write_feature_record(const std::string& path, const FeatureRecord& rec);
FeatureRecord read_feature_record(const std::string& path);

// ---- checkpoints ----------------------------------------------------------

struct AdamState {
  int64_t step_count = 0;
  ParamStore<float> m, v;
};

struct Checkpoint {
  std::string kind;  // "main", "mini" or "rr_recon"
  ModelConfig model_cfg;
  FeatureConfig feat_cfg;
  int64_t steps_trained = 0;
  uint64_t seed = 0;
  ParamStore<float> params;
  std::optional<AdamState> optimizer;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// ---- human-readable structured text (JSON) --------------------------------

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

std::string feature_config_to_json(const FeatureConfig& cfg);
FeatureConfig feature_config_from_json(const std::string& text);

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

std::string speaker_stats_to_json(const std::map<std::string, SpeakerStats>& stats);
std::map<std::string, SpeakerStats> speaker_stats_from_json(const std::string& text);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_PERSISTENCE_H_
