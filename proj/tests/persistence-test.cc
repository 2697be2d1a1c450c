// tests/persistence-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "speechsplit/dataset.h"
#include "speechsplit/persistence.h"
#include "speechsplit/synthgen.h"

using namespace speechsplit;
namespace fs = std::filesystem;

namespace {

std::string temp_dir() {
  std::string dir = (fs::temp_directory_path() / "ss_persist_test").string();
  fs::create_directories(dir);
  return dir;
}

FeatureRecord sample_record() {
  FeatureRecord rec;
  rec.utterance_id = "utt1";
  rec.speaker_id = "spk0";
  rec.mel = Matf(13, kMelBins);
  Rng rng(3);
  for (auto& v : rec.mel.data) v = static_cast<float>(rng.uniform());
  rec.pitch_bins.resize(13);
  for (auto& b : rec.pitch_bins) b = static_cast<uint16_t>(rng.uniform_int(0, 256));
  return rec;
}

}  // namespace

TEST_CASE("feature record round trip is bit-exact") {
  std::string path = temp_dir() + "/rec.ssfc";
  FeatureRecord rec = sample_record();
  write_feature_record(path, rec);
  FeatureRecord back = read_feature_record(path);
  CHECK(back.utterance_id == rec.utterance_id);
  CHECK(back.speaker_id == rec.speaker_id);
  REQUIRE(back.mel.rows == rec.mel.rows);
  CHECK(std::memcmp(back.mel.data.data(), rec.mel.data.data(),
                    sizeof(float) * rec.mel.size()) == 0);
  CHECK(back.pitch_bins == rec.pitch_bins);
  std::remove(path.c_str());
}

TEST_CASE("truncated files name the failing byte offset") {
  std::string path = temp_dir() + "/trunc.ssfc";
  write_feature_record(path, sample_record());
  std::string bytes = read_file_bytes(path);
  atomic_write_file(path, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_WITH_AS(read_feature_record(path), doctest::Contains("byte"),
                       DataError);
  std::remove(path.c_str());
}

TEST_CASE("corrupted payload fails the checksum") {
  std::string path = temp_dir() + "/corrupt.ssfc";
  write_feature_record(path, sample_record());
  std::string bytes = read_file_bytes(path);
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
  atomic_write_file(path, bytes);
  CHECK_THROWS_WITH_AS(read_feature_record(path), doctest::Contains("checksum"),
                       DataError);
  std::remove(path.c_str());
}

TEST_CASE("future format versions are refused with a hint") {
  std::string path = temp_dir() + "/vers.ssfc";
  write_feature_record(path, sample_record());
  std::string bytes = read_file_bytes(path);
  bytes[4] = 2;  // bump the version field
  // Recompute the trailer so only the version mismatch fires.
  uint32_t crc = crc32(reinterpret_cast<const uint8_t*>(bytes.data()) + 4,
                       bytes.size() - 8);
  std::memcpy(bytes.data() + bytes.size() - 4, &crc, 4);
  atomic_write_file(path, bytes);
  CHECK_THROWS_WITH_AS(read_feature_record(path), doctest::Contains("v2"),
                       DataError);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint round trip preserves parameters and optimizer state") {
  std::string path = temp_dir() + "/model.ssck";
  Checkpoint ckpt;
  ckpt.kind = "main";
  ckpt.model_cfg = default_model_config(4);
  ckpt.feat_cfg = FeatureConfig{};
  ckpt.steps_trained = 123;
  ckpt.seed = 99;
  Rng rng(5);
  ckpt.params.add("layer.w", {3, 4});
  ckpt.params.add("layer.b", {4});
  for (auto& t : ckpt.params.tensors)
    for (auto& v : t.v) v = static_cast<float>(rng.uniform(-1, 1));
  AdamState st;
  st.step_count = 123;
  st.m = ckpt.params.zeros_like();
  st.v = ckpt.params.zeros_like();
  st.m.tensors[0].v[0] = 0.5f;
  ckpt.optimizer = st;

  write_checkpoint(path, ckpt);
  Checkpoint back = read_checkpoint(path);
  CHECK(back.kind == "main");
  CHECK(back.steps_trained == 123);
  CHECK(back.seed == 99);
  CHECK(back.model_cfg == ckpt.model_cfg);
  CHECK(back.feat_cfg == ckpt.feat_cfg);
  REQUIRE(back.params.tensors.size() == 2);
  CHECK(back.params.names[0] == "layer.w");
  CHECK(std::memcmp(back.params.tensors[0].data(), ckpt.params.tensors[0].data(),
                    sizeof(float) * ckpt.params.tensors[0].size()) == 0);
  REQUIRE(back.optimizer.has_value());
  CHECK(back.optimizer->step_count == 123);
  CHECK(back.optimizer->m.tensors[0].v[0] == 0.5f);
  std::remove(path.c_str());
}

TEST_CASE("config json round trips") {
  ModelConfig mc = default_model_config(8);
  mc.decoder_dim = 128;
  mc.content.blstm_dim = 16;
  CHECK(model_config_from_json(model_config_to_json(mc)) == mc);

  FeatureConfig fc;
  fc.mel_fmin_hz = 80.0;
  CHECK(feature_config_from_json(feature_config_to_json(fc)) == fc);

  TrainConfig tc;
  tc.total_steps = 777;
  tc.crop_len = 64;
  TrainConfig back = train_config_from_json(train_config_to_json(tc));
  CHECK(back.total_steps == 777);
  CHECK(back.crop_len == 64);
}

TEST_CASE("speaker stats json keyed by speaker id") {
  std::map<std::string, SpeakerStats> stats;
  stats["spk0"] = {"spk0", 150.0, 25.0};
  stats["spk1"] = {"spk1", 210.0, 30.0};
  auto back = speaker_stats_from_json(speaker_stats_to_json(stats));
  REQUIRE(back.size() == 2);
  CHECK(back["spk0"].mean_f0 == doctest::Approx(150.0));
  CHECK(back["spk1"].std_f0 == doctest::Approx(30.0));
}

TEST_CASE("corpus directory round trip with factors and pairs") {
  std::string dir = temp_dir() + "/corpus";
  fs::remove_all(dir);
  SynthConfig sc;
  Corpus corpus = sample_corpus(2, 3, 42, sc, 2);
  save_corpus(dir, corpus);
  Corpus back = load_corpus(dir);
  REQUIRE(back.utterances.size() == corpus.utterances.size());
  CHECK(back.pairs.size() == 2);
  CHECK(back.speaker_names == corpus.speaker_names);
  const Utterance& a = corpus.utterances[0];
  const Utterance& b = back.by_id(a.id);
  CHECK(std::memcmp(a.mel.data.data(), b.mel.data.data(),
                    sizeof(float) * a.mel.size()) == 0);
  CHECK(a.pitch_bins == b.pitch_bins);
  REQUIRE(b.factors.has_value());
  CHECK(b.factors->content == a.factors->content);
  CHECK(b.factors->durations == a.factors->durations);
  CHECK_THROWS_AS(back.by_id("missing"), DataError);
  fs::remove_all(dir);
}
