// tests/cli-test.cc

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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "speechsplit/dataset.h"
#include "speechsplit/persistence.h"
#include "speechsplit/wav.h"

using namespace speechsplit;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* env = std::getenv("SPEECHSPLIT_BIN");
  return env != nullptr ? env : "./speechsplit";
}

int run(const std::string& args) {
  std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string work_dir() {
  std::string dir = (fs::temp_directory_path() / "ss_cli_test").string();
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const std::string& path) { return read_file_bytes(path); }

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("definitely-not-a-command") == 2);
  CHECK(run("synth") == 2);  // missing required --out
}

TEST_CASE("missing data exits with code 3") {
  CHECK(run("plot --input /nonexistent.ssfc --out /tmp/x.bmp") == 3);
  CHECK(run("train --data /nonexistent-dir --out /tmp/ss_cli_run") == 3);
}

TEST_CASE("init-config emits parseable defaults") {
  std::string dir = work_dir();
  std::string path = dir + "/config.json";
  CHECK(run("init-config --out " + path) == 0);
  std::string text = file_bytes(path);
  CHECK(text.find("\"features\"") != std::string::npos);
  CHECK(text.find("\"model\"") != std::string::npos);
  CHECK(text.find("\"train\"") != std::string::npos);
  CHECK(text.find("\"batch_size\": 16") != std::string::npos);
  CHECK(text.find("\"total_steps\": 5000") != std::string::npos);
}

TEST_CASE("synth runs are byte-identical for the same seed") {
  std::string dir = work_dir();
  std::string a = dir + "/corpus_a", b = dir + "/corpus_b";
  fs::remove_all(a);
  fs::remove_all(b);
  CHECK(run("synth --speakers 2 --utterances 2 --pairs 1 --seed 5 --out " + a) == 0);
  CHECK(run("synth --speakers 2 --utterances 2 --pairs 1 --seed 5 --out " + b) == 0);
  Corpus ca = load_corpus(a);
  for (const auto& utt : ca.utterances) {
    CHECK(file_bytes(a + "/" + utt.id + ".ssfc") ==
          file_bytes(b + "/" + utt.id + ".ssfc"));
  }
  CHECK(file_bytes(a + "/manifest.json") == file_bytes(b + "/manifest.json"));
  fs::remove_all(b);
}

TEST_CASE("plot renders a BMP for a cache file") {
  std::string dir = work_dir();
  std::string corpus_dir = dir + "/corpus_plot";
  fs::remove_all(corpus_dir);
  REQUIRE(run("synth --speakers 2 --utterances 1 --pairs 0 --seed 3 --out " +
              corpus_dir) == 0);
  Corpus corpus = load_corpus(corpus_dir);
  std::string input = corpus_dir + "/" + corpus.utterances[0].id + ".ssfc";
  std::string image = dir + "/plot.bmp";
  CHECK(run("plot --input " + input + " --out " + image) == 0);
  std::string bytes = file_bytes(image);
  REQUIRE(bytes.size() > 54);
  CHECK(bytes[0] == 'B');
  CHECK(bytes[1] == 'M');
}

TEST_CASE("features pipeline ingests WAV files end to end") {
  std::string dir = work_dir();
  std::string audio = dir + "/audio";
  fs::create_directories(audio);
  for (int i = 0; i < 2; ++i) {
    Waveform w;
    w.sample_rate = 16000;
    w.samples.resize(16000);
    double freq = 150.0 + 60.0 * i;
    // Two tones per file so the pitch variance is nonzero.
    for (size_t n = 0; n < w.samples.size(); ++n) {
      double f = n < w.samples.size() / 2 ? freq : freq * 1.3;
      w.samples[n] = static_cast<float>(0.5 * std::sin(2.0 * M_PI * f * n / 16000.0));
    }
    save_waveform(audio + "/utt" + std::to_string(i) + ".wav", w);
  }
  std::ofstream map(dir + "/speakers.json");
  map << "{\"utt0\": \"alice\", \"utt1\": \"bob\"}";
  map.close();
  std::string out = dir + "/features_out";
  fs::remove_all(out);
  CHECK(run("features " + audio + " --out " + out + " --speaker-map " + dir +
            "/speakers.json") == 0);
  Corpus corpus = load_corpus(out);
  CHECK(corpus.utterances.size() == 2);
  CHECK(corpus.speaker_names.size() == 2);
  CHECK(corpus.speaker_stats.size() == 2);
  for (const auto& u : corpus.utterances) {
    CHECK(u.mel.rows == 59);
    CHECK(u.mel.cols == 80);
    CHECK(static_cast<int>(u.pitch_bins.size()) == 59);
  }
}

TEST_CASE("train writes a resumable run directory") {
  std::string dir = work_dir();
  std::string corpus_dir = dir + "/corpus_train";
  fs::remove_all(corpus_dir);
  REQUIRE(run("synth --speakers 2 --utterances 2 --pairs 0 --seed 4 --out " +
              corpus_dir) == 0);
  // Tiny config so the smoke run stays fast.
  std::string cfg_path = dir + "/train_cfg.json";
  std::ofstream cfg(cfg_path);
  cfg << R"({
  "model": {"decoder_dim": 8,
    "rhythm": {"conv_layers": 1, "conv_dim": 8, "norm_groups": 2,
               "blstm_layers": 1, "blstm_dim": 1, "downsample_factor": 8,
               "uses_internal_rr": false},
    "content": {"conv_layers": 1, "conv_dim": 8, "norm_groups": 2,
                "blstm_layers": 1, "blstm_dim": 4, "downsample_factor": 8,
                "uses_internal_rr": true},
    "pitch": {"conv_layers": 1, "conv_dim": 8, "norm_groups": 2,
              "blstm_layers": 1, "blstm_dim": 4, "downsample_factor": 8,
              "uses_internal_rr": false}},
  "train": {"total_steps": 4, "batch_size": 2, "crop_len": 32,
            "checkpoint_every": 2, "seed": 11}
})";
  cfg.close();
  std::string run_dir = dir + "/run";
  fs::remove_all(run_dir);
  CHECK(run("train --config " + cfg_path + " --data " + corpus_dir + " --out " +
            run_dir) == 0);
  CHECK(fs::exists(run_dir + "/config.json"));
  CHECK(fs::exists(run_dir + "/loss_log.csv"));
  CHECK(fs::exists(run_dir + "/ckpt_latest.ssck"));
  Checkpoint ckpt = read_checkpoint(run_dir + "/ckpt_latest.ssck");
  CHECK(ckpt.kind == "main");
  CHECK(ckpt.steps_trained == 4);
  CHECK(ckpt.optimizer.has_value());
  // Re-running resumes and is a no-op at total_steps.
  CHECK(run("train --config " + cfg_path + " --data " + corpus_dir + " --out " +
            run_dir) == 0);
  Checkpoint again = read_checkpoint(run_dir + "/ckpt_latest.ssck");
  CHECK(again.steps_trained == 4);

  // Conversions from this (barely trained) checkpoint exercise the CLI path.
  Corpus corpus = load_corpus(corpus_dir);
  std::string conv_out = dir + "/conv";
  fs::remove_all(conv_out);
  CHECK(run("convert --model " + run_dir + "/ckpt_latest.ssck --data " +
            corpus_dir + " --source " + corpus.utterances[0].id + " --target " +
            corpus.utterances[1].id + " --aspects timbre --out " + conv_out) == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(conv_out))
    if (e.path().extension() == ".ssfc") ++files;
  CHECK(files == 1);
}
