// tests/evalmetrics-test.cc

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

#include "speechsplit/evalmetrics.h"
#include "speechsplit/rng.h"
#include "speechsplit/synthgen.h"

using namespace speechsplit;

TEST_CASE("gpe basics") {
  PitchContour a = {100.0f, 100.0f};
  CHECK(gpe(a, a) == 0.0);
  PitchContour est = {130.0f, 130.0f};
  CHECK(gpe(a, est) == 1.0);  // 30% deviation exceeds the 20% tolerance
  PitchContour mixed = {110.0f, 150.0f};
  CHECK(gpe(a, mixed) == 0.5);
  PitchContour unvoiced = {0.0f, 0.0f};
  CHECK(gpe(unvoiced, est) == 0.0);  // no frame voiced in both
  PitchContour shorter = {100.0f};
  CHECK_THROWS_AS(gpe(a, shorter), DataError);
}

TEST_CASE("vde basics") {
  PitchContour a = {100.0f, 0.0f, 120.0f, 0.0f};
  CHECK(vde(a, a) == 0.0);
  PitchContour flipped = {0.0f, 90.0f, 0.0f, 80.0f};
  CHECK(vde(a, flipped) == 1.0);
  PitchContour one_off = {100.0f, 0.0f, 120.0f, 90.0f};
  CHECK(vde(a, one_off) == 0.25);
}

TEST_CASE("ffe hand case and union bound") {
  // Five frames: one voicing error, one gross pitch error, three fine.
  PitchContour ref = {100.0f, 100.0f, 0.0f, 100.0f, 100.0f};
  PitchContour est = {100.0f, 130.0f, 0.0f, 0.0f, 101.0f};
  CHECK(vde(ref, est) == doctest::Approx(0.2));
  CHECK(ffe(ref, est) == doctest::Approx(0.4));
  CHECK(ffe(ref, ref) == 0.0);
}

TEST_CASE("ffe dominates vde on random contours") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    int frames = 5 + static_cast<int>(rng.uniform_int(0, 40));
    PitchContour ref(static_cast<size_t>(frames)), est(static_cast<size_t>(frames));
    for (int t = 0; t < frames; ++t) {
      ref[static_cast<size_t>(t)] =
          rng.uniform() < 0.3 ? 0.0f
                              : static_cast<float>(rng.uniform(80.0, 400.0));
      est[static_cast<size_t>(t)] =
          rng.uniform() < 0.3 ? 0.0f
                              : static_cast<float>(rng.uniform(80.0, 400.0));
    }
    double f = ffe(ref, est), v = vde(ref, est), g = gpe(ref, est);
    CHECK(f >= v);
    CHECK(f <= 1.0);
    CHECK(v <= 1.0);
    CHECK(g <= 1.0);
    CHECK(f >= 0.0);
  }
}

TEST_CASE("mel-domain estimator recovers the synthetic contour") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(4);
  SynthFactors f;
  f.content = {2, 5, 8, 1};
  f.durations = {15, 22, 30, 18};
  f.pitch_targets = {0.25, 0.65, 0.4, 0.75};
  f.speaker = 2;
  Utterance utt = generate(f, cfg, speakers);
  PitchContour truth = true_contour(f, cfg);
  PitchContour est = estimate_f0_mel(utt.mel, cfg.analysis);
  REQUIRE(est.size() == truth.size());
  CHECK(vde(truth, est) == 0.0);
  CHECK(gpe(truth, est) == 0.0);
  CHECK(ffe(truth, est) == 0.0);
}

TEST_CASE("segmentation recovers generator syllables exactly") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(4);
  SynthFactors f;
  f.content = {0, 9, 4};
  f.durations = {11, 31, 24};
  f.pitch_targets = {0.3, 0.5, 0.7};
  f.speaker = 1;
  Utterance utt = generate(f, cfg, speakers);
  std::vector<Syllable> syl = segment_syllables(utt.mel, cfg.analysis);
  REQUIRE(syl.size() == 3);
  CHECK(syl[0].start == 0);
  CHECK(syl[0].length == 11);
  CHECK(syl[1].length == 31);
  CHECK(syl[2].length == 24);
  std::vector<double> pitches = syllable_pitches(utt.mel, syl, cfg.analysis);
  for (size_t i = 0; i < 3; ++i)
    CHECK(pitches[i] == doctest::Approx(f.pitch_targets[i]).epsilon(0.05));
}

TEST_CASE("factor recovery saturates at the two oracle endpoints") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(8);
  Corpus corpus = sample_corpus(8, 1, 5, cfg, 4);
  for (const auto& pair : corpus.pairs) {
    const Utterance& src = corpus.by_id(pair.source_id);
    const Utterance& tgt = corpus.by_id(pair.target_id);
    PairTruth truth;
    truth.source_durations.assign(src.factors->durations.begin(),
                                  src.factors->durations.end());
    truth.target_durations.assign(tgt.factors->durations.begin(),
                                  tgt.factors->durations.end());
    truth.source_targets = src.factors->pitch_targets;
    truth.target_targets = tgt.factors->pitch_targets;
    truth.source_mel = &src.mel;
    truth.target_mel = &tgt.mel;

    AspectScores to_target = factor_recovery(tgt.mel, truth, cfg.analysis);
    REQUIRE(to_target.valid);
    CHECK(to_target.rhythm > 0.5);
    CHECK(to_target.pitch > 0.5);
    CHECK(to_target.timbre > 0.5);

    AspectScores to_source = factor_recovery(src.mel, truth, cfg.analysis);
    REQUIRE(to_source.valid);
    CHECK(to_source.rhythm < -0.5);
    CHECK(to_source.pitch < -0.5);
    CHECK(to_source.timbre < -0.5);
  }
}

TEST_CASE("factor recovery flags degenerate outputs as invalid") {
  SynthConfig cfg;
  PairTruth truth;
  truth.source_durations = {10, 20, 30};
  truth.target_durations = {30, 20, 10};
  truth.source_targets = {0.3, 0.4, 0.5};
  truth.target_targets = {0.5, 0.4, 0.3};
  Matf blank(60, 80);
  truth.source_mel = &blank;
  truth.target_mel = &blank;
  AspectScores s = factor_recovery(blank, truth, cfg.analysis);
  CHECK_FALSE(s.valid);
}

TEST_CASE("pearson correlation sanity") {
  std::vector<double> a = {1, 2, 3, 4};
  std::vector<double> b = {2, 4, 6, 8};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  std::vector<double> c = {4, 3, 2, 1};
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1.0}), DataError);
}
