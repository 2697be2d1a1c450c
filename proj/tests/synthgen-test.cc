// tests/synthgen-test.cc

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

#include "speechsplit/synthgen.h"

using namespace speechsplit;

TEST_CASE("generate: frame count equals the sum of durations") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(8);
  SynthFactors f;
  f.content = {0, 1, 2};
  f.durations = {10, 20, 30};
  f.pitch_targets = {0.2, 0.5, 0.8};
  f.speaker = 0;
  Utterance utt = generate(f, cfg, speakers);
  CHECK(utt.mel.rows == 60);
  CHECK(static_cast<int>(utt.pitch_bins.size()) == 60);
  CHECK(utt.mel.cols == 80);

  SynthFactors single;
  single.content = {4};
  single.durations = {10};
  single.pitch_targets = {0.4};
  single.speaker = 1;
  CHECK(generate(single, cfg, speakers).mel.rows == 10);
}

TEST_CASE("generate: same factors across speakers share the contour exactly") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(8);
  SynthFactors f;
  f.content = {1, 3, 5, 7};
  f.durations = {12, 25, 18, 33};
  f.pitch_targets = {0.25, 0.7, 0.45, 0.6};
  f.speaker = 0;
  Utterance a = generate(f, cfg, speakers);
  f.speaker = 5;
  Utterance b = generate(f, cfg, speakers);
  CHECK(a.pitch_bins == b.pitch_bins);
  double diff = 0.0;
  for (size_t i = 0; i < a.mel.data.size(); ++i)
    diff += std::fabs(static_cast<double>(a.mel.data[i]) - b.mel.data[i]);
  CHECK(diff > 1.0);  // spectrograms differ through tilt and offset
}

TEST_CASE("generate is deterministic in its inputs") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(4);
  SynthFactors f = sample_factors(2, 123, cfg);
  SynthFactors g = sample_factors(2, 123, cfg);
  CHECK(f.content == g.content);
  CHECK(f.durations == g.durations);
  Utterance a = generate(f, cfg, speakers);
  Utterance b = generate(g, cfg, speakers);
  CHECK(std::memcmp(a.mel.data.data(), b.mel.data.data(),
                    sizeof(float) * a.mel.size()) == 0);
}

TEST_CASE("factor sampling respects the declared ranges") {
  SynthConfig cfg;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    SynthFactors f = sample_factors(0, seed, cfg);
    f.validate();
    CHECK(static_cast<int>(f.content.size()) >= cfg.syllables_min);
    CHECK(static_cast<int>(f.content.size()) <= cfg.syllables_max);
    for (int c : f.content) {
      CHECK(c >= 0);
      CHECK(c < cfg.n_templates);
    }
  }
}

TEST_CASE("gap frames are unvoiced and silent between syllables") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(2);
  SynthFactors f;
  f.content = {0, 1};
  f.durations = {12, 14};
  f.pitch_targets = {0.3, 0.6};
  f.speaker = 0;
  Utterance utt = generate(f, cfg, speakers);
  // Trailing two frames of the first syllable's span are the gap.
  for (int t = 10; t < 12; ++t) {
    CHECK(utt.pitch_bins[static_cast<size_t>(t)] == kUnvoicedBin);
    for (int b = 0; b < 80; ++b) CHECK(utt.mel.at(t, b) == 0.0f);
  }
  CHECK(utt.pitch_bins[9] != kUnvoicedBin);
  CHECK(utt.pitch_bins[12] != kUnvoicedBin);
}

TEST_CASE("true contour follows targets on the nominal map") {
  SynthConfig cfg;
  SynthFactors f;
  f.content = {0, 1};
  f.durations = {12, 14};
  f.pitch_targets = {0.3, 0.6};
  f.speaker = 0;
  PitchContour c = true_contour(f, cfg);
  REQUIRE(static_cast<int>(c.size()) == 26);
  CHECK(c[0] == doctest::Approx(100.0 + 300.0 * 0.3));
  CHECK(c[10] == 0.0f);  // gap
  CHECK(c[13] == doctest::Approx(100.0 + 300.0 * 0.6));
}

TEST_CASE("sample_corpus sizes, splits and pair structure") {
  SynthConfig cfg;
  Corpus corpus = sample_corpus(8, 4, 7, cfg, 5);
  int train = 0, test = 0;
  for (const auto& u : corpus.utterances) (u.test_only ? test : train)++;
  CHECK(train == 32);
  CHECK(test == 10);
  CHECK(corpus.pairs.size() == 5);
  std::set<std::string> ids;
  for (const auto& u : corpus.utterances) ids.insert(u.id);
  CHECK(ids.size() == corpus.utterances.size());  // disjoint ids
  for (const auto& p : corpus.pairs) {
    const Utterance& a = corpus.by_id(p.source_id);
    const Utterance& b = corpus.by_id(p.target_id);
    CHECK(a.factors->content == b.factors->content);
    CHECK(a.speaker != b.speaker);
    CHECK(a.factors->durations != b.factors->durations);
  }
}

TEST_CASE("sample_corpus is byte-identical for the same seed") {
  SynthConfig cfg;
  Corpus a = sample_corpus(3, 3, 99, cfg, 2);
  Corpus b = sample_corpus(3, 3, 99, cfg, 2);
  REQUIRE(a.utterances.size() == b.utterances.size());
  for (size_t i = 0; i < a.utterances.size(); ++i) {
    CHECK(a.utterances[i].id == b.utterances[i].id);
    CHECK(std::memcmp(a.utterances[i].mel.data.data(),
                      b.utterances[i].mel.data.data(),
                      sizeof(float) * a.utterances[i].mel.size()) == 0);
    CHECK(a.utterances[i].pitch_bins == b.utterances[i].pitch_bins);
  }
}

// Injectivity on a factor grid: distinct factor tuples give spectrograms
// separated in mean squared distance.
TEST_CASE("generator is injective on a hundred-tuple grid") {
  SynthConfig cfg;
  auto speakers = synth_speaker_table(4);
  std::vector<Utterance> utts;
  for (int i = 0; i < 100; ++i) {
    SynthFactors f;
    f.content = {i % 10, (i / 10) % 10};
    f.durations = {14 + (i % 5), 20 + (i / 20)};
    f.pitch_targets = {0.2 + 0.006 * i, 0.8 - 0.006 * i};
    f.speaker = i % 4;
    utts.push_back(generate(f, cfg, speakers));
  }
  for (size_t i = 0; i < utts.size(); ++i) {
    for (size_t j = i + 1; j < utts.size(); ++j) {
      const Matf& a = utts[i].mel;
      const Matf& b = utts[j].mel;
      size_t n = std::min(a.data.size(), b.data.size());
      double mse = 0.0;
      for (size_t k = 0; k < n; ++k) {
        double d = static_cast<double>(a.data[k]) - b.data[k];
        mse += d * d;
      }
      mse /= static_cast<double>(n);
      if (a.rows != b.rows) continue;  // length already separates them
      CHECK(mse > 1e-5);
    }
  }
}

TEST_CASE("assumption harness passes with resampling, fails rhythm without") {
  SynthConfig cfg;
  Corpus corpus = sample_corpus(4, 8, 11, cfg, 0);
  Rng rng(55);
  HarnessReport with_rr = assumption_harness(corpus, rng, cfg, false);
  CHECK(with_rr.syllables_checked > 100);
  CHECK(with_rr.content_accuracy >= 0.99);
  CHECK(with_rr.pitch_within_one_bin >= 0.99);
  CHECK(with_rr.rhythm_perturbed_fraction >= 0.30);
  CHECK(with_rr.all_pass());

  Rng rng2(56);
  HarnessReport identity = assumption_harness(corpus, rng2, cfg, true);
  CHECK(identity.content_accuracy >= 0.99);
  CHECK(identity.pitch_within_one_bin >= 0.99);
  CHECK(identity.rhythm_perturbed_fraction == 0.0);
  CHECK_FALSE(identity.rhythm_pass);
}
