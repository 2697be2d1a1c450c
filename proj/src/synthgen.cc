// src/synthgen.cc

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

#include "speechsplit/synthgen.h"

#include <algorithm>
#include <cmath>

namespace speechsplit {

namespace {

constexpr uint64_t kTemplateSeed = 0x5157a11ab1e5ULL;

double tilt_at(double slope, int bin) {
  return std::exp(slope * (bin - 40.0) / 40.0);
}

// Quantization under the canonical normalization (identical for every
// synthetic speaker, so the contour carries no speaker identity).
uint16_t canonical_bin(double u, const SynthConfig& cfg) {
  double n = (u - cfg.canonical_mean) / (4.0 * cfg.canonical_std) + 0.5;
  n = std::clamp(n, 0.0, 1.0);
  return static_cast<uint16_t>(std::min(static_cast<int>(n * 256.0), 255));
}

}  // namespace

std::vector<SynthSpeaker> synth_speaker_table(int n_speakers) {
  static const int kOffsets[8] = {-4, -3, -2, -1, 1, 2, 3, 4};
  static const double kSlopes[8] = {-0.35, -0.25, -0.15, -0.05,
                                    0.05,  0.15,  0.25,  0.35};
  std::vector<SynthSpeaker> table(static_cast<size_t>(n_speakers));
  SynthConfig cfg;
  for (int v = 0; v < n_speakers; ++v) {
    SynthSpeaker& s = table[static_cast<size_t>(v)];
    s.envelope_offset = kOffsets[v % 8];
    s.tilt_slope = kSlopes[(v * 3) % 8];  // decoupled from the offset
    s.f0_base_hz = 100.0 + 15.0 * (v % 8);
    s.f0_span_hz = 120.0 + 10.0 * ((v * 5) % 8);
    s.stats.speaker_id = "spk" + std::to_string(v);
    s.stats.mean_f0 = s.f0_base_hz + s.f0_span_hz * cfg.canonical_mean;
    s.stats.std_f0 = s.f0_span_hz * cfg.canonical_std;
  }
  return table;
}

std::vector<std::vector<double>> synth_templates(const SynthConfig& cfg) {
  Rng rng(kTemplateSeed);
  const int band_lo = cfg.analysis.pitch_band + 6;  // keep clear of the f0 band
  const int band_hi = kMelBins - 5;
  std::vector<std::vector<double>> templates;
  for (int i = 0; i < cfg.n_templates; ++i) {
    std::vector<int> centers;
    while (static_cast<int>(centers.size()) < cfg.template_bumps) {
      int c = static_cast<int>(rng.uniform_int(band_lo, band_hi - 1));
      bool ok = true;
      for (int existing : centers)
        if (std::abs(existing - c) < 7) ok = false;
      if (ok) centers.push_back(c);
    }
    std::vector<double> tpl(kMelBins, 0.0);
    for (int c : centers) {
      double amp = rng.uniform(0.5, 0.85);
      for (int b = cfg.analysis.pitch_band; b < kMelBins; ++b)
        tpl[static_cast<size_t>(b)] +=
            amp * std::exp(-0.5 * (b - c) * (b - c) /
                           (cfg.template_sigma * cfg.template_sigma));
    }
    // Equalize total energy across templates so syllable loudness is flat.
    double e = 0.0;
    for (double v : tpl) e += v * v;
    double scale = 2.1 / std::sqrt(e);
    for (double& v : tpl) v = std::min(v * scale, 0.95);
    templates.push_back(std::move(tpl));
  }
  return templates;
}

Utterance generate(const SynthFactors& factors, const SynthConfig& cfg,
                   const std::vector<SynthSpeaker>& speakers) {
  factors.validate();
  if (factors.speaker < 0 ||
      factors.speaker >= static_cast<int>(speakers.size()))
    throw DataError("generate: speaker index out of range");
  const SynthSpeaker& spk = speakers[static_cast<size_t>(factors.speaker)];
  const std::vector<std::vector<double>> templates = synth_templates(cfg);
  for (int c : factors.content)
    if (c < 0 || c >= static_cast<int>(templates.size()))
      throw DataError("generate: content symbol out of range");

  const int total = factors.total_frames();
  const int n_syll = static_cast<int>(factors.content.size());
  Utterance utt;
  utt.speaker = factors.speaker;
  utt.factors = factors;
  utt.mel = Matf(total, kMelBins);
  utt.pitch_bins.assign(static_cast<size_t>(total), kUnvoicedBin);

  int t = 0;
  for (int i = 0; i < n_syll; ++i) {
    const int dur = factors.durations[static_cast<size_t>(i)];
    const int gap = i + 1 < n_syll ? cfg.gap_frames : 0;
    const int voiced = dur - gap;
    const std::vector<double>& tpl =
        templates[static_cast<size_t>(factors.content[static_cast<size_t>(i)])];
    const double u = factors.pitch_targets[static_cast<size_t>(i)];
    const double f0_center = cfg.analysis.center_lo +
                             u * (cfg.analysis.center_hi - cfg.analysis.center_lo);
    const uint16_t bin = canonical_bin(u, cfg);
    for (int f = 0; f < voiced; ++f, ++t) {
      float* row = utt.mel.row(t);
      for (int b = 0; b < kMelBins; ++b) {
        double value = 0.0;
        if (b >= cfg.analysis.pitch_band) {
          int src = b - spk.envelope_offset;  // offset shifts bumps upward
          if (src >= cfg.analysis.pitch_band && src < kMelBins)
            value = tpl[static_cast<size_t>(src)];
        } else {
          double d = b - f0_center;
          value = cfg.pitch_bump_amp *
                  std::exp(-0.5 * d * d / (cfg.pitch_bump_sigma * cfg.pitch_bump_sigma));
        }
        value *= tilt_at(spk.tilt_slope, b);
        row[b] = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
      utt.pitch_bins[static_cast<size_t>(t)] = bin;
    }
    t += gap;  // gap rows remain silent / unvoiced
  }
  return utt;
}

PitchContour true_contour(const SynthFactors& factors, const SynthConfig& cfg) {
  const int total = factors.total_frames();
  PitchContour contour(static_cast<size_t>(total), 0.0f);
  int t = 0;
  const int n_syll = static_cast<int>(factors.content.size());
  for (int i = 0; i < n_syll; ++i) {
    const int dur = factors.durations[static_cast<size_t>(i)];
    const int gap = i + 1 < n_syll ? cfg.gap_frames : 0;
    const double u = factors.pitch_targets[static_cast<size_t>(i)];
    for (int f = 0; f < dur - gap; ++f, ++t)
      contour[static_cast<size_t>(t)] = static_cast<float>(
          cfg.analysis.nominal_f0_lo + cfg.analysis.nominal_f0_span * u);
    t += gap;
  }
  return contour;
}

SynthFactors sample_factors(int speaker, uint64_t seed, const SynthConfig& cfg) {
  Rng rng(seed);
  SynthFactors f;
  f.speaker = speaker;
  int n = static_cast<int>(rng.uniform_int(cfg.syllables_min, cfg.syllables_max));
  for (int i = 0; i < n; ++i) {
    f.content.push_back(static_cast<int>(rng.uniform_int(0, cfg.n_templates - 1)));
    f.durations.push_back(
        static_cast<int>(rng.uniform_int(cfg.duration_min, cfg.duration_max)));
    f.pitch_targets.push_back(rng.uniform(cfg.target_lo, cfg.target_hi));
  }
  return f;
}

namespace {

std::vector<double> to_double(const std::vector<int>& v) {
  return std::vector<double>(v.begin(), v.end());
}

}  // namespace

Corpus sample_corpus(int n_speakers, int n_utterances, uint64_t seed,
                     const SynthConfig& cfg, int n_pairs) {
  if (n_speakers < 1 || n_utterances < 1)
    throw DataError("sample_corpus: need at least one speaker and utterance");
  Corpus corpus;
  std::vector<SynthSpeaker> speakers = synth_speaker_table(n_speakers);
  for (const auto& s : speakers) {
    corpus.speaker_names.push_back(s.stats.speaker_id);
    corpus.speaker_stats[s.stats.speaker_id] = s.stats;
  }
  for (int v = 0; v < n_speakers; ++v) {
    for (int i = 0; i < n_utterances; ++i) {
      SynthFactors f = sample_factors(v, derive_seed(seed, "factors", v, i), cfg);
      Utterance utt = generate(f, cfg, speakers);
      utt.id = "spk" + std::to_string(v) + "_utt" + std::to_string(i);
      corpus.utterances.push_back(std::move(utt));
    }
  }
  // Parallel test pairs: shared content, independent rhythm and pitch with
  // enforced anti-correlation, speakers chosen with well-separated envelopes.
  for (int p = 0; p < n_pairs; ++p) {
    int spk_a = p % n_speakers;
    int spk_b = (p + std::max(1, n_speakers / 2)) % n_speakers;
    if (spk_a == spk_b) spk_b = (spk_b + 1) % n_speakers;
    SynthFactors fa = sample_factors(
        spk_a, derive_seed(seed, "pair_src", p, 0), cfg);
    SynthFactors fb = fa;
    fb.speaker = spk_b;
    for (int attempt = 0; attempt < 200; ++attempt) {
      Rng rng(derive_seed(seed, "pair_tgt", p, attempt));
      for (size_t i = 0; i < fb.durations.size(); ++i) {
        fb.durations[i] =
            static_cast<int>(rng.uniform_int(cfg.duration_min, cfg.duration_max));
        fb.pitch_targets[i] = rng.uniform(cfg.target_lo, cfg.target_hi);
      }
      if (pearson(to_double(fa.durations), to_double(fb.durations)) < -0.2 &&
          pearson(fa.pitch_targets, fb.pitch_targets) < -0.2)
        break;
    }
    Utterance ua = generate(fa, cfg, speakers);
    ua.id = "pair" + std::to_string(p) + "_src";
    ua.test_only = true;
    Utterance ub = generate(fb, cfg, speakers);
    ub.id = "pair" + std::to_string(p) + "_tgt";
    ub.test_only = true;
    corpus.pairs.push_back({ua.id, ub.id});
    corpus.utterances.push_back(std::move(ua));
    corpus.utterances.push_back(std::move(ub));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Assumption harness
// ---------------------------------------------------------------------------

namespace {

// Classify a syllable of A(S) by correlating its mean content-band envelope
// against each template rendered at the utterance speaker's offset.
int classify_syllable(const Matf& mel, const Syllable& syl,
                      const std::vector<std::vector<double>>& templates,
                      const SynthSpeaker& spk, const SynthConfig& cfg) {
  const int band = cfg.analysis.pitch_band;
  std::vector<double> env(static_cast<size_t>(kMelBins - band), 0.0);
  for (int t = syl.start; t < syl.start + syl.voiced_length; ++t)
    for (int b = band; b < kMelBins; ++b)
      env[static_cast<size_t>(b - band)] += mel.at(t, b);
  int best = -1;
  double best_corr = -2.0;
  for (size_t k = 0; k < templates.size(); ++k) {
    std::vector<double> ref(static_cast<size_t>(kMelBins - band), 0.0);
    for (int b = band; b < kMelBins; ++b) {
      int src = b - spk.envelope_offset;
      if (src >= band && src < kMelBins)
        ref[static_cast<size_t>(b - band)] = templates[k][static_cast<size_t>(src)];
    }
    double c = pearson(env, ref);
    if (c > best_corr) {
      best_corr = c;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

HarnessReport assumption_harness(const Corpus& corpus, Rng& rng,
                                 const SynthConfig& cfg, bool identity_plans) {
  HarnessReport report;
  const std::vector<std::vector<double>> templates = synth_templates(cfg);
  std::vector<SynthSpeaker> speakers =
      synth_speaker_table(static_cast<int>(corpus.speaker_names.size()));
  int content_ok = 0, pitch_ok = 0, rhythm_perturbed = 0, total = 0;
  for (const auto& utt : corpus.utterances) {
    if (!utt.factors.has_value()) continue;
    const SynthFactors& truth = *utt.factors;
    const int frames = utt.mel.rows;
    ResamplePlan plan =
        identity_plans ? identity_plan(frames) : draw_plan(frames, rng);
    InterpTaps taps = plan_taps(plan);
    Matf mel_rr = apply_taps(utt.mel, taps);
    QuantizedPitch q;
    q.bins = utt.pitch_bins;
    Matf pitch_rr = apply_taps(q.onehot(), taps);

    const size_t n_syll = truth.content.size();
    std::vector<Syllable> syllables = segment_syllables(mel_rr, cfg.analysis);
    total += static_cast<int>(n_syll);
    if (syllables.size() != n_syll) continue;  // counts as full failure

    // Content: template classification from A(S).
    for (size_t i = 0; i < n_syll; ++i) {
      int got = classify_syllable(mel_rr, syllables[i], templates,
                                  speakers[static_cast<size_t>(utt.speaker)], cfg);
      if (got == truth.content[i]) ++content_ok;
    }
    // Rhythm: recovered durations against ground truth.
    for (size_t i = 0; i < n_syll; ++i) {
      double rec = syllables[i].length;
      double ref = truth.durations[i];
      if (std::fabs(rec - ref) / ref > 0.10) ++rhythm_perturbed;
    }
    // Pitch: per-syllable bin recovered from A(P), using the unvoiced mass to
    // find gaps and the weighted bin mean within each voiced stretch.
    {
      std::vector<char> voiced(static_cast<size_t>(pitch_rr.rows));
      for (int t = 0; t < pitch_rr.rows; ++t)
        voiced[static_cast<size_t>(t)] = pitch_rr.at(t, kUnvoicedBin) < 0.3f;
      std::vector<std::pair<int, int>> runs;
      int t = 0;
      while (t < pitch_rr.rows) {
        if (voiced[static_cast<size_t>(t)]) {
          int start = t;
          while (t < pitch_rr.rows && voiced[static_cast<size_t>(t)]) ++t;
          if (t - start >= cfg.analysis.min_syllable_frames)
            runs.emplace_back(start, t - start);
        } else {
          ++t;
        }
      }
      if (runs.size() == n_syll) {
        for (size_t i = 0; i < n_syll; ++i) {
          double acc = 0.0, mass = 0.0;
          for (int f = runs[i].first; f < runs[i].first + runs[i].second; ++f) {
            for (int b = 0; b < 256; ++b) {
              float w = pitch_rr.at(f, b);
              if (w > 0.0f) {
                acc += static_cast<double>(w) * b;
                mass += w;
              }
            }
          }
          if (mass <= 0.0) continue;
          int rec_bin = static_cast<int>(std::lround(acc / mass));
          int ref_bin = canonical_bin(truth.pitch_targets[i], cfg);
          if (std::abs(rec_bin - ref_bin) <= 1) ++pitch_ok;
        }
      }
    }
  }
  report.syllables_checked = total;
  if (total > 0) {
    report.content_accuracy = static_cast<double>(content_ok) / total;
    report.pitch_within_one_bin = static_cast<double>(pitch_ok) / total;
    report.rhythm_perturbed_fraction =
        static_cast<double>(rhythm_perturbed) / total;
  }
  report.content_pass = report.content_accuracy >= 0.99;
  report.pitch_pass = report.pitch_within_one_bin >= 0.99;
  report.rhythm_pass = report.rhythm_perturbed_fraction >= 0.30;
  return report;
}

}  // namespace speechsplit
