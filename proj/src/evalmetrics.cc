// src/evalmetrics.cc

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

#include "speechsplit/evalmetrics.h"

#include <algorithm>
#include <cmath>

#include "speechsplit/base.h"

namespace speechsplit {

namespace {
void check_equal_lengths(const PitchContour& ref, const PitchContour& est,
                         const char* what) {
  if (ref.size() != est.size())
    throw DataError(std::string(what) + ": contour lengths differ (" +
                    std::to_string(ref.size()) + " vs " +
                    std::to_string(est.size()) + ")");
}
}  // namespace

double gpe(const PitchContour& ref, const PitchContour& est, double tol) {
  check_equal_lengths(ref, est, "gpe");
  int both = 0, gross = 0;
  for (size_t t = 0; t < ref.size(); ++t) {
    if (ref[t] > 0.0f && est[t] > 0.0f) {
      ++both;
      if (std::fabs(est[t] - ref[t]) / ref[t] > tol) ++gross;
    }
  }
  if (both == 0) return 0.0;
  return static_cast<double>(gross) / both;
}

double vde(const PitchContour& ref, const PitchContour& est) {
  check_equal_lengths(ref, est, "vde");
  if (ref.empty()) return 0.0;
  int diff = 0;
  for (size_t t = 0; t < ref.size(); ++t)
    if ((ref[t] > 0.0f) != (est[t] > 0.0f)) ++diff;
  return static_cast<double>(diff) / static_cast<double>(ref.size());
}

double ffe(const PitchContour& ref, const PitchContour& est, double tol) {
  check_equal_lengths(ref, est, "ffe");
  if (ref.empty()) return 0.0;
  int bad = 0;
  for (size_t t = 0; t < ref.size(); ++t) {
    bool rv = ref[t] > 0.0f, ev = est[t] > 0.0f;
    if (rv != ev)
      ++bad;
    else if (rv && ev && std::fabs(est[t] - ref[t]) / ref[t] > tol)
      ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(ref.size());
}

// ---------------------------------------------------------------------------
// Synthetic-feature analysis
// ---------------------------------------------------------------------------

std::vector<double> pitch_band_energy(const Matf& mel,
                                      const SynthAnalysisParams& ap) {
  std::vector<double> e(static_cast<size_t>(mel.rows), 0.0);
  for (int t = 0; t < mel.rows; ++t) {
    double s = 0.0;
    for (int b = 0; b < ap.pitch_band; ++b) s += mel.at(t, b);
    e[static_cast<size_t>(t)] = s;
  }
  return e;
}

namespace {

std::vector<bool> voicing_mask(const Matf& mel, const SynthAnalysisParams& ap) {
  std::vector<double> e = pitch_band_energy(mel, ap);
  std::vector<double> sorted = e;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
  double threshold = std::max(ap.gap_ratio * median, ap.min_band_energy);
  std::vector<bool> voiced(e.size());
  for (size_t t = 0; t < e.size(); ++t) voiced[t] = e[t] > threshold;
  return voiced;
}

}  // namespace

std::vector<double> estimate_f0_norm(const Matf& mel,
                                     const SynthAnalysisParams& ap) {
  std::vector<bool> voiced = voicing_mask(mel, ap);
  std::vector<double> u(static_cast<size_t>(mel.rows), -1.0);
  for (int t = 0; t < mel.rows; ++t) {
    if (!voiced[static_cast<size_t>(t)]) continue;
    int arg = 0;
    double best = -1.0;
    for (int b = 0; b < ap.pitch_band; ++b) {
      if (mel.at(t, b) > best) {
        best = mel.at(t, b);
        arg = b;
      }
    }
    double center = arg;
    if (arg > 0 && arg < ap.pitch_band - 1) {
      double a = mel.at(t, arg - 1), bb = mel.at(t, arg), c = mel.at(t, arg + 1);
      double denom = a - 2.0 * bb + c;
      if (std::fabs(denom) > 1e-12) {
        double shift = 0.5 * (a - c) / denom;
        if (std::fabs(shift) <= 1.0) center += shift;
      }
    }
    double v = (center - ap.center_lo) / (ap.center_hi - ap.center_lo);
    u[static_cast<size_t>(t)] = std::clamp(v, 0.0, 1.0);
  }
  return u;
}

PitchContour estimate_f0_mel(const Matf& mel, const SynthAnalysisParams& ap) {
  std::vector<double> u = estimate_f0_norm(mel, ap);
  PitchContour contour(u.size(), 0.0f);
  for (size_t t = 0; t < u.size(); ++t)
    if (u[t] >= 0.0)
      contour[t] = static_cast<float>(ap.nominal_f0_lo + ap.nominal_f0_span * u[t]);
  return contour;
}

std::vector<Syllable> segment_syllables(const Matf& mel,
                                        const SynthAnalysisParams& ap) {
  std::vector<bool> voiced = voicing_mask(mel, ap);
  std::vector<std::pair<int, int>> runs;  // (start, voiced_len)
  int t = 0;
  const int n = mel.rows;
  while (t < n) {
    if (voiced[static_cast<size_t>(t)]) {
      int start = t;
      while (t < n && voiced[static_cast<size_t>(t)]) ++t;
      runs.emplace_back(start, t - start);
    } else {
      ++t;
    }
  }
  // Merge spurious short runs into the preceding syllable.
  std::vector<std::pair<int, int>> kept;
  for (const auto& r : runs) {
    if (r.second < ap.min_syllable_frames) {
      if (!kept.empty()) kept.back().second = r.first + r.second - kept.back().first;
      continue;
    }
    kept.push_back(r);
  }
  std::vector<Syllable> out;
  for (size_t i = 0; i < kept.size(); ++i) {
    Syllable s;
    s.start = kept[i].first;
    s.voiced_length = kept[i].second;
    int end = i + 1 < kept.size() ? kept[i + 1].first : kept[i].first + kept[i].second;
    s.length = end - s.start;
    out.push_back(s);
  }
  return out;
}

std::vector<double> syllable_pitches(const Matf& mel,
                                     const std::vector<Syllable>& syllables,
                                     const SynthAnalysisParams& ap) {
  std::vector<double> u = estimate_f0_norm(mel, ap);
  std::vector<double> out;
  out.reserve(syllables.size());
  for (const auto& s : syllables) {
    double acc = 0.0;
    int cnt = 0;
    for (int t = s.start; t < s.start + s.voiced_length && t < mel.rows; ++t) {
      if (u[static_cast<size_t>(t)] >= 0.0) {
        acc += u[static_cast<size_t>(t)];
        ++cnt;
      }
    }
    out.push_back(cnt > 0 ? acc / cnt : -1.0);
  }
  return out;
}

std::vector<double> content_envelope(const Matf& mel, const SynthAnalysisParams& ap) {
  std::vector<bool> voiced = voicing_mask(mel, ap);
  std::vector<double> env(static_cast<size_t>(mel.cols - ap.pitch_band), 0.0);
  int cnt = 0;
  for (int t = 0; t < mel.rows; ++t) {
    if (!voiced[static_cast<size_t>(t)]) continue;
    ++cnt;
    for (int b = ap.pitch_band; b < mel.cols; ++b)
      env[static_cast<size_t>(b - ap.pitch_band)] += mel.at(t, b);
  }
  for (auto& v : env) v = std::log(1e-4 + (cnt > 0 ? v / cnt : 0.0));
  return env;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DataError("pearson: need two equal-length vectors of size >= 2");
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(a.size());
  double num = 0, va = 0, vb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  double denom = std::sqrt(va * vb);
  if (denom < 1e-12) return 0.0;
  return num / denom;
}

namespace {

// 1 - Pearson correlation of log envelopes; the envelope bump positions and
// tilt carry the speaker, so this acts as a timbre distance.
double envelope_distance(const std::vector<double>& a, const std::vector<double>& b) {
  return 1.0 - pearson(a, b);
}

}  // namespace

AspectScores factor_recovery(const Matf& output, const PairTruth& truth,
                             const SynthAnalysisParams& ap) {
  AspectScores scores;
  const size_t n_syll = truth.source_durations.size();
  if (n_syll != truth.target_durations.size() || n_syll < 2)
    throw DataError("factor_recovery: pair syllable counts unusable");

  std::vector<Syllable> syllables = segment_syllables(output, ap);
  if (syllables.size() != n_syll) return scores;  // invalid
  std::vector<double> rec_dur;
  for (const auto& s : syllables) rec_dur.push_back(s.length);
  std::vector<double> rec_pitch = syllable_pitches(output, syllables, ap);
  for (double p : rec_pitch)
    if (p < 0.0) return scores;  // degenerate: syllable without voiced frames

  scores.rhythm = pearson(rec_dur, truth.target_durations) -
                  pearson(rec_dur, truth.source_durations);
  scores.pitch = pearson(rec_pitch, truth.target_targets) -
                 pearson(rec_pitch, truth.source_targets);

  std::vector<double> env_out = content_envelope(output, ap);
  std::vector<double> env_src = content_envelope(*truth.source_mel, ap);
  std::vector<double> env_tgt = content_envelope(*truth.target_mel, ap);
  double d_src = envelope_distance(env_out, env_src);
  double d_tgt = envelope_distance(env_out, env_tgt);
  scores.timbre = (d_src - d_tgt) / (d_src + d_tgt + 1e-9);
  scores.valid = true;
  return scores;
}

}  // namespace speechsplit
