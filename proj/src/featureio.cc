// src/featureio.cc

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

#include "speechsplit/featureio.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "speechsplit/base.h"

namespace speechsplit {

namespace {

// Iterative radix-2 complex FFT, length must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// 80 triangular filters on the mel scale between fmin and fmax, peak 1.
Matd mel_filterbank(const FeatureConfig& cfg) {
  int n_fft_bins = cfg.frame_length / 2 + 1;
  Matd fb(cfg.mel_bins, n_fft_bins);
  double mel_lo = hz_to_mel(cfg.mel_fmin_hz);
  double mel_hi = hz_to_mel(cfg.mel_fmax_hz);
  std::vector<double> centers(cfg.mel_bins + 2);
  for (int i = 0; i < cfg.mel_bins + 2; ++i)
    centers[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.mel_bins + 1));
  for (int m = 0; m < cfg.mel_bins; ++m) {
    double f0 = centers[m], f1 = centers[m + 1], f2 = centers[m + 2];
    for (int k = 0; k < n_fft_bins; ++k) {
      double fk = static_cast<double>(k) * cfg.sample_rate / cfg.frame_length;
      double w = 0.0;
      if (fk > f0 && fk < f1)
        w = (fk - f0) / (f1 - f0);
      else if (fk >= f1 && fk < f2)
        w = (f2 - fk) / (f2 - f1);
      fb.at(m, k) = w;
    }
  }
  return fb;
}

}  // namespace

Matf mel_spectrogram(const Waveform& wave, const FeatureConfig& cfg) {
  const int n = static_cast<int>(wave.samples.size());
  if (wave.sample_rate != cfg.sample_rate)
    throw DataError("mel_spectrogram: expected " + std::to_string(cfg.sample_rate) +
                    " Hz input");
  if (n < cfg.frame_length)
    throw DataError("mel_spectrogram: waveform shorter than one frame (" +
                    std::to_string(n) + " < " + std::to_string(cfg.frame_length) + ")");
  const int frames = (n - cfg.frame_length) / cfg.frame_hop + 1;
  static thread_local Matd fb;
  static thread_local FeatureConfig fb_cfg;
  if (fb.rows == 0 || !(fb_cfg == cfg)) {
    fb = mel_filterbank(cfg);
    fb_cfg = cfg;
  }

  std::vector<double> window(cfg.frame_length);
  for (int i = 0; i < cfg.frame_length; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / cfg.frame_length);
  // Reference magnitude: a full-scale sine lands at about 0 dB.
  const double ref = 0.25 * cfg.frame_length;
  const double floor_mag = ref * std::pow(10.0, cfg.db_floor / 20.0);
  const double db_range = cfg.db_ceil - cfg.db_floor;

  Matf out(frames, cfg.mel_bins);
  const int n_fft_bins = cfg.frame_length / 2 + 1;
  std::vector<std::complex<double>> buf(cfg.frame_length);
  std::vector<double> mag(n_fft_bins);
  for (int t = 0; t < frames; ++t) {
    const float* x = wave.samples.data() + static_cast<size_t>(t) * cfg.frame_hop;
    for (int i = 0; i < cfg.frame_length; ++i)
      buf[i] = std::complex<double>(x[i] * window[i], 0.0);
    fft_inplace(buf);
    for (int k = 0; k < n_fft_bins; ++k) mag[k] = std::abs(buf[k]);
    for (int m = 0; m < cfg.mel_bins; ++m) {
      double e = dot(fb.row(m), mag.data(), n_fft_bins);
      double db = 20.0 * std::log10(std::max(e, floor_mag) / ref);
      double v = (db - cfg.db_floor) / db_range;
      out.at(t, m) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

PitchContour AutocorrPitchTracker::extract(const Waveform& wave,
                                           const FeatureConfig& cfg) const {
  const int n = static_cast<int>(wave.samples.size());
  if (n < cfg.frame_length) return {};
  const int frames = (n - cfg.frame_length) / cfg.frame_hop + 1;
  const int lag_min =
      std::max(2, static_cast<int>(cfg.sample_rate / cfg.pitch_fmax_hz));
  const int lag_max = static_cast<int>(cfg.sample_rate / cfg.pitch_fmin_hz);
  const int win = cfg.frame_length - lag_max;  // correlation window

  PitchContour contour(frames, 0.0f);
  std::vector<double> frame(cfg.frame_length);
  for (int t = 0; t < frames; ++t) {
    const float* x = wave.samples.data() + static_cast<size_t>(t) * cfg.frame_hop;
    double mean = 0.0;
    for (int i = 0; i < cfg.frame_length; ++i) mean += x[i];
    mean /= cfg.frame_length;
    for (int i = 0; i < cfg.frame_length; ++i) frame[i] = x[i] - mean;

    double e0 = dot(frame.data(), frame.data(), win);
    if (std::sqrt(e0 / win) < cfg.energy_gate_rms) continue;  // silence

    double best_r = 0.0;
    std::vector<double> nccf(lag_max + 1, 0.0);
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      double num = dot(frame.data(), frame.data() + lag, win);
      double el = dot(frame.data() + lag, frame.data() + lag, win);
      double den = std::sqrt(e0 * el) + 1e-12;
      double r = num / den;
      nccf[lag] = r;
      if (r > best_r) best_r = r;
    }
    if (best_r < cfg.voicing_threshold) continue;
    // Periodic signals peak at every multiple of the true lag; take the
    // shortest local peak close to the global maximum to avoid octave-down
    // errors.
    int best_lag = 0;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      bool local_peak = (lag == lag_min || nccf[lag] >= nccf[lag - 1]) &&
                        (lag == lag_max || nccf[lag] >= nccf[lag + 1]);
      if (local_peak && nccf[lag] >= best_r - 0.01) {
        best_lag = lag;
        break;
      }
    }
    if (best_lag == 0) continue;

    // Parabolic refinement around the peak lag.
    double lag = best_lag;
    if (best_lag > lag_min && best_lag < lag_max) {
      double a = nccf[best_lag - 1], b = nccf[best_lag], c = nccf[best_lag + 1];
      double denom = a - 2.0 * b + c;
      if (std::fabs(denom) > 1e-12) {
        double shift = 0.5 * (a - c) / denom;
        if (std::fabs(shift) <= 1.0) lag += shift;
      }
    }
    double f0 = cfg.sample_rate / lag;
    f0 = std::clamp(f0, cfg.pitch_fmin_hz, cfg.pitch_fmax_hz);
    contour[t] = static_cast<float>(f0);
  }
  return contour;
}

PitchContour extract_pitch(const Waveform& wave, const FeatureConfig& cfg) {
  AutocorrPitchTracker tracker;
  return tracker.extract(wave, cfg);
}

SpeakerStats compute_speaker_stats(const std::string& speaker_id,
                                   const std::vector<PitchContour>& contours) {
  std::vector<double> voiced;
  for (const auto& c : contours)
    for (float v : c)
      if (v > 0.0f) voiced.push_back(v);
  if (voiced.empty())
    throw DataError("speaker stats for '" + speaker_id +
                    "': no voiced frames in corpus");
  double mean = 0.0;
  for (double v : voiced) mean += v;
  mean /= static_cast<double>(voiced.size());
  double var = 0.0;
  for (double v : voiced) var += (v - mean) * (v - mean);
  var /= static_cast<double>(voiced.size());  // population convention
  double sd = std::sqrt(var);
  if (sd < 1e-9)
    throw DataError("speaker stats for '" + speaker_id +
                    "': zero pitch variance (corrupt data?)");
  return {speaker_id, mean, sd};
}

uint16_t quantize_f0(double f0_hz, const SpeakerStats& stats) {
  if (f0_hz <= 0.0) return kUnvoicedBin;
  double n = (f0_hz - stats.mean_f0) / (4.0 * stats.std_f0) + 0.5;
  n = std::clamp(n, 0.0, 1.0);
  int bin = static_cast<int>(n * 256.0);
  return static_cast<uint16_t>(std::min(bin, 255));
}

double dequantize_bin(uint16_t bin, const SpeakerStats& stats) {
  if (bin >= kUnvoicedBin) return 0.0;
  double n = (bin + 0.5) / 256.0;
  return (n - 0.5) * 4.0 * stats.std_f0 + stats.mean_f0;
}

QuantizedPitch normalize_and_quantize(const PitchContour& contour,
                                      const SpeakerStats& stats) {
  if (stats.std_f0 <= 0.0)
    throw DataError("normalize_and_quantize: std_f0 must be positive");
  QuantizedPitch q;
  q.bins.reserve(contour.size());
  for (float v : contour) q.bins.push_back(quantize_f0(v, stats));
  return q;
}

Matf QuantizedPitch::onehot() const {
  Matf m(frames(), kPitchBins);
  for (int t = 0; t < frames(); ++t) {
    if (bins[t] >= kPitchBins)
      throw DataError("quantized pitch: bin out of range");
    m.at(t, bins[t]) = 1.0f;
  }
  return m;
}

QuantizedPitch QuantizedPitch::from_onehot(const Matf& rows) {
  if (rows.cols != kPitchBins)
    throw DataError("quantized pitch: expected 257 columns");
  QuantizedPitch q;
  q.bins.resize(rows.rows);
  for (int t = 0; t < rows.rows; ++t) {
    float sum = 0.0f;
    int arg = 0;
    float best = -1.0f;
    for (int c = 0; c < rows.cols; ++c) {
      float v = rows.at(t, c);
      sum += v;
      if (v > best) {
        best = v;
        arg = c;
      }
    }
    if (std::fabs(sum - 1.0f) > 1e-4f)
      throw DataError("quantized pitch: row " + std::to_string(t) +
                      " does not sum to 1");
    q.bins[t] = static_cast<uint16_t>(arg);
  }
  return q;
}

}  // namespace speechsplit
