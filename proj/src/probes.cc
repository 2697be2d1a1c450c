// src/probes.cc

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

#include "speechsplit/probes.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "speechsplit/base.h"

namespace speechsplit {

using nlohmann::json;

std::string component_name(Component c) {
  switch (c) {
    case Component::kRhythm: return "rhythm";
    case Component::kContent: return "content";
    case Component::kPitch: return "pitch";
    case Component::kTimbre: return "timbre";
  }
  return "?";
}

namespace {

double frame_energy(const Matf& m) {
  double acc = 0.0;
  for (float v : m.data) acc += static_cast<double>(v) * v;
  return m.rows > 0 ? acc / m.rows : 0.0;
}

// Mean per-frame correlation over a column band. Removal probes compare the
// content band only; the f0 bump would otherwise dominate the correlation.
double mean_frame_corr(const Matf& a, const Matf& b, int col_lo, int col_hi) {
  int n = std::min(a.rows, b.rows);
  int w = col_hi - col_lo;
  double acc = 0.0;
  int cnt = 0;
  for (int t = 0; t < n; ++t) {
    const float* ra = a.row(t) + col_lo;
    const float* rb = b.row(t) + col_lo;
    double ma = 0, mb = 0;
    for (int i = 0; i < w; ++i) {
      ma += ra[i];
      mb += rb[i];
    }
    ma /= w;
    mb /= w;
    double num = 0, va = 0, vb = 0;
    for (int i = 0; i < w; ++i) {
      num += (ra[i] - ma) * (rb[i] - mb);
      va += (ra[i] - ma) * (ra[i] - ma);
      vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va > 1e-12 && vb > 1e-12) {
      acc += num / std::sqrt(va * vb);
      ++cnt;
    }
  }
  return cnt > 0 ? acc / cnt : 0.0;
}

// Pitch-band peak position per frame, forced (no voicing gate); used to judge
// contour flatness on probe outputs.
std::vector<double> forced_peak_positions(const Matf& mel,
                                          const SynthAnalysisParams& ap) {
  std::vector<double> u(static_cast<size_t>(mel.rows), 0.0);
  for (int t = 0; t < mel.rows; ++t) {
    int arg = 0;
    for (int b = 1; b < ap.pitch_band; ++b)
      if (mel.at(t, b) > mel.at(t, arg)) arg = b;
    u[static_cast<size_t>(t)] =
        (arg - ap.center_lo) / (ap.center_hi - ap.center_lo);
  }
  return u;
}

double f0_variance_on(const Matf& mel, const std::vector<char>& voiced,
                      const SynthAnalysisParams& ap) {
  std::vector<double> u = forced_peak_positions(mel, ap);
  double mean = 0.0;
  int cnt = 0;
  for (int t = 0; t < mel.rows; ++t)
    if (voiced[static_cast<size_t>(t)]) {
      mean += u[static_cast<size_t>(t)];
      ++cnt;
    }
  if (cnt < 2) return 0.0;
  mean /= cnt;
  double var = 0.0;
  for (int t = 0; t < mel.rows; ++t)
    if (voiced[static_cast<size_t>(t)]) {
      double d = u[static_cast<size_t>(t)] - mean;
      var += d * d;
    }
  return var / cnt;
}

// Envelope shift between two spectrograms: the |lag| maximizing the
// cross-correlation of their content-band envelopes over integer bin shifts.
double envelope_shift(const Matf& a, const Matf& b, const SynthAnalysisParams& ap) {
  std::vector<double> ea = content_envelope(a, ap);
  std::vector<double> eb = content_envelope(b, ap);
  int n = static_cast<int>(ea.size());
  double best_corr = -2.0;
  int best_shift = 0;
  for (int s = -ap.max_env_shift; s <= ap.max_env_shift; ++s) {
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
      int j = i + s;
      if (j < 0 || j >= n) continue;
      xs.push_back(ea[static_cast<size_t>(i)]);
      ys.push_back(eb[static_cast<size_t>(j)]);
    }
    if (xs.size() < 8) continue;
    double c = pearson(xs, ys);
    if (c > best_corr) {
      best_corr = c;
      best_shift = s;
    }
  }
  return std::abs(best_shift);
}

Matf run_with_inputs(const SpeechSplitModel<float>& model, const Matf& rhythm_in,
                     const Matf& content_in, const Matf& pitch_in,
                     const SpeakerLabel& spk) {
  CodeBundle<float> bundle;
  bundle.rhythm = model.encode_rhythm(rhythm_in);
  bundle.content = model.encode_content(content_in, nullptr);
  bundle.pitch = model.encode_pitch(pitch_in);
  return model.decode(bundle, spk, rhythm_in.rows);
}

}  // namespace

ZeroOutResult zero_out(Component component, const Utterance& utt,
                       const SpeechSplitModel<float>& model,
                       const SynthAnalysisParams& ap) {
  QuantizedPitch q;
  q.bins = utt.pitch_bins;
  Matf pitch_onehot = q.onehot();
  SpeakerLabel spk = SpeakerLabel::make(utt.speaker, model.config().n_speakers);

  Matf recon = run_with_inputs(model, utt.mel, utt.mel, pitch_onehot, spk);

  Matf zeros_mel(utt.mel.rows, utt.mel.cols);
  Matf zeros_pitch(pitch_onehot.rows, pitch_onehot.cols);
  Matf probed;
  switch (component) {
    case Component::kRhythm:
      probed = run_with_inputs(model, zeros_mel, utt.mel, pitch_onehot, spk);
      break;
    case Component::kContent:
      probed = run_with_inputs(model, utt.mel, zeros_mel, pitch_onehot, spk);
      break;
    case Component::kPitch:
      probed = run_with_inputs(model, utt.mel, utt.mel, zeros_pitch, spk);
      break;
    case Component::kTimbre:
      probed = run_with_inputs(model, utt.mel, utt.mel, pitch_onehot,
                               SpeakerLabel::zero(model.config().n_speakers));
      break;
  }

  ZeroOutResult result;
  result.component = component;
  result.output = probed;
  double input_energy = frame_energy(utt.mel);
  result.energy_ratio = frame_energy(probed) / (input_energy + 1e-12);
  result.env_corr = mean_frame_corr(probed, utt.mel, ap.pitch_band, utt.mel.cols);
  std::vector<char> voiced(static_cast<size_t>(utt.mel.rows), 0);
  for (size_t t = 0; t < utt.pitch_bins.size(); ++t)
    voiced[t] = utt.pitch_bins[t] != kUnvoicedBin;
  result.f0_variance = f0_variance_on(probed, voiced, ap);
  result.env_offset_shift = envelope_shift(probed, recon, ap);
  double recon_scale = frame_energy(recon) * recon.cols;
  result.mse_vs_recon =
      recon_loss(probed, recon) / (recon_scale / recon.cols + 1e-12);
  return result;
}

bool BottleneckReport::all_pass() const {
  if (inconclusive) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string BottleneckReport::to_text() const {
  std::ostringstream os;
  os << "bottleneck report\n";
  os << "  reconstruction correlation: " << recon_corr << "\n";
  if (inconclusive) {
    os << "  inconclusive: untrained\n";
    return os.str();
  }
  for (const auto& c : checks) {
    os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name
       << " measured=" << c.measured << " threshold=" << c.threshold;
    if (!c.pass && !c.hint.empty()) os << "  hint: " << c.hint;
    os << "\n";
  }
  return os.str();
}

std::string BottleneckReport::to_json() const {
  json j;
  j["inconclusive"] = inconclusive;
  j["recon_corr"] = recon_corr;
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back(json{{"name", c.name},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"pass", c.pass},
                       {"hint", c.hint}});
  j["checks"] = arr;
  return j.dump(2);
}

BottleneckReport bottleneck_report(const SpeechSplitModel<float>& model,
                                   const std::vector<const Utterance*>& val_set,
                                   const ProbeThresholds& th,
                                   const SynthAnalysisParams& ap) {
  if (val_set.empty()) throw DataError("bottleneck_report: empty validation set");
  BottleneckReport report;

  double recon_corr = 0.0;
  std::vector<double> rhythm_energy, content_corr, content_energy, pitch_var_ratio,
      timbre_shift, content_mse, pitch_mse, timbre_mse;
  for (const Utterance* utt : val_set) {
    QuantizedPitch q;
    q.bins = utt->pitch_bins;
    SpeakerLabel spk = SpeakerLabel::make(utt->speaker, model.config().n_speakers);
    Matf recon = run_with_inputs(model, utt->mel, utt->mel, q.onehot(), spk);
    recon_corr += mean_frame_corr(recon, utt->mel, 0, utt->mel.cols);

    std::vector<char> voiced(static_cast<size_t>(utt->mel.rows), 0);
    for (size_t t = 0; t < utt->pitch_bins.size(); ++t)
      voiced[t] = utt->pitch_bins[t] != kUnvoicedBin;
    double recon_var = f0_variance_on(recon, voiced, ap);

    ZeroOutResult r = zero_out(Component::kRhythm, *utt, model, ap);
    ZeroOutResult c = zero_out(Component::kContent, *utt, model, ap);
    ZeroOutResult f = zero_out(Component::kPitch, *utt, model, ap);
    ZeroOutResult v = zero_out(Component::kTimbre, *utt, model, ap);
    rhythm_energy.push_back(r.energy_ratio);
    content_corr.push_back(c.env_corr);
    content_energy.push_back(c.energy_ratio);
    pitch_var_ratio.push_back(f.f0_variance / (recon_var + 1e-9));
    timbre_shift.push_back(v.env_offset_shift);
    content_mse.push_back(c.mse_vs_recon);
    pitch_mse.push_back(f.mse_vs_recon);
    timbre_mse.push_back(v.mse_vs_recon);
  }
  const double n = static_cast<double>(val_set.size());
  auto mean = [n](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / n;
  };
  report.recon_corr = recon_corr / n;
  if (report.recon_corr < th.trained_recon_corr) {
    report.inconclusive = true;
    return report;
  }

  auto add = [&report](const std::string& name, double measured, double threshold,
                       bool pass, const std::string& hint) {
    report.checks.push_back({name, measured, threshold, pass, hint});
  };
  double v1 = mean(rhythm_energy);
  add("rhythm_zero_energy_ratio", v1, th.rhythm_energy_ratio,
      v1 <= th.rhythm_energy_ratio,
      "output keeps energy with the rhythm input removed; the rhythm code "
      "dimension is too small, consider increasing it");
  double v2 = mean(content_corr);
  add("content_zero_envelope_corr", v2, th.content_env_corr,
      v2 <= th.content_env_corr,
      "formant structure survives content removal; increase the content code "
      "dimension and decrease the rhythm code dimension");
  double v3 = mean(content_energy);
  add("content_zero_energy_ratio", v3, th.content_energy_min,
      v3 >= th.content_energy_min,
      "no energy slots remain with content removed; the rhythm path may be "
      "too narrow");
  double v4 = mean(pitch_var_ratio);
  add("pitch_zero_f0_variance_ratio", v4, th.pitch_f0_var_ratio,
      v4 <= th.pitch_f0_var_ratio,
      "output pitch still moves with the pitch input removed; the rhythm or "
      "content code is too wide");
  double shift_frac = 0.0;
  for (double s : timbre_shift)
    if (s >= th.timbre_offset_shift) shift_frac += 1.0;
  shift_frac /= n;
  add("timbre_zero_envelope_shift_frac", shift_frac, 0.7, shift_frac >= 0.7,
      "envelope does not move when the speaker label is removed; the rhythm "
      "or content code is too wide");
  double max_path_mse =
      std::max({mean(content_mse), mean(pitch_mse), mean(timbre_mse)});
  add("non_rhythm_paths_in_use", max_path_mse, th.unused_path_mse,
      max_path_mse >= th.unused_path_mse,
      "content/pitch/timbre probes barely change the output; the rhythm "
      "bottleneck is too wide and passes everything");
  return report;
}

// ---------------------------------------------------------------------------
// Reduced autoencoder probe
// ---------------------------------------------------------------------------

int envelope_alignment_offset(const Matf& a, const Matf& b, int max_lag) {
  int n = std::min(a.rows, b.rows);
  std::vector<double> ea(static_cast<size_t>(n)), eb(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    double sa = 0, sb = 0;
    for (int c = 0; c < a.cols; ++c) sa += static_cast<double>(a.at(t, c)) * a.at(t, c);
    for (int c = 0; c < b.cols; ++c) sb += static_cast<double>(b.at(t, c)) * b.at(t, c);
    ea[static_cast<size_t>(t)] = sa;
    eb[static_cast<size_t>(t)] = sb;
  }
  double ma = std::accumulate(ea.begin(), ea.end(), 0.0) / n;
  double mb = std::accumulate(eb.begin(), eb.end(), 0.0) / n;
  for (auto& v : ea) v -= ma;
  for (auto& v : eb) v -= mb;
  double best = -1e300;
  int best_lag = 0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (int t = 0; t < n; ++t) {
      int u = t + lag;
      if (u < 0 || u >= n) continue;
      acc += ea[static_cast<size_t>(t)] * eb[static_cast<size_t>(u)];
    }
    // Biased estimator (fixed denominator): short overlaps at large lags are
    // damped instead of inflated.
    acc /= n;
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  return best_lag;
}

namespace {

// Content encoder + decoder, nothing else; the spectrogram autoencoder used
// to gauge how much rhythm the random resampling leaves behind.
struct RrReconModel {
  ModelConfig cfg;
  ParamStore<float> params;
  Encoder<float> content;
  Decoder<float> dec;

  RrReconModel(const ModelConfig& c, uint64_t seed) : cfg(c) {
    Rng rng(derive_seed(seed, "rr_recon_init"));
    content.build(params, "content", cfg.content, cfg.mel_bins, cfg.gn_eps, rng);
    dec.build(params, "decoder", cfg.content.code_dim(), cfg.n_speakers,
              cfg.mel_bins, cfg.decoder_dim, cfg.rhythm.downsample_factor, rng);
  }

  Matf forward(const Matf& mel, const SpeakerLabel& spk, Rng* rr,
               EncoderCtx<float>* ec, DecoderCtx<float>* dc) const {
    ResamplePlan plan =
        rr != nullptr ? draw_plan(mel.rows, *rr) : identity_plan(mel.rows);
    Matf mel_rr = fit_frames(apply_plan(mel, plan), mel.rows);
    Matf z = content.forward(params, mel_rr, rr, ec);
    std::vector<float> cond(spk.onehot.begin(), spk.onehot.end());
    return dec.forward(params, z, cond, mel.rows, dc);
  }
};

Matf shuffle_syllable_blocks(const Utterance& utt, Rng& rng) {
  std::vector<std::pair<int, int>> blocks;
  if (utt.factors.has_value()) {
    int t = 0;
    for (int d : utt.factors->durations) {
      blocks.emplace_back(t, d);
      t += d;
    }
  } else {
    int chunk = std::max(8, utt.mel.rows / 6);
    for (int t = 0; t < utt.mel.rows; t += chunk)
      blocks.emplace_back(t, std::min(chunk, utt.mel.rows - t));
  }
  // Keep drawing permutations until no block stays in place.
  std::vector<size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), 0);
  for (int tries = 0; tries < 50; ++tries) {
    rng.shuffle(order);
    bool fixed_point = false;
    for (size_t i = 0; i < order.size(); ++i)
      if (order[i] == i) fixed_point = true;
    if (!fixed_point) break;
  }
  Matf out(utt.mel.rows, utt.mel.cols);
  int t = 0;
  for (size_t i : order) {
    auto [start, len] = blocks[i];
    for (int f = 0; f < len; ++f, ++t)
      std::memcpy(out.row(t), utt.mel.row(start + f), sizeof(float) * utt.mel.cols);
  }
  return out;
}

}  // namespace

RrReconReport rr_recon_probe(const Corpus& corpus, const RrReconConfig& cfg,
                             const SynthAnalysisParams& ap) {
  std::vector<TrainItem> items = corpus.train_items();
  if (items.empty()) throw DataError("rr_recon_probe: no training utterances");
  RrReconModel model(cfg.model, cfg.train.seed);
  AdamConfig acfg;
  acfg.lr = cfg.train.learning_rate;
  Adam<float> opt(model.params, acfg);

  const TrainConfig& tc = cfg.train;
  for (int64_t step = 0; step < tc.total_steps; ++step) {
    std::vector<ParamStore<float>> grads(static_cast<size_t>(tc.batch_size));
    std::vector<double> losses(static_cast<size_t>(tc.batch_size), 0.0);
    parallel_for(tc.batch_size, [&](int j) {
      Rng crop_rng(derive_seed(tc.seed, "rr_recon_crop", step, j));
      const TrainItem& utt =
          items[static_cast<size_t>(derive_seed(tc.seed, "rr_recon_pick", step, j) %
                                    items.size())];
      BatchItem item = crop_item(utt, tc.crop_len, cfg.model.n_speakers, crop_rng);
      Rng rr(derive_seed(tc.seed, "rr_recon_rr", step, j));
      EncoderCtx<float> ec;
      DecoderCtx<float> dc;
      Matf out = model.forward(item.mel, item.speaker, &rr, &ec, &dc);
      losses[static_cast<size_t>(j)] = recon_loss(out, item.mel);
      grads[static_cast<size_t>(j)] = model.params.zeros_like();
      Matf d = recon_loss_backward(out, item.mel, 1.0 / tc.batch_size);
      Matf dz = model.dec.backward(model.params, d, dc,
                                   &grads[static_cast<size_t>(j)]);
      model.content.backward(model.params, dz, ec,
                             &grads[static_cast<size_t>(j)]);
    });
    for (int j = 1; j < tc.batch_size; ++j)
      grads[0].accumulate(grads[static_cast<size_t>(j)]);
    double loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
                  tc.batch_size;
    if (!std::isfinite(loss)) throw NumericError("rr_recon_probe: non-finite loss");
    opt.step(model.params, grads[0]);
    if (step + 1 == tc.total_steps) {
      RrReconReport dummy;
      dummy.final_loss = loss;
    }
  }

  RrReconReport report;
  int n_eval = 0;
  double offset_acc = 0.0, within = 0.0, control_acc = 0.0, loss_acc = 0.0;
  for (const auto& utt : corpus.utterances) {
    if (utt.test_only || n_eval >= 16) continue;
    SpeakerLabel spk = SpeakerLabel::make(utt.speaker, cfg.model.n_speakers);
    Rng rr(derive_seed(tc.seed, "rr_recon_eval", n_eval));
    Matf recon = model.forward(utt.mel, spk, &rr, nullptr, nullptr);
    loss_acc += recon_loss(recon, utt.mel);
    int off = std::abs(
        envelope_alignment_offset(recon, utt.mel, std::max(16, utt.mel.rows / 2)));
    offset_acc += off;
    if (off <= 8) within += 1.0;
    Rng shuffle_rng(derive_seed(tc.seed, "rr_recon_shuffle", n_eval));
    Matf shuffled = shuffle_syllable_blocks(utt, shuffle_rng);
    control_acc += std::abs(envelope_alignment_offset(
        shuffled, utt.mel, std::max(16, utt.mel.rows / 2)));
    ++n_eval;
  }
  report.utterances = n_eval;
  if (n_eval > 0) {
    report.mean_abs_offset = offset_acc / n_eval;
    report.frac_within_8 = within / n_eval;
    report.negative_control_offset = control_acc / n_eval;
    report.final_loss = loss_acc / n_eval;
  }
  (void)ap;
  return report;
}

}  // namespace speechsplit
