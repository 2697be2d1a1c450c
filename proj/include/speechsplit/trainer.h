// speechsplit/trainer.h

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

#ifndef SPEECHSPLIT_TRAINER_H_
#define SPEECHSPLIT_TRAINER_H_

#include <functional>
#include <vector>

#include "speechsplit/featureio.h"
#include "speechsplit/network.h"

namespace speechsplit {

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// Mean squared error over all entries.
template <typename Real>
double recon_loss(const Mat<Real>& pred, const Mat<Real>& target) {
  if (pred.rows != target.rows || pred.cols != target.cols)
    throw DataError("recon_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    double d = static_cast<double>(pred.data[i]) - target.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.data.size());
}

template <typename Real>
Mat<Real> recon_loss_backward(const Mat<Real>& pred, const Mat<Real>& target,
                              double scale = 1.0) {
  Mat<Real> d(pred.rows, pred.cols);
  double f = 2.0 * scale / static_cast<double>(pred.data.size());
  for (size_t i = 0; i < pred.data.size(); ++i)
    d.data[i] = static_cast<Real>(f * (static_cast<double>(pred.data[i]) -
                                       target.data[i]));
  return d;
}

// Mean categorical cross-entropy over frames; targets are bin indices.
template <typename Real>
double xent_loss(const Mat<Real>& logits, const std::vector<uint16_t>& target) {
  if (logits.rows != static_cast<int>(target.size()))
    throw DataError("xent_loss: length mismatch");
  double acc = 0.0;
  for (int t = 0; t < logits.rows; ++t) {
    const Real* z = logits.row(t);
    double zmax = z[0];
    for (int c = 1; c < logits.cols; ++c)
      if (static_cast<double>(z[c]) > zmax) zmax = z[c];
    double lse = 0.0;
    for (int c = 0; c < logits.cols; ++c) lse += std::exp(z[c] - zmax);
    lse = std::log(lse) + zmax;
    acc += lse - static_cast<double>(z[target[t]]);
  }
  return acc / static_cast<double>(logits.rows);
}

template <typename Real>
Mat<Real> xent_loss_backward(const Mat<Real>& logits,
                             const std::vector<uint16_t>& target,
                             double scale = 1.0) {
  Mat<Real> d(logits.rows, logits.cols);
  double f = scale / static_cast<double>(logits.rows);
  for (int t = 0; t < logits.rows; ++t) {
    const Real* z = logits.row(t);
    Real* g = d.row(t);
    double zmax = z[0];
    for (int c = 1; c < logits.cols; ++c)
      if (static_cast<double>(z[c]) > zmax) zmax = z[c];
    double denom = 0.0;
    for (int c = 0; c < logits.cols; ++c) denom += std::exp(z[c] - zmax);
    for (int c = 0; c < logits.cols; ++c)
      g[c] = static_cast<Real>(f * std::exp(z[c] - zmax) / denom);
    g[target[t]] -= static_cast<Real>(f);
  }
  return d;
}

template <typename Real>
Mat<Real> softmax_rows(const Mat<Real>& logits) {
  Mat<Real> p(logits.rows, logits.cols);
  for (int t = 0; t < logits.rows; ++t) {
    const Real* z = logits.row(t);
    Real* o = p.row(t);
    double zmax = z[0];
    for (int c = 1; c < logits.cols; ++c)
      if (static_cast<double>(z[c]) > zmax) zmax = z[c];
    double denom = 0.0;
    for (int c = 0; c < logits.cols; ++c) denom += std::exp(z[c] - zmax);
    for (int c = 0; c < logits.cols; ++c)
      o[c] = static_cast<Real>(std::exp(z[c] - zmax) / denom);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Adaptive-moment optimizer
// ---------------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // off by default
  double grad_clip = 0.0;     // global L2 clip; 0 disables
};

template <typename Real>
class Adam {
 public:
  Adam(const ParamStore<Real>& params, const AdamConfig& cfg)
      : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

  void step(ParamStore<Real>& params, ParamStore<Real>& grads) {
    ++t_;
    if (cfg_.grad_clip > 0.0) {
      double norm2 = 0.0;
      for (const auto& g : grads.tensors)
        for (Real x : g.v) norm2 += static_cast<double>(x) * x;
      double norm = std::sqrt(norm2);
      if (norm > cfg_.grad_clip) {
        Real s = static_cast<Real>(cfg_.grad_clip / norm);
        for (auto& g : grads.tensors)
          for (Real& x : g.v) x *= s;
      }
    }
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    // Element updates are independent; parallelizing over tensors keeps the
    // result identical for any worker count.
    parallel_for(static_cast<int>(params.tensors.size()), [&](int i) {
      Real* p = params.tensors[static_cast<size_t>(i)].data();
      const Real* g = grads.tensors[static_cast<size_t>(i)].data();
      Real* m = m_.tensors[static_cast<size_t>(i)].data();
      Real* v = v_.tensors[static_cast<size_t>(i)].data();
      size_t n = params.tensors[static_cast<size_t>(i)].size();
      for (size_t j = 0; j < n; ++j) {
        double gj = g[j];
        if (cfg_.weight_decay > 0.0) gj += cfg_.weight_decay * p[j];
        double mj = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
        double vj = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
        m[j] = static_cast<Real>(mj);
        v[j] = static_cast<Real>(vj);
        double mhat = mj / bc1;
        double vhat = vj / bc2;
        p[j] = static_cast<Real>(p[j] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    });
  }

  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }
  AdamConfig& config() { return cfg_; }
  ParamStore<Real>& moment1() { return m_; }
  ParamStore<Real>& moment2() { return v_; }

 private:
  AdamConfig cfg_;
  int64_t t_ = 0;
  ParamStore<Real> m_, v_;
};

// ---------------------------------------------------------------------------
// Training configuration and loops
// ---------------------------------------------------------------------------

struct TrainConfig {
  int batch_size = 16;
  int64_t total_steps = 5000;  // desk default; full-scale runs use far more
  double learning_rate = 1e-4;
  uint64_t seed = 1;
  int crop_len = 128;  // multiple of the downsample factor
  double weight_decay = 0.0;
  double grad_clip = 0.0;
  int checkpoint_every = 1000;
  int log_every = 50;
  int loss_window = 100;  // smoothing window for the trend diagnostics
};

struct TrainItem {
  Matf mel;                         // T x 80
  std::vector<uint16_t> pitch_bins; // length T
  int speaker = 0;
};

struct BatchItem {
  Matf mel;     // crop_len x 80
  Matf pitch;   // crop_len x 257 one-hot
  std::vector<uint16_t> pitch_bins;
  SpeakerLabel speaker;
};

BatchItem crop_item(const TrainItem& utt, int crop_len, int n_speakers, Rng& rng);

// One optimizer update on a batch; rr_seeds gives each item its resampling
// stream. Returns the batch loss (computed before the update).
double train_step_main(SpeechSplitModel<float>& model,
                       const std::vector<BatchItem>& batch,
                       const std::vector<uint64_t>& rr_seeds, Adam<float>& opt);

double train_step_mini(PitchMiniModel<float>& model,
                       const std::vector<BatchItem>& batch,
                       const std::vector<uint64_t>& rr_seeds, Adam<float>& opt);

struct TrainHooks {
  std::function<void(int64_t step, double loss, double smoothed)> on_step;
  std::function<void(int64_t step)> on_checkpoint;
  std::function<bool(int64_t step, double smoothed)> should_stop;
};

struct TrainResult {
  int64_t steps_run = 0;
  double initial_loss = 0.0;
  double final_smoothed = 0.0;
  std::vector<double> losses;
};

TrainResult train_model(SpeechSplitModel<float>& model,
                        const std::vector<TrainItem>& data,
                        const TrainConfig& cfg, Adam<float>& opt,
                        const TrainHooks& hooks = {}, int64_t start_step = 0);

TrainResult train_mini(PitchMiniModel<float>& model,
                       const std::vector<TrainItem>& data, const TrainConfig& cfg,
                       Adam<float>& opt, const TrainHooks& hooks = {},
                       int64_t start_step = 0);

// ---------------------------------------------------------------------------
// Numerical gradient verification. Runs the full pipeline in double
// precision on a tiny configuration and compares the analytic gradient with
// central differences over sampled coordinates.
// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_err = 0.0;
  int coords_checked = 0;
};

// Tiny-model configuration: conv dims 8, BLSTM dims 2, reduced feature dims
// so the parameter count stays under 5k.
ModelConfig tiny_model_config();

GradCheckResult grad_check(const ModelConfig& cfg, int frames, int n_coords,
                           uint64_t seed, bool corrupt_gradient = false);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_TRAINER_H_
