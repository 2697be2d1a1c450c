// speechsplit/network.h

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

#ifndef SPEECHSPLIT_NETWORK_H_
#define SPEECHSPLIT_NETWORK_H_

#include <optional>
#include <string>
#include <vector>

#include "speechsplit/codec.h"
#include "speechsplit/layers.h"
#include "speechsplit/resample.h"

namespace speechsplit {

struct EncoderSpec {
  int conv_layers = 1;
  int conv_dim = 128;
  int norm_groups = 8;
  int blstm_layers = 1;
  int blstm_dim = 1;  // per direction
  int downsample_factor = 8;
  bool uses_internal_rr = false;

  bool operator==(const EncoderSpec&) const = default;
  int code_dim() const { return 2 * blstm_dim; }
};

struct ModelConfig {
  int mel_bins = 80;
  int pitch_bins = 257;
  int n_speakers = 0;
  int decoder_dim = 512;          // decoder BLSTM width per direction
  int speaker_embedding_dim = 0;  // 0 = one-hot conditioning (default)
  double gn_eps = 1e-5;
  EncoderSpec rhythm{1, 128, 8, 1, 1, 8, false};
  EncoderSpec content{3, 512, 32, 2, 8, 8, true};
  EncoderSpec pitch{3, 256, 16, 1, 32, 8, false};

  bool operator==(const ModelConfig&) const = default;

  int code_dim() const {
    return content.code_dim() + rhythm.code_dim() + pitch.code_dim();
  }
  int cond_dim() const {
    return speaker_embedding_dim > 0 ? speaker_embedding_dim : n_speakers;
  }
};

struct SpeakerLabel {
  std::vector<float> onehot;

  static SpeakerLabel make(int index, int n_speakers) {
    SpeakerLabel s;
    s.onehot.assign(n_speakers, 0.0f);
    s.onehot[index] = 1.0f;
    return s;
  }
  static SpeakerLabel zero(int n_speakers) {
    SpeakerLabel s;
    s.onehot.assign(n_speakers, 0.0f);
    return s;
  }
  // Exactly one entry 1, or all-zero (the timbre removal probe).
  void validate() const {
    int ones = 0;
    for (float v : onehot) {
      if (v == 1.0f)
        ++ones;
      else if (v != 0.0f)
        throw DataError("speaker label: entries must be 0 or 1");
    }
    if (ones > 1) throw DataError("speaker label: more than one active entry");
  }
  int index() const {
    for (size_t i = 0; i < onehot.size(); ++i)
      if (onehot[i] == 1.0f) return static_cast<int>(i);
    return -1;
  }
};

template <typename Real>
struct CodeBundle {
  Mat<Real> content;  // rows x 16 under the default spec
  Mat<Real> rhythm;   // rows x 2
  Mat<Real> pitch;    // rows x 64

  int rows() const { return content.rows; }
  void validate() const {
    if (content.rows != rhythm.rows || rhythm.rows != pitch.rows)
      throw DataError("code bundle: row counts differ");
  }
  // Truncates or repeats the final row of each code so the bundle has
  // exactly `target` rows; used when conversion inputs have unequal lengths.
  void fit_rows(int target);
};

template <typename Real>
void CodeBundle<Real>::fit_rows(int target) {
  auto fit = [target](Mat<Real>& m) {
    if (m.rows == target) return;
    Mat<Real> out(target, m.cols);
    for (int r = 0; r < target; ++r) {
      int src = r < m.rows ? r : m.rows - 1;
      std::memcpy(out.row(r), m.row(src), sizeof(Real) * m.cols);
    }
    m = std::move(out);
  };
  if (rows() == 0) throw DataError("code bundle: empty");
  fit(content);
  fit(rhythm);
  fit(pitch);
}

// ---------------------------------------------------------------------------
// Encoder: conv stack (5x1 conv -> group norm -> relu, with an optional
// random-resampling stage after every conv layer), BLSTM stack, temporal
// downsampling of the forward/backward streams.
// ---------------------------------------------------------------------------

template <typename Real>
struct EncoderCtx {
  int orig_frames = 0;
  int padded_frames = 0;
  std::vector<ConvCtx<Real>> conv;
  std::vector<GroupNormCtx<Real>> gn;
  std::vector<Mat<Real>> relu_out;
  std::vector<InterpTaps> rr_taps;   // one per conv layer when internal RR is on
  std::vector<int> rr_natural_len;   // resampled length before refit
  std::vector<BiLstmCtx<Real>> lstm;
};

template <typename Real>
Mat<Real> fit_frames(const Mat<Real>& m, int target) {
  if (m.rows == target) return m;
  Mat<Real> out(target, m.cols);
  for (int r = 0; r < target; ++r) {
    int src = r < m.rows ? r : m.rows - 1;
    std::memcpy(out.row(r), m.row(src), sizeof(Real) * m.cols);
  }
  return out;
}

template <typename Real>
Mat<Real> fit_frames_backward(const Mat<Real>& dy, int natural) {
  Mat<Real> dx(natural, dy.cols);
  for (int r = 0; r < dy.rows; ++r) {
    int src = r < natural ? r : natural - 1;
    axpy(dy.cols, Real(1), dy.row(r), dx.row(src));
  }
  return dx;
}

template <typename Real>
struct Encoder {
  EncoderSpec spec;
  int input_dim = 0;
  std::string name;
  std::vector<Conv1d<Real>> convs;
  std::vector<GroupNorm<Real>> norms;
  std::vector<BiLstm<Real>> lstms;

  void build(ParamStore<Real>& params, const std::string& prefix,
             const EncoderSpec& s, int in_dim, double gn_eps, Rng& rng) {
    spec = s;
    input_dim = in_dim;
    name = prefix;
    convs.resize(s.conv_layers);
    norms.resize(s.conv_layers);
    for (int i = 0; i < s.conv_layers; ++i) {
      int cin = i == 0 ? in_dim : s.conv_dim;
      convs[i].build(params, prefix + ".conv" + std::to_string(i), cin, s.conv_dim,
                     5, rng);
      norms[i].build(params, prefix + ".norm" + std::to_string(i), s.conv_dim,
                     s.norm_groups, static_cast<Real>(gn_eps));
      norms[i].init(params);
    }
    lstms.resize(s.blstm_layers);
    for (int i = 0; i < s.blstm_layers; ++i) {
      int in = i == 0 ? s.conv_dim : 2 * s.blstm_dim;
      lstms[i].build(params, prefix + ".blstm" + std::to_string(i), in,
                     s.blstm_dim, rng);
    }
  }

  // rr_rng: random source for the per-layer internal resampling plans; pass
  // nullptr for identity plans (inference). Output: ceil(T/k) x 2*blstm_dim.
  Mat<Real> forward(const ParamStore<Real>& params, const Mat<Real>& x,
                    Rng* rr_rng, EncoderCtx<Real>* ctx) const {
    if (x.cols != input_dim)
      throw DataError(name + ": expected " + std::to_string(input_dim) +
                      " channels, got " + std::to_string(x.cols));
    if (x.rows < 1) throw DataError(name + ": empty input");
    EncoderCtx<Real> local;
    EncoderCtx<Real>* c = ctx != nullptr ? ctx : &local;
    c->orig_frames = x.rows;
    Mat<Real> h = pad_to_multiple(x, spec.downsample_factor);
    c->padded_frames = h.rows;
    c->conv.resize(convs.size());
    c->gn.resize(convs.size());
    c->relu_out.resize(convs.size());
    if (spec.uses_internal_rr) {
      c->rr_taps.resize(convs.size());
      c->rr_natural_len.resize(convs.size());
    }
    for (size_t i = 0; i < convs.size(); ++i) {
      h = convs[i].forward(params, h, &c->conv[i]);
      if (!h.all_finite())
        throw NumericError(name + ".conv" + std::to_string(i) +
                           ": non-finite activations");
      h = norms[i].forward(params, h, &c->gn[i]);
      h = relu(h);
      c->relu_out[i] = h;
      if (spec.uses_internal_rr) {
        ResamplePlan plan = rr_rng != nullptr ? draw_plan(h.rows, *rr_rng)
                                              : identity_plan(h.rows);
        InterpTaps taps = plan_taps(plan);
        int target = h.rows;
        Mat<Real> resampled = apply_taps(h, taps);
        c->rr_natural_len[i] = resampled.rows;
        c->rr_taps[i] = std::move(taps);
        h = fit_frames(resampled, target);
      }
    }
    c->lstm.resize(lstms.size());
    for (size_t i = 0; i < lstms.size(); ++i) {
      h = lstms[i].forward(params, h, &c->lstm[i]);
      if (!h.all_finite())
        throw NumericError(name + ".blstm" + std::to_string(i) +
                           ": non-finite activations");
    }
    // Forward stream sampled at k-1, 2k-1, ...; backward stream at 0, k, ...
    int hdim = spec.blstm_dim;
    Mat<Real> fwd_stream(h.rows, hdim), bwd_stream(h.rows, hdim);
    for (int t = 0; t < h.rows; ++t) {
      std::memcpy(fwd_stream.row(t), h.row(t), sizeof(Real) * hdim);
      std::memcpy(bwd_stream.row(t), h.row(t) + hdim, sizeof(Real) * hdim);
    }
    DownsampledCode<Real> code =
        downsample(fwd_stream, bwd_stream, spec.downsample_factor);
    Mat<Real> z(code.fwd.rows, 2 * hdim);
    for (int r = 0; r < z.rows; ++r) {
      std::memcpy(z.row(r), code.fwd.row(r), sizeof(Real) * hdim);
      std::memcpy(z.row(r) + hdim, code.bwd.row(r), sizeof(Real) * hdim);
    }
    return z;
  }

  Mat<Real> backward(const ParamStore<Real>& params, const Mat<Real>& dz,
                     const EncoderCtx<Real>& ctx, ParamStore<Real>* grads) const {
    const int k = spec.downsample_factor;
    const int hdim = spec.blstm_dim;
    const int t_pad = ctx.padded_frames;
    Mat<Real> dh(t_pad, 2 * hdim);
    for (int r = 0; r < dz.rows; ++r) {
      axpy(hdim, Real(1), dz.row(r), dh.row(r * k + k - 1));            // fwd
      axpy(hdim, Real(1), dz.row(r) + hdim, dh.row(r * k) + hdim);      // bwd
    }
    for (int i = static_cast<int>(lstms.size()) - 1; i >= 0; --i)
      dh = lstms[i].backward(params, dh, ctx.lstm[i], grads);
    for (int i = static_cast<int>(convs.size()) - 1; i >= 0; --i) {
      if (spec.uses_internal_rr) {
        dh = fit_frames_backward(dh, ctx.rr_natural_len[i]);
        dh = apply_taps_backward(dh, ctx.rr_taps[i], ctx.relu_out[i].rows);
      }
      dh = relu_backward(dh, ctx.relu_out[i]);
      dh = norms[i].backward(params, dh, ctx.gn[i], grads);
      dh = convs[i].backward(params, dh, ctx.conv[i], grads);
    }
    // Fold gradients of padded frames back into the final real frame.
    if (ctx.padded_frames != ctx.orig_frames) {
      Mat<Real> dx(ctx.orig_frames, dh.cols);
      std::memcpy(dx.data.data(), dh.data.data(),
                  sizeof(Real) * dx.size());
      for (int r = ctx.orig_frames; r < ctx.padded_frames; ++r)
        axpy(dh.cols, Real(1), dh.row(r), dx.row(ctx.orig_frames - 1));
      return dx;
    }
    return dh;
  }
};

// ---------------------------------------------------------------------------
// Decoder: upsample codes, tile the conditioning vector along time,
// concatenate channels, 3 BLSTM layers, linear projection.
// ---------------------------------------------------------------------------

template <typename Real>
struct DecoderCtx {
  int t_out = 0;
  int code_rows = 0;
  int factor = 8;
  std::vector<BiLstmCtx<Real>> lstm;
  LinearCtx<Real> proj;
};

template <typename Real>
struct Decoder {
  int code_dim = 0, cond_dim = 0, out_dim = 0, width = 0, factor = 8;
  std::string name;
  std::vector<BiLstm<Real>> lstms;
  Linear<Real> proj;

  void build(ParamStore<Real>& params, const std::string& prefix, int codes,
             int cond, int out, int w, int k, Rng& rng) {
    code_dim = codes;
    cond_dim = cond;
    out_dim = out;
    width = w;
    factor = k;
    name = prefix;
    lstms.resize(3);
    for (int i = 0; i < 3; ++i) {
      int in = i == 0 ? codes + cond : 2 * w;
      lstms[i].build(params, prefix + ".blstm" + std::to_string(i), in, w, rng);
    }
    proj.build(params, prefix + ".proj", 2 * w, out, rng);
  }

  Mat<Real> forward(const ParamStore<Real>& params, const Mat<Real>& codes,
                    const std::vector<Real>& cond, int t_out,
                    DecoderCtx<Real>* ctx) const {
    if (static_cast<int>(cond.size()) != cond_dim)
      throw DataError(name + ": conditioning size mismatch");
    Mat<Real> up = upsample_rows(codes, factor, t_out);
    Mat<Real> h(t_out, code_dim + cond_dim);
    for (int t = 0; t < t_out; ++t) {
      std::memcpy(h.row(t), up.row(t), sizeof(Real) * code_dim);
      std::memcpy(h.row(t) + code_dim, cond.data(), sizeof(Real) * cond_dim);
    }
    DecoderCtx<Real> local;
    DecoderCtx<Real>* c = ctx != nullptr ? ctx : &local;
    c->t_out = t_out;
    c->code_rows = codes.rows;
    c->factor = factor;
    c->lstm.resize(lstms.size());
    for (size_t i = 0; i < lstms.size(); ++i) {
      h = lstms[i].forward(params, h, &c->lstm[i]);
      if (!h.all_finite())
        throw NumericError(name + ".blstm" + std::to_string(i) +
                           ": non-finite activations");
    }
    return proj.forward(params, h, &c->proj);
  }

  // Returns d(codes); optionally accumulates the conditioning gradient.
  Mat<Real> backward(const ParamStore<Real>& params, const Mat<Real>& dy,
                     const DecoderCtx<Real>& ctx, ParamStore<Real>* grads,
                     std::vector<Real>* d_cond = nullptr) const {
    Mat<Real> dh = proj.backward(params, dy, ctx.proj, grads);
    for (int i = static_cast<int>(lstms.size()) - 1; i >= 0; --i)
      dh = lstms[i].backward(params, dh, ctx.lstm[i], grads);
    Mat<Real> dcodes(ctx.code_rows, code_dim);
    for (int t = 0; t < ctx.t_out; ++t)
      axpy(code_dim, Real(1), dh.row(t), dcodes.row(t / ctx.factor));
    if (d_cond != nullptr) {
      d_cond->assign(cond_dim, Real(0));
      for (int t = 0; t < ctx.t_out; ++t)
        axpy(cond_dim, Real(1), dh.row(t) + code_dim, d_cond->data());
    }
    return dcodes;
  }
};

// ---------------------------------------------------------------------------
// The full model: rhythm/content/pitch encoders plus decoder. The rhythm
// encoder reads the raw spectrogram; the content and pitch encoders read the
// randomly-resampled spectrogram and quantized contour, whose input plans
// share boundaries and factors.
// ---------------------------------------------------------------------------

template <typename Real>
struct ForwardCtx {
  InterpTaps input_taps;
  int input_frames = 0;
  int rr_frames = 0;  // natural length of the resampled inputs before refit
  EncoderCtx<Real> rhythm, content, pitch;
  DecoderCtx<Real> dec;
  CodeBundle<Real> bundle;
  SpeakerLabel speaker;
};

template <typename Real>
class SpeechSplitModel {
 public:
  SpeechSplitModel(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    if (cfg.n_speakers < 1) throw DataError("model: n_speakers must be >= 1");
    Rng rng(derive_seed(init_seed, "model_init"));
    rhythm_.build(params_, "rhythm", cfg.rhythm, cfg.mel_bins, cfg.gn_eps, rng);
    content_.build(params_, "content", cfg.content, cfg.mel_bins, cfg.gn_eps, rng);
    pitch_.build(params_, "pitch", cfg.pitch, cfg.pitch_bins, cfg.gn_eps, rng);
    dec_.build(params_, "decoder", cfg.code_dim(), cfg.cond_dim(), cfg.mel_bins,
               cfg.decoder_dim, cfg.rhythm.downsample_factor, rng);
    if (cfg.speaker_embedding_dim > 0) {
      spk_emb_ = params_.add("speaker_embedding",
                             {cfg.n_speakers, cfg.speaker_embedding_dim});
      init_uniform(params_[spk_emb_], 0.1, rng);
    }
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<Real>& params() { return params_; }
  const ParamStore<Real>& params() const { return params_; }

  Mat<Real> encode_rhythm(const Mat<Real>& mel, EncoderCtx<Real>* ctx = nullptr) const {
    return rhythm_.forward(params_, mel, nullptr, ctx);
  }
  Mat<Real> encode_content(const Mat<Real>& mel_rr, Rng* rr_rng,
                           EncoderCtx<Real>* ctx = nullptr) const {
    return content_.forward(params_, mel_rr, rr_rng, ctx);
  }
  Mat<Real> encode_pitch(const Mat<Real>& pitch_rr,
                         EncoderCtx<Real>* ctx = nullptr) const {
    validate_pitch_input(pitch_rr);
    return pitch_.forward(params_, pitch_rr, nullptr, ctx);
  }

  std::vector<Real> conditioning(const SpeakerLabel& spk) const {
    spk.validate();
    if (static_cast<int>(spk.onehot.size()) != cfg_.n_speakers)
      throw DataError("speaker label: wrong length");
    if (cfg_.speaker_embedding_dim == 0)
      return std::vector<Real>(spk.onehot.begin(), spk.onehot.end());
    std::vector<Real> cond(cfg_.speaker_embedding_dim, Real(0));
    int idx = spk.index();
    if (idx >= 0) {
      const Real* row =
          params_[spk_emb_].data() +
          static_cast<size_t>(idx) * cfg_.speaker_embedding_dim;
      cond.assign(row, row + cfg_.speaker_embedding_dim);
    }
    return cond;
  }

  Mat<Real> decode(const CodeBundle<Real>& bundle, const SpeakerLabel& spk,
                   int t_out, DecoderCtx<Real>* ctx = nullptr) const {
    bundle.validate();
    Mat<Real> codes(bundle.rows(), cfg_.code_dim());
    for (int r = 0; r < codes.rows; ++r) {
      Real* c = codes.row(r);
      std::memcpy(c, bundle.content.row(r), sizeof(Real) * bundle.content.cols);
      std::memcpy(c + bundle.content.cols, bundle.rhythm.row(r),
                  sizeof(Real) * bundle.rhythm.cols);
      std::memcpy(c + bundle.content.cols + bundle.rhythm.cols,
                  bundle.pitch.row(r), sizeof(Real) * bundle.pitch.cols);
    }
    return dec_.forward(params_, codes, conditioning(spk), t_out, ctx);
  }

  // Training-path forward: draws one shared plan for the content and pitch
  // inputs (identity when rr_rng is null), refits the resampled inputs to the
  // original frame count so the three codes stay row-aligned, and
  // reconstructs at the input length.
  Mat<Real> forward(const Mat<Real>& mel, const Mat<Real>& pitch_onehot,
                    const SpeakerLabel& spk, Rng* rr_rng,
                    ForwardCtx<Real>* ctx = nullptr) const {
    if (mel.rows != pitch_onehot.rows)
      throw DataError("forward: spectrogram and pitch contour lengths differ");
    ForwardCtx<Real> local;
    ForwardCtx<Real>* c = ctx != nullptr ? ctx : &local;
    c->input_frames = mel.rows;
    c->speaker = spk;

    ResamplePlan plan = rr_rng != nullptr ? paired_plans(mel.rows, *rr_rng).first
                                          : identity_plan(mel.rows);
    c->input_taps = plan_taps(plan);
    Mat<Real> mel_rr = apply_taps(mel, c->input_taps);
    Mat<Real> pitch_rr = apply_taps(pitch_onehot, c->input_taps);
    c->rr_frames = mel_rr.rows;
    mel_rr = fit_frames(mel_rr, mel.rows);
    pitch_rr = fit_frames(pitch_rr, mel.rows);

    c->bundle.rhythm = rhythm_.forward(params_, mel, nullptr, &c->rhythm);
    c->bundle.content = content_.forward(params_, mel_rr, rr_rng, &c->content);
    c->bundle.pitch = pitch_.forward(params_, pitch_rr, nullptr, &c->pitch);
    return decode(c->bundle, spk, mel.rows, &c->dec);
  }

  // Backpropagates d(output) through decoder and all three encoders.
  void backward(const Mat<Real>& d_out, const ForwardCtx<Real>& ctx,
                ParamStore<Real>* grads) const {
    std::vector<Real> d_cond;
    Mat<Real> dcodes = dec_.backward(params_, d_out, ctx.dec, grads,
                                     cfg_.speaker_embedding_dim > 0 ? &d_cond
                                                                    : nullptr);
    int c_dim = cfg_.content.code_dim();
    int r_dim = cfg_.rhythm.code_dim();
    int f_dim = cfg_.pitch.code_dim();
    Mat<Real> dzc(dcodes.rows, c_dim), dzr(dcodes.rows, r_dim),
        dzf(dcodes.rows, f_dim);
    for (int r = 0; r < dcodes.rows; ++r) {
      const Real* src = dcodes.row(r);
      std::memcpy(dzc.row(r), src, sizeof(Real) * c_dim);
      std::memcpy(dzr.row(r), src + c_dim, sizeof(Real) * r_dim);
      std::memcpy(dzf.row(r), src + c_dim + r_dim, sizeof(Real) * f_dim);
    }
    rhythm_.backward(params_, dzr, ctx.rhythm, grads);
    content_.backward(params_, dzc, ctx.content, grads);
    pitch_.backward(params_, dzf, ctx.pitch, grads);
    if (cfg_.speaker_embedding_dim > 0) {
      int idx = ctx.speaker.index();
      if (idx >= 0)
        axpy(cfg_.speaker_embedding_dim, Real(1), d_cond.data(),
             (*grads)[spk_emb_].data() +
                 static_cast<size_t>(idx) * cfg_.speaker_embedding_dim);
    }
  }

 private:
  // Rows must sum to 1 (one-hot, or interpolated mixtures after resampling)
  // or be exactly zero (the pitch removal probe feeds an all-zero matrix).
  void validate_pitch_input(const Mat<Real>& p) const {
    if (p.cols != cfg_.pitch_bins)
      throw DataError("pitch encoder: expected " + std::to_string(cfg_.pitch_bins) +
                      " channels");
    for (int t = 0; t < p.rows; ++t) {
      Real sum = 0;
      for (int c2 = 0; c2 < p.cols; ++c2) sum += p.at(t, c2);
      if (sum != Real(0) && std::fabs(static_cast<double>(sum) - 1.0) > 1e-3)
        throw DataError("pitch encoder: row " + std::to_string(t) +
                        " does not sum to 1");
    }
  }

  ModelConfig cfg_;
  ParamStore<Real> params_;
  Encoder<Real> rhythm_, content_, pitch_;
  Decoder<Real> dec_;
  int spk_emb_ = -1;
};

// ---------------------------------------------------------------------------
// Pitch-contour mini variant: rhythm encoder (spectrogram in) plus pitch
// encoder (quantized contour in), decoder emits per-frame logits over the
// 257 contour bins. Encoder/decoder hyperparameters mirror the main model.
// ---------------------------------------------------------------------------

template <typename Real>
struct MiniForwardCtx {
  InterpTaps input_taps;
  int input_frames = 0;
  EncoderCtx<Real> rhythm, pitch;
  DecoderCtx<Real> dec;
  Mat<Real> z_rhythm, z_pitch;
};

template <typename Real>
class PitchMiniModel {
 public:
  PitchMiniModel(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    Rng rng(derive_seed(init_seed, "mini_init"));
    rhythm_.build(params_, "rhythm", cfg.rhythm, cfg.mel_bins, cfg.gn_eps, rng);
    pitch_.build(params_, "pitch", cfg.pitch, cfg.pitch_bins, cfg.gn_eps, rng);
    dec_.build(params_, "decoder",
               cfg.rhythm.code_dim() + cfg.pitch.code_dim(), 0, cfg.pitch_bins,
               cfg.decoder_dim, cfg.rhythm.downsample_factor, rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<Real>& params() { return params_; }
  const ParamStore<Real>& params() const { return params_; }

  // Logits, T x 257. Rhythm encoder sees the raw spectrogram; the pitch input
  // is randomly resampled during training (identity at inference).
  Mat<Real> forward(const Mat<Real>& mel, const Mat<Real>& pitch_onehot,
                    Rng* rr_rng, MiniForwardCtx<Real>* ctx = nullptr) const {
    if (mel.rows != pitch_onehot.rows)
      throw DataError("mini forward: input lengths differ");
    MiniForwardCtx<Real> local;
    MiniForwardCtx<Real>* c = ctx != nullptr ? ctx : &local;
    c->input_frames = mel.rows;
    ResamplePlan plan = rr_rng != nullptr ? draw_plan(mel.rows, *rr_rng)
                                          : identity_plan(mel.rows);
    c->input_taps = plan_taps(plan);
    Mat<Real> pitch_rr = fit_frames(apply_taps(pitch_onehot, c->input_taps),
                                    mel.rows);
    c->z_rhythm = rhythm_.forward(params_, mel, nullptr, &c->rhythm);
    c->z_pitch = pitch_.forward(params_, pitch_rr, nullptr, &c->pitch);
    return decode_codes(c->z_rhythm, c->z_pitch, mel.rows, &c->dec);
  }

  // Decode from explicit codes; used by the contour alignment pre-pass where
  // the rhythm code and pitch code come from different utterances.
  Mat<Real> decode_codes(const Mat<Real>& z_rhythm, const Mat<Real>& z_pitch,
                         int t_out, DecoderCtx<Real>* ctx = nullptr) const {
    if (z_rhythm.rows != z_pitch.rows)
      throw DataError("mini decode: code row counts differ");
    Mat<Real> codes(z_rhythm.rows, z_rhythm.cols + z_pitch.cols);
    for (int r = 0; r < codes.rows; ++r) {
      std::memcpy(codes.row(r), z_rhythm.row(r), sizeof(Real) * z_rhythm.cols);
      std::memcpy(codes.row(r) + z_rhythm.cols, z_pitch.row(r),
                  sizeof(Real) * z_pitch.cols);
    }
    return dec_.forward(params_, codes, {}, t_out, ctx);
  }

  Mat<Real> encode_rhythm(const Mat<Real>& mel, EncoderCtx<Real>* ctx = nullptr) const {
    return rhythm_.forward(params_, mel, nullptr, ctx);
  }
  Mat<Real> encode_pitch(const Mat<Real>& p, EncoderCtx<Real>* ctx = nullptr) const {
    return pitch_.forward(params_, p, nullptr, ctx);
  }

  void backward(const Mat<Real>& d_logits, const MiniForwardCtx<Real>& ctx,
                ParamStore<Real>* grads) const {
    Mat<Real> dcodes = dec_.backward(params_, d_logits, ctx.dec, grads);
    int r_dim = cfg_.rhythm.code_dim();
    int f_dim = cfg_.pitch.code_dim();
    Mat<Real> dzr(dcodes.rows, r_dim), dzf(dcodes.rows, f_dim);
    for (int r = 0; r < dcodes.rows; ++r) {
      std::memcpy(dzr.row(r), dcodes.row(r), sizeof(Real) * r_dim);
      std::memcpy(dzf.row(r), dcodes.row(r) + r_dim, sizeof(Real) * f_dim);
    }
    rhythm_.backward(params_, dzr, ctx.rhythm, grads);
    pitch_.backward(params_, dzf, ctx.pitch, grads);
  }

 private:
  ModelConfig cfg_;
  ParamStore<Real> params_;
  Encoder<Real> rhythm_, pitch_;
  Decoder<Real> dec_;
};

// Table 1 defaults with the speaker count filled in.
inline ModelConfig default_model_config(int n_speakers) {
  ModelConfig cfg;
  cfg.n_speakers = n_speakers;
  return cfg;
}

}  // namespace speechsplit

#endif  // SPEECHSPLIT_NETWORK_H_
