// speechsplit/layers.h

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

#ifndef SPEECHSPLIT_LAYERS_H_
#define SPEECHSPLIT_LAYERS_H_

#include <cmath>
#include <string>
#include <vector>

#include "speechsplit/base.h"
#include "speechsplit/matrix.h"
#include "speechsplit/rng.h"

namespace speechsplit {

template <typename Real>
struct Tensor {
  std::vector<int> shape;
  std::vector<Real> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    v.assign(n, Real(0));
  }
  size_t size() const { return v.size(); }
  Real* data() { return v.data(); }
  const Real* data() const { return v.data(); }
};

// Ordered, named parameter tensors. Gradient buffers and optimizer state use
// the same container so that iteration order is identical everywhere.
template <typename Real>
struct ParamStore {
  std::vector<std::string> names;
  std::vector<Tensor<Real>> tensors;

  int add(const std::string& name, std::vector<int> shape) {
    names.push_back(name);
    tensors.emplace_back(std::move(shape));
    return static_cast<int>(tensors.size()) - 1;
  }
  int find(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
  Tensor<Real>& operator[](int idx) { return tensors[static_cast<size_t>(idx)]; }
  const Tensor<Real>& operator[](int idx) const {
    return tensors[static_cast<size_t>(idx)];
  }
  size_t total_params() const {
    size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
  }
  ParamStore zeros_like() const {
    ParamStore out;
    out.names = names;
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) out.tensors.emplace_back(t.shape);
    return out;
  }
  void set_zero() {
    for (auto& t : tensors) std::fill(t.v.begin(), t.v.end(), Real(0));
  }
  void accumulate(const ParamStore& other) {
    for (size_t i = 0; i < tensors.size(); ++i)
      axpy(static_cast<int>(tensors[i].size()), Real(1), other.tensors[i].data(),
           tensors[i].data());
  }
  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    out.names = names;
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) {
      Tensor<Other> o(t.shape);
      for (size_t i = 0; i < t.v.size(); ++i) o.v[i] = static_cast<Other>(t.v[i]);
      out.tensors.push_back(std::move(o));
    }
    return out;
  }
};

template <typename Real>
inline void init_uniform(Tensor<Real>& t, double bound, Rng& rng) {
  for (auto& x : t.v) x = static_cast<Real>(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------
// 5x1 temporal convolution, stride 1, replicate padding, length-preserving.
// Weight layout: (out_ch, k * in_ch), taps outermost.
// ---------------------------------------------------------------------------

template <typename Real>
struct ConvCtx {
  Mat<Real> patches;  // T x (k * in_ch)
  int frames = 0;
};

template <typename Real>
struct Conv1d {
  int in_ch = 0, out_ch = 0, ksize = 5;
  int w = -1, b = -1;

  void build(ParamStore<Real>& params, const std::string& prefix, int cin, int cout,
             int k, Rng& rng) {
    in_ch = cin;
    out_ch = cout;
    ksize = k;
    w = params.add(prefix + ".w", {cout, k * cin});
    b = params.add(prefix + ".b", {cout});
    init_uniform(params[w], std::sqrt(1.0 / (static_cast<double>(k) * cin)), rng);
  }

  Mat<Real> forward(const ParamStore<Real>& params, const Mat<Real>& x,
                    ConvCtx<Real>* ctx) const {
    const int t_len = x.rows;
    const int half = ksize / 2;
    Mat<Real> patches(t_len, ksize * in_ch);
    for (int t = 0; t < t_len; ++t) {
      Real* p = patches.row(t);
      for (int dt = 0; dt < ksize; ++dt) {
        int src = t - half + dt;
        src = src < 0 ? 0 : (src >= t_len ? t_len - 1 : src);
        std::memcpy(p + dt * in_ch, x.row(src), sizeof(Real) * in_ch);
      }
    }
    Mat<Real> y(t_len, out_ch);
    matmul_nt(t_len, out_ch, ksize * in_ch, patches.data.data(), patches.cols,
              params[w].data(), ksize * in_ch, y.data.data(), out_ch, false);
    const Real* bias = params[b].data();
    for (int t = 0; t < t_len; ++t) axpy(out_ch, Real(1), bias, y.row(t));
    if (ctx != nullptr) {
      ctx->patches = std::move(patches);
      ctx->frames = t_len;
    }
    return y;
  }

  Mat<Real> backward(const ParamStore<Real>& params, const Mat<Real>& dy,
                     const ConvCtx<Real>& ctx, ParamStore<Real>* grads) const {
    const int t_len = ctx.frames;
    const int half = ksize / 2;
    matmul_tn_acc(out_ch, ksize * in_ch, t_len, dy.data.data(), out_ch,
                  ctx.patches.data.data(), ctx.patches.cols, (*grads)[w].data(),
                  ksize * in_ch);
    Real* db = (*grads)[b].data();
    for (int t = 0; t < t_len; ++t) axpy(out_ch, Real(1), dy.row(t), db);

    Mat<Real> dpatches(t_len, ksize * in_ch);
    matmul_nn(t_len, ksize * in_ch, out_ch, dy.data.data(), out_ch,
              params[w].data(), ksize * in_ch, dpatches.data.data(), dpatches.cols,
              false);
    Mat<Real> dx(t_len, in_ch);
    for (int t = 0; t < t_len; ++t) {
      const Real* p = dpatches.row(t);
      for (int dt = 0; dt < ksize; ++dt) {
        int src = t - half + dt;
        src = src < 0 ? 0 : (src >= t_len ? t_len - 1 : src);
        axpy(in_ch, Real(1), p + dt * in_ch, dx.row(src));
      }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// Group normalization with per-frame statistics: each frame's channels are
// split into groups and normalized within the group. Keeping statistics
// frame-local preserves the encoders' finite receptive field along time.
// ---------------------------------------------------------------------------

template <typename Real>
struct GroupNormCtx {
  Mat<Real> xhat;
  Mat<Real> inv_std;  // T x groups
};

template <typename Real>
struct GroupNorm {
  int channels = 0, groups = 1;
  Real eps = static_cast<Real>(1e-5);
  int gamma = -1, beta = -1;

  void build(ParamStore<Real>& params, const std::string& prefix, int ch, int g,
             Real epsilon) {
    channels = ch;
    groups = g;
    eps = epsilon;
    if (ch % g != 0) throw DataError("group norm: channels not divisible by groups");
    gamma = params.add(prefix + ".gamma", {ch});
    beta = params.add(prefix + ".beta", {ch});
  }

  void init(ParamStore<Real>& params) const {
    for (auto& v : params[gamma].v) v = Real(1);
  }

  Mat<Real> forward(const ParamStore<Real>& params, const Mat<Real>& x,
                    GroupNormCtx<Real>* ctx) const {
    const int t_len = x.rows;
    const int gs = channels / groups;
    Mat<Real> y(t_len, channels);
    Mat<Real> xhat(t_len, channels);
    Mat<Real> inv_std(t_len, groups);
    const Real* gm = params[gamma].data();
    const Real* bt = params[beta].data();
    for (int t = 0; t < t_len; ++t) {
      const Real* xr = x.row(t);
      Real* yr = y.row(t);
      Real* hr = xhat.row(t);
      for (int g = 0; g < groups; ++g) {
        const Real* xg = xr + g * gs;
        Real mean = 0;
        for (int c = 0; c < gs; ++c) mean += xg[c];
        mean /= gs;
        Real var = 0;
        for (int c = 0; c < gs; ++c) {
          Real d = xg[c] - mean;
          var += d * d;
        }
        var /= gs;
        Real istd = Real(1) / std::sqrt(var + eps);
        inv_std.at(t, g) = istd;
        for (int c = 0; c < gs; ++c) {
          int ch = g * gs + c;
          Real h = (xg[c] - mean) * istd;
          hr[ch] = h;
          yr[ch] = gm[ch] * h + bt[ch];
        }
      }
    }
    if (ctx != nullptr) {
      ctx->xhat = std::move(xhat);
      ctx->inv_std = std::move(inv_std);
    }
    return y;
  }

  Mat<Real> backward(const ParamStore<Real>& params, const Mat<Real>& dy,
                     const GroupNormCtx<Real>& ctx, ParamStore<Real>* grads) const {
    const int t_len = dy.rows;
    const int gs = channels / groups;
    Mat<Real> dx(t_len, channels);
    const Real* gm = params[gamma].data();
    Real* dgamma = (*grads)[gamma].data();
    Real* dbeta = (*grads)[beta].data();
    for (int t = 0; t < t_len; ++t) {
      const Real* dyr = dy.row(t);
      const Real* hr = ctx.xhat.row(t);
      Real* dxr = dx.row(t);
      for (int g = 0; g < groups; ++g) {
        Real istd = ctx.inv_std.at(t, g);
        Real sum_dh = 0, sum_dh_h = 0;
        for (int c = 0; c < gs; ++c) {
          int ch = g * gs + c;
          Real dh = dyr[ch] * gm[ch];
          sum_dh += dh;
          sum_dh_h += dh * hr[ch];
          dgamma[ch] += dyr[ch] * hr[ch];
          dbeta[ch] += dyr[ch];
        }
        Real mean_dh = sum_dh / gs;
        Real mean_dh_h = sum_dh_h / gs;
        for (int c = 0; c < gs; ++c) {
          int ch = g * gs + c;
          Real dh = dyr[ch] * gm[ch];
          dxr[ch] = istd * (dh - mean_dh - hr[ch] * mean_dh_h);
        }
      }
    }
    return dx;
  }
};

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

template <typename Real>
inline Mat<Real> relu(const Mat<Real>& x) {
  Mat<Real> y = x;
  for (auto& v : y.data)
    if (v < Real(0)) v = Real(0);
  return y;
}

template <typename Real>
inline Mat<Real> relu_backward(const Mat<Real>& dy, const Mat<Real>& y) {
  Mat<Real> dx = dy;
  for (size_t i = 0; i < dx.data.size(); ++i)
    if (y.data[i] <= Real(0)) dx.data[i] = Real(0);
  return dx;
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM. Gate order i, f, g, o; forget-gate bias starts at 1.
// Output is (h_forward || h_backward), T x 2H.
// ---------------------------------------------------------------------------

template <typename Real>
struct LstmDirCtx {
  Mat<Real> gates;   // T x 4H, post-activation
  Mat<Real> c;       // T x H
  Mat<Real> tanh_c;  // T x H
  Mat<Real> h;       // T x H
};

template <typename Real>
struct BiLstmCtx {
  Mat<Real> x;
  LstmDirCtx<Real> fwd, bwd;
};

template <typename Real>
struct BiLstm {
  int in_dim = 0, hidden = 0;
  int wx_f = -1, wh_f = -1, b_f = -1;
  int wx_b = -1, wh_b = -1, b_b = -1;

  void build(ParamStore<Real>& params, const std::string& prefix, int input,
             int h, Rng& rng) {
    in_dim = input;
    hidden = h;
    double bound = 1.0 / std::sqrt(static_cast<double>(h));
    auto mk = [&](const std::string& name, std::vector<int> shape) {
      int idx = params.add(prefix + name, std::move(shape));
      init_uniform(params[idx], bound, rng);
      return idx;
    };
    wx_f = mk(".fwd.wx", {4 * h, input});
    wh_f = mk(".fwd.wh", {4 * h, h});
    b_f = params.add(prefix + ".fwd.b", {4 * h});
    wx_b = mk(".bwd.wx", {4 * h, input});
    wh_b = mk(".bwd.wh", {4 * h, h});
    b_b = params.add(prefix + ".bwd.b", {4 * h});
    for (int j = h; j < 2 * h; ++j) {
      params[b_f].v[j] = Real(1);  // forget-gate bias
      params[b_b].v[j] = Real(1);
    }
  }

  void run_direction(const ParamStore<Real>& params, const Mat<Real>& x, int dir,
                     LstmDirCtx<Real>* ctx) const {
    const int t_len = x.rows;
    const int h = hidden;
    int wx = dir > 0 ? wx_f : wx_b;
    int wh = dir > 0 ? wh_f : wh_b;
    int bi = dir > 0 ? b_f : b_b;
    Mat<Real> z(t_len, 4 * h);
    matmul_nt(t_len, 4 * h, in_dim, x.data.data(), x.cols, params[wx].data(),
              in_dim, z.data.data(), 4 * h, false);
    const Real* bias = params[bi].data();
    for (int t = 0; t < t_len; ++t) axpy(4 * h, Real(1), bias, z.row(t));

    ctx->gates = Mat<Real>(t_len, 4 * h);
    ctx->c = Mat<Real>(t_len, h);
    ctx->tanh_c = Mat<Real>(t_len, h);
    ctx->h = Mat<Real>(t_len, h);
    const Real* whp = params[wh].data();
    std::vector<Real> zt(4 * h);
    for (int s = 0; s < t_len; ++s) {
      int t = dir > 0 ? s : t_len - 1 - s;
      const Real* h_prev = s == 0 ? nullptr : ctx->h.row(dir > 0 ? t - 1 : t + 1);
      const Real* c_prev = s == 0 ? nullptr : ctx->c.row(dir > 0 ? t - 1 : t + 1);
      std::memcpy(zt.data(), z.row(t), sizeof(Real) * 4 * h);
      if (h_prev != nullptr) {
        for (int j = 0; j < 4 * h; ++j)
          zt[j] += dot(whp + static_cast<size_t>(j) * h, h_prev, h);
      }
      Real* gate = ctx->gates.row(t);
      Real* cr = ctx->c.row(t);
      Real* tcr = ctx->tanh_c.row(t);
      Real* hr = ctx->h.row(t);
      for (int j = 0; j < h; ++j) {
        Real ig = Real(1) / (Real(1) + std::exp(-zt[j]));
        Real fg = Real(1) / (Real(1) + std::exp(-zt[h + j]));
        Real gg = std::tanh(zt[2 * h + j]);
        Real og = Real(1) / (Real(1) + std::exp(-zt[3 * h + j]));
        gate[j] = ig;
        gate[h + j] = fg;
        gate[2 * h + j] = gg;
        gate[3 * h + j] = og;
        Real c_val = ig * gg + (c_prev != nullptr ? fg * c_prev[j] : Real(0));
        cr[j] = c_val;
        Real tc = std::tanh(c_val);
        tcr[j] = tc;
        hr[j] = og * tc;
      }
    }
  }

  Mat<Real> forward(const ParamStore<Real>& params, const Mat<Real>& x,
                    BiLstmCtx<Real>* ctx) const {
    BiLstmCtx<Real> local;
    BiLstmCtx<Real>* c = ctx != nullptr ? ctx : &local;
    c->x = x;
    run_direction(params, x, +1, &c->fwd);
    run_direction(params, x, -1, &c->bwd);
    const int t_len = x.rows;
    Mat<Real> out(t_len, 2 * hidden);
    for (int t = 0; t < t_len; ++t) {
      std::memcpy(out.row(t), c->fwd.h.row(t), sizeof(Real) * hidden);
      std::memcpy(out.row(t) + hidden, c->bwd.h.row(t), sizeof(Real) * hidden);
    }
    return out;
  }

  void backward_direction(const ParamStore<Real>& params, const Mat<Real>& d_h_ext,
                          const BiLstmCtx<Real>& ctx, int dir,
                          ParamStore<Real>* grads, Mat<Real>* dx) const {
    const int t_len = ctx.x.rows;
    const int h = hidden;
    const LstmDirCtx<Real>& dctx = dir > 0 ? ctx.fwd : ctx.bwd;
    int wx = dir > 0 ? wx_f : wx_b;
    int wh = dir > 0 ? wh_f : wh_b;
    int bi = dir > 0 ? b_f : b_b;

    // W_h transposed once so the sequential pass reads contiguous rows.
    const Real* whp = params[wh].data();
    Mat<Real> wh_t(h, 4 * h);
    for (int j = 0; j < 4 * h; ++j)
      for (int k = 0; k < h; ++k)
        wh_t.at(k, j) = whp[static_cast<size_t>(j) * h + k];

    Mat<Real> dz_all(t_len, 4 * h);
    std::vector<Real> dh(h, Real(0)), dc(h, Real(0)), dh_next(h);
    for (int s = t_len - 1; s >= 0; --s) {
      int t = dir > 0 ? s : t_len - 1 - s;
      const Real* gate = dctx.gates.row(t);
      const Real* tcr = dctx.tanh_c.row(t);
      const Real* c_prev =
          s == 0 ? nullptr : dctx.c.row(dir > 0 ? t - 1 : t + 1);
      const Real* dh_ext_row = d_h_ext.row(t);
      Real* dz = dz_all.row(t);
      for (int j = 0; j < h; ++j) {
        Real dh_total = dh[j] + dh_ext_row[j];
        Real ig = gate[j], fg = gate[h + j], gg = gate[2 * h + j],
             og = gate[3 * h + j];
        Real tc = tcr[j];
        Real dc_total = dc[j] + dh_total * og * (Real(1) - tc * tc);
        Real d_i = dc_total * gg;
        Real d_f = c_prev != nullptr ? dc_total * c_prev[j] : Real(0);
        Real d_g = dc_total * ig;
        Real d_o = dh_total * tc;
        dz[j] = d_i * ig * (Real(1) - ig);
        dz[h + j] = d_f * fg * (Real(1) - fg);
        dz[2 * h + j] = d_g * (Real(1) - gg * gg);
        dz[3 * h + j] = d_o * og * (Real(1) - og);
        dc[j] = dc_total * fg;
      }
      if (s > 0) {
        for (int k = 0; k < h; ++k) dh_next[k] = dot(wh_t.row(k), dz, 4 * h);
        std::swap(dh, dh_next);
      }
    }

    matmul_tn_acc(4 * h, in_dim, t_len, dz_all.data.data(), 4 * h,
                  ctx.x.data.data(), ctx.x.cols, (*grads)[wx].data(), in_dim);
    Real* db = (*grads)[bi].data();
    for (int t = 0; t < t_len; ++t) axpy(4 * h, Real(1), dz_all.row(t), db);
    // dWh: pair dz at step s with h at the previously processed step.
    if (t_len > 1) {
      if (dir > 0) {
        matmul_tn_acc(4 * h, h, t_len - 1, dz_all.row(1), 4 * h, dctx.h.row(0), h,
                      (*grads)[wh].data(), h);
      } else {
        matmul_tn_acc(4 * h, h, t_len - 1, dz_all.row(0), 4 * h, dctx.h.row(1), h,
                      (*grads)[wh].data(), h);
      }
    }
    matmul_nn(t_len, in_dim, 4 * h, dz_all.data.data(), 4 * h, params[wx].data(),
              in_dim, dx->data.data(), dx->cols, true);
  }

  Mat<Real> backward(const ParamStore<Real>& params, const Mat<Real>& d_out,
                     const BiLstmCtx<Real>& ctx, ParamStore<Real>* grads) const {
    const int t_len = ctx.x.rows;
    Mat<Real> d_hf(t_len, hidden), d_hb(t_len, hidden);
    for (int t = 0; t < t_len; ++t) {
      std::memcpy(d_hf.row(t), d_out.row(t), sizeof(Real) * hidden);
      std::memcpy(d_hb.row(t), d_out.row(t) + hidden, sizeof(Real) * hidden);
    }
    Mat<Real> dx(t_len, in_dim);
    backward_direction(params, d_hf, ctx, +1, grads, &dx);
    backward_direction(params, d_hb, ctx, -1, grads, &dx);
    return dx;
  }
};

// ---------------------------------------------------------------------------
// Linear projection
// ---------------------------------------------------------------------------

template <typename Real>
struct LinearCtx {
  Mat<Real> x;
};

template <typename Real>
struct Linear {
  int in_dim = 0, out_dim = 0;
  int w = -1, b = -1;

  void build(ParamStore<Real>& params, const std::string& prefix, int input,
             int output, Rng& rng) {
    in_dim = input;
    out_dim = output;
    w = params.add(prefix + ".w", {output, input});
    b = params.add(prefix + ".b", {output});
    init_uniform(params[w], std::sqrt(1.0 / input), rng);
  }

  Mat<Real> forward(const ParamStore<Real>& params, const Mat<Real>& x,
                    LinearCtx<Real>* ctx) const {
    Mat<Real> y(x.rows, out_dim);
    matmul_nt(x.rows, out_dim, in_dim, x.data.data(), x.cols, params[w].data(),
              in_dim, y.data.data(), out_dim, false);
    const Real* bias = params[b].data();
    for (int t = 0; t < x.rows; ++t) axpy(out_dim, Real(1), bias, y.row(t));
    if (ctx != nullptr) ctx->x = x;
    return y;
  }

  Mat<Real> backward(const ParamStore<Real>& params, const Mat<Real>& dy,
                     const LinearCtx<Real>& ctx, ParamStore<Real>* grads) const {
    matmul_tn_acc(out_dim, in_dim, dy.rows, dy.data.data(), out_dim,
                  ctx.x.data.data(), ctx.x.cols, (*grads)[w].data(), in_dim);
    Real* db = (*grads)[b].data();
    for (int t = 0; t < dy.rows; ++t) axpy(out_dim, Real(1), dy.row(t), db);
    Mat<Real> dx(dy.rows, in_dim);
    matmul_nn(dy.rows, in_dim, out_dim, dy.data.data(), out_dim, params[w].data(),
              in_dim, dx.data.data(), in_dim, false);
    return dx;
  }
};

}  // namespace speechsplit

#endif  // SPEECHSPLIT_LAYERS_H_
