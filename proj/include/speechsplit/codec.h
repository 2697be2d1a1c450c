// speechsplit/codec.h

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

#ifndef SPEECHSPLIT_CODEC_H_
#define SPEECHSPLIT_CODEC_H_

#include <string>
#include <vector>

#include "speechsplit/base.h"
#include "speechsplit/matrix.h"

namespace speechsplit {

// Temporal information bottleneck. The forward stream of a bidirectional
// recurrent layer is sampled at t = k*n + k - 1 and the backward stream at
// t = k*n, so both sequence ends are covered by at least one code.

std::vector<int> downsample_indices_fwd(int frames, int k);
std::vector<int> downsample_indices_bwd(int frames, int k);

template <typename Real>
struct DownsampledCode {
  Mat<Real> fwd;
  Mat<Real> bwd;
  int factor = 1;
  int original_frames = 0;
};

// Repeats the final frame until the length is a multiple of k. Repeating the
// edge rather than zero-filling keeps padded codes free of spurious silence.
template <typename Real>
Mat<Real> pad_to_multiple(const Mat<Real>& seq, int k) {
  if (k < 1) throw DataError("pad_to_multiple: k must be >= 1");
  int t = seq.rows;
  int padded = (t % k == 0) ? t : t + (k - t % k);
  if (padded == t) return seq;
  if (t == 0) throw DataError("pad_to_multiple: empty sequence");
  Mat<Real> out(padded, seq.cols);
  std::memcpy(out.data.data(), seq.data.data(), sizeof(Real) * seq.size());
  for (int r = t; r < padded; ++r)
    std::memcpy(out.row(r), seq.row(t - 1), sizeof(Real) * seq.cols);
  return out;
}

template <typename Real>
DownsampledCode<Real> downsample(const Mat<Real>& fwd_seq, const Mat<Real>& bwd_seq,
                                 int k) {
  if (fwd_seq.rows != bwd_seq.rows)
    throw DataError("downsample: stream lengths differ (" +
                    std::to_string(fwd_seq.rows) + " vs " +
                    std::to_string(bwd_seq.rows) + ")");
  if (k < 1) throw DataError("downsample: k must be >= 1");
  if (fwd_seq.rows % k != 0)
    throw DataError("downsample: length " + std::to_string(fwd_seq.rows) +
                    " is not a multiple of " + std::to_string(k));
  DownsampledCode<Real> code;
  code.factor = k;
  code.original_frames = fwd_seq.rows;
  int n = fwd_seq.rows / k;
  code.fwd = Mat<Real>(n, fwd_seq.cols);
  code.bwd = Mat<Real>(n, bwd_seq.cols);
  for (int r = 0; r < n; ++r) {
    std::memcpy(code.fwd.row(r), fwd_seq.row(r * k + k - 1),
                sizeof(Real) * fwd_seq.cols);
    std::memcpy(code.bwd.row(r), bwd_seq.row(r * k), sizeof(Real) * bwd_seq.cols);
  }
  return code;
}

// Each (fwd || bwd) row is repeated k times along time, truncated to t_out.
template <typename Real>
Mat<Real> upsample(const DownsampledCode<Real>& code, int t_out) {
  int n = code.fwd.rows;
  if (t_out > n * code.factor)
    throw DataError("upsample: t_out " + std::to_string(t_out) +
                    " exceeds available " + std::to_string(n * code.factor));
  Mat<Real> out(t_out, code.fwd.cols + code.bwd.cols);
  for (int t = 0; t < t_out; ++t) {
    int r = t / code.factor;
    Real* o = out.row(t);
    std::memcpy(o, code.fwd.row(r), sizeof(Real) * code.fwd.cols);
    std::memcpy(o + code.fwd.cols, code.bwd.row(r), sizeof(Real) * code.bwd.cols);
  }
  return out;
}

// Generic repeat-by-k upsampling of a plain code matrix (used by the decoder,
// where the three codes are already channel-concatenated rows).
template <typename Real>
Mat<Real> upsample_rows(const Mat<Real>& code, int k, int t_out) {
  if (t_out > code.rows * k)
    throw DataError("upsample: t_out " + std::to_string(t_out) +
                    " exceeds available " + std::to_string(code.rows * k));
  Mat<Real> out(t_out, code.cols);
  for (int t = 0; t < t_out; ++t)
    std::memcpy(out.row(t), code.row(t / k), sizeof(Real) * code.cols);
  return out;
}

}  // namespace speechsplit

#endif  // SPEECHSPLIT_CODEC_H_
