// speechsplit/resample.h

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

#ifndef SPEECHSPLIT_RESAMPLE_H_
#define SPEECHSPLIT_RESAMPLE_H_

#include <string>
#include <utility>
#include <vector>

#include "speechsplit/base.h"
#include "speechsplit/matrix.h"
#include "speechsplit/rng.h"

namespace speechsplit {

// Random temporal resampling: the input is cut into contiguous segments of
// random length (19..32 frames, terminal remainder may be shorter) and each
// segment is linearly interpolated by an independent factor in [0.5, 1.5].

struct ResampleSegment {
  int start = 0;
  int length = 0;
  double factor = 1.0;
};

struct ResamplePlan {
  std::vector<ResampleSegment> segments;

  int input_frames() const {
    int t = 0;
    for (const auto& s : segments) t += s.length;
    return t;
  }
  int output_frames() const;
  bool is_identity() const;

  std::string to_text() const;
  static ResamplePlan from_text(const std::string& text);
};

constexpr int kSegmentMinFrames = 19;
constexpr int kSegmentMaxFrames = 32;
constexpr double kFactorMin = 0.5;
constexpr double kFactorMax = 1.5;

// Contiguous partition of [0, T): segment lengths uniform on {19..32} with a
// terminal remainder, factors uniform on [0.5, 1.5), independent per segment.
ResamplePlan draw_plan(int frames, Rng& rng);

// Two plans sharing boundaries and factors, for the spectrogram and pitch
// inputs. Sharing keeps A(S) and A(P) frame-aligned.
std::pair<ResamplePlan, ResamplePlan> paired_plans(int frames, Rng& rng);

// Single full-length segment with factor exactly 1; apply_plan is then a
// bit-exact copy. Used at conversion time.
ResamplePlan identity_plan(int frames);

// Precomputed interpolation taps: output frame u reads
// (1-weight[u]) * x[src[u]] + weight[u] * x[src[u]+1].
struct InterpTaps {
  std::vector<int> src;
  std::vector<double> weight;
  int input_frames = 0;
};

InterpTaps plan_taps(const ResamplePlan& plan);

template <typename Real>
Mat<Real> apply_taps(const Mat<Real>& seq, const InterpTaps& taps) {
  if (seq.rows != taps.input_frames)
    throw DataError("apply_plan: plan covers " + std::to_string(taps.input_frames) +
                    " frames but sequence has " + std::to_string(seq.rows));
  Mat<Real> out(static_cast<int>(taps.src.size()), seq.cols);
  for (size_t u = 0; u < taps.src.size(); ++u) {
    const Real* x0 = seq.row(taps.src[u]);
    Real w = static_cast<Real>(taps.weight[u]);
    Real* o = out.row(static_cast<int>(u));
    if (w == Real(0)) {
      std::memcpy(o, x0, sizeof(Real) * seq.cols);
    } else {
      const Real* x1 = seq.row(taps.src[u] + 1);
      for (int c = 0; c < seq.cols; ++c) o[c] = (Real(1) - w) * x0[c] + w * x1[c];
    }
  }
  return out;
}

// Segment-wise linear interpolation; each segment of length L maps to
// max(1, round(L * factor)) output frames.
template <typename Real>
Mat<Real> apply_plan(const Mat<Real>& seq, const ResamplePlan& plan) {
  return apply_taps(seq, plan_taps(plan));
}

// Gradient of apply_taps: scatters d_out back through the interpolation
// weights into a T x D buffer.
template <typename Real>
Mat<Real> apply_taps_backward(const Mat<Real>& d_out, const InterpTaps& taps,
                              int input_frames) {
  Mat<Real> dx(input_frames, d_out.cols);
  for (size_t u = 0; u < taps.src.size(); ++u) {
    const Real* g = d_out.row(static_cast<int>(u));
    Real w = static_cast<Real>(taps.weight[u]);
    Real* x0 = dx.row(taps.src[u]);
    axpy(d_out.cols, Real(1) - w, g, x0);
    if (w != Real(0)) axpy(d_out.cols, w, g, dx.row(taps.src[u] + 1));
  }
  return dx;
}

}  // namespace speechsplit

#endif  // SPEECHSPLIT_RESAMPLE_H_
