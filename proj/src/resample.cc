// src/resample.cc

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

#include "speechsplit/resample.h"

#include <cmath>
#include <sstream>

namespace speechsplit {

int ResamplePlan::output_frames() const {
  int t = 0;
  for (const auto& s : segments) {
    int m = static_cast<int>(std::llround(s.length * s.factor));
    t += m < 1 ? 1 : m;
  }
  return t;
}

bool ResamplePlan::is_identity() const {
  for (const auto& s : segments)
    if (s.factor != 1.0) return false;
  return true;
}

std::string ResamplePlan::to_text() const {
  std::ostringstream os;
  os << "resample_plan v1\n";
  for (const auto& s : segments)
    os << s.start << " " << s.length << " " << s.factor << "\n";
  return os.str();
}

ResamplePlan ResamplePlan::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string header, version;
  is >> header >> version;
  if (header != "resample_plan" || version != "v1")
    throw DataError("resample plan: bad header");
  ResamplePlan plan;
  ResampleSegment seg;
  while (is >> seg.start >> seg.length >> seg.factor) plan.segments.push_back(seg);
  return plan;
}

ResamplePlan draw_plan(int frames, Rng& rng) {
  ResamplePlan plan;
  int pos = 0;
  while (pos < frames) {
    int len = static_cast<int>(rng.uniform_int(kSegmentMinFrames, kSegmentMaxFrames));
    double factor = rng.uniform(kFactorMin, kFactorMax);
    if (pos + len > frames) len = frames - pos;  // terminal remainder
    plan.segments.push_back({pos, len, factor});
    pos += len;
  }
  return plan;
}

std::pair<ResamplePlan, ResamplePlan> paired_plans(int frames, Rng& rng) {
  ResamplePlan plan = draw_plan(frames, rng);
  return {plan, plan};
}

ResamplePlan identity_plan(int frames) {
  ResamplePlan plan;
  if (frames > 0) plan.segments.push_back({0, frames, 1.0});
  return plan;
}

InterpTaps plan_taps(const ResamplePlan& plan) {
  InterpTaps taps;
  taps.input_frames = plan.input_frames();
  for (const auto& s : plan.segments) {
    int m = static_cast<int>(std::llround(s.length * s.factor));
    if (m < 1) m = 1;
    for (int u = 0; u < m; ++u) {
      double pos;
      if (m > 1)
        pos = s.start + static_cast<double>(u) * (s.length - 1) / (m - 1);
      else
        pos = s.start + 0.5 * (s.length - 1);
      int i0 = static_cast<int>(pos);
      double w = pos - i0;
      if (i0 >= s.start + s.length - 1) {  // clamp the segment-end tap
        i0 = s.start + s.length - 1;
        w = 0.0;
      }
      taps.src.push_back(i0);
      taps.weight.push_back(w);
    }
  }
  return taps;
}

}  // namespace speechsplit
