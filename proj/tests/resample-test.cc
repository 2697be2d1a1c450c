// tests/resample-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "speechsplit/resample.h"

using namespace speechsplit;

namespace {

Matf label_column(int frames) {
  Matf m(frames, 1);
  for (int t = 0; t < frames; ++t) m.at(t, 0) = static_cast<float>(t);
  return m;
}

}  // namespace

TEST_CASE("draw_plan degenerate and determinism") {
  Rng r0(9);
  CHECK(draw_plan(0, r0).segments.empty());

  Rng r1(9), r2(9);
  ResamplePlan a = draw_plan(500, r1);
  ResamplePlan b = draw_plan(500, r2);
  REQUIRE(a.segments.size() == b.segments.size());
  for (size_t i = 0; i < a.segments.size(); ++i) {
    CHECK(a.segments[i].start == b.segments[i].start);
    CHECK(a.segments[i].length == b.segments[i].length);
    CHECK(a.segments[i].factor == b.segments[i].factor);
  }

  Rng r3(10);
  ResamplePlan c = draw_plan(500, r3);
  bool same = c.segments.size() == a.segments.size();
  if (same)
    for (size_t i = 0; i < c.segments.size(); ++i)
      if (c.segments[i].factor != a.segments[i].factor) same = false;
  CHECK_FALSE(same);
}

TEST_CASE("plan partitions the input contiguously") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int frames = static_cast<int>(rng.uniform_int(1, 400));
    ResamplePlan plan = draw_plan(frames, rng);
    int pos = 0;
    for (size_t i = 0; i < plan.segments.size(); ++i) {
      const auto& s = plan.segments[i];
      CHECK(s.start == pos);
      CHECK(s.length >= 1);
      CHECK(s.factor >= kFactorMin);
      CHECK(s.factor < kFactorMax);
      if (i + 1 < plan.segments.size()) {
        CHECK(s.length >= kSegmentMinFrames);
        CHECK(s.length <= kSegmentMaxFrames);
      }
      pos += s.length;
    }
    CHECK(pos == frames);
  }
}

// Monte Carlo check of the segment-length and factor laws. The terminal
// remainder is excluded from the length statistic.
TEST_CASE("segment law statistics over 10^4 draws") {
  Rng rng(123);
  double len_sum = 0.0, factor_sum = 0.0;
  int64_t len_n = 0, factor_n = 0;
  for (int d = 0; d < 10000; ++d) {
    ResamplePlan plan = draw_plan(1000, rng);
    for (size_t i = 0; i < plan.segments.size(); ++i) {
      factor_sum += plan.segments[i].factor;
      ++factor_n;
      if (i + 1 < plan.segments.size()) {
        len_sum += plan.segments[i].length;
        ++len_n;
      }
    }
  }
  double mean_len = len_sum / static_cast<double>(len_n);
  double mean_factor = factor_sum / static_cast<double>(factor_n);
  CHECK(mean_len == doctest::Approx(25.5).epsilon(0.3 / 25.5));
  CHECK(mean_factor == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("apply_plan identity factors reproduce the input bit-exactly") {
  Rng rng(5);
  Matf x(73, 4);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform());
  ResamplePlan plan;
  plan.segments = {{0, 20, 1.0}, {20, 30, 1.0}, {50, 23, 1.0}};
  Matf y = apply_plan(x, plan);
  REQUIRE(y.rows == x.rows);
  CHECK(std::memcmp(y.data.data(), x.data.data(), sizeof(float) * x.size()) == 0);
}

TEST_CASE("apply_plan output lengths follow round(L * f)") {
  Matf x = label_column(20);
  ResamplePlan plan;
  plan.segments = {{0, 20, 0.5}};
  CHECK(apply_plan(x, plan).rows == 10);
  plan.segments = {{0, 20, 1.5}};
  CHECK(apply_plan(x, plan).rows == 30);
  plan.segments = {{0, 20, 1.26}};  // round(25.2) = 25
  CHECK(apply_plan(x, plan).rows == 25);
}

TEST_CASE("apply_plan of constant rows stays constant") {
  Matf x(64, 3);
  for (int t = 0; t < 64; ++t)
    for (int c = 0; c < 3; ++c) x.at(t, c) = 2.5f + c;
  Rng rng(17);
  ResamplePlan plan = draw_plan(64, rng);
  Matf y = apply_plan(x, plan);
  for (int t = 0; t < y.rows; ++t)
    for (int c = 0; c < 3; ++c) CHECK(y.at(t, c) == doctest::Approx(2.5 + c));
}

TEST_CASE("apply_plan enforces the length precondition") {
  Matf x = label_column(10);
  ResamplePlan plan;
  plan.segments = {{0, 12, 1.0}};
  CHECK_THROWS_AS(apply_plan(x, plan), DataError);
}

TEST_CASE("order preservation: monotone labels stay non-decreasing") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    Matf x = label_column(200);
    ResamplePlan plan = draw_plan(200, rng);
    Matf y = apply_plan(x, plan);
    for (int t = 1; t < y.rows; ++t) CHECK(y.at(t, 0) >= y.at(t - 1, 0));
  }
}

TEST_CASE("length law: output over input length concentrates at 1") {
  Rng rng(31);
  const int frames = 10000;
  double ratio_sum = 0.0;
  const int draws = 20;
  for (int d = 0; d < draws; ++d) {
    ResamplePlan plan = draw_plan(frames, rng);
    ratio_sum += static_cast<double>(plan.output_frames()) / frames;
  }
  CHECK(ratio_sum / draws == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("paired plans share boundaries and factors") {
  Rng rng(37);
  auto [ps, pp] = paired_plans(300, rng);
  REQUIRE(ps.segments.size() == pp.segments.size());
  for (size_t i = 0; i < ps.segments.size(); ++i) {
    CHECK(ps.segments[i].start == pp.segments[i].start);
    CHECK(ps.segments[i].length == pp.segments[i].length);
    CHECK(ps.segments[i].factor == pp.segments[i].factor);
  }
  Matf s(300, 4), p(300, 7);
  CHECK(apply_plan(s, ps).rows == apply_plan(p, pp).rows);

  Rng rng2(38);
  auto [qs, qp] = paired_plans(300, rng2);
  bool differ = qs.segments.size() != ps.segments.size();
  if (!differ)
    for (size_t i = 0; i < qs.segments.size(); ++i)
      if (qs.segments[i].factor != ps.segments[i].factor) differ = true;
  CHECK(differ);
  (void)qp;
}

TEST_CASE("identity_plan applications are exact") {
  Matf x = label_column(59);
  ResamplePlan plan = identity_plan(59);
  CHECK(plan.is_identity());
  Matf y = apply_plan(x, plan);
  REQUIRE(y.rows == 59);
  CHECK(std::memcmp(y.data.data(), x.data.data(), sizeof(float) * x.size()) == 0);
  CHECK(identity_plan(0).segments.empty());
  Matf empty(0, 4);
  CHECK(apply_plan(empty, identity_plan(0)).rows == 0);
}

// apply_taps_backward must be the exact adjoint of apply_taps:
// <dy, A x> == <A^T dy, x> for random vectors.
TEST_CASE("resample backward is the adjoint of forward") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    int frames = 40 + static_cast<int>(rng.uniform_int(0, 80));
    ResamplePlan plan = draw_plan(frames, rng);
    InterpTaps taps = plan_taps(plan);
    Matd x(frames, 3), dy(static_cast<int>(taps.src.size()), 3);
    for (auto& v : x.data) v = rng.uniform(-1, 1);
    for (auto& v : dy.data) v = rng.uniform(-1, 1);
    Matd y = apply_taps(x, taps);
    Matd dx = apply_taps_backward(dy, taps, frames);
    double lhs = 0, rhs = 0;
    for (size_t i = 0; i < y.data.size(); ++i) lhs += y.data[i] * dy.data[i];
    for (size_t i = 0; i < x.data.size(); ++i) rhs += x.data[i] * dx.data[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("plan text round trip") {
  Rng rng(43);
  ResamplePlan plan = draw_plan(100, rng);
  ResamplePlan back = ResamplePlan::from_text(plan.to_text());
  REQUIRE(back.segments.size() == plan.segments.size());
  for (size_t i = 0; i < plan.segments.size(); ++i) {
    CHECK(back.segments[i].start == plan.segments[i].start);
    CHECK(back.segments[i].length == plan.segments[i].length);
    CHECK(back.segments[i].factor == doctest::Approx(plan.segments[i].factor));
  }
  CHECK_THROWS_AS(ResamplePlan::from_text("bogus"), DataError);
}
