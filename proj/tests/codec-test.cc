// tests/codec-test.cc

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

#include "speechsplit/codec.h"
#include "speechsplit/rng.h"

using namespace speechsplit;

namespace {

Matf label_mat(int frames, int cols) {
  Matf m(frames, cols);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < cols; ++c) m.at(t, c) = static_cast<float>(t * 100 + c);
  return m;
}

}  // namespace

TEST_CASE("downsample indices follow the forward/backward formulas") {
  CHECK(downsample_indices_fwd(32, 8) == std::vector<int>{7, 15, 23, 31});
  CHECK(downsample_indices_bwd(32, 8) == std::vector<int>{0, 8, 16, 24});
}

TEST_CASE("downsample picks those rows") {
  Matf fwd = label_mat(32, 3);
  Matf bwd = label_mat(32, 2);
  DownsampledCode<float> code = downsample(fwd, bwd, 8);
  REQUIRE(code.fwd.rows == 4);
  REQUIRE(code.bwd.rows == 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(code.fwd.at(r, 0) == fwd.at(r * 8 + 7, 0));
    CHECK(code.bwd.at(r, 0) == bwd.at(r * 8, 0));
  }
  // Coverage: frame 0 is in the backward stream, the final frame in forward.
  CHECK(code.bwd.at(0, 0) == bwd.at(0, 0));
  CHECK(code.fwd.at(3, 0) == fwd.at(31, 0));
}

TEST_CASE("downsample with k=1 is the identity on both streams") {
  Matf fwd = label_mat(5, 2);
  Matf bwd = label_mat(5, 2);
  DownsampledCode<float> code = downsample(fwd, bwd, 1);
  CHECK(code.fwd.rows == 5);
  CHECK(std::memcmp(code.fwd.data.data(), fwd.data.data(),
                    sizeof(float) * fwd.size()) == 0);
  CHECK(std::memcmp(code.bwd.data.data(), bwd.data.data(),
                    sizeof(float) * bwd.size()) == 0);
}

TEST_CASE("padding to a multiple of k repeats the final frame") {
  Matf x = label_mat(20, 2);
  Matf padded = pad_to_multiple(x, 8);
  REQUIRE(padded.rows == 24);
  for (int t = 20; t < 24; ++t)
    for (int c = 0; c < 2; ++c) CHECK(padded.at(t, c) == x.at(19, c));
  DownsampledCode<float> code = downsample(padded, padded, 8);
  CHECK(code.fwd.rows == 3);
  CHECK(code.fwd.at(0, 0) == padded.at(7, 0));
  CHECK(code.fwd.at(2, 0) == padded.at(23, 0));
  CHECK(code.bwd.at(0, 0) == padded.at(0, 0));
  CHECK(code.bwd.at(2, 0) == padded.at(16, 0));
}

TEST_CASE("downsample validates its preconditions") {
  Matf a = label_mat(20, 2), b = label_mat(20, 2), c = label_mat(19, 2);
  CHECK_THROWS_AS(downsample(a, c, 1), DataError);
  CHECK_THROWS_AS(downsample(a, b, 8), DataError);  // 20 not a multiple of 8
}

TEST_CASE("upsample repeats each row k times and truncates") {
  Matf fwd = label_mat(1, 3), bwd = label_mat(1, 2);
  DownsampledCode<float> code = downsample(fwd, bwd, 1);
  code.factor = 8;  // single row, k=8
  Matf up = upsample(code, 8);
  REQUIRE(up.rows == 8);
  REQUIRE(up.cols == 5);
  for (int t = 1; t < 8; ++t)
    for (int c = 0; c < 5; ++c) CHECK(up.at(t, c) == up.at(0, c));
  CHECK_THROWS_AS(upsample(code, 9), DataError);
}

TEST_CASE("upsample with k=1 concatenates without repetition") {
  Matf fwd = label_mat(6, 2), bwd = label_mat(6, 3);
  DownsampledCode<float> code = downsample(fwd, bwd, 1);
  Matf up = upsample(code, 6);
  REQUIRE(up.rows == 6);
  REQUIRE(up.cols == 5);
  for (int t = 0; t < 6; ++t) {
    CHECK(up.at(t, 0) == fwd.at(t, 0));
    CHECK(up.at(t, 2) == bwd.at(t, 0));
  }
}

// A sequence constant within each k-block survives the round trip exactly.
TEST_CASE("downsample then upsample reproduces k-periodic-constant input") {
  const int k = 8, frames = 40;
  Rng rng(13);
  Matf x(frames, 4);
  for (int blk = 0; blk < frames / k; ++blk) {
    float v = static_cast<float>(rng.uniform());
    for (int t = blk * k; t < (blk + 1) * k; ++t)
      for (int c = 0; c < 4; ++c) x.at(t, c) = v + c;
  }
  DownsampledCode<float> code = downsample(x, x, k);
  Matf up = upsample(code, frames);
  for (int t = 0; t < frames; ++t)
    for (int c = 0; c < 4; ++c) {
      CHECK(up.at(t, c) == x.at(t, c));
      CHECK(up.at(t, c + 4) == x.at(t, c));
    }
}

TEST_CASE("row counts after downsampling are exactly padded length over k") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    int frames = 1 + static_cast<int>(rng.uniform_int(0, 100));
    Matf x = label_mat(frames, 2);
    Matf padded = pad_to_multiple(x, 8);
    DownsampledCode<float> code = downsample(padded, padded, 8);
    CHECK(code.fwd.rows == padded.rows / 8);
    CHECK(code.bwd.rows == padded.rows / 8);
  }
}
