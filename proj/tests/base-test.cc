// tests/base-test.cc

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

#include <atomic>

#include "speechsplit/base.h"
#include "speechsplit/matrix.h"
#include "speechsplit/rng.h"

using namespace speechsplit;

namespace {

template <typename Real>
Mat<Real> random_mat(int r, int c, Rng& rng) {
  Mat<Real> m(r, c);
  for (auto& v : m.data) v = static_cast<Real>(rng.uniform(-1.0, 1.0));
  return m;
}

template <typename Real>
Mat<Real> naive_ab(const Mat<Real>& a, const Mat<Real>& b) {
  Mat<Real> c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k)
      for (int j = 0; j < b.cols; ++j) c.at(i, j) += a.at(i, k) * b.at(k, j);
  return c;
}

}  // namespace

TEST_CASE("matmul kernels agree with the naive product") {
  Rng rng(7);
  for (int trial = 0; trial < 4; ++trial) {
    int m = 1 + static_cast<int>(rng.uniform_int(1, 9));
    int k = 1 + static_cast<int>(rng.uniform_int(1, 33));
    int n = 1 + static_cast<int>(rng.uniform_int(1, 17));
    Matd a = random_mat<double>(m, k, rng);
    Matd b = random_mat<double>(k, n, rng);
    Matd want = naive_ab(a, b);

    Matd c1(m, n);
    matmul_nn(m, n, k, a.data.data(), k, b.data.data(), n, c1.data.data(), n, false);
    Matd bt(n, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) bt.at(j, i) = b.at(i, j);
    Matd c2(m, n);
    matmul_nt(m, n, k, a.data.data(), k, bt.data.data(), k, c2.data.data(), n, false);
    Matd at(k, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) at.at(j, i) = a.at(i, j);
    Matd c3(m, n);
    matmul_tn_acc(m, n, k, at.data.data(), m, b.data.data(), n, c3.data.data(), n);

    for (size_t i = 0; i < want.data.size(); ++i) {
      CHECK(c1.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
      CHECK(c2.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
      CHECK(c3.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("matmul accumulate adds on top of existing values") {
  Rng rng(3);
  Matd a = random_mat<double>(5, 4, rng);
  Matd bt = random_mat<double>(6, 4, rng);
  Matd c(5, 6);
  for (auto& v : c.data) v = 1.0;
  matmul_nt(5, 6, 4, a.data.data(), 4, bt.data.data(), 4, c.data.data(), 6, true);
  Matd c0(5, 6);
  matmul_nt(5, 6, 4, a.data.data(), 4, bt.data.data(), 4, c0.data.data(), 6, false);
  for (size_t i = 0; i < c.data.size(); ++i)
    CHECK(c.data[i] == doctest::Approx(c0.data[i] + 1.0));
}

TEST_CASE("rng is deterministic and stays in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    int64_t v = r.uniform_int(19, 32);
    CHECK(v >= 19);
    CHECK(v <= 32);
    double u = r.uniform(0.5, 1.5);
    CHECK(u >= 0.5);
    CHECK(u < 1.5);
  }
}

TEST_CASE("uniform_int covers both endpoints") {
  Rng r(5);
  bool lo = false, hi = false;
  for (int i = 0; i < 2000; ++i) {
    int64_t v = r.uniform_int(0, 7);
    if (v == 0) lo = true;
    if (v == 7) hi = true;
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("derive_seed separates labels and arguments") {
  uint64_t a = derive_seed(1, "rr", 0, 0);
  CHECK(a == derive_seed(1, "rr", 0, 0));
  CHECK(a != derive_seed(1, "rr", 0, 1));
  CHECK(a != derive_seed(1, "rr", 1, 0));
  CHECK(a != derive_seed(1, "crop", 0, 0));
  CHECK(a != derive_seed(2, "rr", 0, 0));
}

TEST_CASE("parallel_for visits every index once regardless of thread cap") {
  for (int threads : {1, 2, 4}) {
    set_max_threads(threads);
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, [&](int i) { hits[static_cast<size_t>(i)]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  set_max_threads(0);  // reset to auto-detect on next use
}
