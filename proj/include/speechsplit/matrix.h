// speechsplit/matrix.h

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

#ifndef SPEECHSPLIT_MATRIX_H_
#define SPEECHSPLIT_MATRIX_H_

#include <cassert>
#include <cmath>
#include <cstring>
#include <vector>

namespace speechsplit {

// Dense row-major matrix. Rows are time frames throughout this codebase,
// columns are channels.
template <typename Real>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<Real> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, Real(0)) {}

  Real* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const Real* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  Real& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  Real at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  size_t size() const { return data.size(); }
  void set_zero() { std::fill(data.begin(), data.end(), Real(0)); }

  bool all_finite() const {
    for (Real v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename Other>
  Mat<Other> cast() const {
    Mat<Other> out(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<Other>(data[i]);
    return out;
  }
};

using Matf = Mat<float>;
using Matd = Mat<double>;

// C(M x N) = [beta*C] + A(M x K) * B(N x K)^T.
// B is given row-major with the contraction axis contiguous, which is the
// layout of all weight matrices here (out_dim x in_dim). Blocked so a panel
// of B rows stays cache-resident across the sweep over A rows.
template <typename Real>
void matmul_nt(int M, int N, int K, const Real* A, int lda, const Real* B,
               int ldb, Real* C, int ldc, bool accumulate) {
  // Panel of B rows sized to roughly half an L2 cache.
  int nc = K > 0 ? static_cast<int>(32768 / static_cast<size_t>(K) + 1) : N;
  if (nc > N) nc = N;
  for (int j0 = 0; j0 < N; j0 += nc) {
    int j1 = std::min(j0 + nc, N);
    int i = 0;
    for (; i + 8 <= M; i += 8) {
      const Real* a0 = A + static_cast<size_t>(i) * lda;
      const Real* a1 = a0 + lda;
      const Real* a2 = a1 + lda;
      const Real* a3 = a2 + lda;
      const Real* a4 = a3 + lda;
      const Real* a5 = a4 + lda;
      const Real* a6 = a5 + lda;
      const Real* a7 = a6 + lda;
      for (int j = j0; j < j1; ++j) {
        const Real* b = B + static_cast<size_t>(j) * ldb;
        Real s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
#pragma omp simd reduction(+ : s0, s1, s2, s3, s4, s5, s6, s7)
        for (int k = 0; k < K; ++k) {
          Real bk = b[k];
          s0 += a0[k] * bk;
          s1 += a1[k] * bk;
          s2 += a2[k] * bk;
          s3 += a3[k] * bk;
          s4 += a4[k] * bk;
          s5 += a5[k] * bk;
          s6 += a6[k] * bk;
          s7 += a7[k] * bk;
        }
        Real* c = C + static_cast<size_t>(i) * ldc + j;
        if (accumulate) {
          c[0] += s0;
          c[ldc] += s1;
          c[2 * ldc] += s2;
          c[3 * ldc] += s3;
          c[4 * ldc] += s4;
          c[5 * ldc] += s5;
          c[6 * ldc] += s6;
          c[7 * ldc] += s7;
        } else {
          c[0] = s0;
          c[ldc] = s1;
          c[2 * ldc] = s2;
          c[3 * ldc] = s3;
          c[4 * ldc] = s4;
          c[5 * ldc] = s5;
          c[6 * ldc] = s6;
          c[7 * ldc] = s7;
        }
      }
    }
    for (; i < M; ++i) {
      const Real* a = A + static_cast<size_t>(i) * lda;
      for (int j = j0; j < j1; ++j) {
        const Real* b = B + static_cast<size_t>(j) * ldb;
        Real s = 0;
#pragma omp simd reduction(+ : s)
        for (int k = 0; k < K; ++k) s += a[k] * b[k];
        Real* c = C + static_cast<size_t>(i) * ldc + j;
        if (accumulate)
          *c += s;
        else
          *c = s;
      }
    }
  }
}

// C(M x N) = [beta*C] + A(M x K) * B(K x N). Row-of-B streaming form.
template <typename Real>
void matmul_nn(int M, int N, int K, const Real* A, int lda, const Real* B,
               int ldb, Real* C, int ldc, bool accumulate) {
  if (!accumulate) {
    for (int i = 0; i < M; ++i)
      std::memset(C + static_cast<size_t>(i) * ldc, 0, sizeof(Real) * N);
  }
  int i = 0;
  for (; i + 8 <= M; i += 8) {
    const Real* a0 = A + static_cast<size_t>(i) * lda;
    Real* c0 = C + static_cast<size_t>(i) * ldc;
    for (int k = 0; k < K; ++k) {
      const Real* b = B + static_cast<size_t>(k) * ldb;
      Real w0 = a0[k], w1 = a0[lda + k], w2 = a0[2 * lda + k],
           w3 = a0[3 * lda + k], w4 = a0[4 * lda + k], w5 = a0[5 * lda + k],
           w6 = a0[6 * lda + k], w7 = a0[7 * lda + k];
#pragma omp simd
      for (int j = 0; j < N; ++j) {
        Real bj = b[j];
        c0[j] += w0 * bj;
        c0[ldc + j] += w1 * bj;
        c0[2 * ldc + j] += w2 * bj;
        c0[3 * ldc + j] += w3 * bj;
        c0[4 * ldc + j] += w4 * bj;
        c0[5 * ldc + j] += w5 * bj;
        c0[6 * ldc + j] += w6 * bj;
        c0[7 * ldc + j] += w7 * bj;
      }
    }
  }
  for (; i < M; ++i) {
    const Real* a = A + static_cast<size_t>(i) * lda;
    Real* c = C + static_cast<size_t>(i) * ldc;
    for (int k = 0; k < K; ++k) {
      Real w = a[k];
      const Real* b = B + static_cast<size_t>(k) * ldb;
#pragma omp simd
      for (int j = 0; j < N; ++j) c[j] += w * b[j];
    }
  }
}

// C(M x N) += A(K x M)^T * B(K x N). Used for weight gradients
// (dW = dY^T * X with dY given K x M).
template <typename Real>
void matmul_tn_acc(int M, int N, int K, const Real* A, int lda, const Real* B,
                   int ldb, Real* C, int ldc) {
  int k = 0;
  for (; k + 8 <= K; k += 8) {
    const Real* b0 = B + static_cast<size_t>(k) * ldb;
    const Real* b1 = b0 + ldb;
    const Real* b2 = b1 + ldb;
    const Real* b3 = b2 + ldb;
    const Real* b4 = b3 + ldb;
    const Real* b5 = b4 + ldb;
    const Real* b6 = b5 + ldb;
    const Real* b7 = b6 + ldb;
    const Real* a0 = A + static_cast<size_t>(k) * lda;
    for (int i = 0; i < M; ++i) {
      Real w0 = a0[i], w1 = a0[lda + i], w2 = a0[2 * lda + i],
           w3 = a0[3 * lda + i], w4 = a0[4 * lda + i], w5 = a0[5 * lda + i],
           w6 = a0[6 * lda + i], w7 = a0[7 * lda + i];
      Real* c = C + static_cast<size_t>(i) * ldc;
#pragma omp simd
      for (int j = 0; j < N; ++j)
        c[j] += w0 * b0[j] + w1 * b1[j] + w2 * b2[j] + w3 * b3[j] + w4 * b4[j] +
                w5 * b5[j] + w6 * b6[j] + w7 * b7[j];
    }
  }
  for (; k < K; ++k) {
    const Real* b = B + static_cast<size_t>(k) * ldb;
    const Real* a = A + static_cast<size_t>(k) * lda;
    for (int i = 0; i < M; ++i) {
      Real w = a[i];
      Real* c = C + static_cast<size_t>(i) * ldc;
#pragma omp simd
      for (int j = 0; j < N; ++j) c[j] += w * b[j];
    }
  }
}

template <typename Real>
inline Real dot(const Real* a, const Real* b, int n) {
  Real s = 0;
#pragma omp simd reduction(+ : s)
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename Real>
inline void axpy(int n, Real alpha, const Real* x, Real* y) {
#pragma omp simd
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace speechsplit

#endif  // SPEECHSPLIT_MATRIX_H_
