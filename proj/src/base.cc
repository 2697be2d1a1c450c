// src/base.cc

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

#include "speechsplit/base.h"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace speechsplit {

namespace {

// Activation buffers run to megabytes and are allocated per layer call; keep
// them on the heap freelist instead of round-tripping through mmap (which
// serializes threads on kernel page-zeroing).
struct MallocTuning {
  MallocTuning() {
#ifdef __GLIBC__
    mallopt(M_MMAP_THRESHOLD, 64 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 128 * 1024 * 1024);
#endif
  }
};
const MallocTuning g_malloc_tuning;

int g_max_threads = 0;  // 0 = uninitialized

int detect_threads() {
  const char* env = std::getenv("SPEECHSPLIT_THREADS");
  if (env != nullptr) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

int max_threads() {
  if (g_max_threads == 0) g_max_threads = detect_threads();
  return g_max_threads;
}

void set_max_threads(int n) { g_max_threads = n >= 1 ? n : 0; }  // 0: re-detect

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int nthreads = max_threads();
  if (nthreads > n) nthreads = n;
  if (nthreads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace speechsplit
