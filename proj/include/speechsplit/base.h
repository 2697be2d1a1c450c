// speechsplit/base.h

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

#ifndef SPEECHSPLIT_BASE_H_
#define SPEECHSPLIT_BASE_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace speechsplit {

// Error categories map onto CLI exit codes: usage -> 2, data -> 3,
// numerical -> 4.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Worker-thread cap. Reads SPEECHSPLIT_THREADS once on first use;
// SPEECHSPLIT_THREADS=1 forces fully serial execution. All parallel code in
// this library produces identical results for any thread count because every
// reduction runs in a fixed order on the calling thread.
int max_threads();
void set_max_threads(int n);

// Runs fn(i) for i in [0, n). Work items must be independent; results go
// into per-index slots owned by the caller.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_BASE_H_
