// src/codec.cc

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

#include "speechsplit/codec.h"

namespace speechsplit {

std::vector<int> downsample_indices_fwd(int frames, int k) {
  std::vector<int> idx;
  for (int t = k - 1; t < frames; t += k) idx.push_back(t);
  return idx;
}

std::vector<int> downsample_indices_bwd(int frames, int k) {
  std::vector<int> idx;
  for (int t = 0; t < frames; t += k) idx.push_back(t);
  return idx;
}

}  // namespace speechsplit
