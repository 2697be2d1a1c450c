// speechsplit/plot.h

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

#ifndef SPEECHSPLIT_PLOT_H_
#define SPEECHSPLIT_PLOT_H_

#include <string>
#include <vector>

#include "speechsplit/matrix.h"

namespace speechsplit {

// Renders a spectrogram (top) and pitch-contour strip (bottom) into a 24-bit
// BMP for visual inspection. Pass an empty contour to plot the mel only.
void render_feature_plot(const std::string& path, const Matf& mel,
                         const std::vector<uint16_t>& pitch_bins,
                         int time_scale = 3);

}  // namespace speechsplit

#endif  // SPEECHSPLIT_PLOT_H_
