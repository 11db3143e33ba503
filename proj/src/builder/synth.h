// Copyright 2026 The gsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GSIM_BUILDER_SYNTH_H_
#define GSIM_BUILDER_SYNTH_H_

#include <cstdint>
#include <vector>

#include "ibert/encoder.h"

namespace gsim::builder {

// Deterministic pseudo-trained parameters. Weights are Irwin-Hall shaped
// INT8 values drawn from a seeded mt19937_64; activation scales are
// calibrated layer by layer on a seeded random input so every requant uses
// the full INT8 range.
ibert::EncoderParams synthesize_encoder(const ibert::EncoderConfig& cfg, double in_scale,
                                        uint64_t seed);

std::vector<ibert::EncoderParams> synthesize_model(const ibert::EncoderConfig& cfg,
                                                   uint64_t seed);

// Scale given to the model input of encoder 0.
inline constexpr double kModelInputScale = 1.0 / 32;

}  // namespace gsim::builder

#endif  // GSIM_BUILDER_SYNTH_H_
