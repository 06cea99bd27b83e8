// certainty/tests/reference_correlations.h

// Copyright 2026  The Certainty Authors
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

// Reference perceived-rating correlations (utterance, context, target) and
// the expected combination-set membership, in feature order. The source
// table has a single slope row; it is used for both slope units.

#ifndef CERTAINTY_TESTS_REFERENCE_CORRELATIONS_H_
#define CERTAINTY_TESTS_REFERENCE_CORRELATIONS_H_

#include <array>

#include "certainty/prosody.h"

namespace certainty::fixture {

inline constexpr std::array<std::array<double, 3>, 20> kReferenceCorrelations = {{
    {0.107, 0.119, 0.041},     // f0_min
    {-0.073, -0.153, -0.045},  // f0_max
    {0.033, 0.070, -0.004},    // f0_mean
    {-0.035, -0.047, -0.043},  // f0_stdev
    {-0.128, -0.211, -0.075},  // f0_range
    {0.042, 0.022, 0.046},     // f0_relpos_min
    {0.015, 0.008, 0.001},     // f0_relpos_max
    {0.275, 0.180, 0.191},     // f0_abs_slope_hz
    {0.275, 0.180, 0.191},     // f0_abs_slope_semi
    {0.101, 0.172, 0.027},     // rms_min
    {-0.091, -0.110, -0.034},  // rms_max
    {-0.012, 0.039, -0.031},   // rms_mean
    {-0.002, -0.003, -0.019},  // rms_stdev
    {0.101, 0.172, 0.027},     // rms_relpos_min
    {-0.039, -0.028, -0.007},  // rms_relpos_max
    {-0.643, -0.507, -0.495},  // silence_total
    {-0.455, -0.225, -0.532},  // silence_percent
    {-0.592, -0.502, -0.590},  // duration_total
    {-0.430, -0.390, -0.386},  // duration_speaking
    {0.090, 0.014, 0.136},     // speaking_rate
}};

inline constexpr Scope U = Scope::kUtterance, C = Scope::kContext, T = Scope::kTarget;

inline constexpr std::array<Scope, 20> kReferenceScopes = {
    C, C, C, C, C, T, U, U, U,  // pitch
    C, C, C, T, C, U,           // intensity
    U, T, U, U, T,              // temporal
};

}  // namespace certainty::fixture

#endif  // CERTAINTY_TESTS_REFERENCE_CORRELATIONS_H_
