// certainty/stats.h

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

#ifndef CERTAINTY_STATS_H_
#define CERTAINTY_STATS_H_

#include <span>

namespace certainty {

double Mean(std::span<const double> x);

// Pearson r. Throws LengthMismatch, EmptyData (n < 2) or ZeroVariance.
double PearsonR(std::span<const double> x, std::span<const double> y);

// Two-sided p-value of r under H0: rho = 0, t with n - 2 df.
double PearsonPValue(double r, int n);

}  // namespace certainty

#endif  // CERTAINTY_STATS_H_
