// certainty/random.h

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

#ifndef CERTAINTY_RANDOM_H_
#define CERTAINTY_RANDOM_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace certainty {

// Seeded generator whose output sequence is identical on every standard
// library. std::mt19937_64 is fully specified; the std distributions are not,
// so bounded integers and uniform reals are derived here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound), rejection sampling without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  template <typename T>
  void shuffle(std::vector<T> *values) {
    for (std::size_t i = values->size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap((*values)[i - 1], (*values)[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace certainty

#endif  // CERTAINTY_RANDOM_H_
