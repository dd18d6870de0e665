/*
 * Copyright 2026 The mkthe Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace mkthe {

/// Deterministic randomness source. Every sampling operation in the library
/// takes one of these explicitly; there is no hidden global state, so a run
/// is reproducible from its seed alone.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform value in [0, bound) via rejection sampling. Stable across
  /// platforms, unlike std::uniform_int_distribution.
  uint64_t uniform_below(uint64_t bound) {
    if (bound <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  bool coin() { return engine_() & 1u; }

  /// Centered integer from a discrete Gaussian of width `stddev`, truncated
  /// to [-bound, bound] by rejection. bound == 0 degenerates to constant 0.
  int64_t gaussian_bounded(double stddev, uint64_t bound) {
    if (bound == 0) return 0;
    if (stddev <= 0.0) return 0;
    const uint64_t span = 2 * bound + 1;
    for (;;) {
      const int64_t candidate =
          static_cast<int64_t>(uniform_below(span)) - static_cast<int64_t>(bound);
      const double accept =
          std::exp(-static_cast<double>(candidate) * static_cast<double>(candidate) /
                   (2.0 * stddev * stddev));
      const double u =
          static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
      if (u < accept) return candidate;
    }
  }

  /// Centered uniform integer in [-bound, bound].
  int64_t uniform_centered(uint64_t bound) {
    if (bound == 0) return 0;
    return static_cast<int64_t>(uniform_below(2 * bound + 1)) -
           static_cast<int64_t>(bound);
  }

  /// Independent child stream for a named role. Used by the protocol
  /// simulator so each party owns its own deterministic stream.
  SeededRng fork(std::string_view tag) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return SeededRng(next_u64() ^ h);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mkthe
