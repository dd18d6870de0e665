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

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mkthe/errors.hpp"

namespace mkthe {

/// Parameters of the cyclotomic ring family R_{q_l} = Z_{q_l}[x]/(x^d + 1)
/// together with the plaintext modulus and the noise distribution.
///
/// `moduli[l]` is q_l; levels are indexed 0 (smallest modulus) through
/// top_level() (largest, where fresh ciphertexts start).
struct RingParams {
  uint32_t degree = 0;            // polynomial degree, power of two, >= 4
  std::vector<uint64_t> moduli;   // q_0 < q_1 < ... < q_L, odd, < 2^62
  uint64_t plain_modulus = 2;     // t, co-prime with every q_l
  uint64_t noise_bound = 1;       // B: |chi sample| <= B
  double noise_stddev = 0.8;      // width of the truncated Gaussian chi
  uint64_t smudging_bound = 0;    // magnitude bound for decryption smudging
  uint64_t growth_budget = 1u << 20;  // budget factor in the q_0 headroom check

  int top_level() const { return static_cast<int>(moduli.size()) - 1; }

  uint64_t modulus(int level) const { return moduli.at(static_cast<size_t>(level)); }

  /// Bit length of q_l: floor(log2 q_l) + 1. This is the gadget length used
  /// by bit decomposition and powers-of-two at that level.
  uint32_t bit_length(int level) const {
    uint64_t q = modulus(level);
    uint32_t bits = 0;
    while (q != 0) {
      q >>= 1;
      ++bits;
    }
    return bits;
  }

  /// Throws ArgumentError when any structural invariant fails.
  void validate() const {
    if (degree < 4 || (degree & (degree - 1)) != 0)
      throw ArgumentError("ring degree must be a power of two >= 4");
    if (moduli.empty()) throw ArgumentError("modulus chain is empty");
    if (plain_modulus < 2) throw ArgumentError("plaintext modulus must be >= 2");
    uint64_t prev = 0;
    for (uint64_t q : moduli) {
      if (q <= prev) throw ArgumentError("modulus chain must be strictly decreasing from the top level");
      if ((q & 1) == 0) throw ArgumentError("ciphertext moduli must be odd");
      if (q >= (uint64_t(1) << 62)) throw ArgumentError("ciphertext moduli must fit in 62 bits");
      if (std::gcd(q, plain_modulus) != 1)
        throw ArgumentError("plaintext modulus must be co-prime with every ciphertext modulus");
      prev = q;
    }
    // Residue preservation across modulus switching needs all q_l congruent
    // to each other mod t; we pin q_l = 1 (mod t).
    for (uint64_t q : moduli) {
      if (q % plain_modulus != 1)
        throw ArgumentError("ciphertext moduli must be = 1 (mod t)");
    }
    // Headroom: fresh noise times a documented growth budget must stay under
    // q_0 / 2, otherwise even shallow circuits cannot decrypt.
    const long double budget = static_cast<long double>(noise_bound ? noise_bound : 1) *
                               static_cast<long double>(plain_modulus) *
                               static_cast<long double>(growth_budget);
    if (budget >= static_cast<long double>(moduli.front()) / 2.0L)
      throw ArgumentError("noise bound times growth budget exceeds q_0 / 2");
  }
};

/// A named, validated parameter set. Every built-in preset is desk-scale and
/// deliberately insecure; `insecure` is always true for them.
struct ParameterPreset {
  std::string name;
  RingParams params;
  std::string intended_use;  // "stump" (t = 2) or "tally" (t > N)
  bool insecure = true;
};

}  // namespace mkthe
