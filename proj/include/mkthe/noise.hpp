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

#include "mkthe/params.hpp"

namespace mkthe {

/// Conservative worst-case bounds on |centered(<c, s>)|_inf, the message-
/// inclusive noise a ciphertext carries. Decryption is guaranteed while the
/// bound stays below q_l / 2; everything here is an upper bound, so the
/// tracked value can only over-estimate the measured one.
namespace noise {

inline double poly_product(double a, double b, uint32_t degree) {
  return static_cast<double>(degree) * a * b;
}

/// Fresh encryption: w = mu + t(r e + e' - e'' s'), r binary, chi bounded by
/// B. `key_norm` bounds |s'|_inf and `pk_noise_norm` bounds the public row
/// noise; both exceed B for aggregated joint keys.
inline double fresh(const RingParams& p, double key_norm, double pk_noise_norm) {
  const double t = static_cast<double>(p.plain_modulus);
  const double b = static_cast<double>(p.noise_bound);
  const double d = static_cast<double>(p.degree);
  return (t - 1) + t * (d * pk_noise_norm + b + d * b * key_norm);
}

/// Key-switch additive term: t * (#components) * beta * degree * hint_noise,
/// with binary decomposition digits.
inline double key_switch(const RingParams& p, uint32_t components, uint32_t beta,
                         double hint_noise) {
  return static_cast<double>(p.plain_modulus) * components * beta *
         static_cast<double>(p.degree) * hint_noise;
}

/// Weight of one secret pair (1, -s') in the rescale slack: 1 + degree * |s'|.
inline double pair_weight(const RingParams& p, double key_norm) {
  return 1.0 + static_cast<double>(p.degree) * key_norm;
}

/// Convenience for `keys` fresh chi-bounded pairs.
inline double secret_weight_base(const RingParams& p, uint32_t keys) {
  return keys * pair_weight(p, static_cast<double>(p.noise_bound));
}

/// After scaling from q_from to q_to: n * (q_to/q_from) plus the rounding
/// term (t/2) * secret_weight + 1.
inline double rescale(const RingParams& p, double n, uint64_t q_from, uint64_t q_to,
                      double secret_weight) {
  return n * (static_cast<double>(q_to) / static_cast<double>(q_from)) +
         (static_cast<double>(p.plain_modulus) / 2.0) * secret_weight + 1.0;
}

/// GSW fresh ciphertext noise epsilon: gamma e + e0 - e1 s'.
inline double gsw_fresh(const RingParams& p, double key_norm, double pk_noise_norm) {
  const double b = static_cast<double>(p.noise_bound);
  const double d = static_cast<double>(p.degree);
  return d * b * pk_noise_norm + b + d * b * key_norm;
}

/// Worst block of an extended GSW ciphertext:
/// e0 - e1 s'_j + BitDecomp(b_j - b_i) eps_F + gamma e_j. The maxima range
/// over the target key set; the randomness encryption is the owner's, so its
/// noise scales with the owner's norms only.
inline double gsw_extend(const RingParams& p, double fresh_eps, uint32_t beta,
                         double key_norm_max, double noise_norm_max,
                         double owner_key_norm, double owner_noise_norm) {
  const double b = static_cast<double>(p.noise_bound);
  const double d = static_cast<double>(p.degree);
  const double rand_eps = gsw_fresh(p, owner_key_norm, owner_noise_norm);
  return fresh_eps + d * b * key_norm_max + d * b * noise_norm_max +
         static_cast<double>(beta) * d * rand_eps;
}

/// GSW product C1 (*) C2 = BitDecomp(C1) C2:
/// BitDecomp(C1) e2 + mu2 e1, with 2*K*beta digit rows.
inline double gsw_mult(const RingParams& p, double eps1, double eps2, double mu2_bound,
                       uint32_t keys, uint32_t beta) {
  const double d = static_cast<double>(p.degree);
  return 2.0 * keys * beta * d * eps2 + d * mu2_bound * eps1;
}

}  // namespace noise
}  // namespace mkthe
