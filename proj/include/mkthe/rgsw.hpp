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

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mkthe/bgv.hpp"
#include "mkthe/noise.hpp"
#include "mkthe/ring.hpp"

namespace mkthe {

/// Gadget-form ciphertext. Fresh form: 2*beta x 2 rows over the owner's key,
/// satisfying C s = t e + mu G s. Extended form over N keys: 2*N*beta x 2*N,
/// block-diagonal copies of C with correction blocks in the owner's block
/// column; the extended gadget matrix stays implicit.
///
/// `noise` bounds the epsilon in C s = t epsilon + mu G s; `plain_bound`
/// bounds |mu|_inf. Both feed the product noise tracking.
struct RgswCiphertext {
  std::vector<std::vector<RingElement>> rows;
  int level = 0;
  std::vector<KeyId> keyset;
  double noise = 0.0;
  double plain_bound = 1.0;

  size_t row_count() const { return rows.size(); }
  size_t col_count() const { return rows.empty() ? 0 : rows[0].size(); }
};

/// RLWE encryptions of (gamma, 2 gamma, ..., 2^{beta-1} gamma) for the
/// randomness gamma of one gadget ciphertext: row z satisfies
/// f0[z] - f1[z] s' = t e + 2^z gamma.
struct RandomnessEncryption {
  std::vector<CtPair> rows;
  int level = 0;
  KeyId owner = 0;
};

/// Gadget row k = 2i + j carries 2^i in column j: used when adding mu * G.
inline void add_gadget_term(const Ring& ring, std::vector<std::vector<RingElement>>& rows,
                            const RingElement& mu, int level, uint32_t beta,
                            uint32_t row_offset = 0, uint32_t col_offset = 0) {
  const uint64_t q = ring.modulus(level);
  for (uint32_t i = 0; i < beta; ++i) {
    const uint64_t factor = (uint64_t(1) << i) % q;
    const RingElement shifted = ring.mul_scalar(mu, factor);
    for (uint32_t j = 0; j < 2; ++j) {
      RingElement& cell = rows[row_offset + 2 * i + j][col_offset + j];
      cell = ring.add(cell, shifted);
    }
  }
}

/// Fresh gadget encryption of a ring element, together with the encryption of
/// the randomness used, which later extensions consume.
inline std::pair<RgswCiphertext, RandomnessEncryption> rgsw_enc(const Ring& ring,
                                                                const PublicKey& pk,
                                                                const RingElement& mu,
                                                                int level, SeededRng& rng) {
  ring.check_level(level);
  if (mu.level != level) throw LevelMismatchError("message level mismatch");
  const uint32_t beta = ring.bit_length(level);
  const uint64_t t = ring.plain_modulus();
  const RingElement gamma = ring.sample_error(rng, level);

  RgswCiphertext ct;
  ct.level = level;
  ct.keyset = {pk.owner};
  ct.noise = noise::gsw_fresh(ring.params(), pk.key_norm, pk.noise_norm);
  const uint64_t mu_norm = ring.inf_norm_centered(mu);
  ct.plain_bound = mu_norm > 0 ? static_cast<double>(mu_norm) : 1.0;
  ct.rows.assign(2 * beta, std::vector<RingElement>(2, ring.zero(level)));
  for (uint32_t k = 0; k < 2 * beta; ++k) {
    const CtPair& row = pk.row(level, k);
    const RingElement e0 = ring.sample_error(rng, level);
    const RingElement e1 = ring.sample_error(rng, level);
    ct.rows[k][0] = ring.add(ring.mul(gamma, row[0]), ring.mul_scalar(e0, t));
    ct.rows[k][1] = ring.add(ring.mul(gamma, row[1]), ring.mul_scalar(e1, t));
  }
  add_gadget_term(ring, ct.rows, mu, level, beta);

  RandomnessEncryption rand_enc;
  rand_enc.level = level;
  rand_enc.owner = pk.owner;
  rand_enc.rows.reserve(beta);
  RingElement power = gamma;
  for (uint32_t z = 0; z < beta; ++z) {
    const CtPair& row = pk.row(level, z);
    const RingElement gp = ring.sample_error(rng, level);
    const RingElement e0 = ring.sample_error(rng, level);
    const RingElement e1 = ring.sample_error(rng, level);
    RingElement f0 = ring.add(ring.add(ring.mul(row[0], gp), ring.mul_scalar(e0, t)), power);
    RingElement f1 = ring.add(ring.mul(row[1], gp), ring.mul_scalar(e1, t));
    rand_enc.rows.push_back(CtPair{std::move(f0), std::move(f1)});
    power = ring.add(power, power);
  }
  return {std::move(ct), std::move(rand_enc)};
}

/// Extends a fresh gadget ciphertext to an ordered key set containing its
/// owner. Deterministic: the correction block for key j is
/// BitDecomp(b_j - b_owner) applied to the randomness encryption, which is
/// exactly what makes the concatenated-secret invariant hold under the
/// shared-A public keys.
inline RgswCiphertext rgsw_extend(const Ring& ring, const RgswCiphertext& ct,
                                  const RandomnessEncryption& rand_enc,
                                  const std::vector<const PublicKey*>& pks) {
  if (ct.keyset.size() != 1)
    throw ArgumentError("only fresh gadget ciphertexts can be extended");
  const int level = ct.level;
  const uint32_t beta = ring.bit_length(level);
  size_t owner_pos = pks.size();
  for (size_t j = 0; j < pks.size(); ++j)
    if (pks[j]->owner == ct.keyset[0]) owner_pos = j;
  if (owner_pos == pks.size())
    throw ArgumentError("the ciphertext owner's key is not in the target set");

  const size_t n = pks.size();
  RgswCiphertext out;
  out.level = level;
  out.keyset.reserve(n);
  for (const PublicKey* pk : pks) out.keyset.push_back(pk->owner);
  double key_norm = 0.0, noise_norm = 0.0;
  for (const PublicKey* pk : pks) {
    key_norm = std::max(key_norm, pk->key_norm);
    noise_norm = std::max(noise_norm, pk->noise_norm);
  }
  out.noise = noise::gsw_extend(ring.params(), ct.noise, beta, key_norm, noise_norm,
                                pks[owner_pos]->key_norm, pks[owner_pos]->noise_norm);
  out.plain_bound = ct.plain_bound;
  out.rows.assign(2 * beta * n, std::vector<RingElement>(2 * n, ring.zero(level)));

  for (size_t j = 0; j < n; ++j)
    for (uint32_t k = 0; k < 2 * beta; ++k)
      for (uint32_t c = 0; c < 2; ++c)
        out.rows[2 * beta * j + k][2 * j + c] = ct.rows[k][c];

  // Pre-transform the randomness-encryption rows once.
  std::vector<std::array<std::vector<uint64_t>, 2>> ft;
  ft.reserve(beta);
  for (uint32_t z = 0; z < beta; ++z)
    ft.push_back({ring.to_transform(rand_enc.rows[z][0]), ring.to_transform(rand_enc.rows[z][1])});

  for (size_t j = 0; j < n; ++j) {
    if (j == owner_pos) continue;
    for (uint32_t k = 0; k < 2 * beta; ++k) {
      const RingElement diff =
          ring.sub(pks[j]->row(level, k)[0], pks[owner_pos]->row(level, k)[0]);
      const std::vector<RingElement> digits = ring.bit_decomp(diff);
      std::vector<uint64_t> acc0(ring.degree(), 0), acc1(ring.degree(), 0);
      for (uint32_t z = 0; z < beta; ++z) {
        const std::vector<uint64_t> dt = ring.to_transform(digits[z]);
        ring.transform_mul_acc(acc0, dt, ft[z][0], level);
        ring.transform_mul_acc(acc1, dt, ft[z][1], level);
      }
      auto& row = out.rows[2 * beta * j + k];
      const size_t col = 2 * owner_pos;
      row[col] = ring.add(row[col], ring.from_transform(std::move(acc0), level));
      row[col + 1] = ring.add(row[col + 1], ring.from_transform(std::move(acc1), level));
    }
  }
  return out;
}

/// Gadget product: BitDecomp(C1) * C2, encrypting mu1 * mu2 under the same
/// key set. Digit index (block j, power z, column parity p) addresses C2 row
/// 2*beta*j + 2*z + p, mirroring the implicit extended gadget layout.
inline RgswCiphertext rgsw_mult(const Ring& ring, const RgswCiphertext& c1,
                                const RgswCiphertext& c2) {
  if (c1.level != c2.level) throw LevelMismatchError("gadget product levels differ");
  if (c1.keyset != c2.keyset) throw KeysetMismatchError("gadget product key sets differ");
  if (c1.row_count() != c2.row_count() || c1.col_count() != c2.col_count())
    throw ArgumentError("gadget product shapes differ");
  const int level = c1.level;
  const uint32_t beta = ring.bit_length(level);
  const size_t cols = c1.col_count();
  const size_t rows = c1.row_count();
  const size_t n_keys = cols / 2;

  std::vector<std::vector<std::vector<uint64_t>>> c2t(rows);
  for (size_t r = 0; r < rows; ++r) {
    c2t[r].reserve(cols);
    for (size_t c = 0; c < cols; ++c) c2t[r].push_back(ring.to_transform(c2.rows[r][c]));
  }

  RgswCiphertext out;
  out.level = level;
  out.keyset = c1.keyset;
  out.noise = noise::gsw_mult(ring.params(), c1.noise, c2.noise, c2.plain_bound,
                              static_cast<uint32_t>(n_keys), beta);
  out.plain_bound = noise::poly_product(c1.plain_bound, c2.plain_bound, ring.degree());
  out.rows.assign(rows, std::vector<RingElement>(cols, ring.zero(level)));

  for (size_t r1 = 0; r1 < rows; ++r1) {
    std::vector<std::vector<uint64_t>> acc(cols, std::vector<uint64_t>(ring.degree(), 0));
    for (size_t u = 0; u < cols; ++u) {
      const std::vector<RingElement> digits = ring.bit_decomp(c1.rows[r1][u]);
      const size_t j = u / 2, p = u % 2;
      for (uint32_t z = 0; z < beta; ++z) {
        const size_t r2 = 2 * beta * j + 2 * z + p;
        const std::vector<uint64_t> dt = ring.to_transform(digits[z]);
        for (size_t c = 0; c < cols; ++c) ring.transform_mul_acc(acc[c], dt, c2t[r2][c], level);
      }
    }
    for (size_t c = 0; c < cols; ++c)
      out.rows[r1][c] = ring.from_transform(std::move(acc[c]), level);
  }
  return out;
}

}  // namespace mkthe
