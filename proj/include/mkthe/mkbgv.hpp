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
#include <thread>
#include <vector>

#include "mkthe/bgv.hpp"
#include "mkthe/rgsw.hpp"

namespace mkthe {

/// Per-party helper material for building evaluation keys on extended
/// ciphertexts. For each level l in [1, L], gadget encryptions of the
/// powers-of-two and of the bit decomposition of the level-l secret pair
/// (1, -s'_l), encrypted at modulus l-1 under the party's level-(l-1) key,
/// each with the randomness encryption its extension needs.
struct EvalHelper {
  KeyId owner = 0;
  struct LevelMaterial {
    std::vector<RgswCiphertext> power_encs;           // 2 * beta_{l-1} entries
    std::vector<RandomnessEncryption> power_rand;
    std::vector<RgswCiphertext> bit_encs;             // 2 * beta_{l-1} entries
    std::vector<RandomnessEncryption> bit_rand;
  };
  std::vector<LevelMaterial> levels;  // index l-1 holds level-l material

  const LevelMaterial& level(int l) const { return levels.at(static_cast<size_t>(l) - 1); }
};

/// Gadget encryptions of the key material for every level. The owner of the
/// secret generates this once; it is public material.
inline EvalHelper make_eval_helper(const Ring& ring, const SecretKey& sk,
                                   const PublicKey& pk, SeededRng& rng) {
  EvalHelper helper;
  helper.owner = sk.owner;
  helper.levels.resize(static_cast<size_t>(ring.top_level()));
  for (int l = 1; l <= ring.top_level(); ++l) {
    const int enc_level = l - 1;
    const uint32_t beta = ring.bit_length(enc_level);
    EvalHelper::LevelMaterial& mat = helper.levels[static_cast<size_t>(l) - 1];
    // The level-l secret pair re-represented at the encryption modulus.
    const std::vector<RingElement> pair = {
        ring.constant(1, enc_level),
        ring.negate(ring.lift(sk.secret(l), enc_level))};
    mat.power_encs.reserve(2 * beta);
    mat.power_rand.reserve(2 * beta);
    mat.bit_encs.reserve(2 * beta);
    mat.bit_rand.reserve(2 * beta);
    std::vector<std::vector<RingElement>> digits = {ring.bit_decomp(pair[0]),
                                                    ring.bit_decomp(pair[1])};
    const uint64_t q = ring.modulus(enc_level);
    for (uint32_t i = 0; i < 2 * beta; ++i) {
      const uint32_t power = i / 2, component = i % 2;
      const uint64_t factor = (uint64_t(1) << power) % q;
      const RingElement value = ring.mul_scalar(pair[component], factor);
      auto [power_ct, power_f] = rgsw_enc(ring, pk, value, enc_level, rng);
      mat.power_encs.push_back(std::move(power_ct));
      mat.power_rand.push_back(std::move(power_f));
      auto [bit_ct, bit_f] = rgsw_enc(ring, pk, digits[component][power], enc_level, rng);
      mat.bit_encs.push_back(std::move(bit_ct));
      mat.bit_rand.push_back(std::move(bit_f));
    }
  }
  return helper;
}

// --- ciphertext extension ---------------------------------------------------------

/// Places each sub-vector at its key's position in the target set and fills
/// the rest with zero pairs: a fresh client bit becomes (c, 0), a fresh
/// joint-key bit becomes (0, c).
inline LeveledCiphertext extend(const Ring& ring, const LeveledCiphertext& ct,
                                const std::vector<const PublicKey*>& target) {
  LeveledCiphertext out;
  out.level = ct.level;
  out.key_level = ct.key_level;
  out.noise = ct.noise;
  out.keyset.reserve(target.size());
  out.skey_weight = 0.0;
  for (const PublicKey* pk : target) {
    out.keyset.push_back(pk->owner);
    out.skey_weight += noise::pair_weight(ring.params(), pk->key_norm);
  }
  out.subvectors.assign(target.size(), CtPair{ring.zero(ct.level), ring.zero(ct.level)});
  for (size_t src = 0; src < ct.keyset.size(); ++src) {
    const auto it = std::find(out.keyset.begin(), out.keyset.end(), ct.keyset[src]);
    if (it == out.keyset.end())
      throw KeysetMismatchError("ciphertext key is not in the target key set");
    out.subvectors[static_cast<size_t>(it - out.keyset.begin())] = ct.subvectors[src];
  }
  return out;
}

// --- extended evaluation keys ------------------------------------------------------

/// Switching hints for tensors of extended ciphertexts: for component
/// m = u * 2K + v and bit z, an extended row encrypting
/// 2^z * s-bar[u] * s-bar[v] under the concatenated next-level key. Hints
/// live at the next level's modulus: an extended product is rescaled first,
/// then switched.
struct ExtendedEvalKey {
  int source_level = 0;     // tensors of this level's ciphertexts
  int operating_level = 0;  // = source_level - 1, the hint modulus
  std::vector<KeyId> keyset;
  std::vector<std::vector<std::vector<RingElement>>> hints;  // [m][z][column]
  // Hints for the un-tensored components s-bar[u] (refresh path): same row
  // shape, 2K slots instead of (2K)^2.
  std::vector<std::vector<std::vector<RingElement>>> refresh_hints;
  // Per-slot hint noise bounds: slots differ because client-side material is
  // quieter than joint-key material.
  std::vector<double> hint_noises;
  std::vector<double> refresh_noises;

  // Transform-domain copies of the hints, built once for the switching loops.
  std::vector<std::vector<std::vector<std::vector<uint64_t>>>> hints_t;
  std::vector<std::vector<std::vector<std::vector<uint64_t>>>> refresh_hints_t;
};

namespace detail {

inline void transform_hint_block(
    const Ring& ring, const std::vector<std::vector<std::vector<RingElement>>>& hints,
    std::vector<std::vector<std::vector<std::vector<uint64_t>>>>& out) {
  out.resize(hints.size());
  for (size_t m = 0; m < hints.size(); ++m) {
    out[m].resize(hints[m].size());
    for (size_t z = 0; z < hints[m].size(); ++z) {
      out[m][z].reserve(hints[m][z].size());
      for (const RingElement& h : hints[m][z]) out[m][z].push_back(ring.to_transform(h));
    }
  }
}

inline void transform_hints(const Ring& ring, ExtendedEvalKey& key) {
  transform_hint_block(ring, key.hints, key.hints_t);
  transform_hint_block(ring, key.refresh_hints, key.refresh_hints_t);
}

}  // namespace detail

/// Builds the extended evaluation key from the parties' public helper
/// material alone: the raw secret-component gadget encryptions are extended
/// to the full key set and multiplied pairwise, and the needed rows are read
/// off the products. `threads` parallelizes the gadget products.
inline ExtendedEvalKey extended_evalkgen(const Ring& ring,
                                         const std::vector<const PublicKey*>& pks,
                                         const std::vector<const EvalHelper*>& helpers,
                                         int source_level, unsigned threads = 1) {
  if (pks.size() != helpers.size() || pks.empty())
    throw ArgumentError("each key needs its helper");
  for (size_t a = 0; a < pks.size(); ++a)
    if (helpers[a] == nullptr || helpers[a]->owner != pks[a]->owner)
      throw ArgumentError("missing or mismatched helper");
  if (source_level < 1 || source_level > ring.top_level())
    throw ArgumentError("no helper material for this level");

  const int enc_level = source_level - 1;
  const uint32_t beta = ring.bit_length(enc_level);
  const size_t n_keys = pks.size();
  const size_t width = 2 * n_keys;

  ExtendedEvalKey key;
  key.source_level = source_level;
  key.operating_level = enc_level;
  for (const PublicKey* pk : pks) key.keyset.push_back(pk->owner);

  // Extend each party's raw component encryptions (value 1 and value -s').
  std::vector<RgswCiphertext> unit_enc, secret_enc;
  unit_enc.reserve(n_keys);
  secret_enc.reserve(n_keys);
  for (size_t a = 0; a < n_keys; ++a) {
    const EvalHelper::LevelMaterial& mat = helpers[a]->level(source_level);
    unit_enc.push_back(rgsw_extend(ring, mat.power_encs[0], mat.power_rand[0], pks));
    secret_enc.push_back(rgsw_extend(ring, mat.power_encs[1], mat.power_rand[1], pks));
  }

  // Pairwise products of the secret components; (a, b) reused for (b, a).
  // The quieter operand goes on the right, where the product noise picks up
  // the 2K*beta*degree factor.
  std::vector<std::vector<RgswCiphertext>> products(n_keys,
                                                    std::vector<RgswCiphertext>(n_keys));
  std::vector<std::pair<size_t, size_t>> todo;
  for (size_t a = 0; a < n_keys; ++a)
    for (size_t b = a; b < n_keys; ++b) todo.emplace_back(a, b);
  auto worker = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const auto [a, b] = todo[i];
      const bool a_quieter = secret_enc[a].noise <= secret_enc[b].noise;
      const RgswCiphertext& left = a_quieter ? secret_enc[b] : secret_enc[a];
      const RgswCiphertext& right = a_quieter ? secret_enc[a] : secret_enc[b];
      products[a][b] = rgsw_mult(ring, left, right);
    }
  };
  if (threads <= 1 || todo.size() <= 1) {
    worker(0, todo.size());
  } else {
    const size_t used = std::min<size_t>(threads, todo.size());
    std::vector<std::thread> pool;
    for (size_t w = 0; w < used; ++w) {
      const size_t begin = w * todo.size() / used;
      const size_t end = (w + 1) * todo.size() / used;
      pool.emplace_back(worker, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }

  // Refresh hints come straight off the extended component encryptions.
  key.refresh_hints.assign(width, {});
  key.refresh_noises.assign(width, 0.0);
  for (size_t u = 0; u < width; ++u) {
    const RgswCiphertext& source = (u % 2 == 0) ? unit_enc[u / 2] : secret_enc[u / 2];
    key.refresh_noises[u] = source.noise;
    auto& slot = key.refresh_hints[u];
    slot.reserve(beta);
    for (uint32_t z = 0; z < beta; ++z) slot.push_back(source.rows[2 * z]);
  }

  key.hints.assign(width * width, {});
  key.hint_noises.assign(width * width, 0.0);
  for (size_t u = 0; u < width; ++u) {
    for (size_t v = 0; v < width; ++v) {
      const RgswCiphertext* source = nullptr;
      if (u % 2 == 0 && v % 2 == 0) {
        source = &unit_enc[0];
      } else if (u % 2 == 0) {
        source = &secret_enc[v / 2];
      } else if (v % 2 == 0) {
        source = &secret_enc[u / 2];
      } else {
        const size_t a = std::min(u / 2, v / 2), b = std::max(u / 2, v / 2);
        source = &products[a][b];
      }
      key.hint_noises[u * width + v] = source->noise;
      auto& slot = key.hints[u * width + v];
      slot.reserve(beta);
      // Row 2z of the first block encrypts 2^z * mu against s-bar[0] = 1.
      for (uint32_t z = 0; z < beta; ++z) slot.push_back(source->rows[2 * z]);
    }
  }
  detail::transform_hints(ring, key);
  return key;
}

/// Diagnostic oracle: builds the same key shape directly from the secrets.
/// Used to cross-check the helper-built key, never by the protocol flow.
inline ExtendedEvalKey dealer_evalkgen(const Ring& ring,
                                       const std::vector<const SecretKey*>& sks,
                                       const std::vector<KeyId>& keyset, int source_level,
                                       SeededRng& rng) {
  if (source_level < 1 || source_level > ring.top_level())
    throw ArgumentError("invalid level");
  const int enc_level = source_level - 1;
  const uint32_t beta = ring.bit_length(enc_level);
  const size_t n_keys = sks.size();
  const size_t width = 2 * n_keys;
  const uint64_t t = ring.plain_modulus();

  std::vector<RingElement> source_vec;  // s-bar at the source level, lifted down
  for (const SecretKey* sk : sks) {
    source_vec.push_back(ring.constant(1, enc_level));
    source_vec.push_back(ring.negate(ring.lift(sk->secret(source_level), enc_level)));
  }
  std::vector<RingElement> target_vec;  // s'-bar entries of the target key
  for (const SecretKey* sk : sks) target_vec.push_back(sk->secret(enc_level));

  ExtendedEvalKey key;
  key.source_level = source_level;
  key.operating_level = enc_level;
  key.keyset = keyset;
  const double direct_noise = static_cast<double>(ring.params().noise_bound);
  key.hint_noises.assign(width * width, direct_noise);
  key.refresh_noises.assign(width, direct_noise);

  const auto encrypt_powers = [&](const RingElement& value,
                                  std::vector<std::vector<RingElement>>& slot) {
    const std::vector<RingElement> powers = ring.powers_of_two(value);
    slot.reserve(beta);
    for (uint32_t z = 0; z < beta; ++z) {
      std::vector<RingElement> row(width, ring.zero(enc_level));
      RingElement h0 =
          ring.add(ring.mul_scalar(ring.sample_error(rng, enc_level), t), powers[z]);
      for (size_t b = 0; b < n_keys; ++b) {
        const RingElement a = ring.sample_uniform(rng, enc_level);
        h0 = ring.add(h0, ring.mul(a, target_vec[b]));
        row[2 * b + 1] = a;
      }
      row[0] = std::move(h0);
      slot.push_back(std::move(row));
    }
  };

  key.hints.assign(width * width, {});
  for (size_t u = 0; u < width; ++u)
    for (size_t v = 0; v < width; ++v)
      encrypt_powers(ring.mul(source_vec[u], source_vec[v]), key.hints[u * width + v]);
  key.refresh_hints.assign(width, {});
  for (size_t u = 0; u < width; ++u) encrypt_powers(source_vec[u], key.refresh_hints[u]);
  detail::transform_hints(ring, key);
  return key;
}

// --- homomorphic evaluation on extended ciphertexts ---------------------------------

inline LeveledCiphertext eval_add_ext(const Ring& ring, const LeveledCiphertext& a,
                                      const LeveledCiphertext& b) {
  return eval_add(ring, a, b);
}

inline LeveledCiphertext eval_sub_ext(const Ring& ring, const LeveledCiphertext& a,
                                      const LeveledCiphertext& b) {
  return eval_sub(ring, a, b);
}

inline LeveledCiphertext mod_switch_ext(const Ring& ring, const LeveledCiphertext& a) {
  return mod_switch(ring, a);
}

/// Moves an extended ciphertext to the next level's concatenated key and
/// modulus without multiplying: rescale each component, then switch with the
/// key's refresh hints.
inline LeveledCiphertext level_drop_ext(const Ring& ring, const LeveledCiphertext& a,
                                        const ExtendedEvalKey& key) {
  if (a.level == 0) throw ArgumentError("cannot drop below level 0");
  if (a.level != a.key_level) throw LevelMismatchError("operand modulus and key generation differ");
  if (a.keyset != key.keyset) throw KeysetMismatchError("evaluation key is for a different key set");
  if (a.level != key.source_level) throw ArgumentError("evaluation key is for a different level");
  const size_t width = 2 * a.keyset.size();
  const int enc_level = key.operating_level;
  const uint32_t beta = ring.bit_length(enc_level);

  const double rescaled_noise = noise::rescale(
      ring.params(), a.noise, ring.modulus(a.level), ring.modulus(enc_level), a.skey_weight);

  const auto is_zero = [](const RingElement& x) {
    for (uint64_t c : x.coeffs)
      if (c != 0) return false;
    return true;
  };

  double switch_noise = 0.0;
  std::vector<std::vector<uint64_t>> acc(width, std::vector<uint64_t>(ring.degree(), 0));
  for (size_t u = 0; u < width; ++u) {
    const RingElement& comp = a.subvectors[u / 2][u % 2];
    if (is_zero(comp)) continue;
    const RingElement dropped = ring.rescale(comp, a.level, enc_level);
    const std::vector<RingElement> digits = ring.bit_decomp(dropped);
    for (uint32_t z = 0; z < beta; ++z) {
      const std::vector<uint64_t> dt = ring.to_transform(digits[z]);
      for (size_t c = 0; c < width; ++c)
        ring.transform_mul_acc(acc[c], dt, key.refresh_hints_t[u][z][c], enc_level);
    }
    switch_noise += noise::key_switch(ring.params(), 1, beta, key.refresh_noises[u]);
  }

  LeveledCiphertext out;
  out.level = enc_level;
  out.key_level = enc_level;
  out.keyset = a.keyset;
  out.skey_weight = a.skey_weight;
  out.subvectors.reserve(a.keyset.size());
  for (size_t p = 0; p < a.keyset.size(); ++p)
    out.subvectors.push_back(CtPair{ring.from_transform(std::move(acc[2 * p]), enc_level),
                                    ring.from_transform(std::move(acc[2 * p + 1]), enc_level)});
  out.noise = rescaled_noise + switch_noise;
  return out;
}

/// Tensor product of two extended ciphertexts, rescaled to the next modulus
/// and switched back to one sub-vector per key with the extended evaluation
/// key. Output level drops by one.
inline LeveledCiphertext eval_mult_ext(const Ring& ring, const LeveledCiphertext& a,
                                       const LeveledCiphertext& b,
                                       const ExtendedEvalKey& key) {
  detail::check_same_shape(a, b);
  if (a.level == 0) throw ArgumentError("cannot multiply at level 0");
  if (a.level != a.key_level) throw LevelMismatchError("operand modulus and key generation differ");
  if (a.keyset != key.keyset) throw KeysetMismatchError("evaluation key is for a different key set");
  if (a.level != key.source_level) throw ArgumentError("evaluation key is for a different level");
  const size_t width = 2 * a.keyset.size();
  const int enc_level = key.operating_level;
  const uint32_t beta = ring.bit_length(enc_level);

  std::vector<const RingElement*> flat_a, flat_b;
  for (const CtPair& sv : a.subvectors) {
    flat_a.push_back(&sv[0]);
    flat_a.push_back(&sv[1]);
  }
  for (const CtPair& sv : b.subvectors) {
    flat_b.push_back(&sv[0]);
    flat_b.push_back(&sv[1]);
  }

  const double tensor_noise = noise::poly_product(a.noise, b.noise, ring.degree());
  const double tensor_weight = a.skey_weight * b.skey_weight;
  const double rescaled_noise =
      noise::rescale(ring.params(), tensor_noise, ring.modulus(a.level),
                     ring.modulus(enc_level), tensor_weight);

  const auto is_zero = [](const RingElement& x) {
    for (uint64_t c : x.coeffs)
      if (c != 0) return false;
    return true;
  };

  // Zero tensor components contribute nothing: skip them and charge only the
  // slots actually touched.
  double switch_noise = 0.0;
  std::vector<std::vector<uint64_t>> acc(width,
                                         std::vector<uint64_t>(ring.degree(), 0));
  for (size_t u = 0; u < width; ++u) {
    if (is_zero(*flat_a[u])) continue;
    for (size_t v = 0; v < width; ++v) {
      if (is_zero(*flat_b[v])) continue;
      const RingElement prod = ring.mul(*flat_a[u], *flat_b[v]);
      const RingElement dropped = ring.rescale(prod, a.level, enc_level);
      const std::vector<RingElement> digits = ring.bit_decomp(dropped);
      const auto& hint_row = key.hints_t[u * width + v];
      for (uint32_t z = 0; z < beta; ++z) {
        const std::vector<uint64_t> dt = ring.to_transform(digits[z]);
        for (size_t c = 0; c < width; ++c)
          ring.transform_mul_acc(acc[c], dt, hint_row[z][c], enc_level);
      }
      switch_noise +=
          noise::key_switch(ring.params(), 1, beta, key.hint_noises[u * width + v]);
    }
  }

  LeveledCiphertext out;
  out.level = enc_level;
  out.key_level = enc_level;
  out.keyset = a.keyset;
  out.skey_weight = a.skey_weight;
  out.subvectors.reserve(a.keyset.size());
  for (size_t p = 0; p < a.keyset.size(); ++p)
    out.subvectors.push_back(CtPair{ring.from_transform(std::move(acc[2 * p]), enc_level),
                                    ring.from_transform(std::move(acc[2 * p + 1]), enc_level)});
  out.noise = rescaled_noise + switch_noise;
  return out;
}

/// Joint decryption oracle: every sub-vector paired with its key's secret,
/// where a key's secret may be the sum of several shares. The production
/// path is the protocol's partial-decryption flow; this exists to cross-check
/// it in tests and reports.
inline Plaintext dec_joint(const Ring& ring, const LeveledCiphertext& ct,
                           const std::vector<std::vector<const SecretKey*>>& key_groups) {
  if (key_groups.size() != ct.subvectors.size())
    throw KeysetMismatchError("need one secret group per sub-vector");
  if (ct.noise >= static_cast<double>(ring.modulus(ct.level)) / 2.0)
    throw NoiseOverflowError("tracked noise reached q/2; plaintext would be garbage");
  RingElement w = ring.zero(ct.level);
  for (size_t p = 0; p < key_groups.size(); ++p) {
    RingElement secret = ring.zero(ct.key_level);
    for (const SecretKey* sk : key_groups[p])
      secret = ring.add(secret, sk->secret(ct.key_level));
    const RingElement lifted =
        ct.key_level == ct.level ? secret : ring.lift(secret, ct.level);
    w = ring.add(w, ring.sub(ct.subvectors[p][0], ring.mul(ct.subvectors[p][1], lifted)));
  }
  return ring.residue_mod_t(w);
}

}  // namespace mkthe
