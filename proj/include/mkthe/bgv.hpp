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

#include <array>
#include <cstdint>
#include <vector>

#include "mkthe/noise.hpp"
#include "mkthe/ring.hpp"

namespace mkthe {

using KeyId = uint32_t;

/// A pair (c0, c1) with c0 the message-bearing component: <(c0, c1), (1, -s')>
/// = c0 - c1 s' = mu + t e.
using CtPair = std::array<RingElement, 2>;

/// Plaintext polynomial with coefficients in [0, t).
using Plaintext = std::vector<uint64_t>;

/// Shared uniform elements A_l: 2 * beta_l rows per level, common to every
/// key pair in the system. Aggregating public keys and extending ciphertexts
/// both rely on all parties using these same rows.
struct CommonReference {
  uint64_t seed = 0;
  std::vector<std::vector<RingElement>> rows;  // [level][k], k < 2 * beta_l

  const RingElement& row(int level, uint32_t k) const {
    return rows.at(static_cast<size_t>(level)).at(k);
  }
};

inline CommonReference make_crs(const Ring& ring, uint64_t seed) {
  CommonReference crs;
  crs.seed = seed;
  SeededRng rng(seed);
  crs.rows.resize(static_cast<size_t>(ring.top_level()) + 1);
  for (int l = 0; l <= ring.top_level(); ++l) {
    const uint32_t count = 2 * ring.bit_length(l);
    crs.rows[static_cast<size_t>(l)].reserve(count);
    for (uint32_t k = 0; k < count; ++k)
      crs.rows[static_cast<size_t>(l)].push_back(ring.sample_uniform(rng, l));
  }
  return crs;
}

/// Per-level secret s'_l; the working secret vector is s_l = (1, -s'_l).
/// `norm` bounds |s'_l|_inf: the chi bound for fresh keys, N times it for a
/// joint key assembled from N shares.
struct SecretKey {
  KeyId owner = 0;
  double norm = 1.0;
  std::vector<RingElement> secrets;  // [level] -> s'_l at that level

  const RingElement& secret(int level) const {
    return secrets.at(static_cast<size_t>(level));
  }
};

/// Per-level RLWE rows (b_l[k], A_l[k]) with b = A s' + t e. Row 0 encrypts;
/// the full 2*beta_l rows back the gadget-form encryptions.
struct PublicKey {
  KeyId owner = 0;
  bool shared_a = true;  // rows use the common reference A
  uint64_t crs_seed = 0;
  double key_norm = 1.0;    // bound on |s'|_inf of the underlying secret
  double noise_norm = 1.0;  // bound on the row noise e
  std::vector<std::vector<CtPair>> rows;  // [level][k] -> (b, a)

  const CtPair& row(int level, uint32_t k) const {
    return rows.at(static_cast<size_t>(level)).at(k);
  }
  uint32_t row_count(int level) const {
    return static_cast<uint32_t>(rows.at(static_cast<size_t>(level)).size());
  }
};

/// Ciphertext under an ordered set of keys. Fresh ciphertexts have one
/// sub-vector; extended ones have one sub-vector per key in `keyset`.
/// `noise` is the tracked upper bound on |centered(<c, s>)|_inf.
///
/// `level` names the modulus; `key_level` names the secret generation the
/// ciphertext decrypts under. They coincide except transiently: a modulus
/// switch lowers `level` alone, a key switch lowers `key_level` alone.
struct LeveledCiphertext {
  std::vector<CtPair> subvectors;
  int level = 0;
  int key_level = 0;
  std::vector<KeyId> keyset;
  double noise = 0.0;
  double skey_weight = 0.0;  // rescale slack weight of the decrypting secret

  size_t subvector_count() const { return subvectors.size(); }
};

/// Key-switching hints: for each source component m and each bit index z an
/// RLWE pair encrypting 2^z * source[m] under the target secret, at the
/// operating modulus.
struct KeySwitchKey {
  KeyId owner = 0;
  int operating_level = 0;  // modulus the hints live at
  int target_level = 0;     // generation of the secret the output decrypts under
  std::vector<std::vector<CtPair>> hints;  // [component][bit]
  double hint_noise = 0.0;

  uint32_t components() const { return static_cast<uint32_t>(hints.size()); }
};

// --- key generation -----------------------------------------------------------

inline std::pair<SecretKey, PublicKey> kgen(const Ring& ring, const CommonReference& crs,
                                            KeyId owner, SeededRng& rng) {
  SecretKey sk;
  sk.owner = owner;
  sk.norm = static_cast<double>(ring.params().noise_bound);
  PublicKey pk;
  pk.owner = owner;
  pk.shared_a = true;
  pk.crs_seed = crs.seed;
  pk.key_norm = sk.norm;
  pk.noise_norm = static_cast<double>(ring.params().noise_bound);
  const uint64_t t = ring.plain_modulus();
  sk.secrets.reserve(static_cast<size_t>(ring.top_level()) + 1);
  pk.rows.resize(static_cast<size_t>(ring.top_level()) + 1);
  for (int l = 0; l <= ring.top_level(); ++l) {
    sk.secrets.push_back(ring.sample_error(rng, l));
  }
  for (int l = 0; l <= ring.top_level(); ++l) {
    const uint32_t count = 2 * ring.bit_length(l);
    auto& rows = pk.rows[static_cast<size_t>(l)];
    rows.reserve(count);
    for (uint32_t k = 0; k < count; ++k) {
      const RingElement& a = crs.row(l, k);
      const RingElement e = ring.sample_error(rng, l);
      RingElement b = ring.add(ring.mul(a, sk.secret(l)), ring.mul_scalar(e, t));
      rows.push_back(CtPair{std::move(b), a});
    }
  }
  return {std::move(sk), std::move(pk)};
}

/// The effective secret vector s_l = (1, -s'_l) a sub-vector pairs with.
inline std::vector<RingElement> secret_vector(const Ring& ring, const SecretKey& sk,
                                              int level) {
  return {ring.constant(1, level), ring.negate(sk.secret(level))};
}

// --- plaintext helpers ----------------------------------------------------------

inline Plaintext plain_constant(const Ring& ring, uint64_t value) {
  Plaintext p(ring.degree(), 0);
  p[0] = value % ring.plain_modulus();
  return p;
}

inline Plaintext plain_zero(const Ring& ring) { return Plaintext(ring.degree(), 0); }

inline void check_plaintext(const Ring& ring, const Plaintext& mu) {
  if (mu.size() != ring.degree()) throw ArgumentError("plaintext has wrong length");
  for (uint64_t c : mu)
    if (c >= ring.plain_modulus()) throw ArgumentError("plaintext coefficient out of [0, t)");
}

// --- encryption / decryption -----------------------------------------------------

inline LeveledCiphertext enc(const Ring& ring, const PublicKey& pk, const Plaintext& mu,
                             SeededRng& rng, int level = -1) {
  check_plaintext(ring, mu);
  if (level < 0) level = ring.top_level();
  const uint64_t t = ring.plain_modulus();
  const CtPair& row0 = pk.row(level, 0);
  const RingElement r = ring.sample_binary(rng, level);
  const RingElement e0 = ring.sample_error(rng, level);
  const RingElement e1 = ring.sample_error(rng, level);
  RingElement mu_elem = ring.zero(level);
  for (uint32_t i = 0; i < ring.degree(); ++i) mu_elem.coeffs[i] = mu[i];
  RingElement c0 = ring.add(ring.add(ring.mul(r, row0[0]), ring.mul_scalar(e0, t)), mu_elem);
  RingElement c1 = ring.add(ring.mul(r, row0[1]), ring.mul_scalar(e1, t));
  LeveledCiphertext ct;
  ct.subvectors.push_back(CtPair{std::move(c0), std::move(c1)});
  ct.level = level;
  ct.key_level = level;
  ct.keyset = {pk.owner};
  ct.noise = noise::fresh(ring.params(), pk.key_norm, pk.noise_norm);
  ct.skey_weight = noise::pair_weight(ring.params(), pk.key_norm);
  return ct;
}

/// The generation-`key_level` secret re-represented at the ciphertext's
/// modulus. Key coefficients are chi-small, so the centered lift is exact.
inline RingElement working_secret(const Ring& ring, const SecretKey& sk,
                                  const LeveledCiphertext& ct) {
  const RingElement& sp = sk.secret(ct.key_level);
  return ct.key_level == ct.level ? sp : ring.lift(sp, ct.level);
}

/// Message-inclusive decryption value w = c0 - c1 s' for a single sub-vector.
inline RingElement dec_inner(const Ring& ring, const SecretKey& sk,
                             const LeveledCiphertext& ct) {
  const CtPair& c = ct.subvectors.at(0);
  return ring.sub(c[0], ring.mul(c[1], working_secret(ring, sk, ct)));
}

inline Plaintext dec(const Ring& ring, const SecretKey& sk, const LeveledCiphertext& ct) {
  if (ct.keyset.size() != 1 || ct.keyset[0] != sk.owner)
    throw KeysetMismatchError("ciphertext is not under this key alone");
  if (ct.subvectors.size() != 1) throw KeysetMismatchError("expected a base ciphertext");
  if (ct.noise >= static_cast<double>(ring.modulus(ct.level)) / 2.0)
    throw NoiseOverflowError("tracked noise reached q/2; plaintext would be garbage");
  return ring.residue_mod_t(dec_inner(ring, sk, ct));
}

// --- homomorphic operations --------------------------------------------------------

namespace detail {

inline void check_same_shape(const LeveledCiphertext& a, const LeveledCiphertext& b) {
  if (a.level != b.level || a.key_level != b.key_level)
    throw LevelMismatchError("ciphertext levels differ");
  if (a.keyset != b.keyset) throw KeysetMismatchError("ciphertext key sets differ");
  if (a.subvectors.size() != b.subvectors.size())
    throw KeysetMismatchError("ciphertext dimensions differ");
}

}  // namespace detail

inline LeveledCiphertext eval_add(const Ring& ring, const LeveledCiphertext& a,
                                  const LeveledCiphertext& b) {
  detail::check_same_shape(a, b);
  LeveledCiphertext out = a;
  for (size_t i = 0; i < a.subvectors.size(); ++i) {
    out.subvectors[i][0] = ring.add(a.subvectors[i][0], b.subvectors[i][0]);
    out.subvectors[i][1] = ring.add(a.subvectors[i][1], b.subvectors[i][1]);
  }
  out.noise = a.noise + b.noise;
  return out;
}

inline LeveledCiphertext eval_sub(const Ring& ring, const LeveledCiphertext& a,
                                  const LeveledCiphertext& b) {
  detail::check_same_shape(a, b);
  LeveledCiphertext out = a;
  for (size_t i = 0; i < a.subvectors.size(); ++i) {
    out.subvectors[i][0] = ring.sub(a.subvectors[i][0], b.subvectors[i][0]);
    out.subvectors[i][1] = ring.sub(a.subvectors[i][1], b.subvectors[i][1]);
  }
  out.noise = a.noise + b.noise;
  return out;
}

/// Multiplies by a small signed integer constant.
inline LeveledCiphertext eval_scale(const Ring& ring, const LeveledCiphertext& a,
                                    int64_t factor) {
  LeveledCiphertext out = a;
  const uint64_t q = ring.modulus(a.level);
  const uint64_t f = to_canonical(factor, q);
  for (auto& sv : out.subvectors) {
    sv[0] = ring.mul_scalar(sv[0], f);
    sv[1] = ring.mul_scalar(sv[1], f);
  }
  out.noise = a.noise * static_cast<double>(factor < 0 ? -factor : factor);
  return out;
}

/// Plain modulus switch: every component rescaled one level down.
inline LeveledCiphertext mod_switch(const Ring& ring, const LeveledCiphertext& a) {
  if (a.level == 0) throw ArgumentError("cannot modulus-switch below level 0");
  LeveledCiphertext out = a;
  out.level = a.level - 1;
  for (auto& sv : out.subvectors) {
    sv[0] = ring.rescale(sv[0], a.level, a.level - 1);
    sv[1] = ring.rescale(sv[1], a.level, a.level - 1);
  }
  out.noise = noise::rescale(ring.params(), a.noise, ring.modulus(a.level),
                             ring.modulus(a.level - 1), a.skey_weight);
  return out;
}

/// Tensor of two base ciphertexts: components ordered (c0c0', c0c1', c1c0',
/// c1c1'), matching the tensored secret (1, -s', -s', s'^2).
inline std::vector<RingElement> tensor_base(const Ring& ring, const LeveledCiphertext& a,
                                            const LeveledCiphertext& b) {
  detail::check_same_shape(a, b);
  const CtPair& x = a.subvectors.at(0);
  const CtPair& y = b.subvectors.at(0);
  std::vector<RingElement> out;
  out.reserve(4);
  out.push_back(ring.mul(x[0], y[0]));
  out.push_back(ring.mul(x[0], y[1]));
  out.push_back(ring.mul(x[1], y[0]));
  out.push_back(ring.mul(x[1], y[1]));
  return out;
}

// --- key switching ----------------------------------------------------------------

/// Hints encrypting powers-of-two of each source component under
/// `target_secret`, generated directly from the secrets. `operating_level`
/// fixes the hint modulus; `target_level` names the secret generation the
/// switched ciphertext will decrypt under.
inline KeySwitchKey evalkgen(const Ring& ring, const std::vector<RingElement>& source,
                             const RingElement& target_secret, int operating_level,
                             int target_level, KeyId owner, SeededRng& rng) {
  KeySwitchKey ksk;
  ksk.owner = owner;
  ksk.operating_level = operating_level;
  ksk.target_level = target_level;
  ksk.hint_noise = static_cast<double>(ring.params().noise_bound);
  const uint64_t t = ring.plain_modulus();
  const uint32_t beta = ring.bit_length(operating_level);
  const RingElement s_target = ring.lift(target_secret, operating_level);
  ksk.hints.reserve(source.size());
  for (const RingElement& comp : source) {
    const RingElement comp_here = comp.level == operating_level
                                      ? comp
                                      : ring.lift(comp, operating_level);
    const std::vector<RingElement> powers = ring.powers_of_two(comp_here);
    std::vector<CtPair> row;
    row.reserve(beta);
    for (uint32_t z = 0; z < beta; ++z) {
      const RingElement a = ring.sample_uniform(rng, operating_level);
      const RingElement e = ring.sample_error(rng, operating_level);
      RingElement h0 = ring.add(ring.add(ring.mul(a, s_target), ring.mul_scalar(e, t)),
                                powers[z]);
      row.push_back(CtPair{std::move(h0), a});
    }
    ksk.hints.push_back(std::move(row));
  }
  return ksk;
}

/// c' = sum_m sum_z BitDecomp(c[m])[z] * hint[m][z], a base ciphertext under
/// the target secret at the operating modulus.
inline LeveledCiphertext keyswitch(const Ring& ring, const KeySwitchKey& ksk,
                                   const std::vector<RingElement>& components,
                                   const std::vector<KeyId>& keyset, double noise_in,
                                   double skey_weight) {
  if (components.size() != ksk.hints.size())
    throw ArgumentError("key-switch key does not match the component count");
  const int level = ksk.operating_level;
  const uint32_t beta = ring.bit_length(level);
  // Accumulate in the transform domain: one inverse per output component.
  std::vector<uint64_t> acc0(ring.degree(), 0), acc1(ring.degree(), 0);
  for (size_t m = 0; m < components.size(); ++m) {
    if (components[m].level != level)
      throw LevelMismatchError("component level does not match the key-switch key");
    const std::vector<RingElement> digits = ring.bit_decomp(components[m]);
    for (uint32_t z = 0; z < beta; ++z) {
      const std::vector<uint64_t> d = ring.to_transform(digits[z]);
      ring.transform_mul_acc(acc0, d, ring.to_transform(ksk.hints[m][z][0]), level);
      ring.transform_mul_acc(acc1, d, ring.to_transform(ksk.hints[m][z][1]), level);
    }
  }
  LeveledCiphertext out;
  out.level = level;
  out.key_level = ksk.target_level;
  out.keyset = keyset;
  out.skey_weight = skey_weight;
  out.subvectors.push_back(CtPair{ring.from_transform(std::move(acc0), level),
                                  ring.from_transform(std::move(acc1), level)});
  out.noise = noise_in + noise::key_switch(ring.params(),
                                           static_cast<uint32_t>(components.size()),
                                           beta, ksk.hint_noise);
  return out;
}

/// Tensor, switch back to a base ciphertext under the next level's key, then
/// modulus-switch down one level.
inline LeveledCiphertext eval_mult(const Ring& ring, const LeveledCiphertext& a,
                                   const LeveledCiphertext& b, const KeySwitchKey& ksk) {
  detail::check_same_shape(a, b);
  if (a.subvectors.size() != 1) throw KeysetMismatchError("eval_mult expects base ciphertexts");
  if (a.level == 0) throw ArgumentError("cannot multiply at level 0");
  if (a.level != a.key_level) throw LevelMismatchError("operand modulus and key generation differ");
  if (ksk.operating_level != a.level || ksk.target_level != a.level - 1)
    throw ArgumentError("key-switch key is for a different level");
  const std::vector<RingElement> tensored = tensor_base(ring, a, b);
  const double tensor_noise = noise::poly_product(a.noise, b.noise, ring.degree());
  const LeveledCiphertext switched =
      keyswitch(ring, ksk, tensored, a.keyset, tensor_noise, a.skey_weight);
  return mod_switch(ring, switched);
}

/// Key-switch hints for s_l (x) s_l -> s'_{l-1}, for every level L..1. The
/// key owner generates these from the secret directly.
inline std::vector<KeySwitchKey> make_mult_keys(const Ring& ring, const SecretKey& sk,
                                                SeededRng& rng) {
  std::vector<KeySwitchKey> keys;  // index l-1 holds the key operating at level l
  for (int l = 1; l <= ring.top_level(); ++l) {
    const RingElement& sp = sk.secret(l);
    std::vector<RingElement> source;
    source.reserve(4);
    source.push_back(ring.constant(1, l));
    source.push_back(ring.negate(sp));
    source.push_back(ring.negate(sp));
    source.push_back(ring.mul(sp, sp));
    keys.push_back(evalkgen(ring, source, sk.secret(l - 1), l, l - 1, sk.owner, rng));
  }
  return keys;
}

/// Same-modulus relinearization: tensor then switch straight back to the
/// level's own key, with no modulus switch. Lets several products happen at
/// one level when the noise budget allows.
inline LeveledCiphertext eval_mult_stay(const Ring& ring, const LeveledCiphertext& a,
                                        const LeveledCiphertext& b,
                                        const KeySwitchKey& relin) {
  detail::check_same_shape(a, b);
  if (a.subvectors.size() != 1) throw KeysetMismatchError("eval_mult_stay expects base ciphertexts");
  if (a.level != a.key_level) throw LevelMismatchError("operand modulus and key generation differ");
  if (relin.operating_level != a.level || relin.target_level != a.level)
    throw ArgumentError("relinearization key is for a different level");
  const std::vector<RingElement> tensored = tensor_base(ring, a, b);
  const double tensor_noise = noise::poly_product(a.noise, b.noise, ring.degree());
  return keyswitch(ring, relin, tensored, a.keyset, tensor_noise, a.skey_weight);
}

/// Same-level relinearization keys s_l (x) s_l -> s_l for every level.
inline std::vector<KeySwitchKey> make_relin_keys(const Ring& ring, const SecretKey& sk,
                                                 SeededRng& rng) {
  std::vector<KeySwitchKey> keys;  // index l holds the key for level l
  for (int l = 0; l <= ring.top_level(); ++l) {
    const RingElement& sp = sk.secret(l);
    std::vector<RingElement> source;
    source.reserve(4);
    source.push_back(ring.constant(1, l));
    source.push_back(ring.negate(sp));
    source.push_back(ring.negate(sp));
    source.push_back(ring.mul(sp, sp));
    keys.push_back(evalkgen(ring, source, sp, l, l, sk.owner, rng));
  }
  return keys;
}

/// Hints for the base pair s_l -> s'_{l-1} itself, one per level L..1. These
/// move un-multiplied ciphertexts to the next key generation so they can meet
/// product outputs again.
inline std::vector<KeySwitchKey> make_refresh_keys(const Ring& ring, const SecretKey& sk,
                                                   SeededRng& rng) {
  std::vector<KeySwitchKey> keys;
  for (int l = 1; l <= ring.top_level(); ++l) {
    keys.push_back(evalkgen(ring, secret_vector(ring, sk, l), sk.secret(l - 1), l,
                            l - 1, sk.owner, rng));
  }
  return keys;
}

/// Switches a base ciphertext to the next level's key and modulus without
/// multiplying: keyswitch with the refresh hints, then modulus switch.
inline LeveledCiphertext level_drop(const Ring& ring, const LeveledCiphertext& ct,
                                    const KeySwitchKey& refresh) {
  if (ct.subvectors.size() != 1) throw KeysetMismatchError("level_drop expects a base ciphertext");
  if (ct.level != ct.key_level) throw LevelMismatchError("operand modulus and key generation differ");
  if (refresh.operating_level != ct.level || refresh.target_level != ct.level - 1 ||
      refresh.components() != 2)
    throw ArgumentError("refresh key is for a different level or shape");
  const LeveledCiphertext switched =
      keyswitch(ring, refresh, {ct.subvectors[0][0], ct.subvectors[0][1]}, ct.keyset,
                ct.noise, ct.skey_weight);
  return mod_switch(ring, switched);
}

}  // namespace mkthe
