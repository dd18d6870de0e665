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
#include <string>
#include <vector>

#include "mkthe/mkbgv.hpp"

namespace mkthe {

/// One owner's contribution to decrypting a joint-key sub-vector:
/// rho = c1 * share + t * smudging.
struct PartialDecryption {
  RingElement rho;
  uint32_t owner = 0;        // owner index within the group
  uint64_t ciphertext_id = 0;
};

/// Everything the trusted dealer produces for the model-owner group. The
/// joint secret is the sum of N freshly sampled chi-small shares; the joint
/// public key aggregates the per-share public keys over the shared A rows.
/// The helper and multiplication keys are built directly from the joint
/// secret, which is exactly the dealer shortcut this module implements.
struct JointKeyMaterial {
  uint32_t n_owners = 0;
  PublicKey joint_pk;
  SecretKey joint_sk;  // dealer-side artifact; parties only ever hold shares
  EvalHelper joint_helper;
  std::vector<KeySwitchKey> mult_keys;     // tensored-key switching to the next level
  std::vector<KeySwitchKey> relin_keys;    // tensored-key switching at the same level
  std::vector<KeySwitchKey> refresh_keys;  // base-pair switching for additive wires
  std::vector<SecretKey> shares;           // per owner, chi-small at every level
  std::vector<PublicKey> owner_pks;        // per-share public keys (aggregation inputs)
};

/// Sums the message-bearing components of public keys over the shared A.
/// Only the first components aggregate; the A rows must be identical.
inline PublicKey aggregate_public_keys(const Ring& ring, const std::vector<const PublicKey*>& pks,
                                       KeyId joint_id) {
  if (pks.empty()) throw ArgumentError("no public keys to aggregate");
  PublicKey joint = *pks[0];
  joint.owner = joint_id;
  for (size_t i = 1; i < pks.size(); ++i) {
    const PublicKey& pk = *pks[i];
    if (!pk.shared_a || pk.crs_seed != joint.crs_seed)
      throw ArgumentError("public keys do not share the common reference");
    for (int l = 0; l <= ring.top_level(); ++l) {
      for (uint32_t k = 0; k < joint.row_count(l); ++k) {
        if (pk.row(l, k)[1] != joint.row(l, k)[1])
          throw ArgumentError("public keys disagree on the shared A rows");
        joint.rows[static_cast<size_t>(l)][k][0] =
            ring.add(joint.rows[static_cast<size_t>(l)][k][0], pk.row(l, k)[0]);
      }
    }
    joint.key_norm += pk.key_norm;
    joint.noise_norm += pk.noise_norm;
  }
  return joint;
}

/// Trusted-dealer setup: N chi-small shares are sampled fresh and the joint
/// secret is defined as their sum, so every share stays small and the joint
/// key matches the additive aggregation of the per-share public keys exactly.
inline JointKeyMaterial dealer_keygen(const Ring& ring, const CommonReference& crs,
                                      uint32_t n_owners, KeyId joint_id, SeededRng& rng) {
  if (n_owners < 1) throw ArgumentError("need at least one owner");
  JointKeyMaterial out;
  out.n_owners = n_owners;
  out.shares.reserve(n_owners);
  out.owner_pks.reserve(n_owners);
  for (uint32_t i = 0; i < n_owners; ++i) {
    SeededRng owner_rng = rng.fork("owner-" + std::to_string(i));
    auto [sk_i, pk_i] = kgen(ring, crs, joint_id + 1 + i, owner_rng);
    out.shares.push_back(std::move(sk_i));
    out.owner_pks.push_back(std::move(pk_i));
  }

  out.joint_sk.owner = joint_id;
  out.joint_sk.norm =
      static_cast<double>(n_owners) * static_cast<double>(ring.params().noise_bound);
  out.joint_sk.secrets.reserve(static_cast<size_t>(ring.top_level()) + 1);
  for (int l = 0; l <= ring.top_level(); ++l) {
    RingElement sum = ring.zero(l);
    for (const SecretKey& share : out.shares) sum = ring.add(sum, share.secret(l));
    out.joint_sk.secrets.push_back(std::move(sum));
  }

  std::vector<const PublicKey*> pk_ptrs;
  for (const PublicKey& pk : out.owner_pks) pk_ptrs.push_back(&pk);
  out.joint_pk = aggregate_public_keys(ring, pk_ptrs, joint_id);

  SeededRng material_rng = rng.fork("joint-material");
  out.joint_helper = make_eval_helper(ring, out.joint_sk, out.joint_pk, material_rng);
  out.mult_keys = make_mult_keys(ring, out.joint_sk, material_rng);
  out.relin_keys = make_relin_keys(ring, out.joint_sk, material_rng);
  out.refresh_keys = make_refresh_keys(ring, out.joint_sk, material_rng);
  return out;
}

/// rho_i = c1 * s_i + t * e_i with e_i uniform in [-smudging_bound,
/// smudging_bound]. `key_level` selects the share generation matching the
/// ciphertext being decrypted; c1 is that ciphertext's second joint-key
/// component.
inline PartialDecryption partial_decrypt(const Ring& ring, const SecretKey& share,
                                         uint32_t owner_index, const RingElement& c1,
                                         int key_level, uint64_t ciphertext_id,
                                         SeededRng& rng) {
  const RingElement s = key_level == c1.level
                            ? share.secret(key_level)
                            : ring.lift(share.secret(key_level), c1.level);
  const RingElement smudge =
      ring.sample_centered(rng, c1.level, ring.params().smudging_bound);
  PartialDecryption part;
  part.rho = ring.add(ring.mul(c1, s), ring.mul_scalar(smudge, ring.plain_modulus()));
  part.owner = owner_index;
  part.ciphertext_id = ciphertext_id;
  return part;
}

/// rho = sum_i rho_i. All N owners must contribute exactly once and answer
/// the same ciphertext; fewer shares decrypt nothing.
inline RingElement aggregate_partials(const Ring& ring,
                                      const std::vector<PartialDecryption>& parts,
                                      uint32_t n_owners) {
  if (parts.size() != n_owners)
    throw ProtocolError("decryption needs a partial from every owner");
  for (size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].ciphertext_id != parts[0].ciphertext_id)
      throw ProtocolError("partial decryptions answer different ciphertexts");
    for (size_t j = i + 1; j < parts.size(); ++j)
      if (parts[i].owner == parts[j].owner)
        throw ProtocolError("duplicate partial decryption from one owner");
  }
  RingElement rho = parts[0].rho;
  for (size_t i = 1; i < parts.size(); ++i) rho = ring.add(rho, parts[i].rho);
  return rho;
}

}  // namespace mkthe
