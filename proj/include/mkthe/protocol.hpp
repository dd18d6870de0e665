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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mkthe/presets.hpp"
#include "mkthe/serialize.hpp"

namespace mkthe {

/// One-node decision tree: compares the client bit x against the threshold
/// bit and outputs label_a when they differ, label_b otherwise.
struct DecisionStump {
  uint64_t threshold_bit = 0;  // y
  uint64_t label_a = 0;        // A
  uint64_t label_b = 0;        // B
  uint32_t owner = 0;

  bool operator==(const DecisionStump&) const = default;

  void validate() const {
    if (threshold_bit > 1 || label_a > 1 || label_b > 1)
      throw ArgumentError("stump values must be bits");
  }
};

/// Plaintext reference: the stump output, the forest tally, and the majority
/// with ties breaking to the negative label side.
inline uint64_t stump_oracle(const DecisionStump& s, uint64_t x) {
  return x != s.threshold_bit ? s.label_a : s.label_b;
}

struct ForestOutcome {
  uint64_t tally = 0;
  uint64_t majority = 0;
};

inline ForestOutcome forest_oracle(const std::vector<DecisionStump>& stumps, uint64_t x) {
  ForestOutcome out;
  for (const DecisionStump& s : stumps) out.tally += stump_oracle(s, x);
  out.majority = 2 * out.tally > stumps.size() ? 1 : 0;
  return out;
}

/// The encrypted stump selection, shared by the in-process simulator and the
/// file-based CLI phases. At t = 2 it is the textbook form
/// b = x + y, v = b A + (1 - b) B on extended ciphertexts. At larger t the
/// same selection is evaluated as v = g + x h with g = B + y(A - B) and
/// h = (A - B) - 2 y(A - B): both are built under the joint key alone with a
/// same-level relinearization, so the cross-key work is one extended
/// multiplication against the still-fresh client input.
inline LeveledCiphertext eval_stump_circuit(
    const Ring& ring, const LeveledCiphertext& y_base, const LeveledCiphertext& a_base,
    const LeveledCiphertext& b_base, const LeveledCiphertext& one_base,
    const LeveledCiphertext& ext_x, const std::vector<const PublicKey*>& pair,
    const KeySwitchKey* joint_relin, const ExtendedEvalKey& key_top) {
  if (ring.plain_modulus() == 2) {
    const LeveledCiphertext b =
        eval_add_ext(ring, ext_x, extend(ring, y_base, pair));
    const LeveledCiphertext picked_a =
        eval_mult_ext(ring, b, extend(ring, a_base, pair), key_top);
    const LeveledCiphertext not_b = eval_sub_ext(ring, extend(ring, one_base, pair), b);
    const LeveledCiphertext picked_b =
        eval_mult_ext(ring, not_b, extend(ring, b_base, pair), key_top);
    return eval_add_ext(ring, picked_a, picked_b);
  }
  if (joint_relin == nullptr)
    throw ArgumentError("the tally-modulus circuit needs the joint relinearization key");
  const LeveledCiphertext diff = eval_sub(ring, a_base, b_base);
  const LeveledCiphertext m = eval_mult_stay(ring, y_base, diff, *joint_relin);
  const LeveledCiphertext g = eval_add(ring, b_base, m);
  const LeveledCiphertext h = eval_sub(ring, diff, eval_scale(ring, m, 2));
  const LeveledCiphertext picked =
      eval_mult_ext(ring, ext_x, extend(ring, h, pair), key_top);
  const LeveledCiphertext ext_g = level_drop_ext(ring, extend(ring, g, pair), key_top);
  return eval_add_ext(ring, ext_g, picked);
}

// --- transcript ---------------------------------------------------------------------

enum class Phase : uint8_t { setup = 0, encrypt = 1, evaluate = 2, decrypt = 3 };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::setup: return "setup";
    case Phase::encrypt: return "encrypt";
    case Phase::evaluate: return "evaluate";
    case Phase::decrypt: return "decrypt";
  }
  return "?";
}

struct ProtocolMessage {
  uint64_t seq = 0;
  std::string sender;
  std::string receiver;
  Phase phase = Phase::setup;
  std::string payload_type;
  uint64_t payload_bytes = 0;
};

/// Append-only ordered message log with strictly increasing sequence numbers.
/// When `dump_dir` is set, each recorded payload is also serialized to
/// <dump_dir>/payload_<seq>.bin.
class Transcript {
 public:
  using DumpFn = std::function<void(const std::string& path)>;

  std::string dump_dir;

  void record(std::string sender, std::string receiver, Phase phase,
              std::string payload_type, uint64_t payload_bytes,
              const DumpFn& dump = nullptr) {
    ProtocolMessage msg;
    msg.seq = next_seq_++;
    msg.sender = std::move(sender);
    msg.receiver = std::move(receiver);
    msg.phase = phase;
    msg.payload_type = std::move(payload_type);
    msg.payload_bytes = payload_bytes;
    if (!dump_dir.empty() && dump)
      dump(dump_dir + "/payload_" + std::to_string(msg.seq) + ".bin");
    messages_.push_back(std::move(msg));
  }

  const std::vector<ProtocolMessage>& messages() const { return messages_; }

  size_t count(Phase phase) const {
    size_t n = 0;
    for (const ProtocolMessage& m : messages_)
      if (m.phase == phase) ++n;
    return n;
  }

  /// One line per message: seq sender receiver phase payload-type bytes.
  std::string export_lines() const {
    std::ostringstream out;
    for (const ProtocolMessage& m : messages_) {
      out << m.seq << ' ' << m.sender << ' ' << m.receiver << ' ' << phase_name(m.phase)
          << ' ' << m.payload_type << ' ' << m.payload_bytes << '\n';
    }
    return out.str();
  }

  std::vector<uint8_t> serialize(const std::string& preset) const {
    return detail::finish_object(
        ObjectKind::transcript, 0, preset, 0, 0, 0, 0, [&](auto& w) {
          w.put_u64(messages_.size());
          for (const ProtocolMessage& m : messages_) {
            w.put_u64(m.seq);
            w.put_string(m.sender);
            w.put_string(m.receiver);
            w.put_u8(static_cast<uint8_t>(m.phase));
            w.put_string(m.payload_type);
            w.put_u64(m.payload_bytes);
          }
        });
  }

  static Transcript deserialize(const std::string& preset, const std::vector<uint8_t>& bytes) {
    auto r = open_object(bytes, ObjectKind::transcript, preset);
    Transcript t;
    const uint64_t n = r.get_u64();
    for (uint64_t i = 0; i < n; ++i) {
      ProtocolMessage m;
      m.seq = r.get_u64();
      m.sender = r.get_string();
      m.receiver = r.get_string();
      m.phase = static_cast<Phase>(r.get_u8());
      m.payload_type = r.get_string();
      m.payload_bytes = r.get_u64();
      t.messages_.push_back(std::move(m));
      t.next_seq_ = m.seq + 1;
    }
    return t;
  }

 private:
  std::vector<ProtocolMessage> messages_;
  uint64_t next_seq_ = 0;
};

// --- parties ------------------------------------------------------------------------

/// Holds exactly one secret share plus public references; never sees the
/// client's key or input.
struct ModelOwner {
  uint32_t index = 0;
  SecretKey share;
  DecisionStump stump;
  std::shared_ptr<const PublicKey> joint_pk;

  std::vector<std::string> secret_inventory() const {
    return {"share:owner-" + std::to_string(index)};
  }

  PartialDecryption answer_decrypt_request(const Ring& ring, const RingElement& c1,
                                           int key_level, uint64_t ciphertext_id,
                                           SeededRng& rng) const {
    return partial_decrypt(ring, share, index, c1, key_level, ciphertext_id, rng);
  }
};

/// Holds its own key pair only; receives the evaluated result and the
/// aggregated owner component, never any share.
struct Client {
  SecretKey sk;
  PublicKey pk;
  EvalHelper helper;

  std::vector<std::string> secret_inventory() const { return {"sk:client"}; }

  /// mu' = <c_C, s_C> + (c_M0 - rho), reduced mod t.
  Plaintext finalize(const Ring& ring, const LeveledCiphertext& result,
                     const RingElement& rho, double rho_noise) const {
    if (result.noise + rho_noise >= static_cast<double>(ring.modulus(result.level)) / 2.0)
      throw NoiseOverflowError("result noise too large for decryption");
    size_t client_pos = result.keyset.size(), joint_pos = result.keyset.size();
    for (size_t p = 0; p < result.keyset.size(); ++p) {
      if (result.keyset[p] == sk.owner) client_pos = p;
      else joint_pos = p;
    }
    if (client_pos >= result.keyset.size() || joint_pos >= result.keyset.size())
      throw KeysetMismatchError("result is not under the client and joint keys");
    const RingElement s = result.key_level == result.level
                              ? sk.secret(result.key_level)
                              : ring.lift(sk.secret(result.key_level), result.level);
    const CtPair& c_client = result.subvectors[client_pos];
    const CtPair& c_joint = result.subvectors[joint_pos];
    RingElement w = ring.sub(c_client[0], ring.mul(c_client[1], s));
    w = ring.add(w, ring.sub(c_joint[0], rho));
    return ring.residue_mod_t(w);
  }
};

/// Semi-honest evaluator: stores one encrypted model copy per owner, extends
/// ciphertexts, builds evaluation keys from public helper material, and runs
/// the homomorphic circuit. Holds no secret key material of any kind.
struct Evaluator {
  struct ModelEntry {
    LeveledCiphertext threshold_ct, label_a_ct, label_b_ct;  // base, joint-key
  };
  std::vector<ModelEntry> model_store;  // one entry per owner, reused across clients
  LeveledCiphertext one_ct;             // [1] under the joint key, evaluator-made

  std::shared_ptr<const PublicKey> joint_pk;
  std::shared_ptr<const EvalHelper> joint_helper;
  std::shared_ptr<const std::vector<KeySwitchKey>> joint_mult_keys;
  std::shared_ptr<const PublicKey> client_pk;
  std::shared_ptr<const EvalHelper> client_helper;

  // Session material for the current client.
  LeveledCiphertext extended_input;                    // [[x]]
  std::vector<LeveledCiphertext> extended_thresholds;  // [[y_i]]
  std::vector<LeveledCiphertext> extended_label_a, extended_label_b;
  LeveledCiphertext extended_one;
  std::map<int, ExtendedEvalKey> ext_keys;  // by source level, built on demand

  std::vector<std::string> secret_inventory() const { return {}; }
};

// --- simulation ------------------------------------------------------------------------

struct SimulationConfig {
  std::string preset = "toy";
  uint32_t n_owners = 3;
  uint64_t seed = 0;
  unsigned threads = 1;
  std::string dump_dir;  // when set, payloads are dumped next to the transcript
};

struct DemoReport {
  std::string preset;
  uint32_t n_owners = 0;
  uint64_t seed = 0;
  uint64_t client_bit = 0;
  uint64_t setup_messages = 0;
  uint64_t encrypt_messages = 0;
  uint64_t evaluate_messages = 0;
  uint64_t decrypt_messages = 0;
  size_t max_subvectors = 0;
  uint32_t model_copies_per_owner = 1;
  uint64_t tally = 0;
  uint64_t majority_bit = 0;
  uint64_t oracle_tally = 0;
  uint64_t oracle_majority = 0;
  bool oracle_match = false;
  uint32_t noise_overflow_events = 0;
  double max_noise_ratio = 0.0;
  double setup_ms = 0.0, encrypt_ms = 0.0, evaluate_ms = 0.0, decrypt_ms = 0.0;

  std::string to_text() const {
    std::ostringstream out;
    out << "preset: " << preset << '\n'
        << "owners: " << n_owners << '\n'
        << "seed: " << seed << '\n'
        << "client bit: " << client_bit << '\n'
        << "setup interactions: " << setup_messages << '\n'
        << "encrypt messages: " << encrypt_messages << '\n'
        << "evaluate messages: " << evaluate_messages << '\n'
        << "decrypt messages: " << decrypt_messages << '\n'
        << "base ciphertext dimension: 1x2\n"
        << "extended ciphertext dimension: " << max_subvectors << "x2\n"
        << "encrypted model copies per owner: " << model_copies_per_owner << '\n'
        << "tally: " << tally << '\n'
        << "majority bit: " << majority_bit << '\n'
        << "oracle tally: " << oracle_tally << '\n'
        << "oracle majority bit: " << oracle_majority << '\n'
        << "plaintext oracle match: " << (oracle_match ? "yes" : "no") << '\n'
        << "noise overflow events: " << noise_overflow_events << '\n'
        << "max noise ratio: " << max_noise_ratio << '\n'
        << "setup ms: " << setup_ms << '\n'
        << "encrypt ms: " << encrypt_ms << '\n'
        << "evaluate ms: " << evaluate_ms << '\n'
        << "decrypt ms: " << decrypt_ms << '\n';
    return out.str();
  }
};

/// In-process run of the four protocol phases over an ordered in-memory
/// transport. Parties are plain state structs; the transcript is the only
/// shared structure and is appended behind this single driver.
class Simulation {
 public:
  static constexpr KeyId kClientKey = 1;
  static constexpr KeyId kJointKey = 100;

  explicit Simulation(SimulationConfig config)
      : config_(std::move(config)),
        preset_(resolve_preset(config_.preset)),
        ring_(preset_.params),
        crs_(make_crs(ring_, config_.seed ^ 0x9e3779b97f4a7c15ULL)),
        master_rng_(config_.seed) {
    if (config_.n_owners < 1) throw ArgumentError("need at least one model owner");
    transcript_.dump_dir = config_.dump_dir;
  }

  const Ring& ring() const { return ring_; }
  const Transcript& transcript() const { return transcript_; }
  const std::vector<ModelOwner>& owners() const { return owners_; }
  const Client& client() const { return client_; }
  const Evaluator& evaluator() const { return evaluator_; }
  const ParameterPreset& preset() const { return preset_; }
  size_t max_subvectors_seen() const { return max_subvectors_; }
  double max_noise_ratio() const { return max_noise_ratio_; }
  uint32_t noise_overflow_events() const { return noise_overflow_events_; }

  /// Phase 1: the dealer samples shares, assembles the joint key material,
  /// and delivers one share (plus the public bundle) to each owner; the
  /// client generates its own key pair and helper.
  void run_setup() {
    if (phase_ != Stage::init) throw ProtocolError("setup already ran");
    SeededRng dealer_rng = master_rng_.fork("dealer");
    JointKeyMaterial material = dealer_keygen(ring_, crs_, config_.n_owners, kJointKey, dealer_rng);
    joint_pk_ = std::make_shared<const PublicKey>(std::move(material.joint_pk));
    joint_helper_ = std::make_shared<const EvalHelper>(std::move(material.joint_helper));
    joint_mult_keys_ =
        std::make_shared<const std::vector<KeySwitchKey>>(std::move(material.mult_keys));
    joint_relin_keys_ =
        std::make_shared<const std::vector<KeySwitchKey>>(std::move(material.relin_keys));
    joint_refresh_keys_ =
        std::make_shared<const std::vector<KeySwitchKey>>(std::move(material.refresh_keys));
    joint_sk_oracle_ = std::move(material.joint_sk);

    const uint64_t share_bytes = serialized_size(preset_.name, material.shares[0]);
    const uint64_t pk_bytes = serialized_size(preset_.name, *joint_pk_);
    const uint64_t helper_bytes = serialized_size(preset_.name, *joint_helper_);
    owners_.resize(config_.n_owners);
    for (uint32_t i = 0; i < config_.n_owners; ++i) {
      owners_[i].index = i;
      owners_[i].share = std::move(material.shares[i]);
      owners_[i].joint_pk = joint_pk_;
      const SecretKey& share = owners_[i].share;
      transcript_.record("dealer", "owner:" + std::to_string(i), Phase::setup,
                         "key-share-delivery", share_bytes + pk_bytes + helper_bytes,
                         [&](const std::string& path) {
                           write_file(path, serialize_secret_share(preset_.name, share));
                         });
    }

    SeededRng client_rng = master_rng_.fork("client");
    auto [sk, pk] = kgen(ring_, crs_, kClientKey, client_rng);
    client_.sk = std::move(sk);
    client_.pk = std::move(pk);
    client_.helper = make_eval_helper(ring_, client_.sk, client_.pk, client_rng);

    evaluator_rng_ = std::make_unique<SeededRng>(master_rng_.fork("evaluator"));
    owner_rng_ = std::make_unique<SeededRng>(master_rng_.fork("owner-protocol"));
    client_proto_rng_ = std::make_unique<SeededRng>(master_rng_.fork("client-protocol"));
    phase_ = Stage::ready;
  }

  /// Phase 2: owners encrypt and upload their stumps under the joint key
  /// (once, regardless of how many client requests follow); the evaluator
  /// encrypts [1]; the client sends its encrypted input bit, which opens the
  /// two-message evaluation interaction; the evaluator extends everything to
  /// the two-key set.
  void run_encryption(const std::vector<DecisionStump>& stumps, uint64_t client_bit) {
    if (phase_ == Stage::init) throw ProtocolError("setup has not run");
    if (stumps.size() != config_.n_owners)
      throw ArgumentError("need exactly one stump per owner");
    if (client_bit > 1) throw ArgumentError("client input must be a bit");
    for (const DecisionStump& s : stumps) s.validate();

    evaluator_.joint_pk = joint_pk_;
    evaluator_.joint_helper = joint_helper_;
    evaluator_.joint_mult_keys = joint_mult_keys_;

    // The encrypted model is uploaded once and reused across client requests;
    // a changed stump set is a new model version and is uploaded afresh.
    const bool upload = evaluator_.model_store.empty() || stumps != stumps_;
    if (upload) {
      evaluator_.model_store.clear();
      const uint64_t pk_bytes = serialized_size(preset_.name, *joint_pk_);
      const uint64_t helper_bytes = serialized_size(preset_.name, *joint_helper_);
      const uint64_t chain_bytes = serialized_size(preset_.name, *joint_mult_keys_) +
                                   serialized_size(preset_.name, *joint_relin_keys_) +
                                   serialized_size(preset_.name, *joint_refresh_keys_);
      for (uint32_t i = 0; i < config_.n_owners; ++i) {
        owners_[i].stump = stumps[i];
        Evaluator::ModelEntry entry;
        entry.threshold_ct = enc_joint(stumps[i].threshold_bit);
        entry.label_a_ct = enc_joint(stumps[i].label_a);
        entry.label_b_ct = enc_joint(stumps[i].label_b);
        const uint64_t ct_bytes = serialized_size(preset_.name, entry.threshold_ct) +
                                  serialized_size(preset_.name, entry.label_a_ct) +
                                  serialized_size(preset_.name, entry.label_b_ct);
        note(entry.threshold_ct);
        note(entry.label_a_ct);
        note(entry.label_b_ct);
        transcript_.record("owner:" + std::to_string(i), "evaluator", Phase::encrypt,
                           "model-upload", pk_bytes + helper_bytes + chain_bytes + ct_bytes,
                           [&](const std::string& path) {
                             write_file(path,
                                        serialize_ciphertext(preset_.name, entry.threshold_ct));
                           });
        evaluator_.model_store.push_back(std::move(entry));
      }
      // Evaluator-side encryption of the constant 1 under the joint key.
      evaluator_.one_ct = enc(ring_, *joint_pk_, plain_constant(ring_, 1), *evaluator_rng_);
      note(evaluator_.one_ct);
    } else {
      for (uint32_t i = 0; i < config_.n_owners; ++i) owners_[i].stump = stumps[i];
    }
    stumps_ = stumps;

    // Client request: public key, helper, and the encrypted input bit.
    client_bit_ = client_bit;
    LeveledCiphertext input_ct =
        enc(ring_, client_.pk, plain_constant(ring_, client_bit), *client_proto_rng_);
    note(input_ct);
    evaluator_.client_pk = std::make_shared<const PublicKey>(client_.pk);
    evaluator_.client_helper = std::make_shared<const EvalHelper>(client_.helper);
    const uint64_t request_bytes = serialized_size(preset_.name, client_.pk) +
                                   serialized_size(preset_.name, client_.helper) +
                                   serialized_size(preset_.name, input_ct);
    transcript_.record("client", "evaluator", Phase::evaluate, "evaluation-request",
                       request_bytes, [&](const std::string& path) {
                         write_file(path, serialize_ciphertext(preset_.name, input_ct));
                       });

    // Extension to the two-key set (client, joint).
    const std::vector<const PublicKey*> pair = {evaluator_.client_pk.get(),
                                                evaluator_.joint_pk.get()};
    evaluator_.extended_input = extend(ring_, input_ct, pair);
    note(evaluator_.extended_input);
    evaluator_.extended_thresholds.clear();
    evaluator_.extended_label_a.clear();
    evaluator_.extended_label_b.clear();
    for (const Evaluator::ModelEntry& entry : evaluator_.model_store) {
      evaluator_.extended_thresholds.push_back(extend(ring_, entry.threshold_ct, pair));
      evaluator_.extended_label_a.push_back(extend(ring_, entry.label_a_ct, pair));
      evaluator_.extended_label_b.push_back(extend(ring_, entry.label_b_ct, pair));
      note(evaluator_.extended_thresholds.back());
      note(evaluator_.extended_label_a.back());
      note(evaluator_.extended_label_b.back());
    }
    evaluator_.extended_one = extend(ring_, evaluator_.one_ct, pair);
    note(evaluator_.extended_one);
    stump_results_.assign(config_.n_owners, LeveledCiphertext{});
    stump_done_.assign(config_.n_owners, false);
    phase_ = Stage::encrypted;
  }

  /// Phase 3a: one stump. At t = 2 the comparison bit is the plain sum
  /// x + y; at larger t the same selection is evaluated in the affine form
  /// g + x h with g = B + y(A - B) and h = (A - B) - 2 y(A - B), both
  /// computable under the joint key alone, so the cross-key work is a single
  /// extended multiplication.
  LeveledCiphertext eval_stump(uint32_t index) {
    if (phase_ != Stage::encrypted && phase_ != Stage::evaluated)
      throw ProtocolError("encryption phase has not run");
    if (index >= config_.n_owners) throw ArgumentError("no such stump");
    if (stump_done_[index]) return stump_results_[index];

    const std::vector<const PublicKey*> pair = {evaluator_.client_pk.get(),
                                                evaluator_.joint_pk.get()};
    const int top = ring_.top_level();
    const Evaluator::ModelEntry& entry = evaluator_.model_store[index];
    const KeySwitchKey* relin =
        ring_.plain_modulus() == 2 ? nullptr
                                   : &joint_relin_keys_->at(static_cast<size_t>(top));
    LeveledCiphertext result =
        eval_stump_circuit(ring_, entry.threshold_ct, entry.label_a_ct, entry.label_b_ct,
                           evaluator_.one_ct, evaluator_.extended_input, pair, relin,
                           ext_key(top));
    note(result);
    stump_results_[index] = std::move(result);
    stump_done_[index] = true;
    return stump_results_[index];
  }

  /// Phase 3b: encrypted tally of all stump outputs, additions only. The
  /// plaintext modulus must exceed the owner count or the count wraps.
  LeveledCiphertext eval_forest() {
    if (phase_ != Stage::encrypted && phase_ != Stage::evaluated)
      throw ProtocolError("encryption phase has not run");
    if (ring_.plain_modulus() <= config_.n_owners)
      throw ProtocolError("plaintext modulus too small for the tally");
    LeveledCiphertext tally = eval_stump(0);
    for (uint32_t i = 1; i < config_.n_owners; ++i)
      tally = eval_add_ext(ring_, tally, eval_stump(i));
    note(tally);
    phase_ = Stage::evaluated;
    return tally;
  }

  /// Phase 4: the evaluator sends the joint-key component to every owner,
  /// collects smudged partial decryptions, and forwards the result with the
  /// aggregated component to the client, who finishes locally.
  Plaintext run_decryption(const LeveledCiphertext& result) {
    if (phase_ == Stage::init) throw ProtocolError("setup has not run");
    size_t joint_pos = result.keyset.size();
    for (size_t p = 0; p < result.keyset.size(); ++p)
      if (result.keyset[p] == kJointKey) joint_pos = p;
    if (joint_pos == result.keyset.size())
      throw KeysetMismatchError("result is not under the joint key");
    const RingElement& c1 = result.subvectors[joint_pos][1];
    const uint64_t ciphertext_id = next_ciphertext_id_++;

    const uint64_t element_bytes = serialized_size(preset_.name, c1);
    std::vector<PartialDecryption> parts;
    parts.reserve(config_.n_owners);
    for (uint32_t i = 0; i < config_.n_owners; ++i) {
      transcript_.record("evaluator", "owner:" + std::to_string(i), Phase::decrypt,
                         "decryption-request", element_bytes);
      PartialDecryption part = owners_[i].answer_decrypt_request(
          ring_, c1, result.key_level, ciphertext_id, *owner_rng_);
      transcript_.record("owner:" + std::to_string(i), "evaluator", Phase::decrypt,
                         "partial-decryption",
                         serialized_size(preset_.name, part.rho));
      parts.push_back(std::move(part));
    }
    const RingElement rho = aggregate_partials(ring_, parts, config_.n_owners);
    const uint64_t result_bytes =
        serialized_size(preset_.name, result) + serialized_size(preset_.name, rho);
    transcript_.record("evaluator", "client", Phase::evaluate, "evaluation-result",
                       result_bytes, [&](const std::string& path) {
                         write_file(path, serialize_ciphertext(preset_.name, result));
                       });

    const double rho_noise = static_cast<double>(ring_.plain_modulus()) *
                             static_cast<double>(config_.n_owners) *
                             static_cast<double>(ring_.params().smudging_bound);
    try {
      return client_.finalize(ring_, result, rho, rho_noise);
    } catch (const NoiseOverflowError&) {
      ++noise_overflow_events_;
      throw;
    }
  }

  /// Test oracle: joint decryption with all shares plus the client secret.
  Plaintext dec_joint_oracle(const LeveledCiphertext& ct) const {
    std::vector<std::vector<const SecretKey*>> groups;
    for (KeyId id : ct.keyset) {
      if (id == kClientKey) {
        groups.push_back({&client_.sk});
      } else {
        std::vector<const SecretKey*> shares;
        for (const ModelOwner& o : owners_) shares.push_back(&o.share);
        groups.push_back(std::move(shares));
      }
    }
    return dec_joint(ring_, ct, groups);
  }

  const SecretKey& joint_secret_oracle() const { return joint_sk_oracle_; }

  /// The extended evaluation key for multiplications at `source_level`,
  /// built once from the public helper material.
  const ExtendedEvalKey& ext_key(int source_level) {
    auto it = evaluator_.ext_keys.find(source_level);
    if (it == evaluator_.ext_keys.end()) {
      const std::vector<const PublicKey*> pair = {evaluator_.client_pk.get(),
                                                  evaluator_.joint_pk.get()};
      const std::vector<const EvalHelper*> helpers = {evaluator_.client_helper.get(),
                                                      evaluator_.joint_helper.get()};
      it = evaluator_.ext_keys
               .emplace(source_level, extended_evalkgen(ring_, pair, helpers, source_level,
                                                        config_.threads))
               .first;
    }
    return it->second;
  }

 private:
  enum class Stage { init, ready, encrypted, evaluated };

  LeveledCiphertext enc_joint(uint64_t bit) {
    return enc(ring_, *joint_pk_, plain_constant(ring_, bit), *owner_rng_);
  }

  void note(const LeveledCiphertext& ct) {
    max_subvectors_ = std::max(max_subvectors_, ct.subvector_count());
    const double ratio = ct.noise / (static_cast<double>(ring_.modulus(ct.level)) / 2.0);
    max_noise_ratio_ = std::max(max_noise_ratio_, ratio);
    if (ratio >= 1.0) ++noise_overflow_events_;
  }

  SimulationConfig config_;
  ParameterPreset preset_;
  Ring ring_;
  CommonReference crs_;
  SeededRng master_rng_;
  Transcript transcript_;

  std::shared_ptr<const PublicKey> joint_pk_;
  std::shared_ptr<const EvalHelper> joint_helper_;
  std::shared_ptr<const std::vector<KeySwitchKey>> joint_mult_keys_;
  std::shared_ptr<const std::vector<KeySwitchKey>> joint_relin_keys_;
  std::shared_ptr<const std::vector<KeySwitchKey>> joint_refresh_keys_;
  SecretKey joint_sk_oracle_;  // dealer-side; exposed only to test oracles

  std::vector<ModelOwner> owners_;
  Client client_;
  Evaluator evaluator_;
  std::vector<DecisionStump> stumps_;
  std::vector<LeveledCiphertext> stump_results_;
  std::vector<bool> stump_done_;
  uint64_t client_bit_ = 0;
  uint64_t next_ciphertext_id_ = 1;

  std::unique_ptr<SeededRng> evaluator_rng_;
  std::unique_ptr<SeededRng> owner_rng_;
  std::unique_ptr<SeededRng> client_proto_rng_;

  Stage phase_ = Stage::init;
  size_t max_subvectors_ = 0;
  double max_noise_ratio_ = 0.0;
  uint32_t noise_overflow_events_ = 0;
};

/// Drives all four phases once and assembles the report the CLI prints.
/// Stumps default to seed-derived random bits when not supplied.
inline DemoReport run_demo(const SimulationConfig& config,
                           std::vector<DecisionStump> stumps = {},
                           uint64_t client_bit = 1,
                           Transcript* transcript_out = nullptr) {
  using clock = std::chrono::steady_clock;
  const auto ms_since = [](clock::time_point start) {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  Simulation sim(config);
  if (stumps.empty()) {
    SeededRng stump_rng(config.seed ^ 0x5bf03635ULL);
    for (uint32_t i = 0; i < config.n_owners; ++i)
      stumps.push_back(DecisionStump{stump_rng.coin(), stump_rng.coin(), stump_rng.coin(), i});
  }

  DemoReport report;
  report.preset = config.preset;
  report.n_owners = config.n_owners;
  report.seed = config.seed;
  report.client_bit = client_bit;

  auto t0 = clock::now();
  sim.run_setup();
  report.setup_ms = ms_since(t0);

  t0 = clock::now();
  sim.run_encryption(stumps, client_bit);
  report.encrypt_ms = ms_since(t0);

  t0 = clock::now();
  const LeveledCiphertext tally_ct = sim.eval_forest();
  report.evaluate_ms = ms_since(t0);

  t0 = clock::now();
  const Plaintext tally_plain = sim.run_decryption(tally_ct);
  report.decrypt_ms = ms_since(t0);

  report.tally = tally_plain.empty() ? 0 : tally_plain[0];
  report.majority_bit = 2 * report.tally > config.n_owners ? 1 : 0;
  const ForestOutcome oracle = forest_oracle(stumps, client_bit);
  report.oracle_tally = oracle.tally;
  report.oracle_majority = oracle.majority;
  report.oracle_match =
      report.tally == oracle.tally && report.majority_bit == oracle.majority;

  report.setup_messages = sim.transcript().count(Phase::setup);
  report.encrypt_messages = sim.transcript().count(Phase::encrypt);
  report.evaluate_messages = sim.transcript().count(Phase::evaluate);
  report.decrypt_messages = sim.transcript().count(Phase::decrypt);
  report.max_subvectors = sim.max_subvectors_seen();
  report.model_copies_per_owner = 1;
  report.noise_overflow_events = sim.noise_overflow_events();
  report.max_noise_ratio = sim.max_noise_ratio();

  if (transcript_out != nullptr) *transcript_out = sim.transcript();
  return report;
}

}  // namespace mkthe
