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
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "mkthe/mkbgv.hpp"
#include "mkthe/threshold.hpp"

namespace mkthe {

/// Byte-exact container format: "MKTH" magic, version, object kind, preset
/// name, addressing fields, 8-byte little-endian words for every coefficient,
/// and a trailing CRC-32 over everything before it.
enum class ObjectKind : uint8_t {
  public_key = 1,
  secret_share = 2,
  ciphertext = 3,
  rgsw = 4,
  eval_key = 5,
  transcript = 6,
};

/// Sub-kind for eval_key payloads (the flags byte).
enum class EvalKeyKind : uint8_t {
  switch_chain = 0,
  helper = 1,
  extended = 2,
};

inline constexpr uint16_t kFormatVersion = 1;
inline constexpr char kMagic[4] = {'M', 'K', 'T', 'H'};

inline uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t n) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc = ~crc;
  for (size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return ~crc;
}

namespace detail {

struct ByteWriter {
  std::vector<uint8_t> bytes;
  void put_u8(uint8_t v) { bytes.push_back(v); }
  void put_u16(uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void put_u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void put_u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void put_double(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(bits);
  }
  void put_string(const std::string& s) {
    put_u16(static_cast<uint16_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  size_t size() const { return bytes.size(); }
};

/// Same interface, counts bytes only. Keeps size computation and encoding in
/// one codec.
struct CountingWriter {
  size_t count = 0;
  void put_u8(uint8_t) { count += 1; }
  void put_u16(uint16_t) { count += 2; }
  void put_u32(uint32_t) { count += 4; }
  void put_u64(uint64_t) { count += 8; }
  void put_double(double) { count += 8; }
  void put_string(const std::string& s) { count += 2 + s.size(); }
  size_t size() const { return count; }
};

struct ByteReader {
  const uint8_t* data;
  size_t size;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > size) throw FileFormatError("truncated object");
  }
  uint8_t get_u8() {
    need(1);
    return data[pos++];
  }
  uint16_t get_u16() {
    need(2);
    uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(data[pos++]) << (8 * i);
    return v;
  }
  uint32_t get_u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data[pos++]) << (8 * i);
    return v;
  }
  uint64_t get_u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data[pos++]) << (8 * i);
    return v;
  }
  double get_double() {
    const uint64_t bits = get_u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string get_string() {
    const uint16_t n = get_u16();
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
};

template <class W>
void write_element(W& w, const RingElement& x) {
  for (uint64_t c : x.coeffs) w.put_u64(c);
}

inline RingElement read_element(ByteReader& r, const Ring& ring, int level) {
  RingElement x = ring.zero(level);
  const uint64_t q = ring.modulus(level);
  for (uint32_t i = 0; i < ring.degree(); ++i) {
    x.coeffs[i] = r.get_u64();
    if (x.coeffs[i] >= q) throw FileFormatError("coefficient out of range");
  }
  return x;
}

template <class W>
void write_pair(W& w, const CtPair& p) {
  write_element(w, p[0]);
  write_element(w, p[1]);
}

inline CtPair read_pair(ByteReader& r, const Ring& ring, int level) {
  RingElement a = read_element(r, ring, level);
  RingElement b = read_element(r, ring, level);
  return CtPair{std::move(a), std::move(b)};
}

template <class W>
void write_secret_key(W& w, const SecretKey& sk) {
  w.put_u32(sk.owner);
  w.put_double(sk.norm);
  w.put_u8(static_cast<uint8_t>(sk.secrets.size()));
  for (const RingElement& s : sk.secrets) write_element(w, s);
}

inline SecretKey read_secret_key(ByteReader& r, const Ring& ring) {
  SecretKey sk;
  sk.owner = r.get_u32();
  sk.norm = r.get_double();
  const uint8_t levels = r.get_u8();
  if (levels != ring.top_level() + 1) throw FileFormatError("level count mismatch");
  for (int l = 0; l < levels; ++l) sk.secrets.push_back(read_element(r, ring, l));
  return sk;
}

template <class W>
void write_public_key(W& w, const PublicKey& pk) {
  w.put_u32(pk.owner);
  w.put_u8(pk.shared_a ? 1 : 0);
  w.put_u64(pk.crs_seed);
  w.put_double(pk.key_norm);
  w.put_double(pk.noise_norm);
  w.put_u8(static_cast<uint8_t>(pk.rows.size()));
  for (const auto& level_rows : pk.rows) {
    w.put_u32(static_cast<uint32_t>(level_rows.size()));
    for (const CtPair& row : level_rows) write_pair(w, row);
  }
}

inline PublicKey read_public_key(ByteReader& r, const Ring& ring) {
  PublicKey pk;
  pk.owner = r.get_u32();
  pk.shared_a = r.get_u8() != 0;
  pk.crs_seed = r.get_u64();
  pk.key_norm = r.get_double();
  pk.noise_norm = r.get_double();
  const uint8_t levels = r.get_u8();
  if (levels != ring.top_level() + 1) throw FileFormatError("level count mismatch");
  pk.rows.resize(levels);
  for (int l = 0; l < levels; ++l) {
    const uint32_t count = r.get_u32();
    if (count != 2 * ring.bit_length(l)) throw FileFormatError("row count mismatch");
    pk.rows[static_cast<size_t>(l)].reserve(count);
    for (uint32_t k = 0; k < count; ++k)
      pk.rows[static_cast<size_t>(l)].push_back(read_pair(r, ring, l));
  }
  return pk;
}

template <class W>
void write_ciphertext(W& w, const LeveledCiphertext& ct) {
  w.put_u8(static_cast<uint8_t>(ct.level));
  w.put_u8(static_cast<uint8_t>(ct.key_level));
  w.put_double(ct.noise);
  w.put_double(ct.skey_weight);
  w.put_u8(static_cast<uint8_t>(ct.keyset.size()));
  for (KeyId id : ct.keyset) w.put_u32(id);
  w.put_u8(static_cast<uint8_t>(ct.subvectors.size()));
  for (const CtPair& sv : ct.subvectors) write_pair(w, sv);
}

inline LeveledCiphertext read_ciphertext(ByteReader& r, const Ring& ring) {
  LeveledCiphertext ct;
  ct.level = r.get_u8();
  ct.key_level = r.get_u8();
  if (ct.level > ring.top_level() || ct.key_level > ring.top_level())
    throw FileFormatError("ciphertext level out of range");
  ct.noise = r.get_double();
  ct.skey_weight = r.get_double();
  const uint8_t keys = r.get_u8();
  for (uint8_t i = 0; i < keys; ++i) ct.keyset.push_back(r.get_u32());
  const uint8_t svs = r.get_u8();
  if (svs != keys) throw FileFormatError("sub-vector count does not match key set");
  for (uint8_t i = 0; i < svs; ++i) ct.subvectors.push_back(read_pair(r, ring, ct.level));
  return ct;
}

template <class W>
void write_rgsw(W& w, const RgswCiphertext& ct) {
  w.put_u8(static_cast<uint8_t>(ct.level));
  w.put_double(ct.noise);
  w.put_double(ct.plain_bound);
  w.put_u8(static_cast<uint8_t>(ct.keyset.size()));
  for (KeyId id : ct.keyset) w.put_u32(id);
  w.put_u32(static_cast<uint32_t>(ct.row_count()));
  w.put_u32(static_cast<uint32_t>(ct.col_count()));
  for (const auto& row : ct.rows)
    for (const RingElement& x : row) write_element(w, x);
}

inline RgswCiphertext read_rgsw(ByteReader& r, const Ring& ring) {
  RgswCiphertext ct;
  ct.level = r.get_u8();
  if (ct.level > ring.top_level()) throw FileFormatError("level out of range");
  ct.noise = r.get_double();
  ct.plain_bound = r.get_double();
  const uint8_t keys = r.get_u8();
  for (uint8_t i = 0; i < keys; ++i) ct.keyset.push_back(r.get_u32());
  const uint32_t rows = r.get_u32();
  const uint32_t cols = r.get_u32();
  if (cols != 2 * keys || rows != static_cast<uint32_t>(keys) * 2 * ring.bit_length(ct.level))
    throw FileFormatError("gadget shape mismatch");
  ct.rows.assign(rows, {});
  for (uint32_t k = 0; k < rows; ++k) {
    ct.rows[k].reserve(cols);
    for (uint32_t c = 0; c < cols; ++c) ct.rows[k].push_back(read_element(r, ring, ct.level));
  }
  return ct;
}

template <class W>
void write_rand_enc(W& w, const RandomnessEncryption& f) {
  w.put_u8(static_cast<uint8_t>(f.level));
  w.put_u32(f.owner);
  w.put_u32(static_cast<uint32_t>(f.rows.size()));
  for (const CtPair& row : f.rows) write_pair(w, row);
}

inline RandomnessEncryption read_rand_enc(ByteReader& r, const Ring& ring) {
  RandomnessEncryption f;
  f.level = r.get_u8();
  if (f.level > ring.top_level()) throw FileFormatError("level out of range");
  f.owner = r.get_u32();
  const uint32_t rows = r.get_u32();
  if (rows != ring.bit_length(f.level)) throw FileFormatError("row count mismatch");
  f.rows.reserve(rows);
  for (uint32_t k = 0; k < rows; ++k) f.rows.push_back(read_pair(r, ring, f.level));
  return f;
}

template <class W>
void write_switch_key(W& w, const KeySwitchKey& k) {
  w.put_u32(k.owner);
  w.put_u8(static_cast<uint8_t>(k.operating_level));
  w.put_u8(static_cast<uint8_t>(k.target_level));
  w.put_double(k.hint_noise);
  w.put_u32(k.components());
  for (const auto& row : k.hints) {
    w.put_u32(static_cast<uint32_t>(row.size()));
    for (const CtPair& h : row) write_pair(w, h);
  }
}

inline KeySwitchKey read_switch_key(ByteReader& r, const Ring& ring) {
  KeySwitchKey k;
  k.owner = r.get_u32();
  k.operating_level = r.get_u8();
  k.target_level = r.get_u8();
  if (k.operating_level > ring.top_level()) throw FileFormatError("level out of range");
  k.hint_noise = r.get_double();
  const uint32_t comps = r.get_u32();
  k.hints.resize(comps);
  for (uint32_t m = 0; m < comps; ++m) {
    const uint32_t bits = r.get_u32();
    if (bits != ring.bit_length(k.operating_level)) throw FileFormatError("hint count mismatch");
    k.hints[m].reserve(bits);
    for (uint32_t z = 0; z < bits; ++z)
      k.hints[m].push_back(read_pair(r, ring, k.operating_level));
  }
  return k;
}

template <class W>
void write_helper(W& w, const EvalHelper& h) {
  w.put_u32(h.owner);
  w.put_u8(static_cast<uint8_t>(h.levels.size()));
  for (const auto& mat : h.levels) {
    w.put_u32(static_cast<uint32_t>(mat.power_encs.size()));
    for (size_t i = 0; i < mat.power_encs.size(); ++i) {
      write_rgsw(w, mat.power_encs[i]);
      write_rand_enc(w, mat.power_rand[i]);
      write_rgsw(w, mat.bit_encs[i]);
      write_rand_enc(w, mat.bit_rand[i]);
    }
  }
}

inline EvalHelper read_helper(ByteReader& r, const Ring& ring) {
  EvalHelper h;
  h.owner = r.get_u32();
  const uint8_t levels = r.get_u8();
  if (levels != ring.top_level()) throw FileFormatError("helper level count mismatch");
  h.levels.resize(levels);
  for (auto& mat : h.levels) {
    const uint32_t entries = r.get_u32();
    for (uint32_t i = 0; i < entries; ++i) {
      mat.power_encs.push_back(read_rgsw(r, ring));
      mat.power_rand.push_back(read_rand_enc(r, ring));
      mat.bit_encs.push_back(read_rgsw(r, ring));
      mat.bit_rand.push_back(read_rand_enc(r, ring));
    }
  }
  return h;
}

template <class W>
void write_hint_block(W& w, const std::vector<std::vector<std::vector<RingElement>>>& hints) {
  w.put_u32(static_cast<uint32_t>(hints.size()));
  for (const auto& slot : hints) {
    w.put_u32(static_cast<uint32_t>(slot.size()));
    for (const auto& row : slot) {
      w.put_u8(static_cast<uint8_t>(row.size()));
      for (const RingElement& x : row) write_element(w, x);
    }
  }
}

inline std::vector<std::vector<std::vector<RingElement>>> read_hint_block(ByteReader& r,
                                                                          const Ring& ring,
                                                                          int level) {
  std::vector<std::vector<std::vector<RingElement>>> hints(r.get_u32());
  for (auto& slot : hints) {
    const uint32_t bits = r.get_u32();
    slot.reserve(bits);
    for (uint32_t z = 0; z < bits; ++z) {
      const uint8_t width = r.get_u8();
      std::vector<RingElement> row;
      row.reserve(width);
      for (uint8_t c = 0; c < width; ++c) row.push_back(read_element(r, ring, level));
      slot.push_back(std::move(row));
    }
  }
  return hints;
}

template <class W>
void write_extended_key(W& w, const ExtendedEvalKey& k) {
  w.put_u8(static_cast<uint8_t>(k.source_level));
  w.put_u8(static_cast<uint8_t>(k.operating_level));
  w.put_u8(static_cast<uint8_t>(k.keyset.size()));
  for (KeyId id : k.keyset) w.put_u32(id);
  w.put_u32(static_cast<uint32_t>(k.hint_noises.size()));
  for (double n : k.hint_noises) w.put_double(n);
  w.put_u32(static_cast<uint32_t>(k.refresh_noises.size()));
  for (double n : k.refresh_noises) w.put_double(n);
  write_hint_block(w, k.hints);
  write_hint_block(w, k.refresh_hints);
}

inline ExtendedEvalKey read_extended_key(ByteReader& r, const Ring& ring) {
  ExtendedEvalKey k;
  k.source_level = r.get_u8();
  k.operating_level = r.get_u8();
  if (k.source_level > ring.top_level() || k.operating_level != k.source_level - 1)
    throw FileFormatError("extended key levels out of range");
  const uint8_t keys = r.get_u8();
  for (uint8_t i = 0; i < keys; ++i) k.keyset.push_back(r.get_u32());
  k.hint_noises.resize(r.get_u32());
  for (double& n : k.hint_noises) n = r.get_double();
  k.refresh_noises.resize(r.get_u32());
  for (double& n : k.refresh_noises) n = r.get_double();
  k.hints = read_hint_block(r, ring, k.operating_level);
  k.refresh_hints = read_hint_block(r, ring, k.operating_level);
  detail::transform_hints(ring, k);
  return k;
}

inline uint32_t keyset_bitmap(const std::vector<KeyId>& keyset) {
  uint32_t bits = 0;
  for (size_t i = 0; i < keyset.size() && i < 32; ++i) bits |= 1u << i;
  return bits;
}

template <class W, class BodyFn>
void write_object(W& w, ObjectKind kind, uint8_t flags, const std::string& preset,
                  uint32_t owner, int32_t level, uint32_t bitmap, uint32_t subvectors,
                  BodyFn&& body) {
  for (char c : kMagic) w.put_u8(static_cast<uint8_t>(c));
  w.put_u16(kFormatVersion);
  w.put_u8(static_cast<uint8_t>(kind));
  w.put_u8(flags);
  w.put_string(preset);
  w.put_u32(owner);
  w.put_u32(static_cast<uint32_t>(level));
  w.put_u32(bitmap);
  w.put_u32(subvectors);
  body(w);
}

}  // namespace detail

/// Parsed container header.
struct ObjectHeader {
  ObjectKind kind;
  uint8_t flags = 0;
  std::string preset;
  uint32_t owner = 0;
  int32_t level = 0;
  uint32_t keyset_bitmap = 0;
  uint32_t subvector_count = 0;
};

namespace detail {

inline ObjectHeader read_and_verify_header(ByteReader& r) {
  r.need(4);
  for (char c : kMagic)
    if (r.get_u8() != static_cast<uint8_t>(c)) throw FileFormatError("bad magic");
  const uint16_t version = r.get_u16();
  if (version > kFormatVersion)
    throw FileFormatError("object was written by a newer format version");
  ObjectHeader h;
  h.kind = static_cast<ObjectKind>(r.get_u8());
  h.flags = r.get_u8();
  h.preset = r.get_string();
  h.owner = r.get_u32();
  h.level = static_cast<int32_t>(r.get_u32());
  h.keyset_bitmap = r.get_u32();
  h.subvector_count = r.get_u32();
  return h;
}

}  // namespace detail

/// Verifies the checksum and header, returning a reader positioned at the
/// body. `expect` pins the object kind; preset must match the ring in use.
inline detail::ByteReader open_object(const std::vector<uint8_t>& bytes, ObjectKind expect,
                                      const std::string& preset, ObjectHeader* header_out = nullptr) {
  if (bytes.size() < 8) throw FileFormatError("object too small");
  const size_t body_end = bytes.size() - 4;
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<uint32_t>(bytes[body_end + i]) << (8 * i);
  if (crc32_update(0, bytes.data(), body_end) != stored)
    throw FileFormatError("checksum mismatch");
  detail::ByteReader r{bytes.data(), body_end};
  const ObjectHeader h = detail::read_and_verify_header(r);
  if (h.kind != expect) throw FileFormatError("unexpected object kind");
  if (h.preset != preset) throw FileFormatError("object was written under preset '" + h.preset + "'");
  if (header_out != nullptr) *header_out = h;
  return r;
}

namespace detail {

template <class BodyFn>
std::vector<uint8_t> finish_object(ObjectKind kind, uint8_t flags, const std::string& preset,
                                   uint32_t owner, int32_t level, uint32_t bitmap,
                                   uint32_t subvectors, BodyFn&& body) {
  ByteWriter w;
  write_object(w, kind, flags, preset, owner, level, bitmap, subvectors, body);
  const uint32_t crc = crc32_update(0, w.bytes.data(), w.bytes.size());
  w.put_u32(crc);
  return std::move(w.bytes);
}

template <class BodyFn>
size_t object_size(ObjectKind kind, uint8_t flags, const std::string& preset, BodyFn&& body) {
  CountingWriter w;
  write_object(w, kind, flags, preset, 0, 0, 0, 0, body);
  return w.size() + 4;  // trailing checksum
}

}  // namespace detail

// --- public codecs ------------------------------------------------------------------

inline std::vector<uint8_t> serialize_public_key(const std::string& preset, const PublicKey& pk) {
  return detail::finish_object(ObjectKind::public_key, 0, preset, pk.owner, 0,
                               detail::keyset_bitmap({pk.owner}), 0,
                               [&](auto& w) { detail::write_public_key(w, pk); });
}

inline PublicKey deserialize_public_key(const Ring& ring, const std::string& preset,
                                        const std::vector<uint8_t>& bytes) {
  auto r = open_object(bytes, ObjectKind::public_key, preset);
  return detail::read_public_key(r, ring);
}

inline std::vector<uint8_t> serialize_secret_share(const std::string& preset, const SecretKey& sk) {
  return detail::finish_object(ObjectKind::secret_share, 0, preset, sk.owner, 0, 0, 0,
                               [&](auto& w) { detail::write_secret_key(w, sk); });
}

inline SecretKey deserialize_secret_share(const Ring& ring, const std::string& preset,
                                          const std::vector<uint8_t>& bytes) {
  auto r = open_object(bytes, ObjectKind::secret_share, preset);
  return detail::read_secret_key(r, ring);
}

inline std::vector<uint8_t> serialize_ciphertext(const std::string& preset,
                                                 const LeveledCiphertext& ct) {
  return detail::finish_object(ObjectKind::ciphertext, 0, preset,
                               ct.keyset.empty() ? 0 : ct.keyset[0], ct.level,
                               detail::keyset_bitmap(ct.keyset),
                               static_cast<uint32_t>(ct.subvector_count()),
                               [&](auto& w) { detail::write_ciphertext(w, ct); });
}

inline LeveledCiphertext deserialize_ciphertext(const Ring& ring, const std::string& preset,
                                                const std::vector<uint8_t>& bytes) {
  auto r = open_object(bytes, ObjectKind::ciphertext, preset);
  return detail::read_ciphertext(r, ring);
}

inline std::vector<uint8_t> serialize_rgsw(const std::string& preset, const RgswCiphertext& ct) {
  return detail::finish_object(ObjectKind::rgsw, 0, preset,
                               ct.keyset.empty() ? 0 : ct.keyset[0], ct.level,
                               detail::keyset_bitmap(ct.keyset),
                               static_cast<uint32_t>(ct.keyset.size()),
                               [&](auto& w) { detail::write_rgsw(w, ct); });
}

inline RgswCiphertext deserialize_rgsw(const Ring& ring, const std::string& preset,
                                       const std::vector<uint8_t>& bytes) {
  auto r = open_object(bytes, ObjectKind::rgsw, preset);
  return detail::read_rgsw(r, ring);
}

inline std::vector<uint8_t> serialize_switch_chain(const std::string& preset,
                                                   const std::vector<KeySwitchKey>& chain) {
  return detail::finish_object(
      ObjectKind::eval_key, static_cast<uint8_t>(EvalKeyKind::switch_chain), preset,
      chain.empty() ? 0 : chain[0].owner, 0, 0, 0, [&](auto& w) {
        w.put_u8(static_cast<uint8_t>(chain.size()));
        for (const KeySwitchKey& k : chain) detail::write_switch_key(w, k);
      });
}

inline std::vector<KeySwitchKey> deserialize_switch_chain(const Ring& ring,
                                                          const std::string& preset,
                                                          const std::vector<uint8_t>& bytes) {
  auto r = open_object(bytes, ObjectKind::eval_key, preset);
  std::vector<KeySwitchKey> chain;
  const uint8_t n = r.get_u8();
  chain.reserve(n);
  for (uint8_t i = 0; i < n; ++i) chain.push_back(detail::read_switch_key(r, ring));
  return chain;
}

inline std::vector<uint8_t> serialize_helper(const std::string& preset, const EvalHelper& h) {
  return detail::finish_object(ObjectKind::eval_key,
                               static_cast<uint8_t>(EvalKeyKind::helper), preset, h.owner,
                               0, 0, 0, [&](auto& w) { detail::write_helper(w, h); });
}

inline EvalHelper deserialize_helper(const Ring& ring, const std::string& preset,
                                     const std::vector<uint8_t>& bytes) {
  ObjectHeader h;
  auto r = open_object(bytes, ObjectKind::eval_key, preset, &h);
  if (h.flags != static_cast<uint8_t>(EvalKeyKind::helper))
    throw FileFormatError("not a helper object");
  return detail::read_helper(r, ring);
}

inline std::vector<uint8_t> serialize_extended_key(const std::string& preset,
                                                   const ExtendedEvalKey& k) {
  return detail::finish_object(ObjectKind::eval_key,
                               static_cast<uint8_t>(EvalKeyKind::extended), preset, 0,
                               k.source_level, detail::keyset_bitmap(k.keyset), 0,
                               [&](auto& w) { detail::write_extended_key(w, k); });
}

inline ExtendedEvalKey deserialize_extended_key(const Ring& ring, const std::string& preset,
                                                const std::vector<uint8_t>& bytes) {
  ObjectHeader h;
  auto r = open_object(bytes, ObjectKind::eval_key, preset, &h);
  if (h.flags != static_cast<uint8_t>(EvalKeyKind::extended))
    throw FileFormatError("not an extended evaluation key object");
  return detail::read_extended_key(r, ring);
}

// --- exact serialized sizes (no allocation) -------------------------------------------

inline size_t serialized_size(const std::string& preset, const PublicKey& pk) {
  return detail::object_size(ObjectKind::public_key, 0, preset,
                             [&](auto& w) { detail::write_public_key(w, pk); });
}
inline size_t serialized_size(const std::string& preset, const SecretKey& sk) {
  return detail::object_size(ObjectKind::secret_share, 0, preset,
                             [&](auto& w) { detail::write_secret_key(w, sk); });
}
inline size_t serialized_size(const std::string& preset, const LeveledCiphertext& ct) {
  return detail::object_size(ObjectKind::ciphertext, 0, preset,
                             [&](auto& w) { detail::write_ciphertext(w, ct); });
}
inline size_t serialized_size(const std::string& preset, const EvalHelper& h) {
  return detail::object_size(ObjectKind::eval_key, 1, preset,
                             [&](auto& w) { detail::write_helper(w, h); });
}
inline size_t serialized_size(const std::string& preset, const std::vector<KeySwitchKey>& chain) {
  return detail::object_size(ObjectKind::eval_key, 0, preset, [&](auto& w) {
    w.put_u8(static_cast<uint8_t>(chain.size()));
    for (const KeySwitchKey& k : chain) detail::write_switch_key(w, k);
  });
}
inline size_t serialized_size(const std::string& preset, const RingElement& x) {
  return detail::object_size(ObjectKind::ciphertext, 0, preset,
                             [&](auto& w) { detail::write_element(w, x); });
}

// --- file helpers -----------------------------------------------------------------------

inline void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileFormatError("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FileFormatError("short write: " + path);
}

inline std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FileFormatError("cannot open file: " + path);
  const std::streamsize n = in.tellg();
  in.seekg(0);
  std::vector<uint8_t> bytes(static_cast<size_t>(n));
  in.read(reinterpret_cast<char*>(bytes.data()), n);
  if (!in) throw FileFormatError("short read: " + path);
  return bytes;
}

}  // namespace mkthe
