#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "mkthe/protocol.hpp"
#include "oracles.hpp"

using namespace mkthe;

namespace {

struct Fixture {
  std::string preset = "toy";
  Ring ring;
  CommonReference crs;
  SeededRng rng;

  Fixture() : ring(resolve_preset("toy").params), crs(make_crs(ring, 3)), rng(51) {}
};

// Re-checksums a buffer after in-place edits, keeping it structurally valid.
void fix_crc(std::vector<uint8_t>& bytes) {
  const size_t body = bytes.size() - 4;
  const uint32_t crc = crc32_update(0, bytes.data(), body);
  for (int i = 0; i < 4; ++i) bytes[body + i] = static_cast<uint8_t>(crc >> (8 * i));
}

}  // namespace

TEST_CASE("round-trips are the identity for every object kind") {
  Fixture f;
  auto [sk, pk] = kgen(f.ring, f.crs, 1, f.rng);

  SUBCASE("public key") {
    const auto bytes = serialize_public_key(f.preset, pk);
    const PublicKey back = deserialize_public_key(f.ring, f.preset, bytes);
    CHECK(back.rows == pk.rows);
    CHECK(back.owner == pk.owner);
    CHECK(back.crs_seed == pk.crs_seed);
  }
  SUBCASE("secret share") {
    const auto bytes = serialize_secret_share(f.preset, sk);
    const SecretKey back = deserialize_secret_share(f.ring, f.preset, bytes);
    CHECK(back.secrets == sk.secrets);
    CHECK(back.owner == sk.owner);
    CHECK(back.norm == sk.norm);
  }
  SUBCASE("base and extended ciphertexts") {
    auto [sk2, pk2] = kgen(f.ring, f.crs, 2, f.rng);
    const LeveledCiphertext ct = enc(f.ring, pk, plain_constant(f.ring, 3), f.rng);
    for (const LeveledCiphertext& original :
         {ct, extend(f.ring, ct, {&pk, &pk2})}) {
      const auto bytes = serialize_ciphertext(f.preset, original);
      const LeveledCiphertext back = deserialize_ciphertext(f.ring, f.preset, bytes);
      CHECK(back.subvectors == original.subvectors);
      CHECK(back.keyset == original.keyset);
      CHECK(back.level == original.level);
      CHECK(back.key_level == original.key_level);
      CHECK(back.noise == original.noise);
    }
  }
  SUBCASE("gadget ciphertext") {
    auto [gsw, rand_enc] =
        rgsw_enc(f.ring, pk, f.ring.constant(2, f.ring.top_level()), f.ring.top_level(), f.rng);
    const auto bytes = serialize_rgsw(f.preset, gsw);
    const RgswCiphertext back = deserialize_rgsw(f.ring, f.preset, bytes);
    CHECK(back.rows == gsw.rows);
    CHECK(back.keyset == gsw.keyset);
  }
  SUBCASE("switch-key chain") {
    const auto chain = make_mult_keys(f.ring, sk, f.rng);
    const auto bytes = serialize_switch_chain(f.preset, chain);
    const auto back = deserialize_switch_chain(f.ring, f.preset, bytes);
    REQUIRE(back.size() == chain.size());
    for (size_t i = 0; i < chain.size(); ++i) {
      CHECK(back[i].hints == chain[i].hints);
      CHECK(back[i].operating_level == chain[i].operating_level);
      CHECK(back[i].target_level == chain[i].target_level);
    }
  }
  SUBCASE("evaluation helper") {
    const EvalHelper helper = make_eval_helper(f.ring, sk, pk, f.rng);
    const auto bytes = serialize_helper(f.preset, helper);
    const EvalHelper back = deserialize_helper(f.ring, f.preset, bytes);
    REQUIRE(back.levels.size() == helper.levels.size());
    for (size_t l = 0; l < helper.levels.size(); ++l) {
      CHECK(back.levels[l].power_encs.size() == helper.levels[l].power_encs.size());
      for (size_t i = 0; i < helper.levels[l].power_encs.size(); ++i) {
        CHECK(back.levels[l].power_encs[i].rows == helper.levels[l].power_encs[i].rows);
        CHECK(back.levels[l].power_rand[i].rows == helper.levels[l].power_rand[i].rows);
        CHECK(back.levels[l].bit_encs[i].rows == helper.levels[l].bit_encs[i].rows);
      }
    }
  }
  SUBCASE("extended evaluation key") {
    auto [csk, cpk] = kgen(f.ring, f.crs, 7, f.rng);
    const ExtendedEvalKey key =
        dealer_evalkgen(f.ring, {&csk, &sk}, {7, 1}, f.ring.top_level(), f.rng);
    const auto bytes = serialize_extended_key(f.preset, key);
    const ExtendedEvalKey back = deserialize_extended_key(f.ring, f.preset, bytes);
    CHECK(back.hints == key.hints);
    CHECK(back.refresh_hints == key.refresh_hints);
    CHECK(back.hint_noises == key.hint_noises);
    CHECK(back.keyset == key.keyset);
    // The transform cache is rebuilt on load.
    CHECK(back.hints_t == key.hints_t);
  }
  SUBCASE("transcript") {
    Transcript t;
    t.record("client", "evaluator", Phase::evaluate, "evaluation-request", 123);
    t.record("evaluator", "owner:0", Phase::decrypt, "decryption-request", 456);
    const auto bytes = t.serialize(f.preset);
    const Transcript back = Transcript::deserialize(f.preset, bytes);
    CHECK(back.export_lines() == t.export_lines());
  }
}

TEST_CASE("serialized sizes match the encoded byte counts") {
  Fixture f;
  auto [sk, pk] = kgen(f.ring, f.crs, 1, f.rng);
  CHECK(serialized_size(f.preset, pk) == serialize_public_key(f.preset, pk).size());
  CHECK(serialized_size(f.preset, sk) == serialize_secret_share(f.preset, sk).size());
  const LeveledCiphertext ct = enc(f.ring, pk, plain_constant(f.ring, 1), f.rng);
  CHECK(serialized_size(f.preset, ct) == serialize_ciphertext(f.preset, ct).size());
  const auto chain = make_mult_keys(f.ring, sk, f.rng);
  CHECK(serialized_size(f.preset, chain) == serialize_switch_chain(f.preset, chain).size());
}

TEST_CASE("loading rejects damage and mismatches") {
  Fixture f;
  auto [sk, pk] = kgen(f.ring, f.crs, 1, f.rng);
  const LeveledCiphertext ct = enc(f.ring, pk, plain_constant(f.ring, 1), f.rng);
  const auto bytes = serialize_ciphertext(f.preset, ct);

  SUBCASE("truncation fails the checksum") {
    std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 9);
    CHECK_THROWS_AS((void)deserialize_ciphertext(f.ring, f.preset, cut), FileFormatError);
  }
  SUBCASE("a flipped byte fails the checksum") {
    std::vector<uint8_t> bad = bytes;
    bad[bad.size() / 2] ^= 0x40;
    CHECK_THROWS_AS((void)deserialize_ciphertext(f.ring, f.preset, bad), FileFormatError);
  }
  SUBCASE("a higher format version is refused") {
    std::vector<uint8_t> newer = bytes;
    newer[4] = static_cast<uint8_t>(kFormatVersion + 1);
    fix_crc(newer);
    CHECK_THROWS_AS((void)deserialize_ciphertext(f.ring, f.preset, newer), FileFormatError);
  }
  SUBCASE("the wrong object kind is refused") {
    CHECK_THROWS_AS((void)deserialize_public_key(f.ring, f.preset, bytes), FileFormatError);
  }
  SUBCASE("the wrong preset is refused") {
    CHECK_THROWS_AS((void)deserialize_ciphertext(f.ring, "stump", bytes), FileFormatError);
  }
  SUBCASE("bad magic is refused") {
    std::vector<uint8_t> bad = bytes;
    bad[0] = 'X';
    fix_crc(bad);
    CHECK_THROWS_AS((void)deserialize_ciphertext(f.ring, f.preset, bad), FileFormatError);
  }
}

TEST_CASE("file helpers round-trip and report missing files") {
  Fixture f;
  auto [sk, pk] = kgen(f.ring, f.crs, 1, f.rng);
  const auto bytes = serialize_secret_share(f.preset, sk);
  const std::string path = "/tmp/mkthe_test_share.mkth";
  write_file(path, bytes);
  CHECK(read_file(path) == bytes);
  std::remove(path.c_str());
  CHECK_THROWS_AS((void)read_file(path), FileFormatError);
}
