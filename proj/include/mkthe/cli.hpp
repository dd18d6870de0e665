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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mkthe/protocol.hpp"

namespace mkthe::cli {

/// Exit codes, machine-readable alongside the error-category line on stderr.
enum ExitCode : int {
  ok = 0,
  bad_args = 2,
  bad_file = 3,
  crypto_failure = 4,
  noise_overflow = 5,
};

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
  return dir.empty() ? name : dir + "/" + name;
}

/// meta.cfg: line-based key=value state shared by the phase commands.
inline std::map<std::string, std::string> read_meta(const std::string& dir) {
  std::ifstream in(join_path(dir, "meta.cfg"));
  if (!in) throw FileFormatError("missing meta.cfg in " + dir + " (run setup first)");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FileFormatError("bad meta line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

inline void write_meta(const std::string& dir, const std::map<std::string, std::string>& kv) {
  std::ofstream out(join_path(dir, "meta.cfg"));
  if (!out) throw FileFormatError("cannot write meta.cfg in " + dir);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

inline uint64_t meta_u64(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FileFormatError("meta.cfg is missing key: " + key);
  return std::stoull(it->second);
}

inline std::string share_file(uint32_t index) {
  return "owner_share_" + std::to_string(index) + ".mkth";
}

struct Workspace {
  std::string dir;
  std::string preset_name;
  Ring ring;
  CommonReference crs;
  uint32_t owners;

  static Workspace open(const std::string& dir) {
    const auto meta = read_meta(dir);
    const auto it = meta.find("preset");
    if (it == meta.end()) throw FileFormatError("meta.cfg is missing key: preset");
    const ParameterPreset preset = resolve_preset(it->second);
    Ring ring(preset.params);
    CommonReference crs = make_crs(ring, meta_u64(meta, "crs_seed"));
    return Workspace{dir, preset.name, std::move(ring), std::move(crs),
                     static_cast<uint32_t>(meta_u64(meta, "owners"))};
  }

  std::string path(const std::string& name) const { return join_path(dir, name); }
};

inline std::vector<DecisionStump> parse_stumps(const std::string& text, uint32_t owners) {
  std::vector<DecisionStump> stumps;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::stringstream bits(group);
    std::string bit;
    std::vector<uint64_t> vals;
    while (std::getline(bits, bit, ',')) vals.push_back(std::stoull(bit));
    if (vals.size() != 3)
      throw ArgumentError("each stump needs three bits: threshold,labelA,labelB");
    stumps.push_back(DecisionStump{vals[0], vals[1], vals[2],
                                   static_cast<uint32_t>(stumps.size())});
    stumps.back().validate();
  }
  if (stumps.size() != owners)
    throw ArgumentError("need exactly one stump per owner");
  return stumps;
}

inline std::vector<DecisionStump> random_stumps(uint32_t owners, uint64_t seed) {
  SeededRng rng(seed ^ 0x5bf03635ULL);
  std::vector<DecisionStump> stumps;
  for (uint32_t i = 0; i < owners; ++i)
    stumps.push_back(DecisionStump{rng.coin(), rng.coin(), rng.coin(), i});
  return stumps;
}

}  // namespace detail

struct CommonArgs {
  std::string preset = "toy";
  uint32_t owners = 3;
  uint64_t seed = 0;
  std::string dir;
  unsigned threads = 1;
  bool dump_transcript = false;
  uint64_t client_bit = 1;
  std::string stumps_text;
};

// --- phase commands ------------------------------------------------------------------

inline void cmd_setup(const CommonArgs& args, std::ostream& out) {
  if (args.dir.empty()) throw ArgumentError("setup needs --out DIR");
  std::filesystem::create_directories(args.dir);
  const ParameterPreset preset = resolve_preset(args.preset);
  Ring ring(preset.params);
  const uint64_t crs_seed = args.seed ^ 0x9e3779b97f4a7c15ULL;
  CommonReference crs = make_crs(ring, crs_seed);
  SeededRng rng(args.seed);
  SeededRng dealer_rng = rng.fork("dealer");
  const JointKeyMaterial material =
      dealer_keygen(ring, crs, args.owners, Simulation::kJointKey, dealer_rng);

  using detail::join_path;
  write_file(join_path(args.dir, "joint_pk.mkth"),
             serialize_public_key(preset.name, material.joint_pk));
  write_file(join_path(args.dir, "joint_helper.mkth"),
             serialize_helper(preset.name, material.joint_helper));
  write_file(join_path(args.dir, "joint_mult_keys.mkth"),
             serialize_switch_chain(preset.name, material.mult_keys));
  write_file(join_path(args.dir, "joint_relin_keys.mkth"),
             serialize_switch_chain(preset.name, material.relin_keys));
  write_file(join_path(args.dir, "joint_refresh_keys.mkth"),
             serialize_switch_chain(preset.name, material.refresh_keys));
  // One artifact per owner: shares are never bundled.
  for (uint32_t i = 0; i < args.owners; ++i)
    write_file(join_path(args.dir, detail::share_file(i)),
               serialize_secret_share(preset.name, material.shares[i]));
  detail::write_meta(args.dir, {{"preset", preset.name},
                                {"owners", std::to_string(args.owners)},
                                {"seed", std::to_string(args.seed)},
                                {"crs_seed", std::to_string(crs_seed)}});
  out << "setup complete: " << args.owners << " shares under preset " << preset.name
      << (preset.insecure ? " (toy parameters, not secure)" : "") << '\n';
}

inline void cmd_keygen(const CommonArgs& args, std::ostream& out) {
  if (args.dir.empty()) throw ArgumentError("keygen needs --out DIR");
  auto ws = detail::Workspace::open(args.dir);
  SeededRng rng(args.seed);
  auto [sk, pk] = kgen(ws.ring, ws.crs, Simulation::kClientKey, rng);
  const EvalHelper helper = make_eval_helper(ws.ring, sk, pk, rng);
  write_file(ws.path("client_pk.mkth"), serialize_public_key(ws.preset_name, pk));
  write_file(ws.path("client_sk.mkth"), serialize_secret_share(ws.preset_name, sk));
  write_file(ws.path("client_helper.mkth"), serialize_helper(ws.preset_name, helper));
  out << "client key pair and helper written\n";
}

inline void cmd_encrypt(const CommonArgs& args, std::ostream& out) {
  if (args.dir.empty()) throw ArgumentError("encrypt needs --out DIR");
  auto ws = detail::Workspace::open(args.dir);
  if (args.client_bit > 1) throw ArgumentError("--x must be a bit");
  const std::vector<DecisionStump> stumps =
      args.stumps_text.empty() ? detail::random_stumps(ws.owners, args.seed)
                               : detail::parse_stumps(args.stumps_text, ws.owners);
  const PublicKey joint_pk = deserialize_public_key(
      ws.ring, ws.preset_name, read_file(ws.path("joint_pk.mkth")));
  const PublicKey client_pk = deserialize_public_key(
      ws.ring, ws.preset_name, read_file(ws.path("client_pk.mkth")));
  SeededRng rng(args.seed);
  for (uint32_t i = 0; i < ws.owners; ++i) {
    const auto enc_bit = [&](uint64_t bit, const std::string& tag) {
      const LeveledCiphertext ct = enc(ws.ring, joint_pk, plain_constant(ws.ring, bit), rng);
      write_file(ws.path("stump_" + std::to_string(i) + "_" + tag + ".mkth"),
                 serialize_ciphertext(ws.preset_name, ct));
    };
    enc_bit(stumps[i].threshold_bit, "y");
    enc_bit(stumps[i].label_a, "a");
    enc_bit(stumps[i].label_b, "b");
  }
  const LeveledCiphertext x_ct =
      enc(ws.ring, client_pk, plain_constant(ws.ring, args.client_bit), rng);
  write_file(ws.path("ct_x.mkth"), serialize_ciphertext(ws.preset_name, x_ct));
  out << "encrypted " << ws.owners << " stumps and the client bit\n";
}

inline void cmd_evaluate(const CommonArgs& args, std::ostream& out) {
  if (args.dir.empty()) throw ArgumentError("evaluate needs --out DIR");
  auto ws = detail::Workspace::open(args.dir);
  const PublicKey joint_pk = deserialize_public_key(
      ws.ring, ws.preset_name, read_file(ws.path("joint_pk.mkth")));
  const PublicKey client_pk = deserialize_public_key(
      ws.ring, ws.preset_name, read_file(ws.path("client_pk.mkth")));
  const EvalHelper joint_helper = deserialize_helper(
      ws.ring, ws.preset_name, read_file(ws.path("joint_helper.mkth")));
  const EvalHelper client_helper = deserialize_helper(
      ws.ring, ws.preset_name, read_file(ws.path("client_helper.mkth")));
  const std::vector<KeySwitchKey> relin_keys = deserialize_switch_chain(
      ws.ring, ws.preset_name, read_file(ws.path("joint_relin_keys.mkth")));
  const LeveledCiphertext x_ct = deserialize_ciphertext(
      ws.ring, ws.preset_name, read_file(ws.path("ct_x.mkth")));

  if (ws.ring.plain_modulus() <= ws.owners)
    throw ProtocolError("plaintext modulus too small for the tally");
  const std::vector<const PublicKey*> pair = {&client_pk, &joint_pk};
  const std::vector<const EvalHelper*> helpers = {&client_helper, &joint_helper};
  const int top = ws.ring.top_level();
  const ExtendedEvalKey key_top =
      extended_evalkgen(ws.ring, pair, helpers, top, args.threads);
  SeededRng rng(args.seed);
  const LeveledCiphertext one_ct =
      enc(ws.ring, joint_pk, plain_constant(ws.ring, 1), rng);
  const LeveledCiphertext ext_x = extend(ws.ring, x_ct, pair);
  const KeySwitchKey* relin =
      ws.ring.plain_modulus() == 2 ? nullptr : &relin_keys.at(static_cast<size_t>(top));

  LeveledCiphertext tally;
  for (uint32_t i = 0; i < ws.owners; ++i) {
    const auto load = [&](const std::string& tag) {
      return deserialize_ciphertext(
          ws.ring, ws.preset_name,
          read_file(ws.path("stump_" + std::to_string(i) + "_" + tag + ".mkth")));
    };
    const LeveledCiphertext vote =
        eval_stump_circuit(ws.ring, load("y"), load("a"), load("b"), one_ct, ext_x, pair,
                           relin, key_top);
    tally = i == 0 ? vote : eval_add_ext(ws.ring, tally, vote);
  }
  write_file(ws.path("result.mkth"), serialize_ciphertext(ws.preset_name, tally));
  out << "forest evaluated; encrypted tally written (dimension "
      << tally.subvector_count() << "x2)\n";
}

inline void cmd_decrypt(const CommonArgs& args, std::ostream& out) {
  if (args.dir.empty()) throw ArgumentError("decrypt needs --out DIR");
  auto ws = detail::Workspace::open(args.dir);
  const LeveledCiphertext result = deserialize_ciphertext(
      ws.ring, ws.preset_name, read_file(ws.path("result.mkth")));
  const SecretKey client_sk = deserialize_secret_share(
      ws.ring, ws.preset_name, read_file(ws.path("client_sk.mkth")));

  size_t joint_pos = result.keyset.size();
  for (size_t p = 0; p < result.keyset.size(); ++p)
    if (result.keyset[p] == Simulation::kJointKey) joint_pos = p;
  if (joint_pos == result.keyset.size())
    throw KeysetMismatchError("result is not under the joint key");

  SeededRng rng(args.seed);
  std::vector<PartialDecryption> parts;
  for (uint32_t i = 0; i < ws.owners; ++i) {
    const SecretKey share = deserialize_secret_share(
        ws.ring, ws.preset_name, read_file(ws.path(detail::share_file(i))));
    parts.push_back(partial_decrypt(ws.ring, share, i, result.subvectors[joint_pos][1],
                                    result.key_level, 1, rng));
  }
  const RingElement rho = aggregate_partials(ws.ring, parts, ws.owners);

  Client client;
  client.sk = client_sk;
  const double rho_noise = static_cast<double>(ws.ring.plain_modulus()) * ws.owners *
                           static_cast<double>(ws.ring.params().smudging_bound);
  const Plaintext tally = client.finalize(ws.ring, result, rho, rho_noise);
  const uint64_t count = tally.empty() ? 0 : tally[0];
  out << "tally: " << count << '\n'
      << "majority bit: " << (2 * count > ws.owners ? 1 : 0) << '\n';
}

inline void cmd_demo(const CommonArgs& args, std::ostream& out) {
  SimulationConfig config;
  config.preset = args.preset;
  config.n_owners = args.owners;
  config.seed = args.seed;
  config.threads = args.threads;
  if (!args.dir.empty()) {
    std::filesystem::create_directories(args.dir);
    config.dump_dir = args.dir;
  }
  std::vector<DecisionStump> stumps =
      args.stumps_text.empty() ? std::vector<DecisionStump>{}
                               : detail::parse_stumps(args.stumps_text, args.owners);
  Transcript transcript;
  const DemoReport report = run_demo(config, std::move(stumps), args.client_bit, &transcript);
  out << report.to_text();
  if (!args.dir.empty())
    write_file(detail::join_path(args.dir, "transcript.mkth"),
               transcript.serialize(args.preset));
  if (args.dump_transcript) {
    out << "transcript:\n" << transcript.export_lines();
  }
}

// --- entry point ------------------------------------------------------------------------

inline int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  // A `--config FILE` anywhere supplies key=value defaults; explicit flags win.
  for (size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    const std::string path = args[i + 1];
    args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
    std::ifstream cfg(path);
    if (!cfg) {
      err << "error-category: bad-file\ncannot open config file: " << path << '\n';
      return bad_file;
    }
    std::vector<std::string> defaults;
    std::string line;
    while (std::getline(cfg, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        err << "error-category: bad-file\nbad config line: " << line << '\n';
        return bad_file;
      }
      const std::string flag = "--" + line.substr(0, eq);
      bool overridden = false;
      for (const std::string& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) overridden = true;
      if (!overridden) defaults.push_back(flag + "=" + line.substr(eq + 1));
    }
    // Insert after the subcommand name so they bind to it.
    args.insert(args.size() > 1 ? args.begin() + 1 : args.end(), defaults.begin(),
                defaults.end());
    break;
  }

  CLI::App app{"Threshold + multi-key homomorphic evaluation of encrypted decision stumps"};
  app.require_subcommand(1);

  CommonArgs common;
  const auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--preset", common.preset, "Parameter preset name")
        ->envname("MKTHE_PRESET");
    cmd->add_option("--owners", common.owners, "Number of model owners");
    cmd->add_option("--seed", common.seed, "Deterministic seed");
    cmd->add_option("--threads", common.threads, "Worker threads for key generation");
    if (with_out) cmd->add_option("--out", common.dir, "Working directory");
  };

  CLI::App* setup = app.add_subcommand("setup", "Dealer: joint key, shares, helper");
  add_common(setup, true);
  CLI::App* keygen_cmd = app.add_subcommand("keygen", "Client: key pair and helper");
  add_common(keygen_cmd, true);
  CLI::App* encrypt_cmd = app.add_subcommand("encrypt", "Encrypt stumps and the client bit");
  add_common(encrypt_cmd, true);
  encrypt_cmd->add_option("--x", common.client_bit, "Client input bit");
  encrypt_cmd->add_option("--stumps", common.stumps_text,
                          "Stumps as y,a,b;y,a,b;... (default: seed-derived)");
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate the encrypted forest");
  add_common(evaluate_cmd, true);
  CLI::App* decrypt_cmd = app.add_subcommand("decrypt", "Distributed decryption of the result");
  add_common(decrypt_cmd, true);
  CLI::App* demo = app.add_subcommand("demo", "All four phases in-process, with a report");
  add_common(demo, true);
  demo->add_option("--x", common.client_bit, "Client input bit");
  demo->add_option("--stumps", common.stumps_text, "Stumps as y,a,b;... (default: seed-derived)");
  demo->add_flag("--dump-transcript", common.dump_transcript, "Print the message transcript");

  try {
    std::vector<const char*> argv;
    argv.push_back("mkthe");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends print through CLI11's machinery.
      return app.exit(e, out, err);
    }
    err << "error-category: bad-args\n" << e.what() << '\n';
    return bad_args;
  }

  try {
    if (setup->parsed()) cmd_setup(common, out);
    else if (keygen_cmd->parsed()) cmd_keygen(common, out);
    else if (encrypt_cmd->parsed()) cmd_encrypt(common, out);
    else if (evaluate_cmd->parsed()) cmd_evaluate(common, out);
    else if (decrypt_cmd->parsed()) cmd_decrypt(common, out);
    else if (demo->parsed()) cmd_demo(common, out);
    return ok;
  } catch (const NoiseOverflowError& e) {
    err << "error-category: noise-overflow\n" << e.what() << '\n';
    return noise_overflow;
  } catch (const FileFormatError& e) {
    err << "error-category: bad-file\n" << e.what() << '\n';
    return bad_file;
  } catch (const ArgumentError& e) {
    err << "error-category: bad-args\n" << e.what() << '\n';
    return bad_args;
  } catch (const Error& e) {
    err << "error-category: crypto-failure\n" << e.what() << '\n';
    return crypto_failure;
  }
}

}  // namespace mkthe::cli
