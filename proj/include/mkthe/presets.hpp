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

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mkthe/modmath.hpp"
#include "mkthe/params.hpp"

namespace mkthe {

/// Largest prime q <= 2^bits - 1 with q = 1 (mod 2 * degree * t), so that a
/// negacyclic transform exists and modulus switching preserves residues.
inline uint64_t find_chain_prime(uint32_t bits, uint32_t degree, uint64_t t,
                                 uint64_t below = 0) {
  const uint64_t step = 2ull * degree * t;
  uint64_t ceiling = (bits >= 63) ? UINT64_MAX : ((uint64_t(1) << bits) - 1);
  if (below != 0 && below - 1 < ceiling) ceiling = below - 1;
  uint64_t k = (ceiling - 1) / step;
  while (k > 0) {
    const uint64_t q = step * k + 1;
    if (is_prime_u64(q)) return q;
    --k;
  }
  throw ArgumentError("no chain prime found for the requested size");
}

/// Builds a descending prime chain with the given top-level-first bit sizes.
inline std::vector<uint64_t> make_modulus_chain(const std::vector<uint32_t>& bits_desc,
                                                uint32_t degree, uint64_t t) {
  std::vector<uint64_t> chain;  // assembled level-0 first
  uint64_t prev = 0;
  std::vector<uint64_t> top_first;
  for (uint32_t bits : bits_desc) {
    uint64_t q = find_chain_prime(bits, degree, t, prev);
    top_first.push_back(q);
    prev = q;
  }
  chain.assign(top_first.rbegin(), top_first.rend());
  return chain;
}

namespace detail {

inline ParameterPreset make_toy_preset(const std::string& name, uint32_t degree,
                                       uint64_t t, const std::string& use) {
  ParameterPreset p;
  p.name = name;
  p.intended_use = use;
  p.insecure = true;
  RingParams& rp = p.params;
  rp.degree = degree;
  rp.plain_modulus = t;
  rp.noise_bound = 1;
  rp.noise_stddev = 0.8;
  rp.moduli = make_modulus_chain({62, 56, 50, 46}, degree, t);
  rp.smudging_bound = t << 20;
  rp.growth_budget = uint64_t(1) << 20;
  rp.validate();
  return p;
}

}  // namespace detail

/// Built-in desk-scale presets. All are labeled insecure: sizes are chosen to
/// exercise the algebra quickly, not to meet any security level.
///
///   toy     degree 16, t = 7   -- full protocol runs (tally needs t > N)
///   toy64   degree 64, t = 7   -- same at the larger ring degree
///   stump   degree 16, t = 2   -- bit arithmetic, XOR/AND semantics
///   stump64 degree 64, t = 2
///   t5      degree 16, t = 5   -- exhaustive constant-plaintext checks
inline const std::map<std::string, ParameterPreset>& builtin_presets() {
  static const std::map<std::string, ParameterPreset> presets = [] {
    std::map<std::string, ParameterPreset> m;
    for (const ParameterPreset& p : {
             detail::make_toy_preset("toy", 16, 7, "tally"),
             detail::make_toy_preset("toy64", 64, 7, "tally"),
             detail::make_toy_preset("stump", 16, 2, "stump"),
             detail::make_toy_preset("stump64", 64, 2, "stump"),
             detail::make_toy_preset("t5", 16, 5, "tally"),
         }) {
      m.emplace(p.name, p);
    }
    return m;
  }();
  return presets;
}

/// Parses a key=value preset file:
///   degree=16
///   moduli_bits=62,56,50,46
///   plain_modulus=7
///   noise_bound=1
///   noise_stddev=0.8
///   smudging_shift=20
///   intended_use=tally
inline ParameterPreset load_preset_file(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open preset file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FileFormatError("bad preset line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ParameterPreset p;
  p.name = name;
  p.insecure = true;
  p.intended_use = kv.count("intended_use") ? kv["intended_use"] : "tally";
  RingParams& rp = p.params;
  try {
    rp.degree = static_cast<uint32_t>(std::stoul(kv.at("degree")));
    rp.plain_modulus = std::stoull(kv.at("plain_modulus"));
    rp.noise_bound = kv.count("noise_bound") ? std::stoull(kv["noise_bound"]) : 1;
    rp.noise_stddev = kv.count("noise_stddev") ? std::stod(kv["noise_stddev"]) : 0.8;
    std::vector<uint32_t> bits;
    std::stringstream ss(kv.at("moduli_bits"));
    std::string tok;
    while (std::getline(ss, tok, ',')) bits.push_back(static_cast<uint32_t>(std::stoul(tok)));
    rp.moduli = make_modulus_chain(bits, rp.degree, rp.plain_modulus);
    const uint32_t shift = kv.count("smudging_shift")
                               ? static_cast<uint32_t>(std::stoul(kv["smudging_shift"]))
                               : 20;
    rp.smudging_bound = rp.plain_modulus << shift;
  } catch (const std::out_of_range&) {
    throw FileFormatError("preset file missing a required key: " + path);
  } catch (const std::invalid_argument&) {
    throw FileFormatError("preset file has a malformed value: " + path);
  }
  rp.validate();
  return p;
}

/// Resolves a preset by name: built-ins first, then <dir>/<name>.preset for
/// each directory on the MKTHE_PRESET_PATH environment variable
/// (colon-separated).
inline ParameterPreset resolve_preset(const std::string& name) {
  const auto& builtins = builtin_presets();
  if (auto it = builtins.find(name); it != builtins.end()) return it->second;
  if (const char* env = std::getenv("MKTHE_PRESET_PATH")) {
    std::stringstream ss(env);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      if (dir.empty()) continue;
      const std::string path = dir + "/" + name + ".preset";
      if (std::ifstream probe(path); probe) return load_preset_file(path, name);
    }
  }
  throw ArgumentError("unknown preset: " + name);
}

}  // namespace mkthe
