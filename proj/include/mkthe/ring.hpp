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
#include <vector>

#include "mkthe/errors.hpp"
#include "mkthe/modmath.hpp"
#include "mkthe/params.hpp"
#include "mkthe/rng.hpp"

namespace mkthe {

/// An element of R_{q_l} = Z_{q_l}[x]/(x^d + 1). Coefficients are canonical
/// residues in [0, q_l); `level` selects the modulus. Values are immutable in
/// practice: every operation returns a fresh element.
struct RingElement {
  std::vector<uint64_t> coeffs;
  int level = 0;

  bool operator==(const RingElement& other) const = default;
};

namespace detail {

/// Precomputed negacyclic transform tables for one modulus.
struct NttPlan {
  uint64_t q = 0;
  uint32_t n = 0;
  std::vector<uint64_t> root_brev;      // psi^bitrev(i)
  std::vector<uint64_t> inv_root_brev;  // psi^-bitrev(i)
  uint64_t n_inv = 0;

  static uint32_t bit_reverse(uint32_t v, uint32_t bits) {
    uint32_t r = 0;
    for (uint32_t i = 0; i < bits; ++i) r |= ((v >> i) & 1u) << (bits - 1 - i);
    return r;
  }

  /// Builds the plan; requires q prime with q = 1 (mod 2n).
  static NttPlan build(uint64_t q, uint32_t n) {
    NttPlan plan;
    plan.q = q;
    plan.n = n;
    if ((q - 1) % (2ull * n) != 0)
      throw ArgumentError("modulus is not transform-friendly for this degree");
    // Any element of order exactly 2n works; x^((q-1)/2n) has order dividing
    // 2n, and order exactly 2n iff its n-th power is -1.
    uint64_t psi = 0;
    for (uint64_t x = 2;; ++x) {
      const uint64_t cand = pow_mod(x, (q - 1) / (2ull * n), q);
      if (pow_mod(cand, n, q) == q - 1) {
        psi = cand;
        break;
      }
      if (x > 1000) throw ArgumentError("no 2n-th root of unity found");
    }
    const uint64_t psi_inv = inv_mod(psi, q);
    uint32_t bits = 0;
    while ((1u << bits) < n) ++bits;
    plan.root_brev.resize(n);
    plan.inv_root_brev.resize(n);
    uint64_t p = 1, pi = 1;
    std::vector<uint64_t> pow(n), pow_inv(n);
    for (uint32_t i = 0; i < n; ++i) {
      pow[i] = p;
      pow_inv[i] = pi;
      p = mul_mod(p, psi, q);
      pi = mul_mod(pi, psi_inv, q);
    }
    for (uint32_t i = 0; i < n; ++i) {
      plan.root_brev[i] = pow[bit_reverse(i, bits)];
      plan.inv_root_brev[i] = pow_inv[bit_reverse(i, bits)];
    }
    plan.n_inv = inv_mod(n, q);
    return plan;
  }

  void forward(std::vector<uint64_t>& a) const {
    uint32_t t = n;
    for (uint32_t m = 1; m < n; m <<= 1) {
      t >>= 1;
      for (uint32_t i = 0; i < m; ++i) {
        const uint32_t j1 = 2 * i * t;
        const uint64_t s = root_brev[m + i];
        for (uint32_t j = j1; j < j1 + t; ++j) {
          const uint64_t u = a[j];
          const uint64_t v = mul_mod(a[j + t], s, q);
          a[j] = add_mod(u, v, q);
          a[j + t] = sub_mod(u, v, q);
        }
      }
    }
  }

  void inverse(std::vector<uint64_t>& a) const {
    uint32_t t = 1;
    for (uint32_t m = n; m > 1; m >>= 1) {
      uint32_t j1 = 0;
      const uint32_t h = m >> 1;
      for (uint32_t i = 0; i < h; ++i) {
        const uint64_t s = inv_root_brev[h + i];
        for (uint32_t j = j1; j < j1 + t; ++j) {
          const uint64_t u = a[j];
          const uint64_t v = a[j + t];
          a[j] = add_mod(u, v, q);
          a[j + t] = mul_mod(sub_mod(u, v, q), s, q);
        }
        j1 += 2 * t;
      }
      t <<= 1;
    }
    for (uint64_t& x : a) x = mul_mod(x, n_inv, q);
  }
};

}  // namespace detail

/// Arithmetic context: validated parameters plus per-level transform plans.
/// All member operations are pure; a Ring can be shared freely across threads.
class Ring {
 public:
  explicit Ring(RingParams params) : params_(std::move(params)) {
    params_.validate();
    plans_.reserve(params_.moduli.size());
    for (uint64_t q : params_.moduli)
      plans_.push_back(detail::NttPlan::build(q, params_.degree));
  }

  const RingParams& params() const { return params_; }
  uint32_t degree() const { return params_.degree; }
  int top_level() const { return params_.top_level(); }
  uint64_t modulus(int level) const { return params_.modulus(level); }
  uint32_t bit_length(int level) const { return params_.bit_length(level); }
  uint64_t plain_modulus() const { return params_.plain_modulus; }

  RingElement zero(int level) const {
    check_level(level);
    return RingElement{std::vector<uint64_t>(degree(), 0), level};
  }

  RingElement constant(uint64_t value, int level) const {
    RingElement r = zero(level);
    r.coeffs[0] = value % modulus(level);
    return r;
  }

  RingElement from_signed(const std::vector<int64_t>& centered, int level) const {
    check_level(level);
    if (centered.size() != degree()) throw ArgumentError("coefficient count mismatch");
    RingElement r = zero(level);
    for (uint32_t i = 0; i < degree(); ++i)
      r.coeffs[i] = to_canonical(centered[i], modulus(level));
    return r;
  }

  // --- basic arithmetic ---------------------------------------------------

  RingElement add(const RingElement& x, const RingElement& y) const {
    check_pair(x, y);
    const uint64_t q = modulus(x.level);
    RingElement r = x;
    for (uint32_t i = 0; i < degree(); ++i) r.coeffs[i] = add_mod(x.coeffs[i], y.coeffs[i], q);
    return r;
  }

  RingElement sub(const RingElement& x, const RingElement& y) const {
    check_pair(x, y);
    const uint64_t q = modulus(x.level);
    RingElement r = x;
    for (uint32_t i = 0; i < degree(); ++i) r.coeffs[i] = sub_mod(x.coeffs[i], y.coeffs[i], q);
    return r;
  }

  RingElement negate(const RingElement& x) const {
    check_element(x);
    const uint64_t q = modulus(x.level);
    RingElement r = x;
    for (uint32_t i = 0; i < degree(); ++i) r.coeffs[i] = neg_mod(x.coeffs[i], q);
    return r;
  }

  RingElement mul_scalar(const RingElement& x, uint64_t c) const {
    check_element(x);
    const uint64_t q = modulus(x.level);
    RingElement r = x;
    const uint64_t cr = c % q;
    for (uint32_t i = 0; i < degree(); ++i) r.coeffs[i] = mul_mod(x.coeffs[i], cr, q);
    return r;
  }

  /// Product in R_q via the negacyclic transform.
  RingElement mul(const RingElement& x, const RingElement& y) const {
    check_pair(x, y);
    const detail::NttPlan& plan = plans_[static_cast<size_t>(x.level)];
    std::vector<uint64_t> a = x.coeffs;
    std::vector<uint64_t> b = y.coeffs;
    plan.forward(a);
    plan.forward(b);
    for (uint32_t i = 0; i < degree(); ++i) a[i] = mul_mod(a[i], b[i], plan.q);
    plan.inverse(a);
    return RingElement{std::move(a), x.level};
  }

  /// Quadratic-time negacyclic convolution. The transform path must agree
  /// with this exactly; tests use it as the reference.
  RingElement mul_schoolbook(const RingElement& x, const RingElement& y) const {
    check_pair(x, y);
    const uint64_t q = modulus(x.level);
    RingElement r = zero(x.level);
    for (uint32_t i = 0; i < degree(); ++i) {
      if (x.coeffs[i] == 0) continue;
      for (uint32_t j = 0; j < degree(); ++j) {
        const uint64_t p = mul_mod(x.coeffs[i], y.coeffs[j], q);
        const uint32_t k = i + j;
        if (k < degree()) {
          r.coeffs[k] = add_mod(r.coeffs[k], p, q);
        } else {
          r.coeffs[k - degree()] = sub_mod(r.coeffs[k - degree()], p, q);
        }
      }
    }
    return r;
  }

  // --- transform-domain helpers (batched inner products) -------------------

  std::vector<uint64_t> to_transform(const RingElement& x) const {
    check_element(x);
    std::vector<uint64_t> a = x.coeffs;
    plans_[static_cast<size_t>(x.level)].forward(a);
    return a;
  }

  RingElement from_transform(std::vector<uint64_t> vals, int level) const {
    check_level(level);
    plans_[static_cast<size_t>(level)].inverse(vals);
    return RingElement{std::move(vals), level};
  }

  /// acc += a * b, all in the transform domain of `level`.
  void transform_mul_acc(std::vector<uint64_t>& acc, const std::vector<uint64_t>& a,
                         const std::vector<uint64_t>& b, int level) const {
    const uint64_t q = modulus(level);
    for (uint32_t i = 0; i < degree(); ++i)
      acc[i] = add_mod(acc[i], mul_mod(a[i], b[i], q), q);
  }

  // --- sampling -------------------------------------------------------------

  RingElement sample_uniform(SeededRng& rng, int level) const {
    RingElement r = zero(level);
    const uint64_t q = modulus(level);
    for (uint32_t i = 0; i < degree(); ++i) r.coeffs[i] = rng.uniform_below(q);
    return r;
  }

  /// chi: truncated discrete Gaussian, |coefficient| <= noise_bound.
  RingElement sample_error(SeededRng& rng, int level) const {
    RingElement r = zero(level);
    const uint64_t q = modulus(level);
    for (uint32_t i = 0; i < degree(); ++i)
      r.coeffs[i] = to_canonical(
          rng.gaussian_bounded(params_.noise_stddev, params_.noise_bound), q);
    return r;
  }

  RingElement sample_binary(SeededRng& rng, int level) const {
    RingElement r = zero(level);
    for (uint32_t i = 0; i < degree(); ++i) r.coeffs[i] = rng.coin() ? 1 : 0;
    return r;
  }

  /// Uniform centered coefficients in [-bound, bound]; used for smudging.
  RingElement sample_centered(SeededRng& rng, int level, uint64_t bound) const {
    RingElement r = zero(level);
    const uint64_t q = modulus(level);
    for (uint32_t i = 0; i < degree(); ++i)
      r.coeffs[i] = to_canonical(rng.uniform_centered(bound), q);
    return r;
  }

  // --- gadget operations ------------------------------------------------------

  /// Binary digits u_0..u_{beta-1} with sum 2^i u_i = x, coefficient-wise.
  std::vector<RingElement> bit_decomp(const RingElement& x) const {
    check_element(x);
    const uint32_t beta = bit_length(x.level);
    std::vector<RingElement> digits(beta, zero(x.level));
    for (uint32_t i = 0; i < beta; ++i)
      for (uint32_t j = 0; j < degree(); ++j)
        digits[i].coeffs[j] = (x.coeffs[j] >> i) & 1u;
    return digits;
  }

  /// (x, 2x, ..., 2^{beta-1} x) mod q_l.
  std::vector<RingElement> powers_of_two(const RingElement& x) const {
    check_element(x);
    const uint32_t beta = bit_length(x.level);
    const uint64_t q = modulus(x.level);
    std::vector<RingElement> out;
    out.reserve(beta);
    RingElement cur = x;
    for (uint32_t i = 0; i < beta; ++i) {
      out.push_back(cur);
      if (i + 1 < beta)
        for (uint32_t j = 0; j < degree(); ++j) cur.coeffs[j] = add_mod(cur.coeffs[j], cur.coeffs[j], q);
    }
    return out;
  }

  // --- modulus switching ------------------------------------------------------

  /// Scales x from q_l to q_{l-1}, preserving each centered coefficient's
  /// residue mod t. The output is the t-congruent integer nearest to
  /// (q_{l-1}/q_l) * centered(x).
  RingElement rescale(const RingElement& x, int from_level, int to_level) const {
    check_element(x);
    if (x.level != from_level) throw LevelMismatchError("rescale: element not at from_level");
    if (to_level != from_level - 1) throw ArgumentError("rescale: to_level must be from_level - 1");
    if (from_level == 0) throw ArgumentError("rescale: already at level 0");
    const uint64_t q_from = modulus(from_level);
    const uint64_t q_to = modulus(to_level);
    const int64_t t = static_cast<int64_t>(params_.plain_modulus);
    RingElement r = zero(to_level);
    for (uint32_t i = 0; i < degree(); ++i) {
      const int64_t y = center(x.coeffs[i], q_from);
      const __int128 num = static_cast<__int128>(y) * static_cast<__int128>(q_to);
      __int128 base;
      if (num >= 0) {
        base = (num + static_cast<__int128>(q_from) / 2) / static_cast<__int128>(q_from);
      } else {
        base = -((-num + static_cast<__int128>(q_from) / 2) / static_cast<__int128>(q_from));
      }
      int64_t delta =
          static_cast<int64_t>((((static_cast<__int128>(y) - base) % t) + t) % t);
      if (2 * delta > t) delta -= t;
      const int64_t out = static_cast<int64_t>(base) + delta;
      r.coeffs[i] = to_canonical(out, q_to);
    }
    return r;
  }

  /// Re-represents x at another level via the centered view. Only meaningful
  /// for small elements (keys, errors) whose centered coefficients fit both
  /// moduli.
  RingElement lift(const RingElement& x, int to_level) const {
    check_element(x);
    check_level(to_level);
    const uint64_t q_from = modulus(x.level);
    const uint64_t q_to = modulus(to_level);
    RingElement r = zero(to_level);
    for (uint32_t i = 0; i < degree(); ++i)
      r.coeffs[i] = to_canonical(center(x.coeffs[i], q_from), q_to);
    return r;
  }

  // --- inspection --------------------------------------------------------------

  /// Max |coefficient| over the centered view [-q/2, q/2).
  uint64_t inf_norm_centered(const RingElement& x) const {
    check_element(x);
    const uint64_t q = modulus(x.level);
    uint64_t m = 0;
    for (uint64_t c : x.coeffs) {
      const int64_t v = center(c, q);
      const uint64_t a = static_cast<uint64_t>(v < 0 ? -v : v);
      if (a > m) m = a;
    }
    return m;
  }

  /// Per-coefficient residue mod t of the centered representative, in [0, t).
  /// This is the plaintext-relevant residue.
  std::vector<uint64_t> residue_mod_t(const RingElement& x) const {
    check_element(x);
    const uint64_t q = modulus(x.level);
    const int64_t t = static_cast<int64_t>(params_.plain_modulus);
    std::vector<uint64_t> out(degree());
    for (uint32_t i = 0; i < degree(); ++i) {
      int64_t r = center(x.coeffs[i], q) % t;
      if (r < 0) r += t;
      out[i] = static_cast<uint64_t>(r);
    }
    return out;
  }

  /// True when every centered coefficient is divisible by t; used by the
  /// key- and ciphertext-invariant oracles.
  bool divisible_by_t(const RingElement& x) const {
    for (uint64_t r : residue_mod_t(x))
      if (r != 0) return false;
    return true;
  }

  void check_level(int level) const {
    if (level < 0 || level > top_level()) throw LevelMismatchError("level out of range");
  }

  void check_element(const RingElement& x) const {
    check_level(x.level);
    if (x.coeffs.size() != degree()) throw ArgumentError("coefficient count mismatch");
  }

  void check_pair(const RingElement& x, const RingElement& y) const {
    check_element(x);
    check_element(y);
    if (x.level != y.level) throw LevelMismatchError("operands live at different levels");
  }

 private:
  RingParams params_;
  std::vector<detail::NttPlan> plans_;
};

}  // namespace mkthe
