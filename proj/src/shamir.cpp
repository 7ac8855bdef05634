#include "ztsim/crypto.hpp"

#include <array>
#include <set>

namespace ztsim::crypto {

namespace {

// GF(2^8) with the AES reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11b).
// Log/exp tables over generator 0x03.
struct GfTables {
  std::array<std::uint8_t, 256> log{};
  std::array<std::uint8_t, 255> exp{};

  GfTables() {
    std::uint8_t x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = x;
      log[x] = static_cast<std::uint8_t>(i);
      // multiply x by the generator 0x03 = x * 2 + x
      std::uint8_t x2 = static_cast<std::uint8_t>(
          (x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
      x = static_cast<std::uint8_t>(x2 ^ x);
    }
  }
};

const GfTables& tables() {
  static const GfTables t;
  return t;
}

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const auto& t = tables();
  int s = t.log[a] + t.log[b];
  return t.exp[s % 255];
}

std::uint8_t gf_inv(std::uint8_t a) {
  // a != 0 guaranteed by callers (indices are nonzero and distinct).
  const auto& t = tables();
  return t.exp[(255 - t.log[a]) % 255];
}

// Evaluate sum coeffs[k] * x^k at x via Horner.
std::uint8_t poly_eval(std::span<const std::uint8_t> coeffs, std::uint8_t x) {
  std::uint8_t acc = 0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = static_cast<std::uint8_t>(gf_mul(acc, x) ^ *it);
  }
  return acc;
}

Result<void> check_distinct_indices(std::span<const KeyShare> shares) {
  std::set<std::uint8_t> seen;
  for (const auto& s : shares) {
    if (s.index == 0) {
      return make_error(Errc::invalid_argument, "share index 0 is invalid");
    }
    if (!seen.insert(s.index).second) {
      return make_error(Errc::duplicate_index, "duplicate share index");
    }
  }
  return {};
}

// Lagrange interpolation of f(0) per byte position, using all shares given.
SecretScalar interpolate_at_zero(std::span<const KeyShare> shares) {
  SecretScalar out;
  for (std::size_t byte = 0; byte < 32; ++byte) {
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
      // basis_i(0) = prod_{j != i} x_j / (x_j - x_i); subtraction is XOR.
      std::uint8_t basis = 1;
      for (std::size_t j = 0; j < shares.size(); ++j) {
        if (j == i) continue;
        std::uint8_t num = shares[j].index;
        std::uint8_t den =
            static_cast<std::uint8_t>(shares[j].index ^ shares[i].index);
        basis = gf_mul(basis, gf_mul(num, gf_inv(den)));
      }
      acc = static_cast<std::uint8_t>(acc ^
                                      gf_mul(shares[i].payload[byte], basis));
    }
    out.bytes[byte] = acc;
  }
  return out;
}

// With more shares than the threshold the extra points must lie on the same
// degree-(t-1) polynomial; checked by interpolating the first t shares and
// evaluating at the rest.
bool shares_consistent(std::span<const KeyShare> shares, int threshold) {
  const auto t = static_cast<std::size_t>(threshold);
  if (shares.size() <= t) return true;
  for (std::size_t byte = 0; byte < 32; ++byte) {
    for (std::size_t extra = t; extra < shares.size(); ++extra) {
      // Lagrange-evaluate the first-t interpolant at x = shares[extra].index.
      std::uint8_t x = shares[extra].index;
      std::uint8_t acc = 0;
      for (std::size_t i = 0; i < t; ++i) {
        std::uint8_t basis = 1;
        for (std::size_t j = 0; j < t; ++j) {
          if (j == i) continue;
          std::uint8_t num = static_cast<std::uint8_t>(shares[j].index ^ x);
          std::uint8_t den =
              static_cast<std::uint8_t>(shares[j].index ^ shares[i].index);
          basis = gf_mul(basis, gf_mul(num, gf_inv(den)));
        }
        acc = static_cast<std::uint8_t>(
            acc ^ gf_mul(shares[i].payload[byte], basis));
      }
      if (acc != shares[extra].payload[byte]) return false;
    }
  }
  return true;
}

}  // namespace

Result<std::vector<KeyShare>> shamir_split(const SecretScalar& secret,
                                           int threshold, int count,
                                           DeterministicRng& rng) {
  if (threshold < 1 || threshold > count || count > 255) {
    return make_error(Errc::invalid_argument,
                      "need 1 <= threshold <= count <= 255");
  }
  std::vector<KeyShare> shares(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    shares[static_cast<std::size_t>(i)].index =
        static_cast<std::uint8_t>(i + 1);
  }
  std::vector<std::uint8_t> coeffs(static_cast<std::size_t>(threshold));
  for (std::size_t byte = 0; byte < 32; ++byte) {
    coeffs[0] = secret.bytes[byte];
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
      coeffs[k] = static_cast<std::uint8_t>(rng.next_u64());
    }
    for (auto& share : shares) {
      share.payload[byte] = poly_eval(coeffs, share.index);
    }
  }
  return shares;
}

Result<SecretScalar> shamir_reconstruct(std::span<const KeyShare> shares,
                                        int threshold) {
  if (threshold < 1) {
    return make_error(Errc::invalid_argument, "threshold must be >= 1");
  }
  if (auto r = check_distinct_indices(shares); !r) return r.error();
  if (shares.size() < static_cast<std::size_t>(threshold)) {
    return make_error(Errc::insufficient_shares,
                      "fewer shares than threshold");
  }
  return interpolate_at_zero(shares);
}

Result<std::vector<KeyShare>> zero_share_refresh(
    std::span<const KeyShare> shares, int threshold, DeterministicRng& rng) {
  if (threshold < 1 || shares.size() < static_cast<std::size_t>(threshold)) {
    return make_error(Errc::insufficient_shares,
                      "refresh needs a full consistent share set");
  }
  if (auto r = check_distinct_indices(shares); !r) return r.error();
  if (!shares_consistent(shares, threshold)) {
    return make_error(Errc::inconsistent_shares,
                      "shares disagree on the underlying polynomial");
  }
  std::vector<KeyShare> fresh(shares.begin(), shares.end());
  if (threshold == 1) {
    // Degree-0 sharing: the only zero-constant-term polynomial is zero, so
    // shares cannot change without changing the secret.
    return fresh;
  }
  std::vector<std::uint8_t> delta(static_cast<std::size_t>(threshold));
  for (std::size_t byte = 0; byte < 32; ++byte) {
    delta[0] = 0;
    for (std::size_t k = 1; k < delta.size(); ++k) {
      delta[k] = static_cast<std::uint8_t>(rng.next_u64());
    }
    for (auto& share : fresh) {
      share.payload[byte] =
          static_cast<std::uint8_t>(share.payload[byte] ^
                                    poly_eval(delta, share.index));
    }
  }
  return fresh;
}

}  // namespace ztsim::crypto
