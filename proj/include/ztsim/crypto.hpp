#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ztsim/bytes.hpp"
#include "ztsim/result.hpp"
#include "ztsim/rng.hpp"

namespace ztsim::crypto {

// Fixed primitive suite for this repo: SHA-256, HMAC-SHA256 extract/expand
// derivation, Ed25519 signatures, AES-256-GCM. See docs/FORMATS.md.

/// 32-byte collision-resistant hash value. Equality is byte equality.
struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;
  ByteView view() const { return ByteView(bytes.data(), bytes.size()); }
  std::string hex() const;
  static std::optional<Digest> from_hex(std::string_view h);
  static Digest zero() { return Digest{}; }
};

/// 32-byte uniformly random secret. Never serialized into logs or quotes;
/// world-state files are the single documented exception.
struct SecretScalar {
  std::array<std::uint8_t, 32> bytes{};

  auto operator<=>(const SecretScalar&) const = default;
  ByteView view() const { return ByteView(bytes.data(), bytes.size()); }
  static SecretScalar random(DeterministicRng& rng);
};

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

std::string key_hex(const PublicKey& pk);

/// One participant's piece of a shared secret: x-coordinate plus one GF(2^8)
/// y-value per secret byte.
struct KeyShare {
  std::uint8_t index = 0;  // never 0; 0 would leak the constant term
  std::array<std::uint8_t, 32> payload{};

  auto operator<=>(const KeyShare&) const = default;
};

struct KeyPair {
  SecretScalar secret;
  PublicKey public_key{};
};

Digest hash(ByteView data);
inline Digest hash(const Bytes& data) { return hash(ByteView(data)); }

/// Purpose labels accepted by derive_key. The KMS derivation hierarchy uses
/// exactly these; anything else is rejected.
inline constexpr std::array<std::string_view, 4> kDeriveLabels = {
    "app-ca", "disk", "env", "ecdsa"};

/// HKDF-style derivation: extract keyed by parent, then expand with
/// info = purpose || 0x00 || context. Deterministic.
Result<SecretScalar> derive_key(const SecretScalar& parent,
                                std::string_view purpose, ByteView context);

Result<std::vector<KeyShare>> shamir_split(const SecretScalar& secret,
                                           int threshold, int count,
                                           DeterministicRng& rng);

/// Lagrange interpolation at x=0, per byte over GF(2^8). Uses every share
/// given; needs at least `threshold` distinct indices.
Result<SecretScalar> shamir_reconstruct(std::span<const KeyShare> shares,
                                        int threshold);

/// Proactive refresh: adds a fresh random polynomial with zero constant term,
/// so the shared secret is unchanged but every share re-randomizes.
Result<std::vector<KeyShare>> zero_share_refresh(
    std::span<const KeyShare> shares, int threshold, DeterministicRng& rng);

/// Ed25519 keypair; the public key is a pure function of the seed.
Result<KeyPair> keypair_from_seed(const SecretScalar& seed);

Signature sign(const KeyPair& key, ByteView message);

/// Malformed or mismatched signatures verify false, never throw.
bool verify(const PublicKey& pub, ByteView message, const Signature& sig);

inline constexpr std::size_t kAeadNonceLen = 12;
inline constexpr std::size_t kAeadTagLen = 16;

/// AES-256-GCM. Ciphertext = body || 16-byte tag. Nonce must be unique per key.
Result<Bytes> aead_seal(const SecretScalar& key, ByteView nonce, ByteView aad,
                        ByteView plaintext);
Result<Bytes> aead_open(const SecretScalar& key, ByteView nonce, ByteView aad,
                        ByteView ciphertext);

}  // namespace ztsim::crypto
