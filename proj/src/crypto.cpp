#include "ztsim/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cstring>
#include <memory>

namespace ztsim::crypto {

namespace {

using EvpPkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using EvpMdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using EvpCipherCtxPtr =
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

std::array<std::uint8_t, 32> hmac_sha256(ByteView key, ByteView data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int out_len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
       data.size(), out.data(), &out_len);
  return out;
}

// Domain-separation salt for the extract step. Constant per repo build so the
// whole derivation tree is reproducible from the parent secret alone.
constexpr std::string_view kExtractSalt = "ztsim/derive/v1";

bool is_registered_label(std::string_view purpose) {
  return std::find(kDeriveLabels.begin(), kDeriveLabels.end(), purpose) !=
         kDeriveLabels.end();
}

}  // namespace

std::string Digest::hex() const { return to_hex(view()); }

std::optional<Digest> Digest::from_hex(std::string_view h) {
  Bytes raw;
  if (!ztsim::from_hex(h, raw) || raw.size() != 32) return std::nullopt;
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

SecretScalar SecretScalar::random(DeterministicRng& rng) {
  SecretScalar s;
  rng.fill(s.bytes);
  return s;
}

std::string key_hex(const PublicKey& pk) {
  return to_hex(ByteView(pk.data(), pk.size()));
}

Digest hash(ByteView data) {
  Digest d;
  SHA256(data.data(), data.size(), d.bytes.data());
  return d;
}

Result<SecretScalar> derive_key(const SecretScalar& parent,
                                std::string_view purpose, ByteView context) {
  if (!is_registered_label(purpose)) {
    return make_error(Errc::invalid_argument,
                      "unknown derivation purpose: " + std::string(purpose));
  }
  // Extract: PRK = HMAC(salt, parent). Expand: one HKDF block with
  // info = purpose || 0x00 || context (output is exactly one hash wide).
  auto prk = hmac_sha256(ByteView(reinterpret_cast<const std::uint8_t*>(
                                      kExtractSalt.data()),
                                  kExtractSalt.size()),
                         parent.view());
  Bytes info;
  append(info, ByteView(reinterpret_cast<const std::uint8_t*>(purpose.data()),
                        purpose.size()));
  info.push_back(0x00);
  append(info, context);
  info.push_back(0x01);  // HKDF block counter
  auto okm = hmac_sha256(ByteView(prk.data(), prk.size()), info);
  SecretScalar out;
  out.bytes = okm;
  return out;
}

Result<KeyPair> keypair_from_seed(const SecretScalar& seed) {
  EvpPkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                               seed.bytes.data(),
                                               seed.bytes.size()),
                  EVP_PKEY_free);
  if (!pkey) return make_error(Errc::invalid_argument, "bad ed25519 seed");
  KeyPair kp;
  kp.secret = seed;
  std::size_t pub_len = kp.public_key.size();
  if (EVP_PKEY_get_raw_public_key(pkey.get(), kp.public_key.data(),
                                  &pub_len) != 1 ||
      pub_len != kp.public_key.size()) {
    return make_error(Errc::invalid_argument, "ed25519 public key extraction");
  }
  return kp;
}

Signature sign(const KeyPair& key, ByteView message) {
  Signature sig{};
  EvpPkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                               key.secret.bytes.data(),
                                               key.secret.bytes.size()),
                  EVP_PKEY_free);
  EvpMdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::size_t sig_len = sig.size();
  if (!pkey || !ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) !=
          1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &sig_len, message.data(),
                     message.size()) != 1) {
    // Signing with a well-formed key cannot fail; a zeroed signature would
    // never verify, which is the safe direction.
    sig.fill(0);
  }
  return sig;
}

bool verify(const PublicKey& pub, ByteView message, const Signature& sig) {
  EvpPkeyPtr pkey(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                              pub.data(), pub.size()),
                  EVP_PKEY_free);
  if (!pkey) return false;
  EvpMdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr,
                           pkey.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(),
                          message.size()) == 1;
}

Result<Bytes> aead_seal(const SecretScalar& key, ByteView nonce, ByteView aad,
                        ByteView plaintext) {
  if (nonce.size() != kAeadNonceLen) {
    return make_error(Errc::invalid_argument, "nonce must be 12 bytes");
  }
  EvpCipherCtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr,
                                 key.bytes.data(), nonce.data()) != 1) {
    return make_error(Errc::invalid_argument, "aead init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                        static_cast<int>(aad.size())) != 1) {
    return make_error(Errc::invalid_argument, "aead aad");
  }
  Bytes out(plaintext.size() + kAeadTagLen);
  int body_len = 0;
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.data(), &body_len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    return make_error(Errc::invalid_argument, "aead encrypt");
  }
  int final_len = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + body_len, &final_len) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG,
                          static_cast<int>(kAeadTagLen),
                          out.data() + body_len + final_len) != 1) {
    return make_error(Errc::invalid_argument, "aead finalize");
  }
  out.resize(body_len + final_len + kAeadTagLen);
  return out;
}

Result<Bytes> aead_open(const SecretScalar& key, ByteView nonce, ByteView aad,
                        ByteView ciphertext) {
  if (nonce.size() != kAeadNonceLen) {
    return make_error(Errc::invalid_argument, "nonce must be 12 bytes");
  }
  if (ciphertext.size() < kAeadTagLen) {
    return make_error(Errc::decrypt_failed, "ciphertext shorter than tag");
  }
  const std::size_t body_size = ciphertext.size() - kAeadTagLen;
  EvpCipherCtxPtr ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr,
                                 key.bytes.data(), nonce.data()) != 1) {
    return make_error(Errc::invalid_argument, "aead init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(),
                        static_cast<int>(aad.size())) != 1) {
    return make_error(Errc::invalid_argument, "aead aad");
  }
  Bytes out(body_size);
  int body_len = 0;
  if (body_size > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &body_len, ciphertext.data(),
                        static_cast<int>(body_size)) != 1) {
    return make_error(Errc::decrypt_failed, "authentication failed");
  }
  std::uint8_t tag[kAeadTagLen];
  std::memcpy(tag, ciphertext.data() + body_size, kAeadTagLen);
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG,
                          static_cast<int>(kAeadTagLen), tag) != 1) {
    return make_error(Errc::invalid_argument, "aead tag");
  }
  int final_len = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + body_len, &final_len) != 1) {
    return make_error(Errc::decrypt_failed, "authentication failed");
  }
  out.resize(body_len + final_len);
  return out;
}

}  // namespace ztsim::crypto
