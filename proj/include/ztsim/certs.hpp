#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ztsim/bytes.hpp"
#include "ztsim/crypto.hpp"
#include "ztsim/result.hpp"

namespace ztsim::certs {

using crypto::Digest;
using crypto::KeyPair;
using crypto::PublicKey;
using crypto::Signature;

using LogicalTime = std::uint64_t;

// Minimal bespoke certificate, not X.509. Field mapping to X.509 is spelled
// out in docs/FORMATS.md; the guarantees live in the chain structure and the
// app-id / quote-digest extensions.
struct Certificate {
  std::string subject;
  PublicKey subject_public{};
  std::string issuer;
  std::optional<Digest> app_id_ext;
  std::optional<Digest> quote_digest_ext;
  std::uint32_t epoch = 0;
  LogicalTime valid_from = 0;
  LogicalTime valid_until = 0;
  Signature signature{};

  Bytes signed_body() const;
  Bytes canonical() const;
  static Result<Certificate> from_canonical(ByteView data);
};

/// Leaf first, root last; each cert's issuer is the next cert's subject.
struct CertificateChain {
  std::vector<Certificate> certs;

  const Certificate& leaf() const { return certs.front(); }
  const Certificate& root() const { return certs.back(); }
  bool empty() const { return certs.empty(); }

  Bytes canonical() const;
  static Result<CertificateChain> from_canonical(ByteView data);
};

struct CertSpec {
  std::string subject;
  PublicKey subject_public{};
  std::optional<Digest> app_id_ext;
  std::optional<Digest> quote_digest_ext;
  std::uint32_t epoch = 0;
  LogicalTime valid_from = 0;
  LogicalTime valid_until = 0;
};

/// Signs `spec` with `issuer_key` under the issuer's name.
Certificate issue(const CertSpec& spec, std::string_view issuer_name,
                  const KeyPair& issuer_key);

/// Structural + cryptographic chain verification: issuer linkage, signatures,
/// validity windows containing `now`, self-signed root whose key equals
/// `expected_root`. Root mismatch reports foreign-root; time problems report
/// expired-cert; everything else chain-invalid.
Result<void> verify_chain(const CertificateChain& chain,
                          const PublicKey& expected_root, LogicalTime now);

}  // namespace ztsim::certs
