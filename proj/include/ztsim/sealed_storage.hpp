#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "ztsim/bytes.hpp"
#include "ztsim/governance.hpp"
#include "ztsim/kms.hpp"
#include "ztsim/result.hpp"

namespace ztsim::storage {

using crypto::Digest;
using governance::LogicalClock;

struct VolumeHeader {
  Digest app_id;
  std::uint32_t epoch = 0;
  std::string counter_name;
  std::uint64_t counter_value = 0;
  std::array<std::uint8_t, crypto::kAeadNonceLen> nonce{};

  Bytes canonical() const;
};

/// Encrypted volume. The header rides as AEAD associated data, so every
/// field (epoch, counter, nonce) is authenticated with the payload.
struct SealedVolume {
  VolumeHeader header;
  Bytes ciphertext;

  /// File format: "ZTSV" || version 0x01 || header || u32 len || ciphertext.
  Bytes serialize() const;
  static Result<SealedVolume> parse(ByteView data);
};

/// A sealed volume plus provenance for cross-instance restore.
struct BackupBlob {
  SealedVolume volume;
  Digest source_instance;

  Bytes serialize() const;  // "ZTSB" || 0x01 || source || volume bytes
  static Result<BackupBlob> parse(ByteView data);
};

/// Monotonic-counter authority consulted at seal/unseal time.
class CounterService {
 public:
  virtual ~CounterService() = default;
  virtual Result<std::uint64_t> bump(const Digest& app_id,
                                     std::string_view name) = 0;
  virtual Result<std::uint64_t> read(const Digest& app_id,
                                     std::string_view name) = 0;
};

/// The authoritative counter: the governance chain's counter registry.
class GovernanceCounterService : public CounterService {
 public:
  GovernanceCounterService(governance::Chain& chain, LogicalClock& clock)
      : chain_(chain), clock_(clock) {}

  /// Simulates an outage; sealing fails closed while unavailable.
  void set_available(bool available) { available_ = available; }

  Result<std::uint64_t> bump(const Digest& app_id,
                             std::string_view name) override;
  Result<std::uint64_t> read(const Digest& app_id,
                             std::string_view name) override;

 private:
  governance::Chain& chain_;
  LogicalClock& clock_;
  bool available_ = true;
};

/// Untrusted in-memory counter for offline tests only: it provides no
/// rollback protection across processes and is never the authority.
class LocalCounterService : public CounterService {
 public:
  Result<std::uint64_t> bump(const Digest& app_id,
                             std::string_view name) override;
  Result<std::uint64_t> read(const Digest& app_id,
                             std::string_view name) override;

 private:
  std::map<std::string, std::uint64_t> counters_;
};

/// Bumps the app's counter, embeds the new value in the authenticated
/// header, encrypts under the bundle's disk key. Fails closed when the
/// counter authority is unreachable.
Result<SealedVolume> seal(const kms::AppKeyBundle& bundle, ByteView plaintext,
                          CounterService& counters,
                          std::string_view counter_name,
                          DeterministicRng& rng);

/// Returns the plaintext iff the AEAD opens and the embedded counter value
/// equals or exceeds the last known value for that name.
Result<Bytes> unseal(const kms::AppKeyBundle& bundle,
                     const SealedVolume& volume, CounterService& counters);

/// Plaintext-preserving re-seal under another bundle (new epoch during a
/// handover, or another instance of the same app). Bumps the counter.
Result<SealedVolume> migrate(const SealedVolume& volume,
                             const kms::AppKeyBundle& old_bundle,
                             const kms::AppKeyBundle& new_bundle,
                             CounterService& counters, DeterministicRng& rng);

}  // namespace ztsim::storage
