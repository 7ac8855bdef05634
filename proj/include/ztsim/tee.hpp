#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "ztsim/bytes.hpp"
#include "ztsim/crypto.hpp"
#include "ztsim/result.hpp"

namespace ztsim::tee {

using crypto::Digest;
using crypto::KeyPair;
using crypto::PublicKey;
using crypto::Signature;

enum class Register : std::uint8_t { mrtd = 0, rtmr0, rtmr1, rtmr2, rtmr3 };

Result<Register> register_from_name(std::string_view name);
std::string_view register_name(Register r);

/// MRTD + RTMR0..3 register bank. Registers start all-zero and change only
/// through extend(); everything else gets read-only access.
class MeasurementState {
 public:
  static MeasurementState initial() { return MeasurementState{}; }

  const Digest& mrtd() const { return regs_[0]; }
  const Digest& rtmr(int i) const { return regs_[static_cast<std::size_t>(i + 1)]; }

  Bytes canonical() const;  // mrtd || rtmr0..3, 160 bytes
  static Result<MeasurementState> from_canonical(ByteView data);

  auto operator<=>(const MeasurementState&) const = default;

  friend Result<MeasurementState> extend(const MeasurementState& state,
                                         Register reg, const Digest& event);

 private:
  std::array<Digest, 5> regs_{};
};

/// new register value = hash(old_value || event); other registers unchanged.
Result<MeasurementState> extend(const MeasurementState& state, Register reg,
                                const Digest& event);

struct BootManifest {
  Digest ovmf_digest;
  Digest vm_config_digest;
  Digest kernel_digest;
  Digest initrd_rootfs_digest;
  Digest app_digest;
  // App instances also measure the key-management identity they will talk to;
  // KMS nodes boot without one (no root exists before bootstrap).
  std::optional<Digest> kms_root_pub_digest;
};

/// Runs the measured-boot sequence: MRTD <- ovmf, RTMR0 <- vm config,
/// RTMR1 <- kernel, RTMR2 <- initrd/rootfs, RTMR3 <- app (then the KMS root
/// binding when present). Order is fixed.
MeasurementState boot(const BootManifest& manifest);

/// Summary digest of the OS portion of the register bank
/// (MRTD || RTMR0 || RTMR1 || RTMR2); the unit registered as an authorized
/// OS build.
Digest os_digest(const MeasurementState& state);

/// RTMR3 value an app manifest should produce.
Digest expected_rtmr3(const Digest& app_digest,
                      const std::optional<Digest>& kms_root_pub_digest);

inline constexpr std::size_t kReportDataLen = 64;
using ReportData = std::array<std::uint8_t, kReportDataLen>;

struct Quote {
  MeasurementState measurements;
  ReportData report_data{};
  PublicKey tee_key_public{};
  std::uint32_t firmware_version = 0;
  // Vendor root's signature over tee_key_public; certifies the hardware key.
  Signature vendor_endorsement{};
  Signature signature{};

  /// Everything but the trailing signature, in canonical order.
  Bytes signed_body() const;
  Bytes canonical() const;  // signed_body || signature, 388 bytes
  static Result<Quote> from_canonical(ByteView data);
};

struct AttestationRoot {
  PublicKey vendor_public{};
  std::uint32_t min_firmware_version = 0;
};

struct VerifiedQuote {
  MeasurementState measurements;
  ReportData report_data{};
  PublicKey tee_key_public{};
  std::uint32_t firmware_version = 0;
};

/// A simulated VM-level TEE: per-instance hardware key endorsed by the
/// vendor, one register bank, quotes on demand.
class TeeInstance {
 public:
  TeeInstance() = default;  // placeholder; real instances come from create()

  static TeeInstance create(const KeyPair& vendor_key,
                            std::uint32_t firmware_version,
                            DeterministicRng& rng);

  void boot_with(const BootManifest& manifest);
  bool booted() const { return booted_; }

  Result<Quote> generate_quote(ByteView report_data) const;

  const MeasurementState& measurements() const { return state_; }
  const PublicKey& hardware_public() const { return hw_key_.public_key; }
  /// Stable instance identity: hash of the hardware public key.
  Digest instance_id() const;
  std::uint32_t firmware_version() const { return firmware_; }

  // World persistence needs the raw pieces back.
  const KeyPair& hardware_key() const { return hw_key_; }
  const Signature& endorsement() const { return endorsement_; }
  static TeeInstance restore(const KeyPair& hw_key,
                             const Signature& endorsement,
                             std::uint32_t firmware,
                             const MeasurementState& state, bool booted);

 private:
  KeyPair hw_key_;
  Signature endorsement_{};
  std::uint32_t firmware_ = 0;
  MeasurementState state_;
  bool booted_ = false;
};

Result<VerifiedQuote> verify_quote(const Quote& quote,
                                   const AttestationRoot& root);

}  // namespace ztsim::tee
