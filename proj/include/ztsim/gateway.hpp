#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ztsim/certs.hpp"
#include "ztsim/governance.hpp"
#include "ztsim/kms.hpp"
#include "ztsim/result.hpp"
#include "ztsim/tee.hpp"

namespace ztsim::gateway {

using certs::Certificate;
using certs::CertificateChain;
using crypto::Digest;
using crypto::PublicKey;
using governance::LogicalTime;

struct CaaRecord {
  std::string domain;
  std::string allowed_issuer;
};

struct CtEntry {
  LogicalTime time;
  Certificate cert;
};

/// Append-only public record of issued certificates.
class CtLog {
 public:
  void append(LogicalTime time, Certificate cert) {
    entries_.push_back(CtEntry{time, std::move(cert)});
  }
  const std::vector<CtEntry>& entries() const { return entries_; }

 private:
  std::vector<CtEntry> entries_;
};

struct Alert {
  std::size_t entry_index = 0;
  std::string domain;
  std::string issuer;
};

/// One alert per log entry inside `zone` whose issuer is not the expected
/// one. Pure and idempotent.
std::vector<Alert> ct_monitor_scan(const CtLog& log, std::string_view zone,
                                   std::string_view expected_issuer);

bool domain_in_zone(std::string_view domain, std::string_view zone);

/// First 16 hex chars of the app id under the wildcard zone.
std::string subdomain_for_app(const Digest& app_id, std::string_view zone);

struct GatewayResponse {
  Bytes body;
  CertificateChain chain;
  std::string served_host;
};

using Backend = std::function<Bytes(ByteView)>;

/// Client-side verification of a served chain: structure and signatures,
/// root equal to the on-chain KMS root, app id still authorized in the
/// registry, validity containing now, and (when given) leaf subject equal to
/// the host that was dialed. Returns the verified app id.
Result<Digest> verify_presented_chain(
    const CertificateChain& chain, const PublicKey& expected_root,
    const governance::RegistrySnapshot& snapshot, LogicalTime now,
    std::optional<std::string_view> expected_host = std::nullopt);

/// Reverse proxy for the wildcard zone: verifies app attestation (via
/// KMS-issued chains or raw quotes), allocates subdomains, issues and serves
/// leaf certificates under CAA policy, and feeds the CT log.
class Gateway {
 public:
  explicit Gateway(std::string zone) : zone_(std::move(zone)) {}

  /// Adopts the gateway's own KMS-issued identity: the chain's root pins the
  /// trusted KMS root, the app CA key signs domain leaves, and the CA cert's
  /// subject becomes the issuer name CAA records and the CT monitor expect.
  Result<void> initialize(const kms::AppKeyBundle& own_bundle);
  bool initialized() const { return initialized_; }
  const PublicKey& kms_root_public() const { return kms_root_public_; }
  const std::string& zone() const { return zone_; }
  const std::string& issuer_name() const { return issuer_name_; }

  Result<std::string> register_app(const CertificateChain& app_chain,
                                   const governance::RegistrySnapshot& snapshot,
                                   LogicalTime now, Backend backend);
  Result<std::string> register_app_with_quote(
      const tee::Quote& quote, const governance::AppManifest& manifest,
      const governance::Chain& chain, LogicalTime now, Backend backend);

  /// Ingress variant: caller-supplied domain plus its CAA record; shares all
  /// verification with register_app.
  Result<std::string> register_custom_domain(
      const CertificateChain& app_chain, const std::string& domain,
      const governance::RegistrySnapshot& snapshot, LogicalTime now,
      Backend backend);

  /// Re-issues the leaf for `host` with a fresh validity window.
  Result<void> renew(const std::string& host, LogicalTime now);

  Result<GatewayResponse> route(const std::string& host, ByteView body,
                                LogicalTime now) const;

  /// allow iff the CAA record for `domain` names `issuer`; error when the
  /// domain is outside the managed zone and carries no record.
  Result<bool> caa_check(const std::string& domain,
                         const std::string& issuer) const;
  void caa_set(const std::string& domain, const std::string& issuer);

  const CtLog& ct_log() const { return ct_; }
  CtLog& ct_log_for_injection() { return ct_; }
  std::vector<Alert> scan() const {
    return ct_monitor_scan(ct_, zone_, issuer_name_);
  }

  /// Scenario hook: points `host` at another entry's backend and chain, the
  /// observable effect of a hijacked name.
  Result<void> hijack_route(const std::string& host,
                            const std::string& target_host);

  std::vector<std::string> hosts() const;
  std::optional<Digest> app_for_host(const std::string& host) const;
  const Certificate* serving_leaf(const std::string& host) const;
  const CertificateChain* serving_chain(const std::string& host) const;
  const std::map<std::string, CaaRecord>& caa_records() const { return caa_; }

  // World persistence hooks: re-install saved state verbatim.
  void restore_route(const std::string& host, const Digest& app_id,
                     CertificateChain chain, Backend backend) {
    routes_[host] = RouteEntry{app_id, std::move(chain), std::move(backend)};
  }
  void restore_ct_entry(LogicalTime time, Certificate cert) {
    ct_.append(time, std::move(cert));
  }

 private:
  struct RouteEntry {
    Digest app_id;
    CertificateChain serving_chain;
    Backend backend;
  };

  Result<std::string> admit(const CertificateChain& app_chain,
                            const std::string& host,
                            const governance::RegistrySnapshot& snapshot,
                            LogicalTime now, Backend backend);
  Result<Certificate> issue_domain_leaf(const std::string& host,
                                        const PublicKey& subject_public,
                                        const Digest& app_id,
                                        std::optional<Digest> quote_digest,
                                        LogicalTime now);

  std::string issuer_name_;
  std::string zone_;
  bool initialized_ = false;
  PublicKey kms_root_public_{};
  Certificate root_cert_;
  Certificate ca_cert_;
  crypto::KeyPair ca_key_;
  std::uint32_t epoch_ = 0;
  std::map<std::string, RouteEntry> routes_;
  std::map<std::string, CaaRecord> caa_;
  CtLog ct_;
};

}  // namespace ztsim::gateway
