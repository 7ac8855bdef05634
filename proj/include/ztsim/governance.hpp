#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ztsim/bytes.hpp"
#include "ztsim/crypto.hpp"
#include "ztsim/result.hpp"
#include "ztsim/tee.hpp"

namespace ztsim::governance {

using crypto::Digest;
using crypto::PublicKey;
using crypto::Signature;

using LogicalTime = std::uint64_t;

/// The only clock in the system. Governance transactions advance it by one;
/// the harness advances it to model time passing (cert validity, handover
/// deadlines). No wall clock anywhere.
class LogicalClock {
 public:
  LogicalTime now() const { return t_; }
  LogicalTime advance(std::uint64_t ticks = 1) { return t_ += ticks; }
  void restore(LogicalTime t) { t_ = t; }

 private:
  LogicalTime t_ = 0;
};

/// Deployment descriptor: compose text, image digests, config blob.
struct AppManifest {
  Bytes compose_text;
  std::vector<Digest> image_digests;
  Bytes config;

  /// hash(compose_text || image digests || config); the unit of code
  /// authorization and the app's initial identity.
  Digest app_digest() const;
  Bytes canonical() const;
  static Result<AppManifest> from_canonical(ByteView data);
};

struct GovernanceParams {
  std::vector<PublicKey> signers;
  std::uint32_t approval_threshold = 0;
  std::vector<Digest> authorized_instance_ids;  // empty = unrestricted
};

enum class ProposalKind : std::uint8_t { add_code = 0, revoke_code = 1 };

/// Bytes a signer signs to approve a proposal. add_code uses
/// app_id || digest; revoke_code prepends a domain separator so approvals
/// cannot be replayed across kinds.
Bytes approval_message(const Digest& app_id, const Digest& code_digest,
                       ProposalKind kind);

struct UpgradeProposal {
  Digest proposal_id;
  Digest new_code_digest;
  ProposalKind kind = ProposalKind::add_code;
  LogicalTime created_at = 0;
  std::map<PublicKey, Signature> approvals;
};

struct AppAuthState {
  Digest app_id;
  std::set<Digest> allowed_code_digests;
  std::set<Digest> authorized_instance_ids;  // empty = unrestricted
  std::vector<PublicKey> signers;
  std::uint32_t approval_threshold = 0;
  std::map<Digest, UpgradeProposal> pending;
  std::uint64_t proposal_seq = 0;
};

struct GenesisConfig {
  std::vector<Digest> os_digests;
  Digest kms_node_digest;
  tee::AttestationRoot attestation_root;
  std::string wildcard_zone = "apps.ztsim.test";
};

enum class RotationKind : std::uint8_t { shares = 0, root = 1 };

struct KmsAuthState {
  std::set<Digest> os_digests;
  Digest kms_node_digest;
  tee::AttestationRoot attestation_root;
  std::string wildcard_zone;
  std::optional<tee::Quote> first_node_quote;
  std::set<PublicKey> registered_kms_nodes;
  std::optional<PublicKey> root_public;
  std::uint32_t root_epoch = 0;
  std::set<std::uint32_t> destroyed_epochs;
  std::map<Digest, AppAuthState> apps;
  // code digest -> owning app; kept in sync with every AppAuth so the KMS
  // can resolve which app a running manifest belongs to.
  std::map<Digest, Digest> code_index;
  std::map<std::string, std::uint64_t> counters;  // "apphex/name" -> value
  std::set<std::uint8_t> open_rotation_tickets;
};

struct EventRecord {
  std::uint64_t seq = 0;
  LogicalTime time = 0;
  std::string kind;
  Bytes payload;
  Digest payload_digest;  // hash(payload), checked during audit replay
};

enum class ApprovalStatus : std::uint8_t {
  recorded,
  threshold_met,
  duplicate_noop,  // idempotent repeat by the same signer; warning, no event
};

/// Gateway-facing view of the registry.
struct RegistrySnapshot {
  std::optional<PublicKey> root_public;
  std::set<Digest> authorized_apps;  // registered with non-empty allowed set
};

/// KmsAuth + per-app AppAuth as one deterministic, single-writer state
/// machine with an append-only event log. Every successful mutating call
/// appends exactly one event; replaying the log from genesis reproduces the
/// state bit-for-bit.
class Chain {
 public:
  Result<void> genesis(const GenesisConfig& config, LogicalClock& clock);

  Result<void> register_kms_node(const PublicKey& node_pub,
                                 LogicalClock& clock);
  Result<void> record_kms_root(const PublicKey& root_public,
                               const tee::Quote& first_node_quote,
                               LogicalClock& clock);

  /// Opens a one-shot rotation ticket; the matching record_* call consumes it.
  Result<void> authorize_rotation(RotationKind kind, LogicalClock& clock);
  bool rotation_authorized(RotationKind kind) const;
  Result<void> record_share_rotation(LogicalClock& clock);
  Result<void> record_root_rotation(std::uint32_t new_epoch,
                                    const PublicKey& new_root_public,
                                    LogicalClock& clock);
  Result<void> record_root_destruction(std::uint32_t epoch,
                                       LogicalClock& clock);

  Result<Digest> register_app(const AppManifest& manifest,
                              const GovernanceParams& params,
                              LogicalClock& clock);
  Result<Digest> propose_upgrade(const Digest& app_id,
                                 const Digest& new_code_digest,
                                 const PublicKey& proposer, ProposalKind kind,
                                 LogicalClock& clock);
  Result<ApprovalStatus> approve_upgrade(const Digest& app_id,
                                         const Digest& proposal_id,
                                         const PublicKey& signer,
                                         const Signature& signature,
                                         LogicalClock& clock);
  Result<void> authorize_instance(const Digest& app_id,
                                  const Digest& instance_id,
                                  LogicalClock& clock);

  Result<std::uint64_t> counter_bump(const Digest& app_id,
                                     std::string_view name,
                                     LogicalClock& clock);

  // Reads; never touch the log.
  Result<std::uint64_t> counter_read(const Digest& app_id,
                                     std::string_view name) const;
  Result<bool> is_code_authorized(const Digest& app_id,
                                  const Digest& code_digest) const;
  std::optional<Digest> find_app_by_code(const Digest& code_digest) const;
  const AppAuthState* app(const Digest& app_id) const;
  const KmsAuthState& kms_auth() const { return state_; }
  bool initialized() const { return initialized_; }
  RegistrySnapshot registry_snapshot() const;

  const std::vector<EventRecord>& event_log() const { return log_; }

  /// Rebuilds a chain by folding the event records through the same
  /// transition code the live path uses. Payload digests are validated;
  /// the error message carries the first diverging index.
  static Result<Chain> replay(const std::vector<EventRecord>& events);

  // Line-delimited JSON export/import of the log, and a canonical JSON dump
  // of the state (sorted keys, hex-encoded digests) for byte-exact diffs.
  std::string export_events_jsonl() const;
  static Result<std::vector<EventRecord>> parse_events_jsonl(
      const std::string& text);
  std::string export_state_json() const;

 private:
  struct TxResult {
    Bytes reply;  // canonical encoding of the op's return value
  };

  // Single transition entry point shared by live calls and replay.
  Result<TxResult> apply(const std::string& kind, ByteView payload,
                         LogicalTime time, bool replaying);
  Result<TxResult> commit(const std::string& kind, Bytes payload,
                          LogicalClock& clock);

  KmsAuthState state_;
  std::vector<EventRecord> log_;
  bool initialized_ = false;
  LogicalTime last_time_ = 0;
};

std::string counter_key(const Digest& app_id, std::string_view name);

}  // namespace ztsim::governance
