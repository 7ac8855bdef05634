#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ztsim/bytes.hpp"
#include "ztsim/certs.hpp"
#include "ztsim/crypto.hpp"
#include "ztsim/governance.hpp"
#include "ztsim/result.hpp"
#include "ztsim/tee.hpp"

namespace ztsim::kms {

using crypto::Digest;
using crypto::KeyPair;
using crypto::KeyShare;
using crypto::PublicKey;
using crypto::SecretScalar;
using governance::Chain;
using governance::LogicalClock;
using governance::LogicalTime;

enum class Mode : std::uint8_t { duplication = 0, threshold = 1 };

/// One epoch's root material: two independent secrets (CA and signing) plus
/// the public identity derived from the CA secret.
struct RootKeyState {
  std::uint32_t epoch = 0;
  SecretScalar root_ca_secret;
  SecretScalar root_sign_secret;
  PublicKey root_public{};
  // Epoch creation time anchors certificate validity, which keeps
  // request_app_keys a pure function of (epoch, app_id, instance_id).
  LogicalTime created_at = 0;
};

/// Per-node threshold material for one epoch: one share of each root secret.
struct RootShares {
  KeyShare ca;
  KeyShare sign;
};

struct AppKeyBundle {
  Digest app_id;
  Digest instance_id;
  std::uint32_t epoch = 0;
  SecretScalar app_ca_secret;
  SecretScalar disk_key;
  SecretScalar env_key;
  KeyPair app_sign_key;
  certs::CertificateChain cert_chain;

  Bytes canonical() const;
  static Result<AppKeyBundle> from_canonical(ByteView data);
};

struct KmsNode {
  KeyPair node_key;
  tee::TeeInstance instance;
  bool member = false;
  bool alive = true;
  // duplication mode: full root state per live epoch
  std::map<std::uint32_t, RootKeyState> root_cache;
  // threshold mode: shares per live epoch
  std::map<std::uint32_t, RootShares> shares;
};

struct EpochStatus {
  std::uint32_t current_epoch = 0;
  PublicKey current_public{};
  bool handover_open = false;
  std::uint32_t predecessor_epoch = 0;
  LogicalTime handover_deadline = 0;
};

inline constexpr std::uint64_t kLeafLifetime = 1000;
inline constexpr std::uint64_t kCaLifetime = 1'000'000;

enum class CertKind : std::uint8_t { app = 0, gateway = 1 };

/// root CA (self-signed) -> app CA (binds app_id) -> leaf (binds
/// subject_public). Every certificate carries the epoch; validity is anchored
/// to the epoch's creation time.
certs::CertificateChain issue_cert_chain(const RootKeyState& root,
                                         const Digest& app_id,
                                         const PublicKey& subject_public,
                                         CertKind kind,
                                         std::optional<Digest> quote_digest);

// Wire tags for the client/node envelope protocol.
inline constexpr std::uint16_t kMsgDeriveRequest = 1;
inline constexpr std::uint16_t kMsgDeriveResponse = 2;
inline constexpr std::uint16_t kMsgError = 3;
inline constexpr std::uint16_t kMsgEpochStatusRequest = 4;
inline constexpr std::uint16_t kMsgEpochStatusResponse = 5;

struct DeriveRequest {
  tee::Quote quote;
  governance::AppManifest manifest;
  Digest instance_id;
  std::optional<std::uint32_t> epoch;

  Bytes canonical() const;
  static Result<DeriveRequest> from_canonical(ByteView data);
};

/// The off-chain node network. Single-threaded simulation: nodes are state
/// records, the network object sequences every operation, and all the trust
/// checks run against the governance chain.
class KmsNetwork {
 public:
  KmsNetwork(Mode mode, int threshold);

  Mode mode() const { return mode_; }
  int threshold() const { return threshold_; }

  /// Adds an unadmitted candidate node; returns its index.
  std::size_t add_node(tee::TeeInstance instance, KeyPair node_key);
  KmsNode& node(std::size_t i) { return nodes_[i]; }
  const KmsNode& node(std::size_t i) const { return nodes_[i]; }
  std::size_t node_count() const { return nodes_.size(); }

  /// First-node bootstrap: verifies the node's own quote against the chain's
  /// attestation root and code digest, generates the epoch-1 root, records
  /// root_public plus the quote on-chain.
  Result<EpochStatus> bootstrap_first_node(Chain& chain, LogicalClock& clock,
                                           DeterministicRng& rng);

  /// Candidate must be registered on-chain and present a valid quote over the
  /// KMS node code digest. Duplication copies the root; threshold reshares.
  Result<void> admit_node(std::size_t existing, std::size_t candidate,
                          Chain& chain, LogicalClock& clock,
                          DeterministicRng& rng);

  /// The governance-gated key release. Gate order: quote verification,
  /// OS measurement, code authorization (manifest binding + on-chain allow
  /// list), instance restriction. First failing gate wins.
  Result<AppKeyBundle> request_app_keys(const tee::Quote& quote,
                                        const governance::AppManifest& manifest,
                                        const Digest& instance_id,
                                        std::optional<std::uint32_t> epoch,
                                        Chain& chain, LogicalClock& clock);

  /// Same operation via a specific node; fails if that node is down.
  Result<AppKeyBundle> request_app_keys_via(std::size_t node_index,
                                            const tee::Quote& quote,
                                            const governance::AppManifest& manifest,
                                            const Digest& instance_id,
                                            std::optional<std::uint32_t> epoch,
                                            Chain& chain, LogicalClock& clock);

  /// Proactive share refresh. Threshold mode only, requires an open
  /// governance ticket and every member reachable; the root (and therefore
  /// every derived key) is unchanged.
  Result<void> rotate_shares(Chain& chain, LogicalClock& clock,
                             DeterministicRng& rng);

  /// Full root replacement with a dual-epoch handover window. Old-epoch
  /// material survives until the deadline, then is erased and its
  /// destruction logged.
  Result<EpochStatus> rotate_root(Chain& chain, std::uint64_t handover_len,
                                  LogicalClock& clock, DeterministicRng& rng);

  EpochStatus epoch_status() const;

  /// Erases expired predecessor material; called implicitly by every public
  /// operation and exposed for the harness clock loop.
  void tick(Chain& chain, LogicalClock& clock);

  /// Envelope-framed entry point for client messages delivered to a node.
  Bytes handle_message(std::size_t node_index, ByteView wire, Chain& chain,
                       LogicalClock& clock);

  struct EpochMeta {
    PublicKey root_public{};
    LogicalTime created_at = 0;
  };

  // World persistence hooks.
  std::optional<std::uint32_t> handover_old_epoch() const {
    return handover_old_epoch_;
  }
  LogicalTime handover_deadline() const { return handover_deadline_; }
  std::uint32_t current_epoch() const { return current_epoch_; }
  const std::map<std::uint32_t, EpochMeta>& epochs() const { return epochs_; }
  void restore_epochs(std::uint32_t current,
                      std::map<std::uint32_t, EpochMeta> epochs,
                      std::optional<std::uint32_t> handover_old,
                      LogicalTime handover_deadline);

 private:
  Result<void> verify_node_quote(const KmsNode& node, const Chain& chain,
                                 tee::Quote& out_quote) const;
  Result<RootKeyState> materialize_root(std::uint32_t epoch,
                                        std::optional<std::size_t> via) const;
  Result<AppKeyBundle> derive_bundle(const RootKeyState& root,
                                     const Digest& app_id,
                                     const Digest& instance_id,
                                     std::optional<Digest> quote_digest) const;
  void distribute_epoch(const RootKeyState& root, DeterministicRng& rng);
  std::vector<std::size_t> member_indices() const;
  std::vector<std::size_t> alive_member_indices() const;
  int effective_threshold() const;

  Mode mode_;
  int threshold_;
  std::vector<KmsNode> nodes_;
  std::uint32_t current_epoch_ = 0;
  std::map<std::uint32_t, EpochMeta> epochs_;  // live epochs only
  std::optional<std::uint32_t> handover_old_epoch_;
  LogicalTime handover_deadline_ = 0;
};

}  // namespace ztsim::kms
