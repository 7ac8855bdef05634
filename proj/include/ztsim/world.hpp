#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ztsim/gateway.hpp"
#include "ztsim/governance.hpp"
#include "ztsim/kms.hpp"
#include "ztsim/result.hpp"
#include "ztsim/sealed_storage.hpp"
#include "ztsim/simnet.hpp"
#include "ztsim/tee.hpp"

namespace ztsim::harness {

using crypto::Digest;

struct WorldConfig {
  std::uint64_t seed = 42;
  std::string zone = "apps.ztsim.test";
  std::uint32_t min_firmware = 1;
  std::uint32_t node_firmware = 2;
  std::string kms_mode = "duplication";  // or "threshold"
  int kms_threshold = 1;
  int kms_nodes = 3;
  std::uint32_t app_signer_count = 3;
  std::uint32_t app_threshold = 2;

  static Result<WorldConfig> from_json(const std::string& text);
  std::string to_json() const;
};

struct AppRecord {
  governance::AppManifest manifest;
  Digest app_id;       // digest of the registered manifest
  bool registered = false;
};

struct InstanceRecord {
  std::string app;
  governance::AppManifest running;  // what the instance actually boots
  tee::TeeInstance instance;
  std::optional<kms::AppKeyBundle> bundle;
};

struct DeployOptions {
  std::uint32_t firmware = 0;  // 0 = config default
  bool tamper_image = false;   // swap one image digest after registration
  bool bind_kms_root = true;
};

struct KeyRequestOptions {
  bool tamper_quote = false;
  bool forge_quote = false;  // self-endorsed key, the non-TEE impersonator
  std::optional<std::uint32_t> epoch;
};

/// One fully wired system: governance chain, KMS node network, gateway,
/// deployed app instances, sealed volumes, and the message fabric. All
/// randomness flows from the config seed.
class World {
 public:
  explicit World(WorldConfig cfg);

  // -- construction steps (the walkthrough order) --
  Result<void> do_genesis(bool fault_empty_os = false);
  Result<void> bootstrap_kms(bool fault_wrong_code = false);
  Result<void> admit_all(bool fault_skip_registration = false);
  Result<void> deploy_gateway(bool fault_tamper_quote = false,
                              bool fault_foreign_root = false);

  // -- app lifecycle --
  /// Creates a manifest under `name` without touching the chain.
  Result<Digest> define_app(const std::string& name);
  /// Creates and registers; returns the app id.
  Result<Digest> register_app(const std::string& name,
                              std::uint32_t threshold = 0);
  /// Registers an already defined app.
  Result<Digest> register_defined_app(const std::string& name,
                                      std::uint32_t threshold = 0);
  Result<std::string> deploy_instance(const std::string& app,
                                      const std::string& inst,
                                      DeployOptions opts = {});
  /// Requests keys over the envelope protocol through the message fabric.
  Result<void> request_keys(const std::string& inst,
                            KeyRequestOptions opts = {});

  /// Proposes `new_manifest` for `app` and gathers `approvals` signatures.
  Result<Digest> propose_upgrade(const std::string& app,
                                 const governance::AppManifest& new_manifest);
  Result<governance::ApprovalStatus> approve(const std::string& app,
                                             const Digest& proposal_id,
                                             std::size_t signer_index);

  // -- storage --
  Result<void> seal_volume(const std::string& inst, const std::string& vol,
                           ByteView data);
  Result<Bytes> unseal_volume(const std::string& inst, const std::string& vol);
  /// Cross-epoch or cross-instance re-seal; maps a dead source epoch to the
  /// documented unrecoverable data-loss error.
  Result<void> migrate_volume(const std::string& vol,
                              const std::string& inst_from,
                              const std::string& inst_to,
                              const std::string& vol_out);

  // -- gateway --
  Result<std::string> gateway_register(const std::string& inst,
                                       gateway::Backend backend = nullptr);
  /// Routes through the gateway and verifies the served chain client-side.
  Result<Bytes> client_fetch(const std::string& host);
  Result<void> hijack(const std::string& app_a, const std::string& app_b);
  void inject_rogue_cert(const std::string& domain, const std::string& issuer);
  std::vector<gateway::Alert> ct_scan() { return gw_.scan(); }

  // -- rotation / failure controls --
  Result<void> authorize_rotation(governance::RotationKind kind);
  Result<void> rotate_shares();
  Result<void> rotate_root(std::uint64_t handover_len);
  Result<void> kill_node(std::size_t index);
  void advance_clock(std::uint64_t ticks);
  /// Verifies that `size` node states cannot recompute an app's keys.
  Result<void> coalition_check(const std::string& inst, std::size_t size);

  // -- accessors --
  governance::Chain& chain() { return chain_; }
  const governance::Chain& chain() const { return chain_; }
  kms::KmsNetwork& net() { return net_; }
  gateway::Gateway& gw() { return gw_; }
  governance::LogicalClock& clock() { return clock_; }
  DeterministicRng& rng() { return rng_; }
  storage::GovernanceCounterService& counters() { return counters_; }
  SimNetwork& fabric() { return fabric_; }
  const WorldConfig& config() const { return cfg_; }
  const std::map<std::string, AppRecord>& apps() const { return apps_; }
  const std::map<std::string, InstanceRecord>& instances() const {
    return instances_;
  }
  InstanceRecord* instance(const std::string& name);
  const storage::SealedVolume* volume(const std::string& name) const;
  void put_volume(const std::string& name, storage::SealedVolume v) {
    volumes_[name] = std::move(v);
  }
  std::string host_for(const std::string& app) const;

  // -- persistence (operator CLI state file) --
  std::string save_json() const;
  static Result<std::unique_ptr<World>> load_json(const std::string& text);

 private:
  governance::AppManifest make_manifest(const std::string& name);
  tee::BootManifest boot_manifest_for(const governance::AppManifest& m,
                                      bool bind_root) const;
  Result<kms::AppKeyBundle> request_over_wire(const tee::Quote& quote,
                                              const governance::AppManifest& m,
                                              const Digest& instance_id,
                                              std::optional<std::uint32_t> e);
  void register_node_actors();
  gateway::Backend echo_backend(const std::string& app_name);

  WorldConfig cfg_;
  DeterministicRng rng_;
  governance::LogicalClock clock_;
  governance::Chain chain_;
  crypto::KeyPair vendor_;
  tee::BootManifest os_base_;
  governance::AppManifest kms_manifest_;
  std::vector<crypto::KeyPair> signers_;
  kms::KmsNetwork net_;
  gateway::Gateway gw_;
  storage::GovernanceCounterService counters_;
  SimNetwork fabric_;
  std::map<std::string, AppRecord> apps_;
  std::map<std::string, InstanceRecord> instances_;
  std::map<std::string, storage::SealedVolume> volumes_;
  bool nodes_created_ = false;
};

}  // namespace ztsim::harness
