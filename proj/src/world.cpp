#include "ztsim/world.hpp"

#include <algorithm>

#include "json.hpp"
#include "ztsim/codec.hpp"

namespace ztsim::harness {

namespace {

using nlohmann::json;

kms::Mode mode_from(const std::string& name) {
  return name == "threshold" ? kms::Mode::threshold : kms::Mode::duplication;
}

Digest rand_digest(DeterministicRng& rng) {
  Digest d;
  rng.fill(d.bytes);
  return d;
}

Digest pubkey_digest(const crypto::PublicKey& pk) {
  return crypto::hash(ByteView(pk.data(), pk.size()));
}

std::string seed_hex(const crypto::KeyPair& kp) {
  return to_hex(kp.secret.view());
}

Result<crypto::KeyPair> keypair_from_hex(const std::string& hex) {
  Bytes raw;
  if (!from_hex(hex, raw) || raw.size() != 32) {
    return make_error(Errc::parse_error, "bad key seed");
  }
  crypto::SecretScalar seed;
  std::copy(raw.begin(), raw.end(), seed.bytes.begin());
  return crypto::keypair_from_seed(seed);
}

Result<Digest> digest_from_hex_str(const std::string& hex) {
  auto d = Digest::from_hex(hex);
  if (!d) return make_error(Errc::parse_error, "bad digest hex");
  return *d;
}

// All subsets of `pool` with exactly `k` elements.
void coalitions_of(const std::vector<std::size_t>& pool, std::size_t k,
                   std::size_t start, std::vector<std::size_t>& scratch,
                   std::vector<std::vector<std::size_t>>& out) {
  if (scratch.size() == k) {
    out.push_back(scratch);
    return;
  }
  for (std::size_t i = start; i < pool.size(); ++i) {
    scratch.push_back(pool[i]);
    coalitions_of(pool, k, i + 1, scratch, out);
    scratch.pop_back();
  }
}

}  // namespace

Result<WorldConfig> WorldConfig::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return make_error(Errc::parse_error, "config is not a JSON object");
  }
  WorldConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("zone")) cfg.zone = j["zone"].get<std::string>();
  if (j.contains("min_firmware")) {
    cfg.min_firmware = j["min_firmware"].get<std::uint32_t>();
  }
  if (j.contains("node_firmware")) {
    cfg.node_firmware = j["node_firmware"].get<std::uint32_t>();
  }
  if (j.contains("kms_mode")) cfg.kms_mode = j["kms_mode"].get<std::string>();
  if (j.contains("kms_threshold")) {
    cfg.kms_threshold = j["kms_threshold"].get<int>();
  }
  if (j.contains("kms_nodes")) cfg.kms_nodes = j["kms_nodes"].get<int>();
  if (j.contains("app_signer_count")) {
    cfg.app_signer_count = j["app_signer_count"].get<std::uint32_t>();
  }
  if (j.contains("app_threshold")) {
    cfg.app_threshold = j["app_threshold"].get<std::uint32_t>();
  }
  if (cfg.kms_nodes < 1 || cfg.kms_threshold < 1 ||
      cfg.app_signer_count < 1 || cfg.app_threshold < 1 ||
      cfg.app_threshold > cfg.app_signer_count) {
    return make_error(Errc::invalid_argument, "config values out of range");
  }
  return cfg;
}

std::string WorldConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["zone"] = zone;
  j["min_firmware"] = min_firmware;
  j["node_firmware"] = node_firmware;
  j["kms_mode"] = kms_mode;
  j["kms_threshold"] = kms_threshold;
  j["kms_nodes"] = kms_nodes;
  j["app_signer_count"] = app_signer_count;
  j["app_threshold"] = app_threshold;
  return j.dump(2);
}

World::World(WorldConfig cfg)
    : cfg_(std::move(cfg)),
      rng_(cfg_.seed),
      vendor_(crypto::keypair_from_seed(crypto::SecretScalar::random(rng_))
                  .take()),
      net_(mode_from(cfg_.kms_mode), cfg_.kms_threshold),
      gw_(cfg_.zone),
      counters_(chain_, clock_) {
  os_base_.ovmf_digest = rand_digest(rng_);
  os_base_.vm_config_digest = rand_digest(rng_);
  os_base_.kernel_digest = rand_digest(rng_);
  os_base_.initrd_rootfs_digest = rand_digest(rng_);
  kms_manifest_ = make_manifest("kms-node");
  for (std::uint32_t i = 0; i < cfg_.app_signer_count; ++i) {
    signers_.push_back(
        crypto::keypair_from_seed(crypto::SecretScalar::random(rng_)).take());
  }
}

governance::AppManifest World::make_manifest(const std::string& name) {
  governance::AppManifest m;
  m.compose_text = to_bytes("services:\n  " + name + ":\n    image: " + name);
  m.image_digests = {rand_digest(rng_), rand_digest(rng_)};
  m.config = to_bytes("name=" + name);
  return m;
}

tee::BootManifest World::boot_manifest_for(const governance::AppManifest& m,
                                           bool bind_root) const {
  tee::BootManifest bm = os_base_;
  bm.app_digest = m.app_digest();
  if (bind_root && net_.current_epoch() != 0) {
    bm.kms_root_pub_digest =
        pubkey_digest(net_.epoch_status().current_public);
  }
  return bm;
}

Result<void> World::do_genesis(bool fault_empty_os) {
  governance::GenesisConfig g;
  if (!fault_empty_os) {
    tee::BootManifest probe = os_base_;
    probe.app_digest = Digest::zero();
    g.os_digests = {tee::os_digest(tee::boot(probe))};
  }
  g.kms_node_digest = kms_manifest_.app_digest();
  g.attestation_root = {vendor_.public_key, cfg_.min_firmware};
  g.wildcard_zone = cfg_.zone;
  return chain_.genesis(g, clock_);
}

void World::register_node_actors() {
  for (std::size_t i = 0; i < net_.node_count(); ++i) {
    fabric_.register_actor(
        "kms-node-" + std::to_string(i), [this, i](ByteView payload) {
          return net_.handle_message(i, payload, chain_, clock_);
        });
  }
}

Result<void> World::bootstrap_kms(bool fault_wrong_code) {
  if (!nodes_created_) {
    for (int i = 0; i < cfg_.kms_nodes; ++i) {
      auto inst = tee::TeeInstance::create(vendor_, cfg_.node_firmware, rng_);
      tee::BootManifest bm = os_base_;
      bm.app_digest = (fault_wrong_code && i == 0)
                          ? rand_digest(rng_)
                          : kms_manifest_.app_digest();
      inst.boot_with(bm);
      auto key =
          crypto::keypair_from_seed(crypto::SecretScalar::random(rng_)).take();
      net_.add_node(std::move(inst), std::move(key));
    }
    nodes_created_ = true;
    register_node_actors();
  }
  auto r = net_.bootstrap_first_node(chain_, clock_, rng_);
  if (!r) return r.error();
  return {};
}

Result<void> World::admit_all(bool fault_skip_registration) {
  for (std::size_t i = 1; i < net_.node_count(); ++i) {
    if (net_.node(i).member) continue;
    if (!fault_skip_registration) {
      if (auto r = chain_.register_kms_node(net_.node(i).node_key.public_key,
                                            clock_);
          !r) {
        return r.error();
      }
    }
    if (auto r = net_.admit_node(0, i, chain_, clock_, rng_); !r) {
      return r.error();
    }
  }
  return {};
}

Result<Digest> World::define_app(const std::string& name) {
  if (apps_.contains(name)) {
    return make_error(Errc::invalid_argument, "app name already in use");
  }
  AppRecord rec;
  rec.manifest = make_manifest(name);
  rec.app_id = rec.manifest.app_digest();
  apps_[name] = rec;
  return rec.app_id;
}

Result<Digest> World::register_defined_app(const std::string& name,
                                           std::uint32_t threshold) {
  auto it = apps_.find(name);
  if (it == apps_.end()) {
    return make_error(Errc::unknown_app, "no such app: " + name);
  }
  governance::GovernanceParams params;
  for (const auto& s : signers_) params.signers.push_back(s.public_key);
  params.approval_threshold = threshold ? threshold : cfg_.app_threshold;
  auto app_id = chain_.register_app(it->second.manifest, params, clock_);
  if (!app_id) return app_id.error();
  it->second.registered = true;
  return app_id.value();
}

Result<Digest> World::register_app(const std::string& name,
                                   std::uint32_t threshold) {
  if (auto r = define_app(name); !r) return r.error();
  return register_defined_app(name, threshold);
}

Result<std::string> World::deploy_instance(const std::string& app,
                                           const std::string& inst,
                                           DeployOptions opts) {
  auto it = apps_.find(app);
  if (it == apps_.end()) {
    return make_error(Errc::unknown_app, "no such app: " + app);
  }
  if (instances_.contains(inst)) {
    return make_error(Errc::invalid_argument, "instance name already in use");
  }
  InstanceRecord rec;
  rec.app = app;
  rec.running = it->second.manifest;
  if (opts.tamper_image) {
    rec.running.image_digests[0] = rand_digest(rng_);
  }
  rec.instance = tee::TeeInstance::create(
      vendor_, opts.firmware ? opts.firmware : cfg_.node_firmware, rng_);
  rec.instance.boot_with(boot_manifest_for(rec.running, opts.bind_kms_root));
  instances_[inst] = std::move(rec);
  return inst;
}

Result<kms::AppKeyBundle> World::request_over_wire(
    const tee::Quote& quote, const governance::AppManifest& m,
    const Digest& instance_id, std::optional<std::uint32_t> e) {
  std::optional<std::size_t> target;
  for (std::size_t i = 0; i < net_.node_count(); ++i) {
    if (net_.node(i).member && net_.node(i).alive) {
      target = i;
      break;
    }
  }
  if (!target) {
    return make_error(Errc::kms_unavailable, "no live KMS node");
  }
  kms::DeriveRequest req{quote, m, instance_id, e};
  Bytes wire = encode_envelope(
      Envelope{kms::kMsgDeriveRequest, req.canonical()});
  auto reply = fabric_.request("client",
                               "kms-node-" + std::to_string(*target), wire);
  if (!reply) return reply.error();
  auto env = decode_envelope(reply.value());
  if (!env) return env.error();
  if (env.value().kind == kms::kMsgError) {
    ByteReader r(env.value().payload);
    auto name = r.var_string();
    auto message = r.var_string();
    Errc code = Errc::parse_error;
    if (!name || !errc_from_name(name.value(), code)) {
      return make_error(Errc::parse_error, "malformed error envelope");
    }
    return make_error(code, message ? message.value() : "");
  }
  if (env.value().kind != kms::kMsgDeriveResponse) {
    return make_error(Errc::parse_error, "unexpected reply kind");
  }
  return kms::AppKeyBundle::from_canonical(env.value().payload);
}

Result<void> World::request_keys(const std::string& inst,
                                 KeyRequestOptions opts) {
  auto* rec = instance(inst);
  if (!rec) {
    return make_error(Errc::invalid_argument, "no such instance: " + inst);
  }
  tee::Quote quote;
  if (opts.forge_quote) {
    // Non-TEE impersonator: copies honest measurements but endorses its own
    // key because no vendor will.
    auto fake_key =
        crypto::keypair_from_seed(crypto::SecretScalar::random(rng_)).take();
    quote.measurements = rec->instance.measurements();
    quote.tee_key_public = fake_key.public_key;
    quote.firmware_version = rec->instance.firmware_version();
    quote.vendor_endorsement = crypto::sign(
        fake_key, ByteView(fake_key.public_key.data(),
                           fake_key.public_key.size()));
    quote.signature = crypto::sign(fake_key, quote.signed_body());
  } else {
    auto q = rec->instance.generate_quote(ByteView{});
    if (!q) return q.error();
    quote = std::move(q).take();
    if (opts.tamper_quote) quote.signature[7] ^= 0x20;
  }
  auto bundle = request_over_wire(quote, rec->running,
                                  rec->instance.instance_id(), opts.epoch);
  if (!bundle) return bundle.error();
  rec->bundle = std::move(bundle).take();
  return {};
}

Result<Digest> World::propose_upgrade(
    const std::string& app, const governance::AppManifest& new_manifest) {
  auto it = apps_.find(app);
  if (it == apps_.end()) {
    return make_error(Errc::unknown_app, "no such app: " + app);
  }
  return chain_.propose_upgrade(it->second.app_id, new_manifest.app_digest(),
                                signers_[0].public_key,
                                governance::ProposalKind::add_code, clock_);
}

Result<governance::ApprovalStatus> World::approve(const std::string& app,
                                                  const Digest& proposal_id,
                                                  std::size_t signer_index) {
  auto it = apps_.find(app);
  if (it == apps_.end()) {
    return make_error(Errc::unknown_app, "no such app: " + app);
  }
  if (signer_index >= signers_.size()) {
    return make_error(Errc::invalid_argument, "no such signer");
  }
  const auto* auth = chain_.app(it->second.app_id);
  if (!auth) return make_error(Errc::unknown_app, "app not registered");
  auto pit = auth->pending.find(proposal_id);
  if (pit == auth->pending.end()) {
    return make_error(Errc::invalid_argument, "no such proposal");
  }
  Bytes msg = governance::approval_message(
      it->second.app_id, pit->second.new_code_digest, pit->second.kind);
  auto sig = crypto::sign(signers_[signer_index], msg);
  return chain_.approve_upgrade(it->second.app_id, proposal_id,
                                signers_[signer_index].public_key, sig,
                                clock_);
}

Result<void> World::seal_volume(const std::string& inst,
                                const std::string& vol, ByteView data) {
  auto* rec = instance(inst);
  if (!rec || !rec->bundle) {
    return make_error(Errc::invalid_argument,
                      "instance has no released keys");
  }
  auto v = storage::seal(*rec->bundle, data, counters_, vol, rng_);
  if (!v) return v.error();
  volumes_[vol] = std::move(v).take();
  return {};
}

Result<Bytes> World::unseal_volume(const std::string& inst,
                                   const std::string& vol) {
  auto* rec = instance(inst);
  if (!rec || !rec->bundle) {
    return make_error(Errc::invalid_argument,
                      "instance has no released keys");
  }
  auto it = volumes_.find(vol);
  if (it == volumes_.end()) {
    return make_error(Errc::invalid_argument, "no such volume: " + vol);
  }
  return storage::unseal(*rec->bundle, it->second, counters_);
}

Result<void> World::migrate_volume(const std::string& vol,
                                   const std::string& inst_from,
                                   const std::string& inst_to,
                                   const std::string& vol_out) {
  auto it = volumes_.find(vol);
  if (it == volumes_.end()) {
    return make_error(Errc::invalid_argument, "no such volume: " + vol);
  }
  auto* from = instance(inst_from);
  auto* to = instance(inst_to);
  if (!from || !from->bundle || !to || !to->bundle) {
    return make_error(Errc::invalid_argument,
                      "both instances need released keys");
  }
  // Once the sealing epoch is destroyed no bundle can decrypt the volume;
  // this is the documented data-loss case.
  const std::uint32_t sealed_epoch = it->second.header.epoch;
  if (!net_.epochs().contains(sealed_epoch)) {
    return make_error(Errc::unrecoverable,
                      "sealing epoch destroyed after handover; data lost");
  }
  auto moved = storage::migrate(it->second, *from->bundle, *to->bundle,
                                counters_, rng_);
  if (!moved) return moved.error();
  volumes_[vol_out] = std::move(moved).take();
  return {};
}

gateway::Backend World::echo_backend(const std::string& app_name) {
  return [app_name](ByteView body) {
    return concat(to_bytes(app_name + ":"), body);
  };
}

Result<std::string> World::gateway_register(const std::string& inst,
                                            gateway::Backend backend) {
  auto* rec = instance(inst);
  if (!rec || !rec->bundle) {
    return make_error(Errc::invalid_argument,
                      "instance has no released keys");
  }
  return gw_.register_app(rec->bundle->cert_chain, chain_.registry_snapshot(),
                          clock_.now(),
                          backend ? std::move(backend)
                                  : echo_backend(rec->app));
}

Result<Bytes> World::client_fetch(const std::string& host) {
  auto resp = gw_.route(host, to_bytes("ping"), clock_.now());
  if (!resp) return resp.error();
  if (!chain_.kms_auth().root_public) {
    return make_error(Errc::foreign_root, "no root recorded on-chain");
  }
  auto verdict = gateway::verify_presented_chain(
      resp.value().chain, *chain_.kms_auth().root_public,
      chain_.registry_snapshot(), clock_.now(), host);
  if (!verdict) return verdict.error();
  return resp.value().body;
}

std::string World::host_for(const std::string& app) const {
  auto it = apps_.find(app);
  if (it == apps_.end()) return {};
  return gateway::subdomain_for_app(it->second.app_id, cfg_.zone);
}

Result<void> World::hijack(const std::string& app_a,
                           const std::string& app_b) {
  return gw_.hijack_route(host_for(app_a), host_for(app_b));
}

void World::inject_rogue_cert(const std::string& domain,
                              const std::string& issuer) {
  auto rogue =
      crypto::keypair_from_seed(crypto::SecretScalar::random(rng_)).take();
  certs::CertSpec spec;
  spec.subject = domain;
  spec.subject_public = rogue.public_key;
  spec.valid_from = clock_.now();
  spec.valid_until = clock_.now() + kms::kLeafLifetime;
  gw_.ct_log_for_injection().append(clock_.now(),
                                    certs::issue(spec, issuer, rogue));
}

Result<void> World::authorize_rotation(governance::RotationKind kind) {
  return chain_.authorize_rotation(kind, clock_);
}

Result<void> World::rotate_shares() {
  return net_.rotate_shares(chain_, clock_, rng_);
}

Result<void> World::rotate_root(std::uint64_t handover_len) {
  auto r = net_.rotate_root(chain_, handover_len, clock_, rng_);
  if (!r) return r.error();
  return {};
}

Result<void> World::kill_node(std::size_t index) {
  if (index >= net_.node_count()) {
    return make_error(Errc::invalid_argument, "no such node");
  }
  net_.node(index).alive = false;
  return {};
}

void World::advance_clock(std::uint64_t ticks) {
  clock_.advance(ticks);
  net_.tick(chain_, clock_);
}

Result<void> World::coalition_check(const std::string& inst,
                                    std::size_t size) {
  if (net_.mode() != kms::Mode::threshold) {
    return make_error(Errc::invalid_argument,
                      "coalition analysis applies to threshold mode");
  }
  auto* rec = instance(inst);
  if (!rec || !rec->bundle) {
    return make_error(Errc::invalid_argument,
                      "instance has no released keys");
  }
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < net_.node_count(); ++i) {
    if (net_.node(i).member) members.push_back(i);
  }
  std::vector<std::vector<std::size_t>> coalitions;
  std::vector<std::size_t> scratch;
  coalitions_of(members, size, 0, scratch, coalitions);
  for (const auto& coalition : coalitions) {
    std::vector<crypto::KeyShare> shares;
    for (auto i : coalition) {
      auto it = net_.node(i).shares.find(rec->bundle->epoch);
      if (it != net_.node(i).shares.end()) shares.push_back(it->second.ca);
    }
    if (shares.size() < size) continue;
    auto guess = crypto::shamir_reconstruct(shares,
                                            static_cast<int>(size));
    if (!guess) continue;
    auto env = crypto::derive_key(guess.value(), "env",
                                  rec->bundle->app_id.view());
    if (env && env.value() == rec->bundle->env_key) {
      return make_error(Errc::unauthorized,
                        "coalition recovered a derived key");
    }
  }
  return {};
}

Result<void> World::deploy_gateway(bool fault_tamper_quote,
                                   bool fault_foreign_root) {
  if (!apps_.contains("gateway")) {
    if (auto r = register_app("gateway"); !r) return r.error();
  }
  if (!instances_.contains("gateway-0")) {
    if (auto r = deploy_instance("gateway", "gateway-0"); !r) {
      return r.error();
    }
  }
  if (auto r = request_keys("gateway-0",
                            KeyRequestOptions{fault_tamper_quote, false, {}});
      !r) {
    return r;
  }
  auto* rec = instance("gateway-0");
  kms::AppKeyBundle identity = *rec->bundle;

  if (fault_foreign_root) {
    // A rogue KMS mints a structurally perfect identity under its own root.
    kms::RootKeyState rogue;
    rogue.epoch = 1;
    rogue.root_ca_secret = crypto::SecretScalar::random(rng_);
    rogue.root_sign_secret = crypto::SecretScalar::random(rng_);
    rogue.root_public =
        crypto::keypair_from_seed(rogue.root_ca_secret).take().public_key;
    rogue.created_at = clock_.now();
    const Digest app_id = apps_.at("gateway").app_id;
    identity.app_ca_secret =
        crypto::derive_key(rogue.root_ca_secret, "app-ca", app_id.view())
            .take();
    auto sign_seed =
        crypto::derive_key(rogue.root_sign_secret, "ecdsa", app_id.view())
            .take();
    identity.app_sign_key = crypto::keypair_from_seed(sign_seed).take();
    identity.cert_chain = kms::issue_cert_chain(
        rogue, app_id, identity.app_sign_key.public_key, kms::CertKind::app,
        std::nullopt);
  }
  return gw_.initialize(identity);
}

InstanceRecord* World::instance(const std::string& name) {
  auto it = instances_.find(name);
  return it == instances_.end() ? nullptr : &it->second;
}

const storage::SealedVolume* World::volume(const std::string& name) const {
  auto it = volumes_.find(name);
  return it == volumes_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json instance_to_json(const tee::TeeInstance& inst) {
  json j;
  j["hw_seed"] = to_hex(inst.hardware_key().secret.view());
  j["endorsement"] = to_hex(ByteView(inst.endorsement().data(),
                                     inst.endorsement().size()));
  j["firmware"] = inst.firmware_version();
  j["measurements"] = to_hex(inst.measurements().canonical());
  j["booted"] = inst.booted();
  return j;
}

Result<tee::TeeInstance> instance_from_json(const json& j) {
  auto hw = keypair_from_hex(j["hw_seed"].get<std::string>());
  if (!hw) return hw.error();
  Bytes endors;
  if (!from_hex(j["endorsement"].get<std::string>(), endors) ||
      endors.size() != 64) {
    return make_error(Errc::parse_error, "bad endorsement");
  }
  crypto::Signature sig;
  std::copy(endors.begin(), endors.end(), sig.begin());
  Bytes meas;
  if (!from_hex(j["measurements"].get<std::string>(), meas)) {
    return make_error(Errc::parse_error, "bad measurements");
  }
  auto state = tee::MeasurementState::from_canonical(meas);
  if (!state) return state.error();
  return tee::TeeInstance::restore(hw.value(), sig,
                                   j["firmware"].get<std::uint32_t>(),
                                   state.value(), j["booted"].get<bool>());
}

json share_to_json(const crypto::KeyShare& s) {
  json j;
  j["index"] = s.index;
  j["payload"] = to_hex(ByteView(s.payload.data(), s.payload.size()));
  return j;
}

Result<crypto::KeyShare> share_from_json(const json& j) {
  crypto::KeyShare s;
  s.index = static_cast<std::uint8_t>(j["index"].get<int>());
  Bytes raw;
  if (!from_hex(j["payload"].get<std::string>(), raw) || raw.size() != 32) {
    return make_error(Errc::parse_error, "bad share payload");
  }
  std::copy(raw.begin(), raw.end(), s.payload.begin());
  return s;
}

Result<crypto::SecretScalar> secret_from_hex(const std::string& hex) {
  Bytes raw;
  if (!from_hex(hex, raw) || raw.size() != 32) {
    return make_error(Errc::parse_error, "bad secret hex");
  }
  crypto::SecretScalar s;
  std::copy(raw.begin(), raw.end(), s.bytes.begin());
  return s;
}

}  // namespace

std::string World::save_json() const {
  json j;
  j["config"] = json::parse(cfg_.to_json());
  j["rng_state"] = rng_.save_state();
  j["clock"] = clock_.now();
  j["events"] = chain_.export_events_jsonl();
  j["vendor_seed"] = seed_hex(vendor_);
  j["os_base"] = {{"ovmf", os_base_.ovmf_digest.hex()},
                  {"vm_config", os_base_.vm_config_digest.hex()},
                  {"kernel", os_base_.kernel_digest.hex()},
                  {"initrd", os_base_.initrd_rootfs_digest.hex()}};
  j["kms_manifest"] = to_hex(kms_manifest_.canonical());
  j["signers"] = json::array();
  for (const auto& s : signers_) j["signers"].push_back(seed_hex(s));

  json net;
  net["current_epoch"] = net_.current_epoch();
  net["nodes_created"] = nodes_created_;
  net["epochs"] = json::object();
  for (const auto& [epoch, meta] : net_.epochs()) {
    net["epochs"][std::to_string(epoch)] = {
        {"public", crypto::key_hex(meta.root_public)},
        {"created_at", meta.created_at}};
  }
  if (net_.handover_old_epoch()) {
    net["handover"] = {{"old_epoch", *net_.handover_old_epoch()},
                       {"deadline", net_.handover_deadline()}};
  } else {
    net["handover"] = nullptr;
  }
  net["nodes"] = json::array();
  for (std::size_t i = 0; i < net_.node_count(); ++i) {
    const auto& node = net_.node(i);
    json nj;
    nj["key_seed"] = seed_hex(node.node_key);
    nj["instance"] = instance_to_json(node.instance);
    nj["member"] = node.member;
    nj["alive"] = node.alive;
    nj["root_cache"] = json::object();
    for (const auto& [epoch, root] : node.root_cache) {
      nj["root_cache"][std::to_string(epoch)] = {
          {"ca", to_hex(root.root_ca_secret.view())},
          {"sign", to_hex(root.root_sign_secret.view())},
          {"public", crypto::key_hex(root.root_public)},
          {"created_at", root.created_at}};
    }
    nj["shares"] = json::object();
    for (const auto& [epoch, shares] : node.shares) {
      nj["shares"][std::to_string(epoch)] = {
          {"ca", share_to_json(shares.ca)},
          {"sign", share_to_json(shares.sign)}};
    }
    net["nodes"].push_back(nj);
  }
  j["net"] = net;

  json gw;
  gw["initialized"] = gw_.initialized();
  if (gw_.initialized()) {
    auto rec = instances_.find("gateway-0");
    gw["bundle"] = (rec != instances_.end() && rec->second.bundle)
                       ? json(to_hex(rec->second.bundle->canonical()))
                       : json(nullptr);
  }
  gw["routes"] = json::array();
  for (const auto& host : gw_.hosts()) {
    const auto* chain = gw_.serving_chain(host);
    auto app_id = gw_.app_for_host(host);
    gw["routes"].push_back({{"host", host},
                            {"app_id", app_id ? app_id->hex() : ""},
                            {"chain", to_hex(chain->canonical())}});
  }
  gw["caa"] = json::array();
  for (const auto& [domain, rec] : gw_.caa_records()) {
    gw["caa"].push_back(
        {{"domain", domain}, {"issuer", rec.allowed_issuer}});
  }
  gw["ct"] = json::array();
  for (const auto& entry : gw_.ct_log().entries()) {
    gw["ct"].push_back(
        {{"time", entry.time}, {"cert", to_hex(entry.cert.canonical())}});
  }
  j["gateway"] = gw;

  j["apps"] = json::object();
  for (const auto& [name, rec] : apps_) {
    j["apps"][name] = {{"manifest", to_hex(rec.manifest.canonical())},
                       {"registered", rec.registered}};
  }
  j["instances"] = json::object();
  for (const auto& [name, rec] : instances_) {
    json ij;
    ij["app"] = rec.app;
    ij["running"] = to_hex(rec.running.canonical());
    ij["tee"] = instance_to_json(rec.instance);
    ij["bundle"] =
        rec.bundle ? json(to_hex(rec.bundle->canonical())) : json(nullptr);
    j["instances"][name] = ij;
  }
  j["volumes"] = json::object();
  for (const auto& [name, vol] : volumes_) {
    j["volumes"][name] = to_hex(vol.serialize());
  }
  return j.dump(2);
}

Result<std::unique_ptr<World>> World::load_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return make_error(Errc::parse_error, "world file is not JSON");
  }
  auto cfg = WorldConfig::from_json(j["config"].dump());
  if (!cfg) return cfg.error();
  auto world = std::make_unique<World>(cfg.value());

  if (!world->rng_.restore_state(j["rng_state"].get<std::string>())) {
    return make_error(Errc::parse_error, "bad rng state");
  }
  world->clock_.restore(j["clock"].get<std::uint64_t>());

  auto events =
      governance::Chain::parse_events_jsonl(j["events"].get<std::string>());
  if (!events) return events.error();
  auto chain = governance::Chain::replay(events.value());
  if (!chain) return chain.error();
  world->chain_ = std::move(chain).take();

  auto vendor = keypair_from_hex(j["vendor_seed"].get<std::string>());
  if (!vendor) return vendor.error();
  world->vendor_ = vendor.value();
  auto os = j["os_base"];
  auto read_digest_field = [&](const char* key) -> Result<Digest> {
    return digest_from_hex_str(os[key].get<std::string>());
  };
  auto ovmf = read_digest_field("ovmf");
  if (!ovmf) return ovmf.error();
  world->os_base_.ovmf_digest = ovmf.value();
  auto vm = read_digest_field("vm_config");
  if (!vm) return vm.error();
  world->os_base_.vm_config_digest = vm.value();
  auto kernel = read_digest_field("kernel");
  if (!kernel) return kernel.error();
  world->os_base_.kernel_digest = kernel.value();
  auto initrd = read_digest_field("initrd");
  if (!initrd) return initrd.error();
  world->os_base_.initrd_rootfs_digest = initrd.value();

  Bytes manifest_raw;
  if (!from_hex(j["kms_manifest"].get<std::string>(), manifest_raw)) {
    return make_error(Errc::parse_error, "bad kms manifest");
  }
  auto kms_manifest = governance::AppManifest::from_canonical(manifest_raw);
  if (!kms_manifest) return kms_manifest.error();
  world->kms_manifest_ = std::move(kms_manifest).take();

  world->signers_.clear();
  for (const auto& s : j["signers"]) {
    auto kp = keypair_from_hex(s.get<std::string>());
    if (!kp) return kp.error();
    world->signers_.push_back(kp.value());
  }

  const json& net = j["net"];
  world->nodes_created_ = net["nodes_created"].get<bool>();
  std::map<std::uint32_t, kms::KmsNetwork::EpochMeta> epochs;
  for (const auto& [key, value] : net["epochs"].items()) {
    kms::KmsNetwork::EpochMeta meta;
    Bytes pub;
    if (!from_hex(value["public"].get<std::string>(), pub) ||
        pub.size() != 32) {
      return make_error(Errc::parse_error, "bad epoch public");
    }
    std::copy(pub.begin(), pub.end(), meta.root_public.begin());
    meta.created_at = value["created_at"].get<std::uint64_t>();
    epochs[static_cast<std::uint32_t>(std::stoul(key))] = meta;
  }
  std::optional<std::uint32_t> handover_old;
  std::uint64_t handover_deadline = 0;
  if (!net["handover"].is_null()) {
    handover_old = net["handover"]["old_epoch"].get<std::uint32_t>();
    handover_deadline = net["handover"]["deadline"].get<std::uint64_t>();
  }
  world->net_.restore_epochs(net["current_epoch"].get<std::uint32_t>(),
                             std::move(epochs), handover_old,
                             handover_deadline);
  for (const auto& nj : net["nodes"]) {
    auto key = keypair_from_hex(nj["key_seed"].get<std::string>());
    if (!key) return key.error();
    auto inst = instance_from_json(nj["instance"]);
    if (!inst) return inst.error();
    auto idx = world->net_.add_node(std::move(inst).take(), key.value());
    auto& node = world->net_.node(idx);
    node.member = nj["member"].get<bool>();
    node.alive = nj["alive"].get<bool>();
    for (const auto& [key_str, value] : nj["root_cache"].items()) {
      kms::RootKeyState root;
      root.epoch = static_cast<std::uint32_t>(std::stoul(key_str));
      auto ca = secret_from_hex(value["ca"].get<std::string>());
      if (!ca) return ca.error();
      root.root_ca_secret = ca.value();
      auto sign = secret_from_hex(value["sign"].get<std::string>());
      if (!sign) return sign.error();
      root.root_sign_secret = sign.value();
      Bytes pub;
      if (!from_hex(value["public"].get<std::string>(), pub) ||
          pub.size() != 32) {
        return make_error(Errc::parse_error, "bad root public");
      }
      std::copy(pub.begin(), pub.end(), root.root_public.begin());
      root.created_at = value["created_at"].get<std::uint64_t>();
      node.root_cache[root.epoch] = root;
    }
    for (const auto& [key_str, value] : nj["shares"].items()) {
      auto ca = share_from_json(value["ca"]);
      if (!ca) return ca.error();
      auto sign = share_from_json(value["sign"]);
      if (!sign) return sign.error();
      node.shares[static_cast<std::uint32_t>(std::stoul(key_str))] =
          kms::RootShares{ca.value(), sign.value()};
    }
  }
  world->register_node_actors();

  for (const auto& [name, aj] : j["apps"].items()) {
    Bytes raw;
    if (!from_hex(aj["manifest"].get<std::string>(), raw)) {
      return make_error(Errc::parse_error, "bad app manifest");
    }
    auto manifest = governance::AppManifest::from_canonical(raw);
    if (!manifest) return manifest.error();
    AppRecord rec;
    rec.manifest = std::move(manifest).take();
    rec.app_id = rec.manifest.app_digest();
    rec.registered = aj["registered"].get<bool>();
    world->apps_[name] = std::move(rec);
  }
  for (const auto& [name, ij] : j["instances"].items()) {
    InstanceRecord rec;
    rec.app = ij["app"].get<std::string>();
    Bytes raw;
    if (!from_hex(ij["running"].get<std::string>(), raw)) {
      return make_error(Errc::parse_error, "bad running manifest");
    }
    auto manifest = governance::AppManifest::from_canonical(raw);
    if (!manifest) return manifest.error();
    rec.running = std::move(manifest).take();
    auto inst = instance_from_json(ij["tee"]);
    if (!inst) return inst.error();
    rec.instance = std::move(inst).take();
    if (!ij["bundle"].is_null()) {
      Bytes braw;
      if (!from_hex(ij["bundle"].get<std::string>(), braw)) {
        return make_error(Errc::parse_error, "bad bundle hex");
      }
      auto bundle = kms::AppKeyBundle::from_canonical(braw);
      if (!bundle) return bundle.error();
      rec.bundle = std::move(bundle).take();
    }
    world->instances_[name] = std::move(rec);
  }
  for (const auto& [name, vj] : j["volumes"].items()) {
    Bytes raw;
    if (!from_hex(vj.get<std::string>(), raw)) {
      return make_error(Errc::parse_error, "bad volume hex");
    }
    auto vol = storage::SealedVolume::parse(raw);
    if (!vol) return vol.error();
    world->volumes_[name] = std::move(vol).take();
  }

  const json& gw = j["gateway"];
  if (gw["initialized"].get<bool>() && !gw["bundle"].is_null()) {
    Bytes raw;
    if (!from_hex(gw["bundle"].get<std::string>(), raw)) {
      return make_error(Errc::parse_error, "bad gateway bundle");
    }
    auto bundle = kms::AppKeyBundle::from_canonical(raw);
    if (!bundle) return bundle.error();
    if (auto r = world->gw_.initialize(bundle.value()); !r) return r.error();
  }
  for (const auto& cj : gw["caa"]) {
    world->gw_.caa_set(cj["domain"].get<std::string>(),
                       cj["issuer"].get<std::string>());
  }
  for (const auto& rj : gw["routes"]) {
    Bytes raw;
    if (!from_hex(rj["chain"].get<std::string>(), raw)) {
      return make_error(Errc::parse_error, "bad route chain");
    }
    auto chain_parsed = certs::CertificateChain::from_canonical(raw);
    if (!chain_parsed) return chain_parsed.error();
    auto app_id = digest_from_hex_str(rj["app_id"].get<std::string>());
    if (!app_id) return app_id.error();
    std::string app_name;
    for (const auto& [name, rec] : world->apps_) {
      if (rec.app_id == app_id.value()) app_name = name;
    }
    world->gw_.restore_route(rj["host"].get<std::string>(), app_id.value(),
                             std::move(chain_parsed).take(),
                             world->echo_backend(app_name));
  }
  for (const auto& ej : gw["ct"]) {
    Bytes raw;
    if (!from_hex(ej["cert"].get<std::string>(), raw)) {
      return make_error(Errc::parse_error, "bad ct cert");
    }
    auto cert = certs::Certificate::from_canonical(raw);
    if (!cert) return cert.error();
    world->gw_.restore_ct_entry(ej["time"].get<std::uint64_t>(),
                                std::move(cert).take());
  }
  return world;
}

}  // namespace ztsim::harness
