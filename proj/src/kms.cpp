#include "ztsim/kms.hpp"

#include <algorithm>

#include "ztsim/codec.hpp"

namespace ztsim::kms {

namespace {

ByteView pk_view(const PublicKey& pk) {
  return ByteView(pk.data(), pk.size());
}

Digest pubkey_digest(const PublicKey& pk) {
  return crypto::hash(pk_view(pk));
}

std::string short_hex(const Digest& d) {
  return d.hex().substr(0, 16);
}

Result<SecretScalar> read_secret(ByteReader& r) {
  auto raw = r.raw(32);
  if (!raw) return raw.error();
  SecretScalar s;
  std::copy(raw.value().begin(), raw.value().end(), s.bytes.begin());
  return s;
}

Bytes error_payload(const Error& err) {
  ByteWriter w;
  w.var_string(std::string(errc_name(err.code)));
  w.var_string(err.message);
  return w.take();
}

}  // namespace

Bytes AppKeyBundle::canonical() const {
  ByteWriter w;
  w.raw(app_id.view());
  w.raw(instance_id.view());
  w.u32(epoch);
  w.raw(app_ca_secret.view());
  w.raw(disk_key.view());
  w.raw(env_key.view());
  w.raw(app_sign_key.secret.view());
  w.var_bytes(cert_chain.canonical());
  return w.take();
}

Result<AppKeyBundle> AppKeyBundle::from_canonical(ByteView data) {
  ByteReader r(data);
  AppKeyBundle b;
  auto app_id = r.raw(32);
  if (!app_id) return app_id.error();
  std::copy(app_id.value().begin(), app_id.value().end(),
            b.app_id.bytes.begin());
  auto inst = r.raw(32);
  if (!inst) return inst.error();
  std::copy(inst.value().begin(), inst.value().end(),
            b.instance_id.bytes.begin());
  auto epoch = r.u32();
  if (!epoch) return epoch.error();
  b.epoch = epoch.value();
  auto ca = read_secret(r);
  if (!ca) return ca.error();
  b.app_ca_secret = ca.value();
  auto disk = read_secret(r);
  if (!disk) return disk.error();
  b.disk_key = disk.value();
  auto env = read_secret(r);
  if (!env) return env.error();
  b.env_key = env.value();
  auto seed = read_secret(r);
  if (!seed) return seed.error();
  auto kp = crypto::keypair_from_seed(seed.value());
  if (!kp) return kp.error();
  b.app_sign_key = kp.value();
  auto chain_raw = r.var_bytes();
  if (!chain_raw) return chain_raw.error();
  auto chain = certs::CertificateChain::from_canonical(chain_raw.value());
  if (!chain) return chain.error();
  b.cert_chain = std::move(chain).take();
  if (!r.exhausted()) {
    return make_error(Errc::parse_error, "trailing bytes after bundle");
  }
  return b;
}

Bytes DeriveRequest::canonical() const {
  ByteWriter w;
  w.var_bytes(quote.canonical());
  w.var_bytes(manifest.canonical());
  w.raw(instance_id.view());
  w.u8(epoch.has_value() ? 1 : 0);
  w.u32(epoch.value_or(0));
  return w.take();
}

Result<DeriveRequest> DeriveRequest::from_canonical(ByteView data) {
  ByteReader r(data);
  DeriveRequest req;
  auto quote_raw = r.var_bytes();
  if (!quote_raw) return quote_raw.error();
  auto quote = tee::Quote::from_canonical(quote_raw.value());
  if (!quote) return quote.error();
  req.quote = std::move(quote).take();
  auto manifest_raw = r.var_bytes();
  if (!manifest_raw) return manifest_raw.error();
  auto manifest = governance::AppManifest::from_canonical(manifest_raw.value());
  if (!manifest) return manifest.error();
  req.manifest = std::move(manifest).take();
  auto inst = r.raw(32);
  if (!inst) return inst.error();
  std::copy(inst.value().begin(), inst.value().end(),
            req.instance_id.bytes.begin());
  auto has_epoch = r.u8();
  if (!has_epoch) return has_epoch.error();
  auto epoch = r.u32();
  if (!epoch) return epoch.error();
  if (has_epoch.value()) req.epoch = epoch.value();
  return req;
}

certs::CertificateChain issue_cert_chain(const RootKeyState& root,
                                         const Digest& app_id,
                                         const PublicKey& subject_public,
                                         CertKind kind,
                                         std::optional<Digest> quote_digest) {
  auto root_key = crypto::keypair_from_seed(root.root_ca_secret).take();
  auto app_ca_secret =
      crypto::derive_key(root.root_ca_secret, "app-ca", app_id.view()).take();
  auto app_ca_key = crypto::keypair_from_seed(app_ca_secret).take();

  const std::string root_name = "kms-root-e" + std::to_string(root.epoch);
  const char* prefix = kind == CertKind::gateway ? "gateway" : "app";
  const std::string ca_name =
      std::string(prefix) + "-ca-" + short_hex(app_id);
  const std::string leaf_name = std::string(prefix) + "-" + short_hex(app_id);

  certs::CertSpec root_spec;
  root_spec.subject = root_name;
  root_spec.subject_public = root_key.public_key;
  root_spec.epoch = root.epoch;
  root_spec.valid_from = root.created_at;
  root_spec.valid_until = root.created_at + kCaLifetime;
  auto root_cert = certs::issue(root_spec, root_name, root_key);

  certs::CertSpec ca_spec;
  ca_spec.subject = ca_name;
  ca_spec.subject_public = app_ca_key.public_key;
  ca_spec.app_id_ext = app_id;
  ca_spec.epoch = root.epoch;
  ca_spec.valid_from = root.created_at;
  ca_spec.valid_until = root.created_at + kCaLifetime;
  auto ca_cert = certs::issue(ca_spec, root_name, root_key);

  certs::CertSpec leaf_spec;
  leaf_spec.subject = leaf_name;
  leaf_spec.subject_public = subject_public;
  leaf_spec.app_id_ext = app_id;
  leaf_spec.quote_digest_ext = quote_digest;
  leaf_spec.epoch = root.epoch;
  leaf_spec.valid_from = root.created_at;
  leaf_spec.valid_until = root.created_at + kCaLifetime;
  auto leaf_cert = certs::issue(leaf_spec, ca_name, app_ca_key);

  certs::CertificateChain chain;
  chain.certs = {leaf_cert, ca_cert, root_cert};
  return chain;
}

KmsNetwork::KmsNetwork(Mode mode, int threshold)
    : mode_(mode), threshold_(threshold < 1 ? 1 : threshold) {}

std::size_t KmsNetwork::add_node(tee::TeeInstance instance, KeyPair node_key) {
  KmsNode node;
  node.node_key = std::move(node_key);
  node.instance = std::move(instance);
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

std::vector<std::size_t> KmsNetwork::member_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].member) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> KmsNetwork::alive_member_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].member && nodes_[i].alive) out.push_back(i);
  }
  return out;
}

int KmsNetwork::effective_threshold() const {
  return std::min<int>(threshold_,
                       static_cast<int>(member_indices().size()));
}

Result<void> KmsNetwork::verify_node_quote(const KmsNode& node,
                                           const Chain& chain,
                                           tee::Quote& out_quote) const {
  auto quote = node.instance.generate_quote(pk_view(node.node_key.public_key));
  if (!quote) return quote.error();
  auto verified =
      tee::verify_quote(quote.value(), chain.kms_auth().attestation_root);
  if (!verified) return verified.error();
  auto expected =
      tee::expected_rtmr3(chain.kms_auth().kms_node_digest, std::nullopt);
  if (verified.value().measurements.rtmr(3) != expected) {
    return make_error(Errc::admission_denied,
                      "node is not running the registered KMS code");
  }
  out_quote = std::move(quote).take();
  return {};
}

void KmsNetwork::distribute_epoch(const RootKeyState& root,
                                  DeterministicRng& rng) {
  auto members = member_indices();
  if (mode_ == Mode::duplication) {
    for (auto i : members) nodes_[i].root_cache[root.epoch] = root;
    return;
  }
  const int t = effective_threshold();
  const int n = static_cast<int>(members.size());
  auto ca_shares = crypto::shamir_split(root.root_ca_secret, t, n, rng).take();
  auto sign_shares =
      crypto::shamir_split(root.root_sign_secret, t, n, rng).take();
  for (std::size_t k = 0; k < members.size(); ++k) {
    nodes_[members[k]].shares[root.epoch] =
        RootShares{ca_shares[k], sign_shares[k]};
  }
}

Result<RootKeyState> KmsNetwork::materialize_root(
    std::uint32_t epoch, std::optional<std::size_t> via) const {
  auto meta = epochs_.find(epoch);
  if (meta == epochs_.end()) {
    if (epoch < current_epoch_) {
      return make_error(Errc::epoch_expired,
                        "epoch " + std::to_string(epoch) +
                            " is past its handover deadline");
    }
    return make_error(Errc::invalid_argument, "unknown epoch");
  }

  if (mode_ == Mode::duplication) {
    std::optional<std::size_t> serving = via;
    if (!serving) {
      auto alive = alive_member_indices();
      if (alive.empty()) {
        return make_error(Errc::kms_unavailable, "no live KMS node");
      }
      serving = alive.front();
    }
    const KmsNode& node = nodes_[*serving];
    if (!node.member || !node.alive) {
      return make_error(Errc::kms_unavailable, "serving node is down");
    }
    auto it = node.root_cache.find(epoch);
    if (it == node.root_cache.end()) {
      return make_error(Errc::kms_unavailable, "node missing epoch material");
    }
    return it->second;
  }

  // Threshold mode: gather a quorum of shares, reconstruct in ephemeral
  // memory, and let the material go out of scope after derivation.
  const int t = effective_threshold();
  std::vector<crypto::KeyShare> ca_shares;
  std::vector<crypto::KeyShare> sign_shares;
  for (auto i : alive_member_indices()) {
    auto it = nodes_[i].shares.find(epoch);
    if (it == nodes_[i].shares.end()) continue;
    ca_shares.push_back(it->second.ca);
    sign_shares.push_back(it->second.sign);
    if (static_cast<int>(ca_shares.size()) == t) break;
  }
  if (static_cast<int>(ca_shares.size()) < t) {
    return make_error(Errc::kms_unavailable,
                      "quorum unavailable for key derivation");
  }
  auto ca = crypto::shamir_reconstruct(ca_shares, t);
  if (!ca) return ca.error();
  auto sign = crypto::shamir_reconstruct(sign_shares, t);
  if (!sign) return sign.error();
  RootKeyState root;
  root.epoch = epoch;
  root.root_ca_secret = ca.value();
  root.root_sign_secret = sign.value();
  root.root_public = meta->second.root_public;
  root.created_at = meta->second.created_at;
  return root;
}

Result<EpochStatus> KmsNetwork::bootstrap_first_node(Chain& chain,
                                                     LogicalClock& clock,
                                                     DeterministicRng& rng) {
  if (current_epoch_ != 0) {
    return make_error(Errc::already_initialized,
                      "root already bootstrapped for this epoch");
  }
  if (nodes_.empty()) {
    return make_error(Errc::kms_unavailable, "no node to bootstrap");
  }
  KmsNode& first = nodes_[0];
  tee::Quote quote;
  if (auto r = verify_node_quote(first, chain, quote); !r) return r.error();

  RootKeyState root;
  root.epoch = 1;
  root.root_ca_secret = SecretScalar::random(rng);
  root.root_sign_secret = SecretScalar::random(rng);
  root.root_public =
      crypto::keypair_from_seed(root.root_ca_secret).take().public_key;

  // Re-quote with the fresh root public key bound into report_data, so the
  // on-chain record attests both the node identity and the generated root.
  Bytes report = concat(pk_view(first.node_key.public_key),
                        pk_view(root.root_public));
  auto bound_quote = first.instance.generate_quote(report);
  if (!bound_quote) return bound_quote.error();

  if (auto r = chain.register_kms_node(first.node_key.public_key, clock); !r) {
    return r.error();
  }
  if (auto r = chain.record_kms_root(root.root_public, bound_quote.value(),
                                     clock);
      !r) {
    return r.error();
  }

  first.member = true;
  root.created_at = clock.now();
  current_epoch_ = 1;
  epochs_[1] = EpochMeta{root.root_public, root.created_at};
  distribute_epoch(root, rng);
  return epoch_status();
}

Result<void> KmsNetwork::admit_node(std::size_t existing,
                                    std::size_t candidate, Chain& chain,
                                    LogicalClock& clock,
                                    DeterministicRng& rng) {
  tick(chain, clock);
  if (existing >= nodes_.size() || candidate >= nodes_.size()) {
    return make_error(Errc::invalid_argument, "no such node");
  }
  if (current_epoch_ == 0) {
    return make_error(Errc::admission_denied, "network not bootstrapped");
  }
  const KmsNode& sponsor = nodes_[existing];
  if (!sponsor.member || !sponsor.alive) {
    return make_error(Errc::kms_unavailable, "sponsoring node unavailable");
  }
  KmsNode& cand = nodes_[candidate];
  if (cand.member) {
    return make_error(Errc::invalid_argument, "node already admitted");
  }
  if (!chain.kms_auth().registered_kms_nodes.contains(
          cand.node_key.public_key)) {
    return make_error(Errc::admission_denied,
                      "candidate identity not registered in KmsAuth");
  }
  tee::Quote quote;
  if (auto r = verify_node_quote(cand, chain, quote); !r) return r.error();

  if (mode_ == Mode::duplication) {
    cand.member = true;
    for (const auto& [epoch, meta] : epochs_) {
      auto it = sponsor.root_cache.find(epoch);
      if (it != sponsor.root_cache.end()) {
        cand.root_cache[epoch] = it->second;
      }
    }
    return {};
  }

  // Threshold mode: reshare every live epoch over the enlarged member set.
  std::vector<RootKeyState> roots;
  for (const auto& [epoch, meta] : epochs_) {
    auto root = materialize_root(epoch, existing);
    if (!root) return root.error();
    roots.push_back(std::move(root).take());
  }
  cand.member = true;
  for (const auto& root : roots) distribute_epoch(root, rng);
  return {};
}

Result<AppKeyBundle> KmsNetwork::derive_bundle(
    const RootKeyState& root, const Digest& app_id, const Digest& instance_id,
    std::optional<Digest> quote_digest) const {
  AppKeyBundle b;
  b.app_id = app_id;
  b.instance_id = instance_id;
  b.epoch = root.epoch;
  b.app_ca_secret =
      crypto::derive_key(root.root_ca_secret, "app-ca", app_id.view()).take();
  b.disk_key = crypto::derive_key(root.root_ca_secret, "disk",
                                  concat(app_id.view(), instance_id.view()))
                   .take();
  b.env_key =
      crypto::derive_key(root.root_ca_secret, "env", app_id.view()).take();
  auto sign_seed =
      crypto::derive_key(root.root_sign_secret, "ecdsa", app_id.view()).take();
  b.app_sign_key = crypto::keypair_from_seed(sign_seed).take();
  b.cert_chain = issue_cert_chain(root, app_id, b.app_sign_key.public_key,
                                  CertKind::app, quote_digest);
  return b;
}

Result<AppKeyBundle> KmsNetwork::request_app_keys(
    const tee::Quote& quote, const governance::AppManifest& manifest,
    const Digest& instance_id, std::optional<std::uint32_t> epoch,
    Chain& chain, LogicalClock& clock) {
  tick(chain, clock);
  auto alive = alive_member_indices();
  if (alive.empty()) {
    return make_error(Errc::kms_unavailable, "no live KMS node");
  }
  return request_app_keys_via(alive.front(), quote, manifest, instance_id,
                              epoch, chain, clock);
}

Result<AppKeyBundle> KmsNetwork::request_app_keys_via(
    std::size_t node_index, const tee::Quote& quote,
    const governance::AppManifest& manifest, const Digest& instance_id,
    std::optional<std::uint32_t> epoch, Chain& chain, LogicalClock& clock) {
  tick(chain, clock);
  if (node_index >= nodes_.size() || !nodes_[node_index].member ||
      !nodes_[node_index].alive) {
    return make_error(Errc::kms_unavailable, "serving node unavailable");
  }
  if (current_epoch_ == 0) {
    return make_error(Errc::kms_unavailable, "network not bootstrapped");
  }
  const std::uint32_t serve_epoch = epoch.value_or(current_epoch_);
  if (!epochs_.contains(serve_epoch)) {
    if (serve_epoch < current_epoch_) {
      return make_error(Errc::epoch_expired,
                        "epoch " + std::to_string(serve_epoch) +
                            " is past its handover deadline");
    }
    return make_error(Errc::invalid_argument, "unknown epoch");
  }

  // Gate 1: the quote itself.
  auto verified = tee::verify_quote(quote, chain.kms_auth().attestation_root);
  if (!verified) return verified.error();

  // Gate 2: the OS portion of the measurements must be a registered build.
  if (!chain.kms_auth().os_digests.contains(
          tee::os_digest(verified.value().measurements))) {
    return make_error(Errc::untrusted_os,
                      "measurements do not match any authorized OS build");
  }

  // Gate 3: code authorization. The running manifest must be attested in
  // RTMR3 (including the KMS root binding) and allowed on-chain.
  const Digest code_digest = manifest.app_digest();
  auto app_id = chain.find_app_by_code(code_digest);
  if (!app_id) {
    return make_error(Errc::key_release_denied,
                      "code digest is not authorized for any app");
  }
  bool rtmr3_ok = false;
  for (const auto& [live_epoch, meta] : epochs_) {
    auto expected = tee::expected_rtmr3(
        code_digest, pubkey_digest(meta.root_public));
    if (verified.value().measurements.rtmr(3) == expected) {
      rtmr3_ok = true;
      break;
    }
  }
  if (!rtmr3_ok) {
    return make_error(Errc::key_release_denied,
                      "quote does not attest the presented manifest");
  }
  auto authorized = chain.is_code_authorized(*app_id, code_digest);
  if (!authorized || !authorized.value()) {
    return make_error(Errc::key_release_denied,
                      "code digest not in the allowed set");
  }

  // Gate 4: instance restriction, when the AppAuth carries one.
  const governance::AppAuthState* app = chain.app(*app_id);
  if (!app->authorized_instance_ids.empty() &&
      !app->authorized_instance_ids.contains(instance_id)) {
    return make_error(Errc::instance_not_authorized,
                      "instance not authorized for this app");
  }

  auto root = materialize_root(serve_epoch, node_index);
  if (!root) return root.error();
  return derive_bundle(root.value(), *app_id, instance_id,
                       crypto::hash(quote.canonical()));
}

Result<void> KmsNetwork::rotate_shares(Chain& chain, LogicalClock& clock,
                                       DeterministicRng& rng) {
  tick(chain, clock);
  if (mode_ != Mode::threshold) {
    return make_error(Errc::rotation_rejected,
                      "share rotation applies to threshold mode only");
  }
  if (!chain.rotation_authorized(governance::RotationKind::shares)) {
    return make_error(Errc::rotation_rejected,
                      "not initiated through the governance contract");
  }
  auto members = member_indices();
  for (auto i : members) {
    if (!nodes_[i].alive) {
      return make_error(Errc::rotation_rejected,
                        "node unavailable; rotation aborted, shares intact");
    }
  }
  const int t = effective_threshold();

  // Refresh every live epoch, then commit the governance record, then
  // install; nothing is installed if any step fails.
  struct Refreshed {
    std::uint32_t epoch;
    std::vector<crypto::KeyShare> ca;
    std::vector<crypto::KeyShare> sign;
  };
  std::vector<Refreshed> all;
  for (const auto& [epoch, meta] : epochs_) {
    std::vector<crypto::KeyShare> ca_shares;
    std::vector<crypto::KeyShare> sign_shares;
    for (auto i : members) {
      ca_shares.push_back(nodes_[i].shares.at(epoch).ca);
      sign_shares.push_back(nodes_[i].shares.at(epoch).sign);
    }
    auto new_ca = crypto::zero_share_refresh(ca_shares, t, rng);
    if (!new_ca) return new_ca.error();
    auto new_sign = crypto::zero_share_refresh(sign_shares, t, rng);
    if (!new_sign) return new_sign.error();
    all.push_back(Refreshed{epoch, std::move(new_ca).take(),
                            std::move(new_sign).take()});
  }
  if (auto r = chain.record_share_rotation(clock); !r) return r.error();
  for (const auto& refreshed : all) {
    for (std::size_t k = 0; k < members.size(); ++k) {
      nodes_[members[k]].shares[refreshed.epoch] =
          RootShares{refreshed.ca[k], refreshed.sign[k]};
    }
  }
  return {};
}

Result<EpochStatus> KmsNetwork::rotate_root(Chain& chain,
                                            std::uint64_t handover_len,
                                            LogicalClock& clock,
                                            DeterministicRng& rng) {
  tick(chain, clock);
  if (current_epoch_ == 0) {
    return make_error(Errc::rotation_rejected, "network not bootstrapped");
  }
  if (handover_old_epoch_.has_value()) {
    return make_error(Errc::rotation_rejected,
                      "handover already in progress");
  }
  if (!chain.rotation_authorized(governance::RotationKind::root)) {
    return make_error(Errc::rotation_rejected,
                      "not initiated through the governance contract");
  }
  for (auto i : member_indices()) {
    if (!nodes_[i].alive) {
      return make_error(Errc::rotation_rejected,
                        "node unavailable; rotation aborted");
    }
  }

  RootKeyState root;
  root.epoch = current_epoch_ + 1;
  root.root_ca_secret = SecretScalar::random(rng);
  root.root_sign_secret = SecretScalar::random(rng);
  root.root_public =
      crypto::keypair_from_seed(root.root_ca_secret).take().public_key;

  if (auto r = chain.record_root_rotation(root.epoch, root.root_public, clock);
      !r) {
    return r.error();
  }
  root.created_at = clock.now();
  handover_old_epoch_ = current_epoch_;
  handover_deadline_ = clock.now() + handover_len;
  current_epoch_ = root.epoch;
  epochs_[root.epoch] = EpochMeta{root.root_public, root.created_at};
  distribute_epoch(root, rng);
  return epoch_status();
}

void KmsNetwork::tick(Chain& chain, LogicalClock& clock) {
  if (!handover_old_epoch_) return;
  if (clock.now() <= handover_deadline_) return;
  const std::uint32_t old_epoch = *handover_old_epoch_;
  for (auto& node : nodes_) {
    node.root_cache.erase(old_epoch);
    node.shares.erase(old_epoch);
  }
  epochs_.erase(old_epoch);
  handover_old_epoch_.reset();
  handover_deadline_ = 0;
  // The destruction event is the audit-trail record of "permanently
  // destroyed"; the secrets above are already gone.
  chain.record_root_destruction(old_epoch, clock);
}

EpochStatus KmsNetwork::epoch_status() const {
  EpochStatus st;
  st.current_epoch = current_epoch_;
  auto meta = epochs_.find(current_epoch_);
  if (meta != epochs_.end()) st.current_public = meta->second.root_public;
  st.handover_open = handover_old_epoch_.has_value();
  st.predecessor_epoch = handover_old_epoch_.value_or(0);
  st.handover_deadline = handover_deadline_;
  return st;
}

void KmsNetwork::restore_epochs(std::uint32_t current,
                                std::map<std::uint32_t, EpochMeta> epochs,
                                std::optional<std::uint32_t> handover_old,
                                LogicalTime handover_deadline) {
  current_epoch_ = current;
  epochs_ = std::move(epochs);
  handover_old_epoch_ = handover_old;
  handover_deadline_ = handover_deadline;
}

Bytes KmsNetwork::handle_message(std::size_t node_index, ByteView wire,
                                 Chain& chain, LogicalClock& clock) {
  auto reply_error = [](const Error& err) {
    return encode_envelope(Envelope{kMsgError, error_payload(err)});
  };
  auto env = decode_envelope(wire);
  if (!env) return reply_error(env.error());

  if (env.value().kind == kMsgDeriveRequest) {
    auto req = DeriveRequest::from_canonical(env.value().payload);
    if (!req) return reply_error(req.error());
    auto bundle =
        request_app_keys_via(node_index, req.value().quote,
                             req.value().manifest, req.value().instance_id,
                             req.value().epoch, chain, clock);
    if (!bundle) return reply_error(bundle.error());
    return encode_envelope(
        Envelope{kMsgDeriveResponse, bundle.value().canonical()});
  }

  if (env.value().kind == kMsgEpochStatusRequest) {
    tick(chain, clock);
    auto st = epoch_status();
    ByteWriter w;
    w.u32(st.current_epoch);
    w.raw(pk_view(st.current_public));
    w.u8(st.handover_open ? 1 : 0);
    w.u32(st.predecessor_epoch);
    w.u64(st.handover_deadline);
    return encode_envelope(Envelope{kMsgEpochStatusResponse, w.take()});
  }

  return reply_error(
      make_error(Errc::parse_error, "unknown message kind"));
}

}  // namespace ztsim::kms
