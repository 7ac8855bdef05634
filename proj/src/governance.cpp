#include "ztsim/governance.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "ztsim/codec.hpp"

namespace ztsim::governance {

namespace {

using nlohmann::json;

ByteView pk_view(const PublicKey& pk) {
  return ByteView(pk.data(), pk.size());
}

Result<PublicKey> read_pubkey(ByteReader& r) {
  auto raw = r.raw(32);
  if (!raw) return raw.error();
  PublicKey pk;
  std::copy(raw.value().begin(), raw.value().end(), pk.begin());
  return pk;
}

Result<Digest> read_digest(ByteReader& r) {
  auto raw = r.raw(32);
  if (!raw) return raw.error();
  Digest d;
  std::copy(raw.value().begin(), raw.value().end(), d.bytes.begin());
  return d;
}

Result<Signature> read_signature(ByteReader& r) {
  auto raw = r.raw(64);
  if (!raw) return raw.error();
  Signature s;
  std::copy(raw.value().begin(), raw.value().end(), s.begin());
  return s;
}

}  // namespace

Digest AppManifest::app_digest() const {
  Bytes all = compose_text;
  for (const auto& d : image_digests) append(all, d.view());
  append(all, config);
  return crypto::hash(all);
}

Bytes AppManifest::canonical() const {
  ByteWriter w;
  w.var_bytes(compose_text);
  w.u32(static_cast<std::uint32_t>(image_digests.size()));
  for (const auto& d : image_digests) w.raw(d.view());
  w.var_bytes(config);
  return w.take();
}

Result<AppManifest> AppManifest::from_canonical(ByteView data) {
  ByteReader r(data);
  AppManifest m;
  auto compose = r.var_bytes();
  if (!compose) return compose.error();
  m.compose_text = std::move(compose).take();
  auto n = r.u32();
  if (!n) return n.error();
  for (std::uint32_t i = 0; i < n.value(); ++i) {
    auto d = read_digest(r);
    if (!d) return d.error();
    m.image_digests.push_back(d.value());
  }
  auto config = r.var_bytes();
  if (!config) return config.error();
  m.config = std::move(config).take();
  return m;
}

Bytes approval_message(const Digest& app_id, const Digest& code_digest,
                       ProposalKind kind) {
  Bytes msg;
  if (kind == ProposalKind::revoke_code) {
    append(msg, to_bytes("revoke:"));
  }
  append(msg, app_id.view());
  append(msg, code_digest.view());
  return msg;
}

std::string counter_key(const Digest& app_id, std::string_view name) {
  return app_id.hex() + "/" + std::string(name);
}

// ---------------------------------------------------------------------------
// Transition plumbing

Result<Chain::TxResult> Chain::commit(const std::string& kind, Bytes payload,
                                      LogicalClock& clock) {
  LogicalTime time = clock.advance();
  auto result = apply(kind, payload, time, /*replaying=*/false);
  if (!result) return result;
  EventRecord ev;
  ev.seq = log_.size();
  ev.time = time;
  ev.kind = kind;
  ev.payload_digest = crypto::hash(payload);
  ev.payload = std::move(payload);
  log_.push_back(std::move(ev));
  return result;
}

Result<Chain::TxResult> Chain::apply(const std::string& kind,
                                     ByteView payload, LogicalTime time,
                                     bool) {
  if (time <= last_time_) {
    return make_error(Errc::parse_error, "logical time not increasing");
  }
  ByteReader r(payload);
  TxResult tx;

  if (kind == "genesis") {
    if (initialized_) {
      return make_error(Errc::already_initialized, "genesis already applied");
    }
    auto n = r.u32();
    if (!n) return n.error();
    if (n.value() == 0) {
      return make_error(Errc::invalid_argument,
                        "genesis needs at least one authorized OS digest");
    }
    KmsAuthState st;
    for (std::uint32_t i = 0; i < n.value(); ++i) {
      auto d = read_digest(r);
      if (!d) return d.error();
      st.os_digests.insert(d.value());
    }
    auto node_digest = read_digest(r);
    if (!node_digest) return node_digest.error();
    if (node_digest.value() == Digest::zero()) {
      return make_error(Errc::invalid_argument,
                        "genesis needs the KMS node code digest");
    }
    st.kms_node_digest = node_digest.value();
    auto vendor = read_pubkey(r);
    if (!vendor) return vendor.error();
    st.attestation_root.vendor_public = vendor.value();
    auto min_fw = r.u32();
    if (!min_fw) return min_fw.error();
    st.attestation_root.min_firmware_version = min_fw.value();
    auto zone = r.var_string();
    if (!zone) return zone.error();
    st.wildcard_zone = std::move(zone).take();
    state_ = std::move(st);
    initialized_ = true;
    last_time_ = time;
    return tx;
  }

  if (!initialized_) {
    return make_error(Errc::invalid_argument, "chain not initialized");
  }

  if (kind == "kms-node-registered") {
    auto pub = read_pubkey(r);
    if (!pub) return pub.error();
    if (!state_.registered_kms_nodes.insert(pub.value()).second) {
      return make_error(Errc::invalid_argument, "node already registered");
    }
  } else if (kind == "kms-root-recorded") {
    auto pub = read_pubkey(r);
    if (!pub) return pub.error();
    auto quote_raw = r.var_bytes();
    if (!quote_raw) return quote_raw.error();
    auto quote = tee::Quote::from_canonical(quote_raw.value());
    if (!quote) return quote.error();
    if (state_.root_public.has_value()) {
      return make_error(Errc::already_initialized,
                        "root public key already recorded for this epoch");
    }
    state_.root_public = pub.value();
    state_.root_epoch = 1;
    state_.first_node_quote = quote.value();
  } else if (kind == "rotation-authorized") {
    auto k = r.u8();
    if (!k) return k.error();
    if (k.value() > 1) {
      return make_error(Errc::invalid_argument, "unknown rotation kind");
    }
    if (!state_.root_public.has_value()) {
      return make_error(Errc::rotation_rejected, "no root to rotate");
    }
    if (!state_.open_rotation_tickets.insert(k.value()).second) {
      return make_error(Errc::rotation_rejected,
                        "rotation already authorized");
    }
  } else if (kind == "shares-rotated") {
    if (state_.open_rotation_tickets.erase(
            static_cast<std::uint8_t>(RotationKind::shares)) == 0) {
      return make_error(Errc::rotation_rejected,
                        "share rotation not authorized by governance");
    }
  } else if (kind == "root-rotated") {
    auto new_epoch = r.u32();
    if (!new_epoch) return new_epoch.error();
    auto pub = read_pubkey(r);
    if (!pub) return pub.error();
    if (state_.open_rotation_tickets.erase(
            static_cast<std::uint8_t>(RotationKind::root)) == 0) {
      return make_error(Errc::rotation_rejected,
                        "root rotation not authorized by governance");
    }
    if (new_epoch.value() != state_.root_epoch + 1) {
      return make_error(Errc::rotation_rejected, "epoch must increment by 1");
    }
    state_.root_epoch = new_epoch.value();
    state_.root_public = pub.value();
  } else if (kind == "root-destroyed") {
    auto epoch = r.u32();
    if (!epoch) return epoch.error();
    if (epoch.value() >= state_.root_epoch) {
      return make_error(Errc::invalid_argument,
                        "only predecessor epochs can be destroyed");
    }
    state_.destroyed_epochs.insert(epoch.value());
  } else if (kind == "app-registered") {
    auto manifest_raw = r.var_bytes();
    if (!manifest_raw) return manifest_raw.error();
    auto manifest = AppManifest::from_canonical(manifest_raw.value());
    if (!manifest) return manifest.error();
    if (manifest.value().image_digests.empty()) {
      return make_error(Errc::invalid_argument,
                        "manifest image list must be non-empty");
    }
    auto n_signers = r.u32();
    if (!n_signers) return n_signers.error();
    GovernanceParams params;
    for (std::uint32_t i = 0; i < n_signers.value(); ++i) {
      auto pk = read_pubkey(r);
      if (!pk) return pk.error();
      params.signers.push_back(pk.value());
    }
    auto threshold = r.u32();
    if (!threshold) return threshold.error();
    params.approval_threshold = threshold.value();
    auto n_inst = r.u32();
    if (!n_inst) return n_inst.error();
    for (std::uint32_t i = 0; i < n_inst.value(); ++i) {
      auto d = read_digest(r);
      if (!d) return d.error();
      params.authorized_instance_ids.push_back(d.value());
    }
    if (params.approval_threshold == 0 ||
        params.approval_threshold > params.signers.size()) {
      return make_error(Errc::invalid_argument,
                        "approval threshold must be in [1, |signers|]");
    }
    Digest app_id = manifest.value().app_digest();
    if (state_.apps.contains(app_id) || state_.code_index.contains(app_id)) {
      return make_error(Errc::duplicate_app, "app already registered");
    }
    AppAuthState app;
    app.app_id = app_id;
    app.allowed_code_digests.insert(app_id);
    app.authorized_instance_ids.insert(
        params.authorized_instance_ids.begin(),
        params.authorized_instance_ids.end());
    app.signers = params.signers;
    app.approval_threshold = params.approval_threshold;
    state_.apps.emplace(app_id, std::move(app));
    state_.code_index.emplace(app_id, app_id);
    tx.reply = Bytes(app_id.view().begin(), app_id.view().end());
  } else if (kind == "upgrade-proposed") {
    auto app_id = read_digest(r);
    if (!app_id) return app_id.error();
    auto digest = read_digest(r);
    if (!digest) return digest.error();
    auto kind_byte = r.u8();
    if (!kind_byte) return kind_byte.error();
    auto proposer = read_pubkey(r);
    if (!proposer) return proposer.error();
    auto it = state_.apps.find(app_id.value());
    if (it == state_.apps.end()) {
      return make_error(Errc::unknown_app, "no such app");
    }
    AppAuthState& app = it->second;
    if (std::find(app.signers.begin(), app.signers.end(), proposer.value()) ==
        app.signers.end()) {
      return make_error(Errc::unauthorized, "proposer is not a signer");
    }
    auto pk = static_cast<ProposalKind>(kind_byte.value());
    if (pk == ProposalKind::add_code) {
      auto owner = state_.code_index.find(digest.value());
      if (owner != state_.code_index.end() &&
          owner->second != app.app_id) {
        return make_error(Errc::invalid_argument,
                          "code digest already owned by another app");
      }
      if (app.allowed_code_digests.contains(digest.value())) {
        return make_error(Errc::invalid_argument, "digest already allowed");
      }
    } else {
      if (!app.allowed_code_digests.contains(digest.value())) {
        return make_error(Errc::invalid_argument,
                          "cannot revoke a digest that is not allowed");
      }
    }
    ByteWriter idw;
    idw.raw(app.app_id.view());
    idw.raw(digest.value().view());
    idw.u8(kind_byte.value());
    idw.u64(app.proposal_seq);
    Digest proposal_id = crypto::hash(idw.bytes());
    app.proposal_seq += 1;
    UpgradeProposal prop;
    prop.proposal_id = proposal_id;
    prop.new_code_digest = digest.value();
    prop.kind = pk;
    prop.created_at = time;
    app.pending.emplace(proposal_id, std::move(prop));
    tx.reply = Bytes(proposal_id.view().begin(), proposal_id.view().end());
  } else if (kind == "upgrade-approved") {
    auto app_id = read_digest(r);
    if (!app_id) return app_id.error();
    auto proposal_id = read_digest(r);
    if (!proposal_id) return proposal_id.error();
    auto signer = read_pubkey(r);
    if (!signer) return signer.error();
    auto sig = read_signature(r);
    if (!sig) return sig.error();
    auto it = state_.apps.find(app_id.value());
    if (it == state_.apps.end()) {
      return make_error(Errc::unknown_app, "no such app");
    }
    AppAuthState& app = it->second;
    auto pit = app.pending.find(proposal_id.value());
    if (pit == app.pending.end()) {
      return make_error(Errc::invalid_argument, "no such pending proposal");
    }
    UpgradeProposal& prop = pit->second;
    if (std::find(app.signers.begin(), app.signers.end(), signer.value()) ==
        app.signers.end()) {
      return make_error(Errc::unauthorized, "approver is not a signer");
    }
    Bytes msg = approval_message(app.app_id, prop.new_code_digest, prop.kind);
    if (!crypto::verify(signer.value(), msg, sig.value())) {
      return make_error(Errc::unauthorized, "approval signature invalid");
    }
    if (prop.approvals.contains(signer.value())) {
      // The live wrapper filters duplicates before committing; hitting this
      // during replay means the log was tampered with.
      return make_error(Errc::invalid_argument, "duplicate approval event");
    }
    ApprovalStatus status = ApprovalStatus::recorded;
    if (prop.approvals.size() + 1 >= app.approval_threshold) {
      // Threshold crossed: apply the proposal and drop it from pending.
      // KmsAuth's view (code_index) updates in the same transaction.
      if (prop.kind == ProposalKind::add_code) {
        auto owner = state_.code_index.find(prop.new_code_digest);
        if (owner != state_.code_index.end() &&
            owner->second != app.app_id) {
          return make_error(Errc::invalid_argument,
                            "code digest already owned by another app");
        }
        app.allowed_code_digests.insert(prop.new_code_digest);
        state_.code_index.insert_or_assign(prop.new_code_digest, app.app_id);
      } else {
        app.allowed_code_digests.erase(prop.new_code_digest);
        state_.code_index.erase(prop.new_code_digest);
      }
      app.pending.erase(pit);
      status = ApprovalStatus::threshold_met;
    } else {
      prop.approvals.emplace(signer.value(), sig.value());
    }
    tx.reply = {static_cast<std::uint8_t>(status)};
  } else if (kind == "instance-authorized") {
    auto app_id = read_digest(r);
    if (!app_id) return app_id.error();
    auto instance_id = read_digest(r);
    if (!instance_id) return instance_id.error();
    auto it = state_.apps.find(app_id.value());
    if (it == state_.apps.end()) {
      return make_error(Errc::unknown_app, "no such app");
    }
    if (!it->second.authorized_instance_ids.insert(instance_id.value())
             .second) {
      return make_error(Errc::invalid_argument, "instance already authorized");
    }
  } else if (kind == "counter-bumped") {
    auto app_id = read_digest(r);
    if (!app_id) return app_id.error();
    auto name = r.var_string();
    if (!name) return name.error();
    if (!state_.apps.contains(app_id.value())) {
      return make_error(Errc::unknown_app, "no such app");
    }
    std::uint64_t next = ++state_.counters[counter_key(app_id.value(),
                                                       name.value())];
    ByteWriter w;
    w.u64(next);
    tx.reply = w.take();
  } else {
    return make_error(Errc::parse_error, "unknown event kind: " + kind);
  }

  last_time_ = time;
  return tx;
}

// ---------------------------------------------------------------------------
// Public mutating ops: encode args, run through commit

Result<void> Chain::genesis(const GenesisConfig& config, LogicalClock& clock) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(config.os_digests.size()));
  for (const auto& d : config.os_digests) w.raw(d.view());
  w.raw(config.kms_node_digest.view());
  w.raw(pk_view(config.attestation_root.vendor_public));
  w.u32(config.attestation_root.min_firmware_version);
  w.var_string(config.wildcard_zone);
  auto r = commit("genesis", w.take(), clock);
  if (!r) return r.error();
  return {};
}

Result<void> Chain::register_kms_node(const PublicKey& node_pub,
                                      LogicalClock& clock) {
  ByteWriter w;
  w.raw(pk_view(node_pub));
  auto r = commit("kms-node-registered", w.take(), clock);
  if (!r) return r.error();
  return {};
}

Result<void> Chain::record_kms_root(const PublicKey& root_public,
                                    const tee::Quote& first_node_quote,
                                    LogicalClock& clock) {
  ByteWriter w;
  w.raw(pk_view(root_public));
  w.var_bytes(first_node_quote.canonical());
  auto r = commit("kms-root-recorded", w.take(), clock);
  if (!r) return r.error();
  return {};
}

Result<void> Chain::authorize_rotation(RotationKind kind,
                                       LogicalClock& clock) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind));
  auto r = commit("rotation-authorized", w.take(), clock);
  if (!r) return r.error();
  return {};
}

bool Chain::rotation_authorized(RotationKind kind) const {
  return state_.open_rotation_tickets.contains(
      static_cast<std::uint8_t>(kind));
}

Result<void> Chain::record_share_rotation(LogicalClock& clock) {
  auto r = commit("shares-rotated", {}, clock);
  if (!r) return r.error();
  return {};
}

Result<void> Chain::record_root_rotation(std::uint32_t new_epoch,
                                         const PublicKey& new_root_public,
                                         LogicalClock& clock) {
  ByteWriter w;
  w.u32(new_epoch);
  w.raw(pk_view(new_root_public));
  auto r = commit("root-rotated", w.take(), clock);
  if (!r) return r.error();
  return {};
}

Result<void> Chain::record_root_destruction(std::uint32_t epoch,
                                            LogicalClock& clock) {
  ByteWriter w;
  w.u32(epoch);
  auto r = commit("root-destroyed", w.take(), clock);
  if (!r) return r.error();
  return {};
}

Result<Digest> Chain::register_app(const AppManifest& manifest,
                                   const GovernanceParams& params,
                                   LogicalClock& clock) {
  ByteWriter w;
  w.var_bytes(manifest.canonical());
  w.u32(static_cast<std::uint32_t>(params.signers.size()));
  for (const auto& pk : params.signers) w.raw(pk_view(pk));
  w.u32(params.approval_threshold);
  w.u32(static_cast<std::uint32_t>(params.authorized_instance_ids.size()));
  for (const auto& d : params.authorized_instance_ids) w.raw(d.view());
  auto r = commit("app-registered", w.take(), clock);
  if (!r) return r.error();
  Digest app_id;
  std::copy(r.value().reply.begin(), r.value().reply.end(),
            app_id.bytes.begin());
  return app_id;
}

Result<Digest> Chain::propose_upgrade(const Digest& app_id,
                                      const Digest& new_code_digest,
                                      const PublicKey& proposer,
                                      ProposalKind kind,
                                      LogicalClock& clock) {
  ByteWriter w;
  w.raw(app_id.view());
  w.raw(new_code_digest.view());
  w.u8(static_cast<std::uint8_t>(kind));
  w.raw(pk_view(proposer));
  auto r = commit("upgrade-proposed", w.take(), clock);
  if (!r) return r.error();
  Digest proposal_id;
  std::copy(r.value().reply.begin(), r.value().reply.end(),
            proposal_id.bytes.begin());
  return proposal_id;
}

Result<ApprovalStatus> Chain::approve_upgrade(const Digest& app_id,
                                              const Digest& proposal_id,
                                              const PublicKey& signer,
                                              const Signature& signature,
                                              LogicalClock& clock) {
  // Duplicate approvals are an idempotent no-op: no transition, no event.
  if (const AppAuthState* a = app(app_id)) {
    auto pit = a->pending.find(proposal_id);
    if (pit != a->pending.end() &&
        pit->second.approvals.contains(signer)) {
      return ApprovalStatus::duplicate_noop;
    }
  }
  ByteWriter w;
  w.raw(app_id.view());
  w.raw(proposal_id.view());
  w.raw(pk_view(signer));
  w.raw(ByteView(signature.data(), signature.size()));
  auto r = commit("upgrade-approved", w.take(), clock);
  if (!r) return r.error();
  return static_cast<ApprovalStatus>(r.value().reply.at(0));
}

Result<void> Chain::authorize_instance(const Digest& app_id,
                                       const Digest& instance_id,
                                       LogicalClock& clock) {
  ByteWriter w;
  w.raw(app_id.view());
  w.raw(instance_id.view());
  auto r = commit("instance-authorized", w.take(), clock);
  if (!r) return r.error();
  return {};
}

Result<std::uint64_t> Chain::counter_bump(const Digest& app_id,
                                          std::string_view name,
                                          LogicalClock& clock) {
  ByteWriter w;
  w.raw(app_id.view());
  w.var_string(name);
  auto r = commit("counter-bumped", w.take(), clock);
  if (!r) return r.error();
  ByteReader reader(r.value().reply);
  return reader.u64();
}

// ---------------------------------------------------------------------------
// Reads

Result<std::uint64_t> Chain::counter_read(const Digest& app_id,
                                          std::string_view name) const {
  if (!state_.apps.contains(app_id)) {
    return make_error(Errc::unknown_app, "no such app");
  }
  auto it = state_.counters.find(counter_key(app_id, name));
  return it == state_.counters.end() ? 0 : it->second;
}

Result<bool> Chain::is_code_authorized(const Digest& app_id,
                                       const Digest& code_digest) const {
  auto it = state_.apps.find(app_id);
  if (it == state_.apps.end()) {
    return make_error(Errc::unknown_app, "no such app");
  }
  return it->second.allowed_code_digests.contains(code_digest);
}

std::optional<Digest> Chain::find_app_by_code(
    const Digest& code_digest) const {
  auto it = state_.code_index.find(code_digest);
  if (it == state_.code_index.end()) return std::nullopt;
  return it->second;
}

const AppAuthState* Chain::app(const Digest& app_id) const {
  auto it = state_.apps.find(app_id);
  return it == state_.apps.end() ? nullptr : &it->second;
}

RegistrySnapshot Chain::registry_snapshot() const {
  RegistrySnapshot snap;
  snap.root_public = state_.root_public;
  for (const auto& [id, app] : state_.apps) {
    if (!app.allowed_code_digests.empty()) snap.authorized_apps.insert(id);
  }
  return snap;
}

// ---------------------------------------------------------------------------
// Replay and export

Result<Chain> Chain::replay(const std::vector<EventRecord>& events) {
  Chain chain;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const EventRecord& ev = events[i];
    std::string at = " at entry " + std::to_string(i);
    if (ev.seq != i) {
      return make_error(Errc::parse_error, "sequence gap" + at);
    }
    if (crypto::hash(ev.payload) != ev.payload_digest) {
      return make_error(Errc::parse_error, "payload digest mismatch" + at);
    }
    auto r = chain.apply(ev.kind, ev.payload, ev.time, /*replaying=*/true);
    if (!r) {
      return make_error(r.code(), r.error().message + at);
    }
    chain.log_.push_back(ev);
  }
  return chain;
}

std::string Chain::export_events_jsonl() const {
  std::ostringstream out;
  for (const EventRecord& ev : log_) {
    json j;
    j["seq"] = ev.seq;
    j["time"] = ev.time;
    j["kind"] = ev.kind;
    j["payload"] = to_hex(ev.payload);
    j["digest"] = ev.payload_digest.hex();
    out << j.dump() << "\n";
  }
  return out.str();
}

Result<std::vector<EventRecord>> Chain::parse_events_jsonl(
    const std::string& text) {
  std::vector<EventRecord> events;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    std::string where = "line " + std::to_string(line_no);
    if (j.is_discarded()) {
      return make_error(Errc::parse_error, "malformed JSON at " + where);
    }
    if (!j.contains("seq") || !j.contains("time") || !j.contains("kind") ||
        !j.contains("payload") || !j.contains("digest") ||
        !j["kind"].is_string() || !j["payload"].is_string() ||
        !j["digest"].is_string() || !j["seq"].is_number_unsigned() ||
        !j["time"].is_number_unsigned()) {
      return make_error(Errc::parse_error, "missing field at " + where);
    }
    EventRecord ev;
    ev.seq = j["seq"].get<std::uint64_t>();
    ev.time = j["time"].get<std::uint64_t>();
    ev.kind = j["kind"].get<std::string>();
    if (!from_hex(j["payload"].get<std::string>(), ev.payload)) {
      return make_error(Errc::parse_error, "bad payload hex at " + where);
    }
    auto digest = Digest::from_hex(j["digest"].get<std::string>());
    if (!digest) {
      return make_error(Errc::parse_error, "bad digest hex at " + where);
    }
    ev.payload_digest = *digest;
    events.push_back(std::move(ev));
  }
  return events;
}

std::string Chain::export_state_json() const {
  json j;
  j["initialized"] = initialized_;
  j["last_time"] = last_time_;
  if (!initialized_) return j.dump(2);

  j["wildcard_zone"] = state_.wildcard_zone;
  j["kms_node_digest"] = state_.kms_node_digest.hex();
  j["attestation_root"] = {
      {"vendor_public", crypto::key_hex(state_.attestation_root.vendor_public)},
      {"min_firmware_version", state_.attestation_root.min_firmware_version}};
  j["os_digests"] = json::array();
  for (const auto& d : state_.os_digests) j["os_digests"].push_back(d.hex());
  j["registered_kms_nodes"] = json::array();
  for (const auto& pk : state_.registered_kms_nodes) {
    j["registered_kms_nodes"].push_back(crypto::key_hex(pk));
  }
  j["root_public"] = state_.root_public
                         ? json(crypto::key_hex(*state_.root_public))
                         : json(nullptr);
  j["root_epoch"] = state_.root_epoch;
  j["first_node_quote"] =
      state_.first_node_quote
          ? json(to_hex(state_.first_node_quote->canonical()))
          : json(nullptr);
  j["destroyed_epochs"] = json::array();
  for (auto e : state_.destroyed_epochs) j["destroyed_epochs"].push_back(e);
  j["open_rotation_tickets"] = json::array();
  for (auto t : state_.open_rotation_tickets) {
    j["open_rotation_tickets"].push_back(t);
  }
  j["counters"] = state_.counters;
  j["code_index"] = json::object();
  for (const auto& [digest, app_id] : state_.code_index) {
    j["code_index"][digest.hex()] = app_id.hex();
  }
  j["apps"] = json::object();
  for (const auto& [id, app] : state_.apps) {
    json ja;
    ja["approval_threshold"] = app.approval_threshold;
    ja["proposal_seq"] = app.proposal_seq;
    ja["signers"] = json::array();
    for (const auto& pk : app.signers) ja["signers"].push_back(crypto::key_hex(pk));
    ja["allowed_code_digests"] = json::array();
    for (const auto& d : app.allowed_code_digests) {
      ja["allowed_code_digests"].push_back(d.hex());
    }
    ja["authorized_instance_ids"] = json::array();
    for (const auto& d : app.authorized_instance_ids) {
      ja["authorized_instance_ids"].push_back(d.hex());
    }
    ja["pending"] = json::object();
    for (const auto& [pid, prop] : app.pending) {
      json jp;
      jp["new_code_digest"] = prop.new_code_digest.hex();
      jp["kind"] = prop.kind == ProposalKind::add_code ? "add" : "revoke";
      jp["created_at"] = prop.created_at;
      jp["approvals"] = json::object();
      for (const auto& [pk, sig] : prop.approvals) {
        jp["approvals"][crypto::key_hex(pk)] =
            to_hex(ByteView(sig.data(), sig.size()));
      }
      ja["pending"][pid.hex()] = jp;
    }
    j["apps"][id.hex()] = ja;
  }
  return j.dump(2);
}

}  // namespace ztsim::governance
