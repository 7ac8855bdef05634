#include "ztsim/governance.hpp"

#include <vector>

#include "doctest.h"

using namespace ztsim;
using namespace ztsim::governance;

namespace {

Digest random_digest(DeterministicRng& rng) {
  Digest d;
  rng.fill(d.bytes);
  return d;
}

struct Fixture {
  DeterministicRng rng{200};
  LogicalClock clock;
  Chain chain;
  crypto::KeyPair vendor =
      crypto::keypair_from_seed(crypto::SecretScalar::random(rng)).take();
  std::vector<crypto::KeyPair> signers;

  Fixture() {
    for (int i = 0; i < 3; ++i) {
      signers.push_back(
          crypto::keypair_from_seed(crypto::SecretScalar::random(rng)).take());
    }
    GenesisConfig cfg;
    cfg.os_digests = {random_digest(rng)};
    cfg.kms_node_digest = random_digest(rng);
    cfg.attestation_root = {vendor.public_key, 1};
    REQUIRE(chain.genesis(cfg, clock).ok());
  }

  AppManifest manifest(std::string_view compose, int images = 2) {
    AppManifest m;
    m.compose_text = to_bytes(compose);
    for (int i = 0; i < images; ++i) m.image_digests.push_back(random_digest(rng));
    m.config = to_bytes("cfg");
    return m;
  }

  GovernanceParams params(std::uint32_t threshold = 2) {
    GovernanceParams p;
    for (const auto& s : signers) p.signers.push_back(s.public_key);
    p.approval_threshold = threshold;
    return p;
  }

  crypto::Signature approve_sig(const crypto::KeyPair& signer,
                                const Digest& app_id, const Digest& digest,
                                ProposalKind kind = ProposalKind::add_code) {
    return crypto::sign(signer, approval_message(app_id, digest, kind));
  }
};

}  // namespace

TEST_CASE("manifest digest: sensitive to each component") {
  DeterministicRng rng(201);
  AppManifest m;
  m.compose_text = to_bytes("services: {}");
  m.image_digests = {random_digest(rng)};
  m.config = to_bytes("x=1");

  AppManifest m2 = m;
  m2.image_digests[0] = random_digest(rng);
  CHECK(m.app_digest() != m2.app_digest());

  AppManifest m3 = m;
  m3.config = to_bytes("x=2");
  CHECK(m.app_digest() != m3.app_digest());

  auto round = AppManifest::from_canonical(m.canonical());
  REQUIRE(round.ok());
  CHECK(round.value().app_digest() == m.app_digest());
}

TEST_CASE("register_app: initial digest allowed, duplicates rejected") {
  Fixture f;
  auto m = f.manifest("app-one");
  auto app_id = f.chain.register_app(m, f.params(), f.clock);
  REQUIRE(app_id.ok());
  CHECK(app_id.value() == m.app_digest());
  CHECK(f.chain.is_code_authorized(app_id.value(), m.app_digest()).value());

  auto dup = f.chain.register_app(m, f.params(), f.clock);
  REQUIRE(!dup.ok());
  CHECK(dup.code() == Errc::duplicate_app);

  // one image digest difference -> distinct app id
  auto m2 = m;
  m2.image_digests[0] = random_digest(f.rng);
  auto app2 = f.chain.register_app(m2, f.params(), f.clock);
  REQUIRE(app2.ok());
  CHECK(app2.value() != app_id.value());
}

TEST_CASE("register_app: parameter validation") {
  Fixture f;
  auto bad = f.params(4);  // threshold above |signers| = 3
  CHECK(f.chain.register_app(f.manifest("a"), bad, f.clock).code() ==
        Errc::invalid_argument);
  CHECK(f.chain.register_app(f.manifest("b"), f.params(0), f.clock).code() ==
        Errc::invalid_argument);
  AppManifest no_images;
  no_images.compose_text = to_bytes("empty");
  CHECK(f.chain.register_app(no_images, f.params(), f.clock).code() ==
        Errc::invalid_argument);
}

TEST_CASE("propose_upgrade: signer gating and id uniqueness") {
  Fixture f;
  auto app_id = f.chain.register_app(f.manifest("app"), f.params(), f.clock)
                    .take();
  Digest new_code = random_digest(f.rng);

  auto outsider =
      crypto::keypair_from_seed(crypto::SecretScalar::random(f.rng)).take();
  CHECK(f.chain.propose_upgrade(app_id, new_code, outsider.public_key,
                                ProposalKind::add_code, f.clock)
            .code() == Errc::unauthorized);

  auto p1 = f.chain.propose_upgrade(app_id, new_code,
                                    f.signers[0].public_key,
                                    ProposalKind::add_code, f.clock);
  REQUIRE(p1.ok());
  CHECK(f.chain.app(app_id)->pending.contains(p1.value()));

  auto p2 = f.chain.propose_upgrade(app_id, new_code,
                                    f.signers[1].public_key,
                                    ProposalKind::add_code, f.clock);
  REQUIRE(p2.ok());
  CHECK(p1.value() != p2.value());
}

TEST_CASE("approve_upgrade: 2-of-3 threshold crossing") {
  Fixture f;
  auto app_id =
      f.chain.register_app(f.manifest("app"), f.params(2), f.clock).take();
  Digest new_code = random_digest(f.rng);
  auto pid = f.chain.propose_upgrade(app_id, new_code, f.signers[0].public_key,
                                     ProposalKind::add_code, f.clock)
                 .take();

  auto s0 = f.approve_sig(f.signers[0], app_id, new_code);
  auto st = f.chain.approve_upgrade(app_id, pid, f.signers[0].public_key, s0,
                                    f.clock);
  REQUIRE(st.ok());
  CHECK(st.value() == ApprovalStatus::recorded);
  CHECK_FALSE(f.chain.is_code_authorized(app_id, new_code).value());

  // Same signer again: idempotent warning, still below threshold.
  auto dup = f.chain.approve_upgrade(app_id, pid, f.signers[0].public_key, s0,
                                     f.clock);
  REQUIRE(dup.ok());
  CHECK(dup.value() == ApprovalStatus::duplicate_noop);
  CHECK_FALSE(f.chain.is_code_authorized(app_id, new_code).value());

  auto s1 = f.approve_sig(f.signers[1], app_id, new_code);
  auto st2 = f.chain.approve_upgrade(app_id, pid, f.signers[1].public_key, s1,
                                     f.clock);
  REQUIRE(st2.ok());
  CHECK(st2.value() == ApprovalStatus::threshold_met);
  CHECK(f.chain.is_code_authorized(app_id, new_code).value());
  CHECK(f.chain.find_app_by_code(new_code) == app_id);
  CHECK_FALSE(f.chain.app(app_id)->pending.contains(pid));
}

TEST_CASE("approve_upgrade: signature must bind the proposal digest") {
  Fixture f;
  auto app_id =
      f.chain.register_app(f.manifest("app"), f.params(2), f.clock).take();
  Digest new_code = random_digest(f.rng);
  auto pid = f.chain.propose_upgrade(app_id, new_code, f.signers[0].public_key,
                                     ProposalKind::add_code, f.clock)
                 .take();

  Digest wrong = random_digest(f.rng);
  auto bad_sig = f.approve_sig(f.signers[0], app_id, wrong);
  CHECK(f.chain.approve_upgrade(app_id, pid, f.signers[0].public_key, bad_sig,
                                f.clock)
            .code() == Errc::unauthorized);

  auto outsider =
      crypto::keypair_from_seed(crypto::SecretScalar::random(f.rng)).take();
  auto outsider_sig = f.approve_sig(outsider, app_id, new_code);
  CHECK(f.chain.approve_upgrade(app_id, pid, outsider.public_key, outsider_sig,
                                f.clock)
            .code() == Errc::unauthorized);
}

TEST_CASE("threshold soundness: fewer than t distinct approvals never authorize") {
  DeterministicRng rng(202);
  for (int n_signers = 1; n_signers <= 5; ++n_signers) {
    for (std::uint32_t t = 1; t <= static_cast<std::uint32_t>(n_signers); ++t) {
      LogicalClock clock;
      Chain chain;
      std::vector<crypto::KeyPair> keys;
      for (int i = 0; i < n_signers; ++i) {
        keys.push_back(
            crypto::keypair_from_seed(crypto::SecretScalar::random(rng)).take());
      }
      GenesisConfig cfg;
      cfg.os_digests = {random_digest(rng)};
      cfg.kms_node_digest = random_digest(rng);
      REQUIRE(chain.genesis(cfg, clock).ok());
      AppManifest m;
      m.compose_text = to_bytes("app");
      m.image_digests = {random_digest(rng)};
      GovernanceParams params;
      for (const auto& k : keys) params.signers.push_back(k.public_key);
      params.approval_threshold = t;
      auto app_id = chain.register_app(m, params, clock).take();
      Digest code = random_digest(rng);
      auto pid = chain.propose_upgrade(app_id, code, keys[0].public_key,
                                       ProposalKind::add_code, clock)
                     .take();

      // every prefix of t-1 distinct approvals, with repeats sprinkled in
      for (std::uint32_t k = 0; k + 1 < t; ++k) {
        auto sig = crypto::sign(keys[k],
                                approval_message(app_id, code,
                                                 ProposalKind::add_code));
        REQUIRE(chain.approve_upgrade(app_id, pid, keys[k].public_key, sig,
                                      clock)
                    .ok());
        REQUIRE(chain.approve_upgrade(app_id, pid, keys[k].public_key, sig,
                                      clock)
                    .value() == ApprovalStatus::duplicate_noop);
        CHECK_FALSE(chain.is_code_authorized(app_id, code).value());
      }
      CHECK_FALSE(chain.is_code_authorized(app_id, code).value());
    }
  }
}

TEST_CASE("revoke_code: threshold revocation empties the allowed set") {
  Fixture f;
  auto m = f.manifest("app");
  auto app_id = f.chain.register_app(m, f.params(2), f.clock).take();
  auto pid = f.chain.propose_upgrade(app_id, app_id, f.signers[0].public_key,
                                     ProposalKind::revoke_code, f.clock)
                 .take();
  for (int i = 0; i < 2; ++i) {
    auto sig = f.approve_sig(f.signers[static_cast<std::size_t>(i)], app_id,
                             app_id, ProposalKind::revoke_code);
    REQUIRE(f.chain.approve_upgrade(app_id, pid,
                                    f.signers[static_cast<std::size_t>(i)]
                                        .public_key,
                                    sig, f.clock)
                .ok());
  }
  CHECK_FALSE(f.chain.is_code_authorized(app_id, app_id).value());
  CHECK(f.chain.find_app_by_code(app_id) == std::nullopt);
  CHECK_FALSE(f.chain.registry_snapshot().authorized_apps.contains(app_id));

  // An add-approval signature cannot be replayed as a revoke approval.
  auto pid2 = f.chain.propose_upgrade(app_id, app_id, f.signers[0].public_key,
                                      ProposalKind::add_code, f.clock)
                  .take();
  auto revoke_sig = f.approve_sig(f.signers[0], app_id, app_id,
                                  ProposalKind::revoke_code);
  CHECK(f.chain.approve_upgrade(app_id, pid2, f.signers[0].public_key,
                                revoke_sig, f.clock)
            .code() == Errc::unauthorized);
}

TEST_CASE("counters: init at zero, bump strictly increases, names independent") {
  Fixture f;
  auto app_id =
      f.chain.register_app(f.manifest("app"), f.params(), f.clock).take();

  CHECK(f.chain.counter_read(app_id, "vol").value() == 0);
  CHECK(f.chain.counter_bump(app_id, "vol", f.clock).value() == 1);

  std::uint64_t prev = 1;
  for (int i = 0; i < 99; ++i) {
    auto v = f.chain.counter_bump(app_id, "vol", f.clock).take();
    CHECK(v == prev + 1);
    prev = v;
  }
  CHECK(prev == 100);
  CHECK(f.chain.counter_read(app_id, "other").value() == 0);
  CHECK(f.chain.counter_bump(app_id, "other", f.clock).value() == 1);

  Digest ghost = random_digest(f.rng);
  CHECK(f.chain.counter_bump(ghost, "vol", f.clock).code() ==
        Errc::unknown_app);
  CHECK(f.chain.counter_read(ghost, "vol").code() == Errc::unknown_app);
}

TEST_CASE("rotation tickets: one-shot, governance gated") {
  Fixture f;
  // No root recorded yet: rotation cannot be authorized.
  CHECK(f.chain.authorize_rotation(RotationKind::shares, f.clock).code() ==
        Errc::rotation_rejected);
  CHECK(f.chain.record_share_rotation(f.clock).code() ==
        Errc::rotation_rejected);

  // Record a root via a minimal bootstrapped quote.
  auto node_key =
      crypto::keypair_from_seed(crypto::SecretScalar::random(f.rng)).take();
  tee::TeeInstance inst = tee::TeeInstance::create(f.vendor, 2, f.rng);
  tee::BootManifest bm;
  bm.ovmf_digest = random_digest(f.rng);
  bm.vm_config_digest = random_digest(f.rng);
  bm.kernel_digest = random_digest(f.rng);
  bm.initrd_rootfs_digest = random_digest(f.rng);
  bm.app_digest = f.chain.kms_auth().kms_node_digest;
  inst.boot_with(bm);
  auto quote = inst.generate_quote(ByteView{}).take();
  REQUIRE(f.chain.record_kms_root(node_key.public_key, quote, f.clock).ok());
  CHECK(f.chain.record_kms_root(node_key.public_key, quote, f.clock).code() ==
        Errc::already_initialized);

  REQUIRE(f.chain.authorize_rotation(RotationKind::shares, f.clock).ok());
  CHECK(f.chain.rotation_authorized(RotationKind::shares));
  CHECK(f.chain.authorize_rotation(RotationKind::shares, f.clock).code() ==
        Errc::rotation_rejected);
  REQUIRE(f.chain.record_share_rotation(f.clock).ok());
  CHECK_FALSE(f.chain.rotation_authorized(RotationKind::shares));
  CHECK(f.chain.record_share_rotation(f.clock).code() ==
        Errc::rotation_rejected);
}

TEST_CASE("event log: one event per transition, replay reproduces state") {
  Fixture f;
  auto m = f.manifest("replayed-app");
  auto app_id = f.chain.register_app(m, f.params(2), f.clock).take();
  Digest code = random_digest(f.rng);
  auto pid = f.chain.propose_upgrade(app_id, code, f.signers[0].public_key,
                                     ProposalKind::add_code, f.clock)
                 .take();
  auto sig0 = f.approve_sig(f.signers[0], app_id, code);
  REQUIRE(f.chain.approve_upgrade(app_id, pid, f.signers[0].public_key, sig0,
                                  f.clock)
              .ok());
  // duplicate approval: no event
  std::size_t before = f.chain.event_log().size();
  REQUIRE(f.chain.approve_upgrade(app_id, pid, f.signers[0].public_key, sig0,
                                  f.clock)
              .value() == ApprovalStatus::duplicate_noop);
  CHECK(f.chain.event_log().size() == before);
  // failed ops: no event
  CHECK(!f.chain.register_app(m, f.params(), f.clock).ok());
  CHECK(f.chain.event_log().size() == before);

  auto sig1 = f.approve_sig(f.signers[1], app_id, code);
  REQUIRE(f.chain.approve_upgrade(app_id, pid, f.signers[1].public_key, sig1,
                                  f.clock)
              .ok());
  REQUIRE(f.chain.counter_bump(app_id, "snap", f.clock).ok());

  // genesis + register + propose + 2 approvals + bump = 6 events
  CHECK(f.chain.event_log().size() == 6);

  auto replayed = Chain::replay(f.chain.event_log());
  REQUIRE(replayed.ok());
  CHECK(replayed.value().export_state_json() == f.chain.export_state_json());
  CHECK(replayed.value().export_events_jsonl() ==
        f.chain.export_events_jsonl());
}

TEST_CASE("event log: jsonl round trip and tamper detection") {
  Fixture f;
  auto app_id =
      f.chain.register_app(f.manifest("app"), f.params(), f.clock).take();
  REQUIRE(f.chain.counter_bump(app_id, "c", f.clock).ok());

  std::string jsonl = f.chain.export_events_jsonl();
  auto parsed = Chain::parse_events_jsonl(jsonl);
  REQUIRE(parsed.ok());
  auto replayed = Chain::replay(parsed.value());
  REQUIRE(replayed.ok());
  CHECK(replayed.value().export_state_json() == f.chain.export_state_json());

  // Edit one payload byte: digest check pinpoints the entry.
  auto tampered = parsed.value();
  tampered[1].payload[0] ^= 0x01;
  auto bad = Chain::replay(tampered);
  REQUIRE(!bad.ok());
  CHECK(bad.error().message.find("at entry 1") != std::string::npos);

  // Truncated log replays to a prefix state that differs from the live one.
  auto prefix = parsed.value();
  prefix.pop_back();
  auto partial = Chain::replay(prefix);
  REQUIRE(partial.ok());
  CHECK(partial.value().export_state_json() != f.chain.export_state_json());

  auto garbage = Chain::parse_events_jsonl("{not json}\n");
  REQUIRE(!garbage.ok());
  CHECK(garbage.error().message.find("line 1") != std::string::npos);
}

TEST_CASE("instance authorization list") {
  Fixture f;
  GovernanceParams p = f.params();
  Digest inst1 = random_digest(f.rng);
  p.authorized_instance_ids.push_back(inst1);
  auto app_id = f.chain.register_app(f.manifest("app"), p, f.clock).take();
  CHECK(f.chain.app(app_id)->authorized_instance_ids.contains(inst1));

  Digest inst2 = random_digest(f.rng);
  REQUIRE(f.chain.authorize_instance(app_id, inst2, f.clock).ok());
  CHECK(f.chain.app(app_id)->authorized_instance_ids.contains(inst2));
  CHECK(f.chain.authorize_instance(app_id, inst2, f.clock).code() ==
        Errc::invalid_argument);
}
