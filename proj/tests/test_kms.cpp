#include "ztsim/kms.hpp"

#include <set>
#include <vector>

#include "doctest.h"
#include "sim_fixture.hpp"
#include "ztsim/codec.hpp"

using namespace ztsim;
using namespace ztsim::kms;
using ztsim::testing::SimFixture;
using ztsim::testing::rand_digest;

TEST_CASE("bootstrap: root recorded on chain, re-bootstrap rejected") {
  SimFixture f(300);
  const auto& auth = f.chain.kms_auth();
  REQUIRE(auth.root_public.has_value());
  CHECK(*auth.root_public == f.net.epoch_status().current_public);
  CHECK(auth.root_epoch == 1);
  REQUIRE(auth.first_node_quote.has_value());
  // Quote report_data binds node identity || root public key.
  ByteView report(auth.first_node_quote->report_data.data(), 64);
  CHECK(std::equal(report.begin(), report.begin() + 32,
                   f.net.node(0).node_key.public_key.begin()));
  CHECK(std::equal(report.begin() + 32, report.end(),
                   auth.root_public->begin()));

  CHECK(f.net.bootstrap_first_node(f.chain, f.clock, f.rng).code() ==
        Errc::already_initialized);
}

TEST_CASE("bootstrap: node running wrong code is refused") {
  DeterministicRng rng(301);
  auto vendor =
      crypto::keypair_from_seed(crypto::SecretScalar::random(rng)).take();
  governance::LogicalClock clock;
  governance::Chain chain;
  governance::GenesisConfig cfg;
  cfg.os_digests = {rand_digest(rng)};
  cfg.kms_node_digest = rand_digest(rng);
  cfg.attestation_root = {vendor.public_key, 1};
  REQUIRE(chain.genesis(cfg, clock).ok());

  KmsNetwork net(Mode::duplication, 1);
  auto inst = tee::TeeInstance::create(vendor, 2, rng);
  tee::BootManifest bm;
  bm.ovmf_digest = rand_digest(rng);
  bm.vm_config_digest = rand_digest(rng);
  bm.kernel_digest = rand_digest(rng);
  bm.initrd_rootfs_digest = rand_digest(rng);
  bm.app_digest = rand_digest(rng);  // not the registered KMS node digest
  inst.boot_with(bm);
  net.add_node(std::move(inst),
               crypto::keypair_from_seed(crypto::SecretScalar::random(rng))
                   .take());
  auto r = net.bootstrap_first_node(chain, clock, rng);
  REQUIRE(!r.ok());
  CHECK(r.code() == Errc::admission_denied);
  CHECK_FALSE(chain.kms_auth().root_public.has_value());
}

TEST_CASE("admission: unregistered candidate, stale firmware, duplication survival") {
  SimFixture f(302, Mode::duplication, 1, 1, /*min_firmware=*/2);

  // Unregistered candidate is refused.
  auto c1 = f.add_kms_node();
  auto r = f.net.admit_node(0, c1, f.chain, f.clock, f.rng);
  REQUIRE(!r.ok());
  CHECK(r.code() == Errc::admission_denied);

  // Registered, but running outdated firmware: quote verification fails.
  auto stale = f.add_kms_node(/*fw=*/1);
  REQUIRE(f.chain.register_kms_node(f.net.node(stale).node_key.public_key,
                                    f.clock)
              .ok());
  auto r2 = f.net.admit_node(0, stale, f.chain, f.clock, f.rng);
  REQUIRE(!r2.ok());
  CHECK(r2.code() == Errc::outdated_firmware);

  // Properly registered nodes join; killing the first two leaves the root
  // recoverable from the survivor.
  REQUIRE(f.chain.register_kms_node(f.net.node(c1).node_key.public_key,
                                    f.clock)
              .ok());
  REQUIRE(f.net.admit_node(0, c1, f.chain, f.clock, f.rng).ok());
  auto c2 = f.add_kms_node();
  REQUIRE(f.chain.register_kms_node(f.net.node(c2).node_key.public_key,
                                    f.clock)
              .ok());
  REQUIRE(f.net.admit_node(0, c2, f.chain, f.clock, f.rng).ok());

  auto app = f.register_app("survivor-app");
  auto inst = f.deploy_instance(app.manifest);
  auto before = f.request_keys(inst, app.manifest).take();

  f.net.node(0).alive = false;
  f.net.node(stale).alive = false;  // never admitted, irrelevant but explicit
  f.net.node(c1).alive = false;
  auto after = f.request_keys(inst, app.manifest);
  REQUIRE(after.ok());
  CHECK(after.value().canonical() == before.canonical());

  f.net.node(c2).alive = false;
  CHECK(f.request_keys(inst, app.manifest).code() == Errc::kms_unavailable);
}

TEST_CASE("key release: derivation separation and portability") {
  SimFixture f(303);
  auto app = f.register_app("derivation-app");
  auto inst_a = f.deploy_instance(app.manifest);
  auto inst_b = f.deploy_instance(app.manifest);

  auto a = f.request_keys(inst_a, app.manifest).take();
  auto b = f.request_keys(inst_b, app.manifest).take();

  // Same app: stable app-level keys; instance-bound disk keys.
  CHECK(a.env_key == b.env_key);
  CHECK(a.app_ca_secret == b.app_ca_secret);
  CHECK(a.app_sign_key.public_key == b.app_sign_key.public_key);
  CHECK(a.disk_key != b.disk_key);

  // Re-invocation is byte-identical (pure function of epoch/app/instance).
  auto again = f.request_keys(inst_a, app.manifest).take();
  CHECK(again.canonical() == a.canonical());

  // A different app shares nothing.
  auto other = f.register_app("other-app");
  auto inst_o = f.deploy_instance(other.manifest);
  auto o = f.request_keys(inst_o, other.manifest).take();
  CHECK(o.env_key != a.env_key);
  CHECK(o.app_ca_secret != a.app_ca_secret);
  CHECK(o.app_sign_key.public_key != a.app_sign_key.public_key);
}

TEST_CASE("key release: the four gates fire in order with their own errors") {
  SimFixture f(304);
  auto app = f.register_app("gated-app");
  auto inst = f.deploy_instance(app.manifest);

  // Gate 1: tampered quote.
  auto quote = inst.generate_quote(ByteView{}).take();
  auto tampered = quote;
  tampered.report_data[0] ^= 1;
  CHECK(f.net
            .request_app_keys(tampered, app.manifest, inst.instance_id(),
                              std::nullopt, f.chain, f.clock)
            .code() == Errc::spoofed_quote);

  // Gate 2: unknown OS build.
  auto rogue_os = tee::TeeInstance::create(f.vendor, f.firmware, f.rng);
  tee::BootManifest bm = f.os_base;
  bm.kernel_digest = rand_digest(f.rng);
  bm.app_digest = app.manifest.app_digest();
  bm.kms_root_pub_digest = crypto::hash(
      ByteView(f.net.epoch_status().current_public.data(), 32));
  rogue_os.boot_with(bm);
  CHECK(f.request_keys(rogue_os, app.manifest).code() == Errc::untrusted_os);

  // Gate 3a: manifest whose digest is not authorized anywhere.
  governance::AppManifest evil = app.manifest;
  evil.image_digests[0] = rand_digest(f.rng);
  auto evil_inst = f.deploy_instance(evil);
  CHECK(f.request_keys(evil_inst, evil).code() == Errc::key_release_denied);

  // Gate 3b: authorized manifest presented by an instance attesting other
  // code (RTMR3 does not match the presented manifest).
  CHECK(f.request_keys(evil_inst, app.manifest).code() ==
        Errc::key_release_denied);

  // Gate 3c: instance bound to a foreign KMS root digest.
  auto unbound = tee::TeeInstance::create(f.vendor, f.firmware, f.rng);
  tee::BootManifest bm2 = f.os_base;
  bm2.app_digest = app.manifest.app_digest();
  bm2.kms_root_pub_digest = rand_digest(f.rng);
  unbound.boot_with(bm2);
  CHECK(f.request_keys(unbound, app.manifest).code() ==
        Errc::key_release_denied);

  // Gate 4: instance restriction.
  governance::GovernanceParams p = f.params();
  p.authorized_instance_ids = {rand_digest(f.rng)};  // not our instance
  governance::AppManifest restricted;
  restricted.compose_text = to_bytes("restricted");
  restricted.image_digests = {rand_digest(f.rng)};
  auto rid = f.chain.register_app(restricted, p, f.clock).take();
  auto rinst = f.deploy_instance(restricted);
  auto rr = f.request_keys(rinst, restricted);
  REQUIRE(!rr.ok());
  CHECK(rr.code() == Errc::instance_not_authorized);

  // Authorizing the instance on-chain opens the gate.
  REQUIRE(f.chain.authorize_instance(rid, rinst.instance_id(), f.clock).ok());
  CHECK(f.request_keys(rinst, restricted).ok());

  // The happy path still works.
  CHECK(f.request_keys(inst, app.manifest).ok());
}

TEST_CASE("threshold: 3-of-5 coalition safety and quorum availability") {
  SimFixture f(305, Mode::threshold, 3, 5);
  auto app = f.register_app("mpc-app");
  auto inst = f.deploy_instance(app.manifest);
  auto genuine = f.request_keys(inst, app.manifest).take();

  // Every 2-node coalition reconstructs garbage: the misread secret derives
  // a different bundle than the genuine one.
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) {
      std::vector<crypto::KeyShare> coalition = {
          f.net.node(i).shares.at(1).ca, f.net.node(j).shares.at(1).ca};
      auto guess = crypto::shamir_reconstruct(coalition, 2);
      REQUIRE(guess.ok());
      auto guessed_env =
          crypto::derive_key(guess.value(), "env", genuine.app_id.view());
      REQUIRE(guessed_env.ok());
      CHECK(guessed_env.value() != genuine.env_key);
    }
  }

  // Any three nodes serve; with only two alive the quorum fails.
  f.net.node(0).alive = false;
  f.net.node(1).alive = false;
  auto served = f.request_keys(inst, app.manifest);
  REQUIRE(served.ok());
  CHECK(served.value().canonical() == genuine.canonical());

  f.net.node(2).alive = false;
  CHECK(f.request_keys(inst, app.manifest).code() == Errc::kms_unavailable);
}

TEST_CASE("rotate_shares: transparent to derived keys, old shares dead") {
  SimFixture f(306, Mode::threshold, 3, 5);
  auto app = f.register_app("rotating-app");
  auto inst = f.deploy_instance(app.manifest);
  auto before = f.request_keys(inst, app.manifest).take();

  // Not governance-initiated: rejected.
  CHECK(f.net.rotate_shares(f.chain, f.clock, f.rng).code() ==
        Errc::rotation_rejected);

  std::vector<RootShares> old_shares;
  for (std::size_t i = 0; i < 5; ++i) {
    old_shares.push_back(f.net.node(i).shares.at(1));
  }

  for (int round = 0; round < 3; ++round) {
    REQUIRE(f.chain
                .authorize_rotation(governance::RotationKind::shares, f.clock)
                .ok());
    REQUIRE(f.net.rotate_shares(f.chain, f.clock, f.rng).ok());
    auto after = f.request_keys(inst, app.manifest);
    REQUIRE(after.ok());
    CHECK(after.value().canonical() == before.canonical());
  }

  // Mixing k old and 3-k new shares reconstructs the wrong secret.
  auto current_ca =
      crypto::shamir_reconstruct(
          std::vector<crypto::KeyShare>{f.net.node(0).shares.at(1).ca,
                                        f.net.node(1).shares.at(1).ca,
                                        f.net.node(2).shares.at(1).ca},
          3)
          .take();
  for (int k = 1; k <= 2; ++k) {
    std::vector<crypto::KeyShare> mix;
    for (int i = 0; i < k; ++i) {
      mix.push_back(old_shares[static_cast<std::size_t>(i)].ca);
    }
    for (int i = k; i < 3; ++i) {
      mix.push_back(f.net.node(static_cast<std::size_t>(i)).shares.at(1).ca);
    }
    auto guess = crypto::shamir_reconstruct(mix, 3);
    REQUIRE(guess.ok());
    CHECK(guess.value() != current_ca);
  }

  // A downed node aborts the rotation and leaves shares intact.
  REQUIRE(f.chain.authorize_rotation(governance::RotationKind::shares, f.clock)
              .ok());
  f.net.node(4).alive = false;
  auto snapshot = f.net.node(0).shares.at(1).ca;
  CHECK(f.net.rotate_shares(f.chain, f.clock, f.rng).code() ==
        Errc::rotation_rejected);
  CHECK(f.net.node(0).shares.at(1).ca == snapshot);

  // Duplication-mode networks reject share rotation outright.
  SimFixture dup(307);
  REQUIRE(dup.chain
              .authorize_rotation(governance::RotationKind::shares, dup.clock)
              .ok());
  CHECK(dup.net.rotate_shares(dup.chain, dup.clock, dup.rng).code() ==
        Errc::rotation_rejected);
}

TEST_CASE("rotate_root: dual-epoch handover, deadline erasure") {
  SimFixture f(308);
  auto app = f.register_app("epoch-app");
  auto inst = f.deploy_instance(app.manifest);
  auto e1 = f.request_keys(inst, app.manifest).take();
  CHECK(e1.epoch == 1);

  // Governance gate.
  CHECK(f.net.rotate_root(f.chain, 50, f.clock, f.rng).code() ==
        Errc::rotation_rejected);
  REQUIRE(f.chain.authorize_rotation(governance::RotationKind::root, f.clock)
              .ok());
  auto st = f.net.rotate_root(f.chain, 50, f.clock, f.rng);
  REQUIRE(st.ok());
  CHECK(st.value().current_epoch == 2);
  CHECK(st.value().handover_open);
  CHECK(*f.chain.kms_auth().root_public == st.value().current_public);

  // Second rotation while the handover is open: rejected even if authorized.
  REQUIRE(f.chain.authorize_rotation(governance::RotationKind::root, f.clock)
              .ok());
  CHECK(f.net.rotate_root(f.chain, 50, f.clock, f.rng).code() ==
        Errc::rotation_rejected);

  // During the handover both epochs answer.
  auto old_again = f.request_keys(inst, app.manifest, 1);
  REQUIRE(old_again.ok());
  CHECK(old_again.value().canonical() == e1.canonical());
  auto e2 = f.request_keys(inst, app.manifest, 2).take();
  CHECK(e2.epoch == 2);
  CHECK(e2.app_ca_secret != e1.app_ca_secret);
  CHECK(e2.env_key != e1.env_key);
  CHECK(e2.cert_chain.root().subject_public !=
        e1.cert_chain.root().subject_public);

  // Handover exclusivity: exactly two live epochs now.
  CHECK(f.net.epochs().size() == 2);

  // After the deadline the old epoch is erased and derivation fails.
  f.clock.advance(100);
  auto expired = f.request_keys(inst, app.manifest, 1);
  REQUIRE(!expired.ok());
  CHECK(expired.code() == Errc::epoch_expired);
  CHECK(f.net.epochs().size() == 1);
  CHECK(f.chain.kms_auth().destroyed_epochs.contains(1));
  for (std::size_t i = 0; i < f.net.node_count(); ++i) {
    CHECK_FALSE(f.net.node(i).root_cache.contains(1));
  }

  // New-epoch derivation still works for the old-booted instance (it bound
  // the predecessor root, accepted only while that epoch lived) -- after the
  // deadline a redeployed instance binds the new root.
  auto fresh = f.deploy_instance(app.manifest);
  CHECK(f.request_keys(fresh, app.manifest).ok());
}

TEST_CASE("cert chains: verification, epoch isolation, extension tampering") {
  SimFixture f(309);
  auto app = f.register_app("cert-app");
  auto inst = f.deploy_instance(app.manifest);
  auto bundle = f.request_keys(inst, app.manifest).take();

  const auto root_pub = f.net.epoch_status().current_public;
  CHECK(certs::verify_chain(bundle.cert_chain, root_pub, f.clock.now()).ok());
  CHECK(bundle.cert_chain.certs.size() == 3);
  CHECK(bundle.cert_chain.leaf().app_id_ext == app.app_id);
  CHECK(bundle.cert_chain.leaf().subject_public ==
        bundle.app_sign_key.public_key);

  // Tampering with the app_id extension breaks the leaf signature.
  auto tampered = bundle.cert_chain;
  tampered.certs[0].app_id_ext = rand_digest(f.rng);
  auto r = certs::verify_chain(tampered, root_pub, f.clock.now());
  REQUIRE(!r.ok());
  CHECK(r.code() == Errc::chain_invalid);

  // A chain from a different epoch's root does not verify against this one.
  REQUIRE(f.chain.authorize_rotation(governance::RotationKind::root, f.clock)
              .ok());
  REQUIRE(f.net.rotate_root(f.chain, 1000, f.clock, f.rng).ok());
  auto bundle2 = f.request_keys(inst, app.manifest, 2).take();
  CHECK(certs::verify_chain(bundle2.cert_chain,
                            f.net.epoch_status().current_public,
                            f.clock.now())
            .ok());
  CHECK(certs::verify_chain(bundle2.cert_chain, root_pub, f.clock.now())
            .code() == Errc::foreign_root);
  CHECK(certs::verify_chain(bundle.cert_chain,
                            f.net.epoch_status().current_public,
                            f.clock.now())
            .code() == Errc::foreign_root);
}

TEST_CASE("wire: derive request over the envelope matches the direct call") {
  SimFixture f(310, Mode::duplication, 1, 2);
  auto app = f.register_app("wire-app");
  auto inst = f.deploy_instance(app.manifest);
  auto direct = f.request_keys(inst, app.manifest).take();

  DeriveRequest req;
  req.quote = inst.generate_quote(ByteView{}).take();
  req.manifest = app.manifest;
  req.instance_id = inst.instance_id();
  Bytes wire = encode_envelope(Envelope{kMsgDeriveRequest, req.canonical()});

  // Byte-identical response from both nodes.
  for (std::size_t node = 0; node < 2; ++node) {
    Bytes reply = f.net.handle_message(node, wire, f.chain, f.clock);
    auto env = decode_envelope(reply);
    REQUIRE(env.ok());
    REQUIRE(env.value().kind == kMsgDeriveResponse);
    auto bundle = AppKeyBundle::from_canonical(env.value().payload);
    REQUIRE(bundle.ok());
    CHECK(bundle.value().canonical() == direct.canonical());
  }

  // Error surfaces as a typed error envelope.
  governance::AppManifest evil = app.manifest;
  evil.config = to_bytes("tampered");
  DeriveRequest bad = req;
  bad.manifest = evil;
  Bytes bad_wire = encode_envelope(Envelope{kMsgDeriveRequest,
                                            bad.canonical()});
  auto err_env = decode_envelope(
      f.net.handle_message(0, bad_wire, f.chain, f.clock));
  REQUIRE(err_env.ok());
  CHECK(err_env.value().kind == kMsgError);
  ByteReader r(err_env.value().payload);
  CHECK(r.var_string().value() == "key-release-denied");

  // Epoch status round trip.
  Bytes status_wire =
      encode_envelope(Envelope{kMsgEpochStatusRequest, {}});
  auto status_env =
      decode_envelope(f.net.handle_message(0, status_wire, f.chain, f.clock));
  REQUIRE(status_env.ok());
  REQUIRE(status_env.value().kind == kMsgEpochStatusResponse);
  ByteReader sr(status_env.value().payload);
  CHECK(sr.u32().value() == 1);
}
