#include "ztsim/walkthrough.hpp"

#include <sstream>

#include "json.hpp"
#include "ztsim/codec.hpp"

namespace ztsim::harness {

namespace {

using nlohmann::json;

std::string hex16(const crypto::Digest& d) { return d.hex().substr(0, 16); }

}  // namespace

std::string WalkthroughReport::to_json(bool pretty) const {
  json j;
  j["seed"] = seed;
  j["fault"] = fault;
  j["all_green"] = all_green;
  j["steps"] = json::array();
  for (const auto& s : steps) {
    j["steps"].push_back({{"index", s.index},
                          {"name", s.name},
                          {"status", s.status},
                          {"detail", s.detail}});
  }
  return pretty ? j.dump(2) : j.dump();
}

std::string WalkthroughReport::to_text() const {
  std::ostringstream out;
  out << "verification walkthrough (seed " << seed;
  if (fault) out << ", fault " << fault;
  out << ")\n";
  for (const auto& s : steps) {
    out << "  [" << (s.status == "ok" ? "PASS" : s.status == "broken"
                                                    ? "FAIL"
                                                    : "SKIP")
        << "] step " << s.index << " " << s.name;
    if (!s.detail.empty()) out << " — " << s.detail;
    out << "\n";
  }
  out << (all_green ? "chain of trust: verified end to end"
                    : "chain of trust: BROKEN")
      << "\n";
  return out.str();
}

WalkthroughReport run_walkthrough(std::uint64_t seed, int fault,
                                  const WorldConfig* base_config) {
  WorldConfig cfg = base_config ? *base_config : WorldConfig{};
  cfg.seed = seed;
  World world(cfg);

  WalkthroughReport report;
  report.seed = seed;
  report.fault = fault;

  bool broken = false;
  auto run_step = [&](int index, const std::string& name,
                      auto&& body) {
    StepReport step;
    step.index = index;
    step.name = name;
    if (broken) {
      step.status = "skipped";
      report.steps.push_back(step);
      return;
    }
    Result<std::string> outcome = body();
    if (outcome.ok()) {
      step.status = "ok";
      step.detail = outcome.value();
    } else {
      step.status = "broken";
      step.detail = std::string(errc_name(outcome.code())) + ": " +
                    outcome.error().message;
      broken = true;
    }
    report.steps.push_back(step);
  };

  // 1. KmsAuth genesis: the registry that anchors everything else.
  run_step(1, "kmsauth-genesis", [&]() -> Result<std::string> {
    if (auto r = world.do_genesis(fault == 1); !r) return r.error();
    return "registry live; " +
           std::to_string(world.chain().kms_auth().os_digests.size()) +
           " authorized OS build(s), KMS node digest " +
           hex16(world.chain().kms_auth().kms_node_digest);
  });

  // 2. First KMS node bootstraps the epoch-1 root.
  run_step(2, "kms-bootstrap", [&]() -> Result<std::string> {
    if (auto r = world.bootstrap_kms(fault == 2); !r) return r.error();
    return "epoch 1 root public key " +
           crypto::key_hex(*world.chain().kms_auth().root_public)
               .substr(0, 16) +
           "… recorded with the first node's quote";
  });

  // 3. Remaining nodes register on-chain and pass the first node's checks.
  run_step(3, "kms-node-admission", [&]() -> Result<std::string> {
    if (auto r = world.admit_all(fault == 3); !r) return r.error();
    return std::to_string(world.net().node_count()) +
           " node(s) serving; replicas hold the same root";
  });

  // 4. The gateway (itself a TEE app) gets verified and keyed by the KMS.
  run_step(4, "gateway-registration", [&]() -> Result<std::string> {
    if (auto r = world.deploy_gateway(fault == 4, fault == 7); !r) {
      return r.error();
    }
    return "gateway keyed for zone " + world.config().zone +
           "; issuer " + world.gw().issuer_name();
  });

  // 5. The demo app's AppAuth registration.
  run_step(5, "app-registration", [&]() -> Result<std::string> {
    auto app_id = world.register_app("demo-app");
    if (!app_id) return app_id.error();
    if (fault == 5) {
      // Operator retries the registration; the chain must refuse.
      auto dup = world.register_defined_app("demo-app");
      if (!dup) return dup.error();
    }
    return "app " + hex16(app_id.value()) + " registered, initial digest allowed";
  });

  // 6. Deploy, attest, release keys over the node wire protocol.
  run_step(6, "key-release", [&]() -> Result<std::string> {
    DeployOptions opts;
    opts.tamper_image = fault == 6;  // supply-chain corruption of the digest
    if (auto r = world.deploy_instance("demo-app", "demo-0", opts); !r) {
      return r.error();
    }
    if (auto r = world.request_keys("demo-0"); !r) return r.error();
    const auto& bundle = *world.instance("demo-0")->bundle;
    return "bundle epoch " + std::to_string(bundle.epoch) +
           ", app CA chain of " +
           std::to_string(bundle.cert_chain.certs.size()) + " certificates";
  });

  // 7. Route through the gateway and prove the in-TEE keypair end to end.
  run_step(7, "gateway-routing-proof", [&]() -> Result<std::string> {
    auto* rec = world.instance("demo-0");
    // The demo app answers any request with a fresh keypair plus a quote
    // carrying that public key as report data.
    crypto::KeyPair generated =
        crypto::keypair_from_seed(crypto::SecretScalar::random(world.rng()))
            .take();
    tee::TeeInstance app_tee = rec->instance;
    auto host = world.gateway_register(
        "demo-0", [generated, app_tee](ByteView) -> Bytes {
          auto quote = app_tee.generate_quote(ByteView(
              generated.public_key.data(), generated.public_key.size()));
          return quote ? quote.value().canonical() : Bytes{};
        });
    if (!host) return host.error();
    auto body = world.client_fetch(host.value());
    if (!body) return body.error();

    auto quote = tee::Quote::from_canonical(body.value());
    if (!quote) return quote.error();
    auto verified = tee::verify_quote(
        quote.value(), world.chain().kms_auth().attestation_root);
    if (!verified) return verified.error();
    if (!std::equal(generated.public_key.begin(), generated.public_key.end(),
                    verified.value().report_data.begin())) {
      return make_error(Errc::spoofed_quote,
                        "returned quote does not carry the generated key");
    }
    return "served via " + host.value() +
           "; quote proves the key was generated in the attested instance";
  });

  report.all_green = !broken;
  return report;
}

}  // namespace ztsim::harness
