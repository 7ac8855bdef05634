#include "ztsim/gateway.hpp"

#include <algorithm>

namespace ztsim::gateway {

bool domain_in_zone(std::string_view domain, std::string_view zone) {
  if (domain == zone) return true;
  if (domain.size() <= zone.size() + 1) return false;
  return domain.ends_with(zone) &&
         domain[domain.size() - zone.size() - 1] == '.';
}

std::string subdomain_for_app(const Digest& app_id, std::string_view zone) {
  return app_id.hex().substr(0, 16) + "." + std::string(zone);
}

std::vector<Alert> ct_monitor_scan(const CtLog& log, std::string_view zone,
                                   std::string_view expected_issuer) {
  std::vector<Alert> alerts;
  for (std::size_t i = 0; i < log.entries().size(); ++i) {
    const Certificate& cert = log.entries()[i].cert;
    if (!domain_in_zone(cert.subject, zone)) continue;
    if (cert.issuer == expected_issuer) continue;
    alerts.push_back(Alert{i, cert.subject, cert.issuer});
  }
  return alerts;
}

Result<Digest> verify_presented_chain(
    const CertificateChain& chain, const PublicKey& expected_root,
    const governance::RegistrySnapshot& snapshot, LogicalTime now,
    std::optional<std::string_view> expected_host) {
  if (auto r = certs::verify_chain(chain, expected_root, now); !r) {
    return r.error();
  }
  if (!chain.leaf().app_id_ext.has_value()) {
    return make_error(Errc::chain_invalid, "leaf carries no app id");
  }
  const Digest app_id = *chain.leaf().app_id_ext;
  if (!snapshot.authorized_apps.contains(app_id)) {
    return make_error(Errc::unverified_app,
                      "app id is not authorized on-chain");
  }
  if (expected_host && chain.leaf().subject != *expected_host) {
    return make_error(Errc::chain_invalid,
                      "certificate does not name the requested host");
  }
  return app_id;
}

Result<void> Gateway::initialize(const kms::AppKeyBundle& own_bundle) {
  if (own_bundle.cert_chain.certs.size() != 3) {
    return make_error(Errc::invalid_argument,
                      "expected leaf/CA/root identity chain");
  }
  auto ca_key = crypto::keypair_from_seed(own_bundle.app_ca_secret);
  if (!ca_key) return ca_key.error();
  const Certificate& ca_cert = own_bundle.cert_chain.certs[1];
  if (ca_key.value().public_key != ca_cert.subject_public) {
    return make_error(Errc::invalid_argument,
                      "bundle CA secret does not match its certificate");
  }
  ca_key_ = ca_key.value();
  ca_cert_ = ca_cert;
  issuer_name_ = ca_cert.subject;
  root_cert_ = own_bundle.cert_chain.root();
  kms_root_public_ = root_cert_.subject_public;
  epoch_ = own_bundle.epoch;
  initialized_ = true;
  return {};
}

Result<Certificate> Gateway::issue_domain_leaf(
    const std::string& host, const PublicKey& subject_public,
    const Digest& app_id, std::optional<Digest> quote_digest,
    LogicalTime now) {
  // CAA discipline: the gateway only signs when the record names it.
  if (!caa_.contains(host)) {
    caa_[host] = CaaRecord{host, issuer_name_};
  }
  auto allowed = caa_check(host, issuer_name_);
  if (!allowed) return allowed.error();
  if (!allowed.value()) {
    return make_error(Errc::unauthorized,
                      "CAA record forbids this issuer for " + host);
  }
  certs::CertSpec spec;
  spec.subject = host;
  spec.subject_public = subject_public;
  spec.app_id_ext = app_id;
  spec.quote_digest_ext = quote_digest;
  spec.epoch = epoch_;
  spec.valid_from = now;
  spec.valid_until = now + kms::kLeafLifetime;
  Certificate leaf = certs::issue(spec, issuer_name_, ca_key_);
  // Log before serving: a certificate never routes traffic unless it is
  // already in the transparency log.
  ct_.append(now, leaf);
  return leaf;
}

Result<std::string> Gateway::admit(const CertificateChain& app_chain,
                                   const std::string& host,
                                   const governance::RegistrySnapshot& snapshot,
                                   LogicalTime now, Backend backend) {
  if (!initialized_) {
    return make_error(Errc::invalid_argument, "gateway has no identity yet");
  }
  auto app_id = verify_presented_chain(app_chain, kms_root_public_, snapshot,
                                       now, std::nullopt);
  if (!app_id) return app_id.error();
  if (routes_.contains(host)) {
    return make_error(Errc::invalid_argument, "host already registered");
  }
  auto leaf = issue_domain_leaf(host, app_chain.leaf().subject_public,
                                app_id.value(),
                                app_chain.leaf().quote_digest_ext, now);
  if (!leaf) return leaf.error();
  CertificateChain serving;
  serving.certs = {leaf.value(), ca_cert_, root_cert_};
  routes_[host] = RouteEntry{app_id.value(), std::move(serving),
                             std::move(backend)};
  return host;
}

Result<std::string> Gateway::register_app(
    const CertificateChain& app_chain,
    const governance::RegistrySnapshot& snapshot, LogicalTime now,
    Backend backend) {
  if (app_chain.empty() || !app_chain.leaf().app_id_ext) {
    return make_error(Errc::chain_invalid, "leaf carries no app id");
  }
  const std::string host =
      subdomain_for_app(*app_chain.leaf().app_id_ext, zone_);
  return admit(app_chain, host, snapshot, now, std::move(backend));
}

Result<std::string> Gateway::register_app_with_quote(
    const tee::Quote& quote, const governance::AppManifest& manifest,
    const governance::Chain& chain, LogicalTime now, Backend backend) {
  if (!initialized_) {
    return make_error(Errc::invalid_argument, "gateway has no identity yet");
  }
  auto verified =
      tee::verify_quote(quote, chain.kms_auth().attestation_root);
  if (!verified) return verified.error();
  const Digest code_digest = manifest.app_digest();
  auto app_id = chain.find_app_by_code(code_digest);
  if (!app_id) {
    return make_error(Errc::unverified_app,
                      "manifest digest is not registered on-chain");
  }
  auto expected = tee::expected_rtmr3(
      code_digest, crypto::hash(ByteView(kms_root_public_.data(),
                                         kms_root_public_.size())));
  if (verified.value().measurements.rtmr(3) != expected) {
    return make_error(Errc::unverified_app,
                      "quote does not attest the presented manifest");
  }
  const std::string host = subdomain_for_app(*app_id, zone_);
  if (routes_.contains(host)) {
    return make_error(Errc::invalid_argument, "host already registered");
  }
  auto leaf = issue_domain_leaf(host, quote.tee_key_public, *app_id,
                                crypto::hash(quote.canonical()), now);
  if (!leaf) return leaf.error();
  CertificateChain serving;
  serving.certs = {leaf.value(), ca_cert_, root_cert_};
  routes_[host] = RouteEntry{*app_id, std::move(serving), std::move(backend)};
  return host;
}

Result<std::string> Gateway::register_custom_domain(
    const CertificateChain& app_chain, const std::string& domain,
    const governance::RegistrySnapshot& snapshot, LogicalTime now,
    Backend backend) {
  if (domain.empty() || domain_in_zone(domain, zone_)) {
    return make_error(Errc::invalid_argument,
                      "custom domain must live outside the wildcard zone");
  }
  return admit(app_chain, domain, snapshot, now, std::move(backend));
}

Result<void> Gateway::renew(const std::string& host, LogicalTime now) {
  auto it = routes_.find(host);
  if (it == routes_.end()) {
    return make_error(Errc::no_route, "unknown host");
  }
  const Certificate& old_leaf = it->second.serving_chain.leaf();
  auto leaf = issue_domain_leaf(host, old_leaf.subject_public,
                                it->second.app_id, old_leaf.quote_digest_ext,
                                now);
  if (!leaf) return leaf.error();
  it->second.serving_chain.certs[0] = leaf.value();
  return {};
}

Result<GatewayResponse> Gateway::route(const std::string& host, ByteView body,
                                       LogicalTime) const {
  auto it = routes_.find(host);
  if (it == routes_.end()) {
    return make_error(Errc::no_route, "no route for " + host);
  }
  GatewayResponse resp;
  resp.body = it->second.backend ? it->second.backend(body) : Bytes{};
  resp.chain = it->second.serving_chain;
  resp.served_host = host;
  return resp;
}

Result<bool> Gateway::caa_check(const std::string& domain,
                                const std::string& issuer) const {
  auto it = caa_.find(domain);
  if (it == caa_.end()) {
    if (!domain_in_zone(domain, zone_)) {
      return make_error(Errc::invalid_argument,
                        "domain outside the managed zone");
    }
    // In-zone domains without an explicit record default to the zone owner.
    return issuer == issuer_name_;
  }
  return it->second.allowed_issuer == issuer;
}

void Gateway::caa_set(const std::string& domain, const std::string& issuer) {
  caa_[domain] = CaaRecord{domain, issuer};
}

Result<void> Gateway::hijack_route(const std::string& host,
                                   const std::string& target_host) {
  auto victim = routes_.find(host);
  auto target = routes_.find(target_host);
  if (victim == routes_.end() || target == routes_.end()) {
    return make_error(Errc::no_route, "both hosts must be registered");
  }
  victim->second = target->second;
  return {};
}

std::vector<std::string> Gateway::hosts() const {
  std::vector<std::string> out;
  out.reserve(routes_.size());
  for (const auto& [host, entry] : routes_) out.push_back(host);
  return out;
}

std::optional<Digest> Gateway::app_for_host(const std::string& host) const {
  auto it = routes_.find(host);
  if (it == routes_.end()) return std::nullopt;
  return it->second.app_id;
}

const Certificate* Gateway::serving_leaf(const std::string& host) const {
  auto it = routes_.find(host);
  if (it == routes_.end()) return nullptr;
  return &it->second.serving_chain.leaf();
}

const CertificateChain* Gateway::serving_chain(const std::string& host) const {
  auto it = routes_.find(host);
  if (it == routes_.end()) return nullptr;
  return &it->second.serving_chain;
}

}  // namespace ztsim::gateway
