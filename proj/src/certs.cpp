#include "ztsim/certs.hpp"

#include <algorithm>

#include "ztsim/codec.hpp"

namespace ztsim::certs {

namespace {

void write_optional_digest(ByteWriter& w, const std::optional<Digest>& d) {
  w.u8(d.has_value() ? 1 : 0);
  if (d) w.raw(d->view());
}

Result<std::optional<Digest>> read_optional_digest(ByteReader& r) {
  auto flag = r.u8();
  if (!flag) return flag.error();
  if (flag.value() == 0) return std::optional<Digest>{};
  auto raw = r.raw(32);
  if (!raw) return raw.error();
  Digest d;
  std::copy(raw.value().begin(), raw.value().end(), d.bytes.begin());
  return std::optional<Digest>{d};
}

}  // namespace

Bytes Certificate::signed_body() const {
  ByteWriter w;
  w.var_string(subject);
  w.raw(ByteView(subject_public.data(), subject_public.size()));
  w.var_string(issuer);
  write_optional_digest(w, app_id_ext);
  write_optional_digest(w, quote_digest_ext);
  w.u32(epoch);
  w.u64(valid_from);
  w.u64(valid_until);
  return w.take();
}

Bytes Certificate::canonical() const {
  Bytes out = signed_body();
  append(out, ByteView(signature.data(), signature.size()));
  return out;
}

Result<Certificate> Certificate::from_canonical(ByteView data) {
  ByteReader r(data);
  Certificate c;
  auto subject = r.var_string();
  if (!subject) return subject.error();
  c.subject = std::move(subject).take();
  auto pub = r.raw(c.subject_public.size());
  if (!pub) return pub.error();
  std::copy(pub.value().begin(), pub.value().end(), c.subject_public.begin());
  auto issuer = r.var_string();
  if (!issuer) return issuer.error();
  c.issuer = std::move(issuer).take();
  auto app_id = read_optional_digest(r);
  if (!app_id) return app_id.error();
  c.app_id_ext = app_id.value();
  auto quote_digest = read_optional_digest(r);
  if (!quote_digest) return quote_digest.error();
  c.quote_digest_ext = quote_digest.value();
  auto epoch = r.u32();
  if (!epoch) return epoch.error();
  c.epoch = epoch.value();
  auto from = r.u64();
  if (!from) return from.error();
  c.valid_from = from.value();
  auto until = r.u64();
  if (!until) return until.error();
  c.valid_until = until.value();
  auto sig = r.raw(c.signature.size());
  if (!sig) return sig.error();
  std::copy(sig.value().begin(), sig.value().end(), c.signature.begin());
  if (!r.exhausted()) {
    return make_error(Errc::parse_error, "trailing bytes after certificate");
  }
  return c;
}

Bytes CertificateChain::canonical() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(certs.size()));
  for (const auto& c : certs) w.var_bytes(c.canonical());
  return w.take();
}

Result<CertificateChain> CertificateChain::from_canonical(ByteView data) {
  ByteReader r(data);
  auto n = r.u32();
  if (!n) return n.error();
  CertificateChain chain;
  for (std::uint32_t i = 0; i < n.value(); ++i) {
    auto raw = r.var_bytes();
    if (!raw) return raw.error();
    auto cert = Certificate::from_canonical(raw.value());
    if (!cert) return cert.error();
    chain.certs.push_back(std::move(cert).take());
  }
  if (!r.exhausted()) {
    return make_error(Errc::parse_error, "trailing bytes after chain");
  }
  return chain;
}

Certificate issue(const CertSpec& spec, std::string_view issuer_name,
                  const KeyPair& issuer_key) {
  Certificate c;
  c.subject = spec.subject;
  c.subject_public = spec.subject_public;
  c.issuer = std::string(issuer_name);
  c.app_id_ext = spec.app_id_ext;
  c.quote_digest_ext = spec.quote_digest_ext;
  c.epoch = spec.epoch;
  c.valid_from = spec.valid_from;
  c.valid_until = spec.valid_until;
  c.signature = crypto::sign(issuer_key, c.signed_body());
  return c;
}

Result<void> verify_chain(const CertificateChain& chain,
                          const PublicKey& expected_root, LogicalTime now) {
  if (chain.empty()) {
    return make_error(Errc::chain_invalid, "empty chain");
  }
  for (std::size_t i = 0; i < chain.certs.size(); ++i) {
    const Certificate& cert = chain.certs[i];
    if (cert.valid_from >= cert.valid_until) {
      return make_error(Errc::chain_invalid, "malformed validity window");
    }
    if (now < cert.valid_from || now > cert.valid_until) {
      return make_error(Errc::expired_cert,
                        "certificate outside validity: " + cert.subject);
    }
    const bool is_root = i + 1 == chain.certs.size();
    const Certificate& signer = is_root ? cert : chain.certs[i + 1];
    if (cert.issuer != signer.subject) {
      return make_error(Errc::chain_invalid,
                        "issuer does not match next subject");
    }
    if (!crypto::verify(signer.subject_public, cert.signed_body(),
                        cert.signature)) {
      return make_error(Errc::chain_invalid,
                        "signature invalid for " + cert.subject);
    }
  }
  if (chain.root().subject_public != expected_root) {
    return make_error(Errc::foreign_root,
                      "chain terminates at an unrecognized root");
  }
  return {};
}

}  // namespace ztsim::certs
