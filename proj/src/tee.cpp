#include "ztsim/tee.hpp"

#include <algorithm>

#include "ztsim/codec.hpp"

namespace ztsim::tee {

Result<Register> register_from_name(std::string_view name) {
  if (name == "mrtd") return Register::mrtd;
  if (name == "rtmr0") return Register::rtmr0;
  if (name == "rtmr1") return Register::rtmr1;
  if (name == "rtmr2") return Register::rtmr2;
  if (name == "rtmr3") return Register::rtmr3;
  return make_error(Errc::invalid_argument, "unknown register");
}

std::string_view register_name(Register r) {
  switch (r) {
    case Register::mrtd: return "mrtd";
    case Register::rtmr0: return "rtmr0";
    case Register::rtmr1: return "rtmr1";
    case Register::rtmr2: return "rtmr2";
    case Register::rtmr3: return "rtmr3";
  }
  return "invalid";
}

Bytes MeasurementState::canonical() const {
  Bytes out;
  out.reserve(5 * 32);
  for (const auto& reg : regs_) append(out, reg.view());
  return out;
}

Result<MeasurementState> MeasurementState::from_canonical(ByteView data) {
  if (data.size() != 5 * 32) {
    return make_error(Errc::parse_error, "measurement bank must be 160 bytes");
  }
  MeasurementState s;
  for (std::size_t i = 0; i < 5; ++i) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(i * 32), 32,
                s.regs_[i].bytes.begin());
  }
  return s;
}

Result<MeasurementState> extend(const MeasurementState& state, Register reg,
                                const Digest& event) {
  auto idx = static_cast<std::size_t>(reg);
  if (idx > 4) return make_error(Errc::invalid_argument, "invalid register");
  MeasurementState next = state;
  next.regs_[idx] = crypto::hash(concat(state.regs_[idx].view(), event.view()));
  return next;
}

MeasurementState boot(const BootManifest& manifest) {
  auto s = MeasurementState::initial();
  s = extend(s, Register::mrtd, manifest.ovmf_digest).take();
  s = extend(s, Register::rtmr0, manifest.vm_config_digest).take();
  s = extend(s, Register::rtmr1, manifest.kernel_digest).take();
  s = extend(s, Register::rtmr2, manifest.initrd_rootfs_digest).take();
  s = extend(s, Register::rtmr3, manifest.app_digest).take();
  if (manifest.kms_root_pub_digest) {
    s = extend(s, Register::rtmr3, *manifest.kms_root_pub_digest).take();
  }
  return s;
}

Digest os_digest(const MeasurementState& state) {
  Bytes bank;
  bank.reserve(4 * 32);
  append(bank, state.mrtd().view());
  for (int i = 0; i < 3; ++i) append(bank, state.rtmr(i).view());
  return crypto::hash(bank);
}

Digest expected_rtmr3(const Digest& app_digest,
                      const std::optional<Digest>& kms_root_pub_digest) {
  auto s = MeasurementState::initial();
  s = extend(s, Register::rtmr3, app_digest).take();
  if (kms_root_pub_digest) {
    s = extend(s, Register::rtmr3, *kms_root_pub_digest).take();
  }
  return s.rtmr(3);
}

Bytes Quote::signed_body() const {
  ByteWriter w;
  w.raw(measurements.canonical());
  w.raw(ByteView(report_data.data(), report_data.size()));
  w.raw(ByteView(tee_key_public.data(), tee_key_public.size()));
  w.u32(firmware_version);
  w.raw(ByteView(vendor_endorsement.data(), vendor_endorsement.size()));
  return w.take();
}

Bytes Quote::canonical() const {
  Bytes out = signed_body();
  append(out, ByteView(signature.data(), signature.size()));
  return out;
}

Result<Quote> Quote::from_canonical(ByteView data) {
  ByteReader r(data);
  Quote q;
  auto meas = r.raw(160);
  if (!meas) return meas.error();
  auto state = MeasurementState::from_canonical(meas.value());
  if (!state) return state.error();
  q.measurements = state.value();
  auto rd = r.raw(kReportDataLen);
  if (!rd) return rd.error();
  std::copy(rd.value().begin(), rd.value().end(), q.report_data.begin());
  auto pk = r.raw(q.tee_key_public.size());
  if (!pk) return pk.error();
  std::copy(pk.value().begin(), pk.value().end(), q.tee_key_public.begin());
  auto fw = r.u32();
  if (!fw) return fw.error();
  q.firmware_version = fw.value();
  auto endors = r.raw(q.vendor_endorsement.size());
  if (!endors) return endors.error();
  std::copy(endors.value().begin(), endors.value().end(),
            q.vendor_endorsement.begin());
  auto sig = r.raw(q.signature.size());
  if (!sig) return sig.error();
  std::copy(sig.value().begin(), sig.value().end(), q.signature.begin());
  if (!r.exhausted()) {
    return make_error(Errc::parse_error, "trailing bytes after quote");
  }
  return q;
}

TeeInstance TeeInstance::create(const KeyPair& vendor_key,
                                std::uint32_t firmware_version,
                                DeterministicRng& rng) {
  TeeInstance inst;
  inst.hw_key_ =
      crypto::keypair_from_seed(crypto::SecretScalar::random(rng)).take();
  inst.endorsement_ = crypto::sign(
      vendor_key, ByteView(inst.hw_key_.public_key.data(),
                           inst.hw_key_.public_key.size()));
  inst.firmware_ = firmware_version;
  inst.state_ = MeasurementState::initial();
  return inst;
}

TeeInstance TeeInstance::restore(const KeyPair& hw_key,
                                 const Signature& endorsement,
                                 std::uint32_t firmware,
                                 const MeasurementState& state, bool booted) {
  TeeInstance inst;
  inst.hw_key_ = hw_key;
  inst.endorsement_ = endorsement;
  inst.firmware_ = firmware;
  inst.state_ = state;
  inst.booted_ = booted;
  return inst;
}

void TeeInstance::boot_with(const BootManifest& manifest) {
  state_ = boot(manifest);
  booted_ = true;
}

Digest TeeInstance::instance_id() const {
  return crypto::hash(ByteView(hw_key_.public_key.data(),
                               hw_key_.public_key.size()));
}

Result<Quote> TeeInstance::generate_quote(ByteView report_data) const {
  if (!booted_) {
    return make_error(Errc::invalid_argument, "instance has not booted");
  }
  if (report_data.size() > kReportDataLen) {
    return make_error(Errc::invalid_argument, "report data exceeds 64 bytes");
  }
  Quote q;
  q.measurements = state_;
  std::copy(report_data.begin(), report_data.end(), q.report_data.begin());
  q.tee_key_public = hw_key_.public_key;
  q.firmware_version = firmware_;
  q.vendor_endorsement = endorsement_;
  q.signature = crypto::sign(hw_key_, q.signed_body());
  return q;
}

Result<VerifiedQuote> verify_quote(const Quote& quote,
                                   const AttestationRoot& root) {
  if (!crypto::verify(root.vendor_public,
                      ByteView(quote.tee_key_public.data(),
                               quote.tee_key_public.size()),
                      quote.vendor_endorsement)) {
    return make_error(Errc::spoofed_quote,
                      "hardware key not certified by the attestation root");
  }
  if (!crypto::verify(quote.tee_key_public, quote.signed_body(),
                      quote.signature)) {
    return make_error(Errc::spoofed_quote, "quote signature invalid");
  }
  if (quote.firmware_version < root.min_firmware_version) {
    return make_error(Errc::outdated_firmware,
                      "firmware below the attestation root minimum");
  }
  VerifiedQuote v;
  v.measurements = quote.measurements;
  v.report_data = quote.report_data;
  v.tee_key_public = quote.tee_key_public;
  v.firmware_version = quote.firmware_version;
  return v;
}

}  // namespace ztsim::tee
