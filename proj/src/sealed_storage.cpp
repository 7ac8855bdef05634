#include "ztsim/sealed_storage.hpp"

#include <algorithm>

#include "ztsim/codec.hpp"

namespace ztsim::storage {

namespace {

constexpr char kVolumeMagic[4] = {'Z', 'T', 'S', 'V'};
constexpr char kBackupMagic[4] = {'Z', 'T', 'S', 'B'};
constexpr std::uint8_t kFormatVersion = 0x01;

}  // namespace

Bytes VolumeHeader::canonical() const {
  ByteWriter w;
  w.raw(app_id.view());
  w.u32(epoch);
  w.var_string(counter_name);
  w.u64(counter_value);
  w.raw(ByteView(nonce.data(), nonce.size()));
  return w.take();
}

Bytes SealedVolume::serialize() const {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kVolumeMagic), 4));
  w.u8(kFormatVersion);
  w.raw(header.canonical());
  w.var_bytes(ciphertext);
  return w.take();
}

Result<SealedVolume> SealedVolume::parse(ByteView data) {
  ByteReader r(data);
  auto magic = r.raw(4);
  if (!magic ||
      !std::equal(magic.value().begin(), magic.value().end(), kVolumeMagic)) {
    return make_error(Errc::parse_error, "not a sealed volume");
  }
  auto version = r.u8();
  if (!version) return version.error();
  if (version.value() != kFormatVersion) {
    return make_error(Errc::parse_error, "unsupported volume version");
  }
  SealedVolume v;
  auto app_id = r.raw(32);
  if (!app_id) return app_id.error();
  std::copy(app_id.value().begin(), app_id.value().end(),
            v.header.app_id.bytes.begin());
  auto epoch = r.u32();
  if (!epoch) return epoch.error();
  v.header.epoch = epoch.value();
  auto name = r.var_string();
  if (!name) return name.error();
  v.header.counter_name = std::move(name).take();
  auto counter = r.u64();
  if (!counter) return counter.error();
  v.header.counter_value = counter.value();
  auto nonce = r.raw(v.header.nonce.size());
  if (!nonce) return nonce.error();
  std::copy(nonce.value().begin(), nonce.value().end(),
            v.header.nonce.begin());
  auto ct = r.var_bytes();
  if (!ct) return ct.error();
  v.ciphertext = std::move(ct).take();
  if (!r.exhausted()) {
    return make_error(Errc::parse_error, "trailing bytes after volume");
  }
  return v;
}

Bytes BackupBlob::serialize() const {
  ByteWriter w;
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kBackupMagic), 4));
  w.u8(kFormatVersion);
  w.raw(source_instance.view());
  w.raw(volume.serialize());
  return w.take();
}

Result<BackupBlob> BackupBlob::parse(ByteView data) {
  ByteReader r(data);
  auto magic = r.raw(4);
  if (!magic ||
      !std::equal(magic.value().begin(), magic.value().end(), kBackupMagic)) {
    return make_error(Errc::parse_error, "not a backup blob");
  }
  auto version = r.u8();
  if (!version) return version.error();
  if (version.value() != kFormatVersion) {
    return make_error(Errc::parse_error, "unsupported backup version");
  }
  BackupBlob b;
  auto src = r.raw(32);
  if (!src) return src.error();
  std::copy(src.value().begin(), src.value().end(),
            b.source_instance.bytes.begin());
  auto rest = r.raw(r.remaining());
  if (!rest) return rest.error();
  auto vol = SealedVolume::parse(rest.value());
  if (!vol) return vol.error();
  b.volume = std::move(vol).take();
  return b;
}

Result<std::uint64_t> GovernanceCounterService::bump(const Digest& app_id,
                                                     std::string_view name) {
  if (!available_) {
    return make_error(Errc::counter_unavailable, "counter service offline");
  }
  return chain_.counter_bump(app_id, name, clock_);
}

Result<std::uint64_t> GovernanceCounterService::read(const Digest& app_id,
                                                     std::string_view name) {
  if (!available_) {
    return make_error(Errc::counter_unavailable, "counter service offline");
  }
  return chain_.counter_read(app_id, name);
}

Result<std::uint64_t> LocalCounterService::bump(const Digest& app_id,
                                                std::string_view name) {
  return ++counters_[governance::counter_key(app_id, name)];
}

Result<std::uint64_t> LocalCounterService::read(const Digest& app_id,
                                                std::string_view name) {
  auto it = counters_.find(governance::counter_key(app_id, name));
  return it == counters_.end() ? 0 : it->second;
}

Result<SealedVolume> seal(const kms::AppKeyBundle& bundle, ByteView plaintext,
                          CounterService& counters,
                          std::string_view counter_name,
                          DeterministicRng& rng) {
  // Fail closed: without a counter there is no rollback protection.
  auto value = counters.bump(bundle.app_id, counter_name);
  if (!value) return value.error();

  SealedVolume v;
  v.header.app_id = bundle.app_id;
  v.header.epoch = bundle.epoch;
  v.header.counter_name = std::string(counter_name);
  v.header.counter_value = value.value();
  rng.fill(v.header.nonce);

  auto ct = crypto::aead_seal(bundle.disk_key,
                              ByteView(v.header.nonce.data(),
                                       v.header.nonce.size()),
                              v.header.canonical(), plaintext);
  if (!ct) return ct.error();
  v.ciphertext = std::move(ct).take();
  return v;
}

Result<Bytes> unseal(const kms::AppKeyBundle& bundle,
                     const SealedVolume& volume, CounterService& counters) {
  if (volume.header.app_id != bundle.app_id) {
    return make_error(Errc::invalid_argument,
                      "volume belongs to another app");
  }
  if (volume.header.epoch != bundle.epoch) {
    if (volume.header.epoch < bundle.epoch) {
      return make_error(Errc::epoch_expired,
                        "volume sealed under a retired epoch");
    }
    return make_error(Errc::invalid_argument,
                      "volume sealed under a future epoch");
  }
  auto plain = crypto::aead_open(bundle.disk_key,
                                 ByteView(volume.header.nonce.data(),
                                          volume.header.nonce.size()),
                                 volume.header.canonical(),
                                 volume.ciphertext);
  if (!plain) return plain.error();

  // Counter check after authentication: the header value can be trusted now.
  auto current = counters.read(volume.header.app_id,
                               volume.header.counter_name);
  if (!current) return current.error();
  if (volume.header.counter_value < current.value()) {
    return make_error(Errc::rollback_detected,
                      "snapshot counter " +
                          std::to_string(volume.header.counter_value) +
                          " below last known " +
                          std::to_string(current.value()));
  }
  return plain;
}

Result<SealedVolume> migrate(const SealedVolume& volume,
                             const kms::AppKeyBundle& old_bundle,
                             const kms::AppKeyBundle& new_bundle,
                             CounterService& counters,
                             DeterministicRng& rng) {
  if (old_bundle.app_id != new_bundle.app_id) {
    return make_error(Errc::invalid_argument,
                      "migration cannot cross apps");
  }
  auto plain = unseal(old_bundle, volume, counters);
  if (!plain) return plain.error();
  return seal(new_bundle, plain.value(), counters,
              volume.header.counter_name, rng);
}

}  // namespace ztsim::storage
