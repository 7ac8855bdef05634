#include "ztsim/result.hpp"

#include <array>
#include <utility>

namespace ztsim {

namespace {

struct NameEntry {
  Errc code;
  std::string_view name;
};

constexpr std::array<NameEntry, 27> kNames = {{
    {Errc::invalid_argument, "invalid-argument"},
    {Errc::insufficient_shares, "insufficient-shares"},
    {Errc::duplicate_index, "duplicate-index"},
    {Errc::inconsistent_shares, "inconsistent-shares"},
    {Errc::decrypt_failed, "decrypt-failed"},
    {Errc::spoofed_quote, "spoofed-quote"},
    {Errc::outdated_firmware, "outdated-firmware"},
    {Errc::admission_denied, "admission-denied"},
    {Errc::already_initialized, "already-initialized"},
    {Errc::duplicate_app, "duplicate-app"},
    {Errc::unknown_app, "unknown-app"},
    {Errc::unauthorized, "unauthorized"},
    {Errc::untrusted_os, "untrusted-os"},
    {Errc::key_release_denied, "key-release-denied"},
    {Errc::instance_not_authorized, "instance-not-authorized"},
    {Errc::epoch_expired, "epoch-expired"},
    {Errc::rotation_rejected, "rotation-rejected"},
    {Errc::foreign_root, "foreign-root"},
    {Errc::no_route, "no-route"},
    {Errc::chain_invalid, "chain-invalid"},
    {Errc::expired_cert, "expired-cert"},
    {Errc::unverified_app, "unverified-app"},
    {Errc::rollback_detected, "rollback-detected"},
    {Errc::counter_unavailable, "counter-unavailable"},
    {Errc::unrecoverable, "unrecoverable"},
    {Errc::kms_unavailable, "kms-unavailable"},
    {Errc::parse_error, "parse-error"},
}};

}  // namespace

std::string_view errc_name(Errc c) {
  for (const auto& e : kNames) {
    if (e.code == c) return e.name;
  }
  return "unknown-error";
}

bool errc_from_name(std::string_view name, Errc& out) {
  for (const auto& e : kNames) {
    if (e.name == name) {
      out = e.code;
      return true;
    }
  }
  return false;
}

}  // namespace ztsim
