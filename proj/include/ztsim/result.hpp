#pragma once

#include <cassert>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace ztsim {

// Error vocabulary shared by all modules. The names double as the stable
// strings used in scenario files and CLI/JSON output.
enum class Errc {
  invalid_argument,
  insufficient_shares,
  duplicate_index,
  inconsistent_shares,
  decrypt_failed,
  spoofed_quote,
  outdated_firmware,
  admission_denied,
  already_initialized,
  duplicate_app,
  unknown_app,
  unauthorized,
  untrusted_os,
  key_release_denied,
  instance_not_authorized,
  epoch_expired,
  rotation_rejected,
  foreign_root,
  no_route,
  chain_invalid,
  expired_cert,
  unverified_app,
  rollback_detected,
  counter_unavailable,
  unrecoverable,
  kms_unavailable,
  parse_error,
};

std::string_view errc_name(Errc c);

/// Reverse lookup for scenario files; returns false for unknown names.
bool errc_from_name(std::string_view name, Errc& out);

struct Error {
  Errc code;
  std::string message;
};

inline Error make_error(Errc code, std::string message = {}) {
  return Error{code, std::move(message)};
}

template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}  // NOLINT: implicit by design
  Result(Error err) : v_(std::move(err)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    assert(ok());
    return std::get<T>(v_);
  }
  T& value() & {
    assert(ok());
    return std::get<T>(v_);
  }
  T&& take() && {
    assert(ok());
    return std::get<T>(std::move(v_));
  }

  const Error& error() const {
    assert(!ok());
    return std::get<Error>(v_);
  }
  Errc code() const { return error().code; }

 private:
  std::variant<T, Error> v_;
};

template <>
class Result<void> {
 public:
  Result() = default;
  Result(Error err) : err_(std::move(err)), has_err_(true) {}  // NOLINT

  bool ok() const { return !has_err_; }
  explicit operator bool() const { return ok(); }

  const Error& error() const {
    assert(has_err_);
    return err_;
  }
  Errc code() const { return error().code; }

 private:
  Error err_{};
  bool has_err_ = false;
};

}  // namespace ztsim
