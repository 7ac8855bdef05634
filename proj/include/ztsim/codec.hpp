#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ztsim/bytes.hpp"
#include "ztsim/result.hpp"

namespace ztsim {

// Canonical binary layout shared by quotes, certificates, shares, sealed
// volumes and the node message envelope. All integers are big-endian,
// variable-length fields carry a fixed-width length prefix. The exact byte
// layouts are documented in docs/FORMATS.md; signatures are always computed
// over these canonical bytes, never over JSON.

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void raw(ByteView data) { append(buf_, data); }
  /// u32 length prefix + bytes.
  void var_bytes(ByteView data);
  /// u16 length prefix + utf8 bytes.
  void var_string(std::string_view s);

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  Result<std::uint8_t> u8();
  Result<std::uint16_t> u16();
  Result<std::uint32_t> u32();
  Result<std::uint64_t> u64();
  Result<Bytes> raw(std::size_t n);
  Result<Bytes> var_bytes();
  Result<std::string> var_string();

  bool exhausted() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

// Length-prefixed message envelope used between KMS nodes and their clients:
// u32 length of (kind + payload) || u16 kind tag || payload.
struct Envelope {
  std::uint16_t kind = 0;
  Bytes payload;
};

Bytes encode_envelope(const Envelope& env);
Result<Envelope> decode_envelope(ByteView data);

}  // namespace ztsim
