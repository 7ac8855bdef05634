#include "ztsim/codec.hpp"

namespace ztsim {

void ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  buf_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::var_bytes(ByteView data) {
  u32(static_cast<std::uint32_t>(data.size()));
  raw(data);
}

void ByteWriter::var_string(std::string_view s) {
  u16(static_cast<std::uint16_t>(s.size()));
  raw(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Result<std::uint8_t> ByteReader::u8() {
  if (remaining() < 1) return make_error(Errc::parse_error, "truncated u8");
  return data_[pos_++];
}

Result<std::uint16_t> ByteReader::u16() {
  if (remaining() < 2) return make_error(Errc::parse_error, "truncated u16");
  std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
  pos_ += 2;
  return v;
}

Result<std::uint32_t> ByteReader::u32() {
  if (remaining() < 4) return make_error(Errc::parse_error, "truncated u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 4;
  return v;
}

Result<std::uint64_t> ByteReader::u64() {
  if (remaining() < 8) return make_error(Errc::parse_error, "truncated u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 8;
  return v;
}

Result<Bytes> ByteReader::raw(std::size_t n) {
  if (remaining() < n) return make_error(Errc::parse_error, "truncated bytes");
  Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

Result<Bytes> ByteReader::var_bytes() {
  auto len = u32();
  if (!len) return len.error();
  return raw(len.value());
}

Result<std::string> ByteReader::var_string() {
  auto len = u16();
  if (!len) return len.error();
  auto body = raw(len.value());
  if (!body) return body.error();
  return std::string(body.value().begin(), body.value().end());
}

Bytes encode_envelope(const Envelope& env) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(env.payload.size() + 2));
  w.u16(env.kind);
  w.raw(env.payload);
  return w.take();
}

Result<Envelope> decode_envelope(ByteView data) {
  ByteReader r(data);
  auto len = r.u32();
  if (!len) return len.error();
  if (len.value() < 2 || r.remaining() != len.value()) {
    return make_error(Errc::parse_error, "envelope length mismatch");
  }
  auto kind = r.u16();
  if (!kind) return kind.error();
  auto payload = r.raw(len.value() - 2);
  if (!payload) return payload.error();
  Envelope env;
  env.kind = kind.value();
  env.payload = std::move(payload).take();
  return env;
}

}  // namespace ztsim
