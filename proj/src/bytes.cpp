#include "dronepki/bytes.hpp"

#include <algorithm>

#include "dronepki/error.hpp"

namespace dpki {

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::DecodeError, "odd-length hex");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::DecodeError, "non-hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

Bytes concat(ByteView a, ByteView b) {
  Bytes out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

CanonicalWriter& CanonicalWriter::field(ByteView data) {
  const auto n = static_cast<std::uint32_t>(data.size());
  out_.push_back(static_cast<std::uint8_t>(n >> 24));
  out_.push_back(static_cast<std::uint8_t>(n >> 16));
  out_.push_back(static_cast<std::uint8_t>(n >> 8));
  out_.push_back(static_cast<std::uint8_t>(n));
  out_.insert(out_.end(), data.begin(), data.end());
  return *this;
}

CanonicalWriter& CanonicalWriter::field(std::string_view text) {
  return field(as_bytes(text));
}

CanonicalWriter& CanonicalWriter::u64(std::uint64_t value) {
  std::array<std::uint8_t, 8> be{};
  for (int i = 7; i >= 0; --i) {
    be[i] = static_cast<std::uint8_t>(value & 0xff);
    value >>= 8;
  }
  return field(as_bytes(be));
}

CanonicalWriter& CanonicalWriter::u8(std::uint8_t value) {
  return field(ByteView(&value, 1));
}

CanonicalWriter& CanonicalWriter::empty() { return field(ByteView{}); }

ByteView CanonicalReader::field() {
  if (data_.size() - pos_ < 4) throw Error(Errc::DecodeError, "truncated length prefix");
  std::uint32_t n = (std::uint32_t{data_[pos_]} << 24) | (std::uint32_t{data_[pos_ + 1]} << 16) |
                    (std::uint32_t{data_[pos_ + 2]} << 8) | std::uint32_t{data_[pos_ + 3]};
  pos_ += 4;
  if (data_.size() - pos_ < n) throw Error(Errc::DecodeError, "field overruns input");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::string CanonicalReader::string_field() {
  auto f = field();
  return {f.begin(), f.end()};
}

std::uint64_t CanonicalReader::u64() {
  auto f = field();
  check_size(f.size(), 8);
  std::uint64_t v = 0;
  for (auto b : f) v = (v << 8) | b;
  return v;
}

std::uint8_t CanonicalReader::u8() {
  auto f = field();
  check_size(f.size(), 1);
  return f[0];
}

void CanonicalReader::expect_done() const {
  if (!done()) throw Error(Errc::DecodeError, "trailing bytes");
}

void CanonicalReader::check_size(std::size_t got, std::size_t want) {
  if (got != want) {
    throw Error(Errc::DecodeError,
                "field size " + std::to_string(got) + ", expected " + std::to_string(want));
  }
}

}  // namespace dpki
