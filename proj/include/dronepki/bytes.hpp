#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpki {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);

/// Parses lowercase or uppercase hex. Throws Error(DecodeError) on odd
/// length or a non-hex character.
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

template <std::size_t N>
ByteView as_bytes(const std::array<std::uint8_t, N>& a) {
  return {a.data(), a.size()};
}

inline ByteView as_bytes(const Bytes& b) { return {b.data(), b.size()}; }

Bytes concat(ByteView a, ByteView b);

// Canonical encoding used for everything that is hashed or signed.
// Each field is written as a 4-byte big-endian length followed by its bytes;
// integers are 8-byte big-endian payloads inside such a field.
class CanonicalWriter {
 public:
  CanonicalWriter& field(ByteView data);
  CanonicalWriter& field(std::string_view text);
  CanonicalWriter& u64(std::uint64_t value);
  CanonicalWriter& u8(std::uint8_t value);
  // An absent optional is an empty field.
  CanonicalWriter& empty();

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

class CanonicalReader {
 public:
  explicit CanonicalReader(ByteView data) : data_(data) {}

  ByteView field();
  std::string string_field();
  std::uint64_t u64();
  std::uint8_t u8();

  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    auto f = field();
    std::array<std::uint8_t, N> out{};
    check_size(f.size(), N);
    std::copy(f.begin(), f.end(), out.begin());
    return out;
  }

  bool done() const { return pos_ == data_.size(); }
  void expect_done() const;

 private:
  static void check_size(std::size_t got, std::size_t want);

  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace dpki
