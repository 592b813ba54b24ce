#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lwct/error.hpp"

// Little-endian encoding helpers shared by the raw, SVZ and wire formats.
namespace lwct::bytes {

using Buffer = std::vector<std::byte>;

inline void put_u16(Buffer& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFF));
  out.push_back(static_cast<std::byte>(v >> 8));
}

inline void put_u32(Buffer& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::byte>((v >> s) & 0xFF));
}

inline void put_u64(Buffer& out, std::uint64_t v) {
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::byte>((v >> s) & 0xFF));
}

inline void put_f32(Buffer& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(Buffer& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_text(Buffer& out, std::string_view s) {
  const auto* p = reinterpret_cast<const std::byte*>(s.data());
  out.insert(out.end(), p, p + s.size());
}

// u32 length prefix followed by the raw characters.
inline void put_string(Buffer& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  put_text(out, s);
}

// Bounds-checked cursor over a byte span. Reading past the end throws DataError.
class Reader {
 public:
  explicit Reader(std::span<const std::byte> data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

  std::span<const std::byte> take(std::size_t n) {
    if (n > remaining()) throw DataError("truncated data: need " + std::to_string(n) + " bytes");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint16_t u16() {
    auto s = take(2);
    return static_cast<std::uint16_t>(std::to_integer<unsigned>(s[0]) |
                                      (std::to_integer<unsigned>(s[1]) << 8));
  }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint32_t>(s[i]);
    return v;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint64_t>(s[i]);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string text(std::size_t n) {
    auto s = take(n);
    return std::string(reinterpret_cast<const char*>(s.data()), s.size());
  }
  std::string string() { return text(u32()); }

 private:
  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
};

}  // namespace lwct::bytes
