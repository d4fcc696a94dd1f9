#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace detrl {

// Incremental FNV-1a (64-bit). All multi-byte values are fed little-endian
// so digests do not depend on host byte order.
class Fnv1a64 {
 public:
  void update_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ull;
    }
  }

  void update_u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    update_bytes(buf, 8);
  }

  void update_u32(std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    update_bytes(buf, 4);
  }

  void update_i32(std::int32_t v) { update_u32(static_cast<std::uint32_t>(v)); }

  // Hashes the exact bit pattern, not the numeric value.
  void update_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    update_u32(bits);
  }

  void update_string(std::string_view s) { update_bytes(s.data(), s.size()); }

  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

std::string to_hex16(std::uint64_t v);
std::uint64_t parse_hex16(std::string_view s);

}  // namespace detrl
