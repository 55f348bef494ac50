#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace kgalign {

/// Incremental FNV-1a (64-bit). Used to stamp configs and corpora so
/// artifacts can be matched to the inputs that produced them.
class Fnv1a {
 public:
  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }

  void update(std::string_view s) { update(s.data(), s.size()); }

  void update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    update(b, 8);
  }

  void update_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    update_u64(bits);
  }

  std::uint64_t digest() const { return h_; }

  std::string hex() const {
    static const char* k = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 0; i < 16; ++i) s[15 - i] = k[(h_ >> (4 * i)) & 0xF];
    return s;
  }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

}  // namespace kgalign
