#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace qcurv {

/// 64-bit FNV-1a; used for short content tags in reports, not for security.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s) { return fnv1a(s.data(), s.size()); }

inline std::uint64_t fnv1a(const Eigen::VectorXd& v) {
  return fnv1a(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

inline std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

}  // namespace qcurv
