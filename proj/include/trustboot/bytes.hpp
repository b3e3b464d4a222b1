#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trustboot {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

std::string to_hex(ByteView b);
std::optional<Bytes> from_hex(std::string_view s);

// True when `needle` occurs as a contiguous subsequence of `haystack`.
// Used by the secrecy-at-rest scans.
bool contains_bytes(ByteView haystack, ByteView needle);

}  // namespace trustboot
