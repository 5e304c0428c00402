#ifndef WAVECRUSH_TYPES_HPP
#define WAVECRUSH_TYPES_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wavecrush {

/// 8-bit node address. 1..232 are addressable, 255 is broadcast, 0 reserved.
using NodeId = std::uint8_t;

inline constexpr NodeId kBroadcastNodeId = 255;
inline constexpr NodeId kMaxNodeId = 232;
inline constexpr NodeId kDefaultGatewayId = 1;

/// Simulation timestamps are microseconds since run start.
using Timestamp = std::int64_t;

inline constexpr Timestamp us_per_ms = 1000;

/// 32-bit network identifier, serialized big-endian as the first 4 frame bytes.
struct HomeId {
    std::uint32_t value = 0;
    auto operator<=>(const HomeId&) const = default;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Parses an even-length hex string (no separators, case-insensitive).
/// Returns false on any non-hex character or odd length.
bool from_hex(const std::string& text, std::vector<std::uint8_t>& out);

/// "001"-style zero-padded decimal, matching over-the-air address notation.
std::string node_str(NodeId id);
std::string home_str(HomeId id);

}  // namespace wavecrush

#endif
