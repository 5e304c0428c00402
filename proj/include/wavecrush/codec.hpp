#ifndef WAVECRUSH_CODEC_HPP
#define WAVECRUSH_CODEC_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wavecrush/types.hpp"

namespace wavecrush {

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct NonceGet {
    auto operator<=>(const NonceGet&) const = default;
};
struct NonceReport {
    std::array<std::uint8_t, 8> nonce{};
    auto operator<=>(const NonceReport&) const = default;
};
struct S2NonceGet {
    std::uint8_t seq = 0;
    auto operator<=>(const S2NonceGet&) const = default;
};
struct S2NonceReport {
    std::uint8_t seq = 0;
    std::array<std::uint8_t, 16> nonce{};
    auto operator<=>(const S2NonceReport&) const = default;
};
/// Node bitmask, 1..32 bytes. Bit i (byte i/8, bit i%8, LSB first)
/// designates NodeId i+1.
struct FindNodesInRange {
    std::vector<std::uint8_t> mask;
    auto operator<=>(const FindNodesInRange&) const = default;
};
struct CommandComplete {
    auto operator<=>(const CommandComplete&) const = default;
};
struct NopPower {
    auto operator<=>(const NopPower&) const = default;
};
struct AckCmd {
    auto operator<=>(const AckCmd&) const = default;
};
/// Catch-all application command. Any class/cmd pair the codec does not
/// model round-trips through this, byte for byte.
struct AppCommand {
    std::uint8_t cmd_class = 0;
    std::uint8_t cmd = 0;
    std::vector<std::uint8_t> params;
    auto operator<=>(const AppCommand&) const = default;
};

using Command = std::variant<NonceGet, NonceReport, S2NonceGet, S2NonceReport,
                             FindNodesInRange, CommandComplete, NopPower,
                             AckCmd, AppCommand>;

/// Stable lower_snake name for metrics keys and capture summaries.
const char* command_kind_name(const Command& cmd);
/// Human-readable one-liner, e.g. "FindNodesInRange mask=FFx32".
std::string describe_command(const Command& cmd);

// ---------------------------------------------------------------------------
// Frame
// ---------------------------------------------------------------------------

enum class HeaderType : std::uint8_t { Singlecast = 1, Multicast = 2, Ack = 3 };

/// Control byte 1: low nibble = header type, bit 6 = ack requested,
/// bit 7 = routed. Control byte 2: high nibble = 4-bit sequence number.
struct FrameControl {
    HeaderType header_type = HeaderType::Singlecast;
    bool ack_requested = false;
    bool routed = false;
    std::uint8_t seq = 0;  // 0..15
    auto operator<=>(const FrameControl&) const = default;
};

/// One over-the-air MPDU:
///   HomeID(4,BE) | src | ctrl1 | ctrl2 | length | dst | command... | checksum
/// The length byte counts every byte of the frame including the checksum.
struct Frame {
    HomeId home_id;
    NodeId src = 0;
    FrameControl ctrl;
    NodeId dst = 0;
    Command command = AckCmd{};
    auto operator<=>(const Frame&) const = default;
};

inline constexpr std::size_t kMinFrameLen = 10;
inline constexpr std::size_t kMaxFrameLen = 64;

// ---------------------------------------------------------------------------
// Command-ID constants
// ---------------------------------------------------------------------------

/// Command class/id table. Kept configuration-visible so the codec can be
/// retargeted against captures that use different constants (see
/// load_command_ids and the WAVECRUSH_CONSTANTS environment variable).
struct CommandIds {
    std::uint8_t s0_class = 0x98;
    std::uint8_t s0_nonce_get = 0x40;
    std::uint8_t s0_nonce_report = 0x80;
    std::uint8_t s2_class = 0x9F;
    std::uint8_t s2_nonce_get = 0x01;
    std::uint8_t s2_nonce_report = 0x02;
    std::uint8_t proto_class = 0x01;
    std::uint8_t find_nodes_in_range = 0x04;
    std::uint8_t command_complete = 0x07;
    std::uint8_t nop_power = 0x08;
};

const CommandIds& default_command_ids();

/// Parses a "key = value" constants file (same line format as scenario
/// configs; values decimal or 0x hex). Unknown keys are hard errors.
/// Returns an error message, or empty string on success.
std::string load_command_ids(const std::string& text, CommandIds& out);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

enum class CodecError {
    TooShort,
    LengthMismatch,
    BadChecksum,
    UnknownHeaderType,
    EmptyPayloadOnNonAck,
    TruncatedCommand,
    OversizeFrame,
    EmptyMask,
};

const char* to_string(CodecError err);

using Bytes = std::vector<std::uint8_t>;
using EncodeResult = std::variant<Bytes, CodecError>;
using DecodeResult = std::variant<Frame, CodecError>;
using CommandResult = std::variant<Command, CodecError>;
using MaskResult = std::variant<std::vector<NodeId>, CodecError>;

/// XOR fold over all input bytes, seeded with 0xFF.
std::uint8_t checksum(std::span<const std::uint8_t> bytes);

Bytes serialize_command(const Command& cmd,
                        const CommandIds& ids = default_command_ids());

/// Inverse of serialize_command. Empty input decodes to AckCmd (the caller
/// decides whether that is legal for the surrounding frame); unknown
/// class/cmd pairs decode to AppCommand preserving all bytes.
CommandResult parse_command(std::span<const std::uint8_t> bytes,
                            const CommandIds& ids = default_command_ids());

EncodeResult encode_frame(const Frame& frame,
                          const CommandIds& ids = default_command_ids());

/// Validates length field and checksum before constructing the frame.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes,
                          const CommandIds& ids = default_command_ids());

/// Ascending NodeIds whose mask bit is set, clipped to 1..232.
MaskResult mask_to_nodes(std::span<const std::uint8_t> mask);

}  // namespace wavecrush

#endif
