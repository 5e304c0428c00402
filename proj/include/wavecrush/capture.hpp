#ifndef WAVECRUSH_CAPTURE_HPP
#define WAVECRUSH_CAPTURE_HPP

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "wavecrush/codec.hpp"

namespace wavecrush {

/// One capture line: `<t_us decimal> <hex bytes, no separators>`.
/// The hex is the exact over-the-air MPDU.
struct CaptureEntry {
    Timestamp t_us = 0;
    Bytes bytes;
    auto operator<=>(const CaptureEntry&) const = default;
};

/// Decoded capture entry, the input unit for detection.
struct TimedFrame {
    Timestamp t_us = 0;
    Frame frame;
};

std::string format_capture_line(const CaptureEntry& entry);
/// Returns a CaptureEntry, or an error message for a malformed line.
/// Comment (`#`) and blank lines are not valid input here; callers skip them.
std::variant<CaptureEntry, std::string> parse_capture_line(const std::string& line);

void write_capture(std::ostream& out, const std::vector<CaptureEntry>& entries);

struct CaptureLineError {
    int lineno = 0;
    std::string message;
};

/// Reads every parseable entry; malformed lines are reported, not fatal.
std::vector<CaptureEntry> read_capture(std::istream& in,
                                       std::vector<CaptureLineError>* errors = nullptr);

}  // namespace wavecrush

#endif
