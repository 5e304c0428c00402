#include "wavecrush/capture.hpp"

#include <ostream>
#include <istream>
#include <sstream>

namespace wavecrush {

std::string format_capture_line(const CaptureEntry& entry) {
    return std::to_string(entry.t_us) + " " + to_hex(entry.bytes);
}

std::variant<CaptureEntry, std::string> parse_capture_line(const std::string& line) {
    std::istringstream in(line);
    long long t = 0;
    std::string hex;
    if (!(in >> t)) return std::string("missing timestamp");
    if (t < 0) return std::string("negative timestamp");
    if (!(in >> hex)) return std::string("missing hex bytes");
    std::string extra;
    if (in >> extra) return std::string("trailing tokens after hex");
    CaptureEntry entry;
    entry.t_us = t;
    if (!from_hex(hex, entry.bytes)) return std::string("bad hex '" + hex + "'");
    return entry;
}

void write_capture(std::ostream& out, const std::vector<CaptureEntry>& entries) {
    for (const auto& e : entries) out << format_capture_line(e) << "\n";
}

std::vector<CaptureEntry> read_capture(std::istream& in,
                                       std::vector<CaptureLineError>* errors) {
    std::vector<CaptureEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto parsed = parse_capture_line(line);
        if (auto* err = std::get_if<std::string>(&parsed)) {
            if (errors) errors->push_back({lineno, *err});
            continue;
        }
        entries.push_back(std::move(std::get<CaptureEntry>(parsed)));
    }
    return entries;
}

}  // namespace wavecrush
