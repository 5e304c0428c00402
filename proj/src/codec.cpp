#include "wavecrush/codec.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace wavecrush {

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static const char* digits = "0123456789ABCDEF";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0F]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool from_hex(const std::string& text, std::vector<std::uint8_t>& out) {
    if (text.size() % 2 != 0) return false;
    out.clear();
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2) {
        int hi = hex_nibble(text[i]);
        int lo = hex_nibble(text[i + 1]);
        if (hi < 0 || lo < 0) return false;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return true;
}

std::string node_str(NodeId id) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03u", static_cast<unsigned>(id));
    return buf;
}

std::string home_str(HomeId id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08X", id.value);
    return buf;
}

const CommandIds& default_command_ids() {
    static const CommandIds ids{};
    return ids;
}

const char* to_string(CodecError err) {
    switch (err) {
        case CodecError::TooShort: return "TooShort";
        case CodecError::LengthMismatch: return "LengthMismatch";
        case CodecError::BadChecksum: return "BadChecksum";
        case CodecError::UnknownHeaderType: return "UnknownHeaderType";
        case CodecError::EmptyPayloadOnNonAck: return "EmptyPayloadOnNonAck";
        case CodecError::TruncatedCommand: return "TruncatedCommand";
        case CodecError::OversizeFrame: return "OversizeFrame";
        case CodecError::EmptyMask: return "EmptyMask";
    }
    return "UnknownError";
}

std::uint8_t checksum(std::span<const std::uint8_t> bytes) {
    std::uint8_t fold = 0xFF;
    for (std::uint8_t b : bytes) fold ^= b;
    return fold;
}

const char* command_kind_name(const Command& cmd) {
    struct Visitor {
        const char* operator()(const NonceGet&) { return "nonce_get"; }
        const char* operator()(const NonceReport&) { return "nonce_report"; }
        const char* operator()(const S2NonceGet&) { return "s2_nonce_get"; }
        const char* operator()(const S2NonceReport&) { return "s2_nonce_report"; }
        const char* operator()(const FindNodesInRange&) { return "find_nodes_in_range"; }
        const char* operator()(const CommandComplete&) { return "command_complete"; }
        const char* operator()(const NopPower&) { return "nop_power"; }
        const char* operator()(const AckCmd&) { return "ack"; }
        const char* operator()(const AppCommand&) { return "app_command"; }
    };
    return std::visit(Visitor{}, cmd);
}

static std::string mask_summary(const std::vector<std::uint8_t>& mask) {
    if (!mask.empty() &&
        std::all_of(mask.begin(), mask.end(), [&](std::uint8_t b) { return b == mask[0]; })) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%02Xx%zu", mask[0], mask.size());
        return buf;
    }
    return to_hex(mask);
}

std::string describe_command(const Command& cmd) {
    struct Visitor {
        std::string operator()(const NonceGet&) { return "NonceGet"; }
        std::string operator()(const NonceReport& c) {
            return "NonceReport nonce=" + to_hex(c.nonce);
        }
        std::string operator()(const S2NonceGet& c) {
            return "S2NonceGet seq=" + std::to_string(c.seq);
        }
        std::string operator()(const S2NonceReport& c) {
            return "S2NonceReport seq=" + std::to_string(c.seq) +
                   " nonce=" + to_hex(c.nonce);
        }
        std::string operator()(const FindNodesInRange& c) {
            return "FindNodesInRange mask=" + mask_summary(c.mask);
        }
        std::string operator()(const CommandComplete&) { return "CommandComplete"; }
        std::string operator()(const NopPower&) { return "NopPower"; }
        std::string operator()(const AckCmd&) { return "Ack"; }
        std::string operator()(const AppCommand& c) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "AppCommand class=%02X cmd=%02X", c.cmd_class, c.cmd);
            std::string s = buf;
            if (!c.params.empty()) s += " params=" + to_hex(c.params);
            return s;
        }
    };
    return std::visit(Visitor{}, cmd);
}

Bytes serialize_command(const Command& cmd, const CommandIds& ids) {
    struct Visitor {
        const CommandIds& ids;
        Bytes operator()(const NonceGet&) { return {ids.s0_class, ids.s0_nonce_get}; }
        Bytes operator()(const NonceReport& c) {
            Bytes b{ids.s0_class, ids.s0_nonce_report};
            b.insert(b.end(), c.nonce.begin(), c.nonce.end());
            return b;
        }
        Bytes operator()(const S2NonceGet& c) {
            return {ids.s2_class, ids.s2_nonce_get, c.seq};
        }
        Bytes operator()(const S2NonceReport& c) {
            Bytes b{ids.s2_class, ids.s2_nonce_report, c.seq};
            b.insert(b.end(), c.nonce.begin(), c.nonce.end());
            return b;
        }
        Bytes operator()(const FindNodesInRange& c) {
            Bytes b{ids.proto_class, ids.find_nodes_in_range};
            b.insert(b.end(), c.mask.begin(), c.mask.end());
            return b;
        }
        Bytes operator()(const CommandComplete&) {
            return {ids.proto_class, ids.command_complete};
        }
        Bytes operator()(const NopPower&) { return {ids.proto_class, ids.nop_power}; }
        Bytes operator()(const AckCmd&) { return {}; }
        Bytes operator()(const AppCommand& c) {
            Bytes b{c.cmd_class, c.cmd};
            b.insert(b.end(), c.params.begin(), c.params.end());
            return b;
        }
    };
    return std::visit(Visitor{ids}, cmd);
}

CommandResult parse_command(std::span<const std::uint8_t> bytes, const CommandIds& ids) {
    if (bytes.empty()) return Command{AckCmd{}};
    if (bytes.size() == 1) return CodecError::TruncatedCommand;

    const std::uint8_t cls = bytes[0];
    const std::uint8_t cmd = bytes[1];
    const std::size_t n = bytes.size();

    if (cls == ids.s0_class && cmd == ids.s0_nonce_get && n == 2) return Command{NonceGet{}};
    if (cls == ids.s0_class && cmd == ids.s0_nonce_report && n == 10) {
        NonceReport r;
        std::copy(bytes.begin() + 2, bytes.end(), r.nonce.begin());
        return Command{r};
    }
    if (cls == ids.s2_class && cmd == ids.s2_nonce_get && n == 3)
        return Command{S2NonceGet{bytes[2]}};
    if (cls == ids.s2_class && cmd == ids.s2_nonce_report && n == 19) {
        S2NonceReport r;
        r.seq = bytes[2];
        std::copy(bytes.begin() + 3, bytes.end(), r.nonce.begin());
        return Command{r};
    }
    if (cls == ids.proto_class && cmd == ids.find_nodes_in_range && n >= 3) {
        // Trailing bytes beyond a 32-byte mask are accepted and ignored.
        FindNodesInRange f;
        const std::size_t take = std::min<std::size_t>(n - 2, 32);
        f.mask.assign(bytes.begin() + 2, bytes.begin() + 2 + take);
        return Command{f};
    }
    if (cls == ids.proto_class && cmd == ids.command_complete && n == 2)
        return Command{CommandComplete{}};
    if (cls == ids.proto_class && cmd == ids.nop_power && n == 2) return Command{NopPower{}};

    AppCommand a;
    a.cmd_class = cls;
    a.cmd = cmd;
    a.params.assign(bytes.begin() + 2, bytes.end());
    return Command{a};
}

EncodeResult encode_frame(const Frame& frame, const CommandIds& ids) {
    Bytes cmd = serialize_command(frame.command, ids);
    const std::size_t total = 9 + cmd.size() + 1;
    if (total > kMaxFrameLen) return CodecError::OversizeFrame;

    Bytes out;
    out.reserve(total);
    out.push_back(static_cast<std::uint8_t>(frame.home_id.value >> 24));
    out.push_back(static_cast<std::uint8_t>(frame.home_id.value >> 16));
    out.push_back(static_cast<std::uint8_t>(frame.home_id.value >> 8));
    out.push_back(static_cast<std::uint8_t>(frame.home_id.value));
    out.push_back(frame.src);
    std::uint8_t ctrl1 = static_cast<std::uint8_t>(frame.ctrl.header_type);
    if (frame.ctrl.ack_requested) ctrl1 |= 0x40;
    if (frame.ctrl.routed) ctrl1 |= 0x80;
    out.push_back(ctrl1);
    out.push_back(static_cast<std::uint8_t>((frame.ctrl.seq & 0x0F) << 4));
    out.push_back(static_cast<std::uint8_t>(total));
    out.push_back(frame.dst);
    out.insert(out.end(), cmd.begin(), cmd.end());
    out.push_back(checksum(out));
    return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes, const CommandIds& ids) {
    if (bytes.size() < kMinFrameLen) return CodecError::TooShort;
    if (bytes.size() > kMaxFrameLen) return CodecError::OversizeFrame;
    if (bytes[7] != bytes.size()) return CodecError::LengthMismatch;
    if (checksum(bytes.first(bytes.size() - 1)) != bytes.back())
        return CodecError::BadChecksum;

    const std::uint8_t type = bytes[5] & 0x0F;
    if (type < 1 || type > 3) return CodecError::UnknownHeaderType;

    Frame f;
    f.home_id.value = (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
                      (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
    f.src = bytes[4];
    f.ctrl.header_type = static_cast<HeaderType>(type);
    f.ctrl.ack_requested = (bytes[5] & 0x40) != 0;
    f.ctrl.routed = (bytes[5] & 0x80) != 0;
    f.ctrl.seq = bytes[6] >> 4;
    f.dst = bytes[8];

    auto payload = bytes.subspan(9, bytes.size() - 10);
    if (payload.empty() && f.ctrl.header_type != HeaderType::Ack)
        return CodecError::EmptyPayloadOnNonAck;
    CommandResult cmd = parse_command(payload, ids);
    if (auto* err = std::get_if<CodecError>(&cmd)) return *err;
    f.command = std::move(std::get<Command>(cmd));
    return f;
}

MaskResult mask_to_nodes(std::span<const std::uint8_t> mask) {
    if (mask.empty()) return CodecError::EmptyMask;
    std::vector<NodeId> nodes;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        for (int bit = 0; bit < 8; ++bit) {
            if (!(mask[i] & (1u << bit))) continue;
            const std::size_t idx = i * 8 + bit;  // designates NodeId idx+1
            if (idx + 1 > kMaxNodeId) continue;
            nodes.push_back(static_cast<NodeId>(idx + 1));
        }
    }
    return nodes;
}

std::string load_command_ids(const std::string& text, CommandIds& out) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            return "line " + std::to_string(lineno) + ": expected key = value";
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        unsigned long v = 0;
        try {
            v = std::stoul(val, nullptr, 0);
        } catch (...) {
            return "line " + std::to_string(lineno) + ": bad value '" + val + "'";
        }
        if (v > 0xFF) return "line " + std::to_string(lineno) + ": value out of byte range";
        const std::uint8_t b = static_cast<std::uint8_t>(v);
        if (key == "s0_class") out.s0_class = b;
        else if (key == "s0_nonce_get") out.s0_nonce_get = b;
        else if (key == "s0_nonce_report") out.s0_nonce_report = b;
        else if (key == "s2_class") out.s2_class = b;
        else if (key == "s2_nonce_get") out.s2_nonce_get = b;
        else if (key == "s2_nonce_report") out.s2_nonce_report = b;
        else if (key == "proto_class") out.proto_class = b;
        else if (key == "find_nodes_in_range") out.find_nodes_in_range = b;
        else if (key == "command_complete") out.command_complete = b;
        else if (key == "nop_power") out.nop_power = b;
        else return "line " + std::to_string(lineno) + ": unknown key '" + key + "'";
    }
    return {};
}

}  // namespace wavecrush
