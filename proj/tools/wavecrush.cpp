// wavecrush - Z-Wave frame codec, DoS simulator and sniffer-side detector.
//
// Subcommands:
//   simulate <config>   run a scenario, write capture + metrics files
//   decode   <capture>  pretty-print a capture file
//   detect   <capture>  run anomaly rules / heartbeat monitor, exit 1 on hits
//   craft    <kind>     export forged attack frames to a capture file
//
// WAVECRUSH_CONSTANTS may point to a key=value file overriding the
// command-ID table (see CommandIds).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wavecrush/attack.hpp"
#include "wavecrush/capture.hpp"
#include "wavecrush/codec.hpp"
#include "wavecrush/config.hpp"
#include "wavecrush/detect.hpp"
#include "wavecrush/sim.hpp"

using namespace wavecrush;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAnomalies = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitIo = 3;

bool parse_home_hex(const std::string& text, HomeId& out) {
    std::string v = text;
    if (v.rfind("0x", 0) == 0 || v.rfind("0X", 0) == 0) v = v.substr(2);
    if (v.empty() || v.size() > 8) return false;
    std::uint32_t acc = 0;
    for (char c : v) {
        int nib;
        if (c >= '0' && c <= '9') nib = c - '0';
        else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
        else return false;
        acc = (acc << 4) | static_cast<std::uint32_t>(nib);
    }
    out.value = acc;
    return true;
}

int cmd_simulate(const std::string& config_path, std::string capture_path,
                 std::string metrics_path, const CommandIds& ids) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config '" << config_path << "'\n";
        return kExitIo;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    auto parsed = parse_scenario(buf.str());
    if (const auto* err = std::get_if<ConfigError>(&parsed)) {
        std::cerr << "error: " << config_path << ": " << err->message << "\n";
        return kExitBadInput;
    }
    Scenario scenario = std::get<Scenario>(std::move(parsed));
    scenario.ids = ids;

    auto result = run(scenario);
    if (const auto* err = std::get_if<ScenarioError>(&result)) {
        std::cerr << "error: invalid scenario '" << config_path << "':\n";
        for (const auto& p : err->problems) std::cerr << "  " << p << "\n";
        return kExitBadInput;
    }
    const RunResult& rr = std::get<RunResult>(result);

    const std::string stem = std::filesystem::path(config_path).stem().string();
    if (capture_path.empty()) capture_path = stem + ".capture";
    if (metrics_path.empty()) metrics_path = stem + ".metrics";

    std::ofstream cap(capture_path);
    if (!cap) {
        std::cerr << "error: cannot write '" << capture_path << "'\n";
        return kExitIo;
    }
    write_capture(cap, rr.capture);

    std::ofstream met(metrics_path);
    if (!met) {
        std::cerr << "error: cannot write '" << metrics_path << "'\n";
        return kExitIo;
    }
    met << rr.metrics.to_text();

    std::cout << "capture: " << capture_path << " (" << rr.capture.size() << " frames)\n"
              << "metrics: " << metrics_path << "\n"
              << "gateway_busy_ms = " << rr.metrics.gateway_busy_ms << "\n";
    return kExitOk;
}

int cmd_decode(const std::string& capture_path, const CommandIds& ids) {
    std::ifstream in(capture_path);
    if (!in) {
        std::cerr << "error: cannot open capture '" << capture_path << "'\n";
        return kExitBadInput;
    }
    std::string line;
    int lineno = 0;
    std::int64_t decoded_count = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto parsed = parse_capture_line(line);
        if (const auto* err = std::get_if<std::string>(&parsed)) {
            std::cout << "! line " << lineno << ": " << *err << "\n";
            continue;
        }
        const CaptureEntry& entry = std::get<CaptureEntry>(parsed);
        auto frame_or = decode_frame(entry.bytes, ids);
        if (const auto* err = std::get_if<CodecError>(&frame_or)) {
            std::cout << entry.t_us << " ! " << to_string(*err) << " (" << to_hex(entry.bytes)
                      << ")\n";
            continue;
        }
        const Frame& f = std::get<Frame>(frame_or);
        std::string flags;
        if (f.ctrl.header_type == HeaderType::Multicast) flags += " [mcast]";
        if (f.ctrl.header_type == HeaderType::Ack) flags += " [ack]";
        if (f.ctrl.routed) flags += " [routed]";
        std::cout << entry.t_us << " home=" << home_str(f.home_id) << " " << node_str(f.src)
                  << "->" << node_str(f.dst) << " " << describe_command(f.command) << flags
                  << " payload=" << to_hex(serialize_command(f.command, ids)) << "\n";
        ++decoded_count;
    }
    if (decoded_count == 0) {
        std::cerr << "error: no decodable frames in '" << capture_path << "'\n";
        return kExitBadInput;
    }
    return kExitOk;
}

int cmd_detect(const std::string& capture_path, NodeId gateway_id,
               const std::string& known_nodes_csv, std::int64_t heartbeat_interval_ms,
               int miss_threshold, int nonce_rate, std::int64_t window_ms,
               const CommandIds& ids) {
    std::ifstream in(capture_path);
    if (!in) {
        std::cerr << "error: cannot open capture '" << capture_path << "'\n";
        return kExitBadInput;
    }
    auto entries = read_capture(in);
    std::vector<TimedFrame> frames;
    for (const auto& entry : entries) {
        auto decoded = decode_frame(entry.bytes, ids);
        if (auto* f = std::get_if<Frame>(&decoded)) frames.push_back({entry.t_us, *f});
    }

    ScanParams params;
    params.gateway_id = gateway_id;
    params.nonce_rate = nonce_rate;
    params.window_ms = window_ms;
    std::set<NodeId> known;
    if (known_nodes_csv.empty()) {
        params.check_known = false;
    } else {
        std::istringstream csv(known_nodes_csv);
        std::string item;
        while (std::getline(csv, item, ',')) {
            try {
                known.insert(static_cast<NodeId>(std::stoul(item, nullptr, 0)));
            } catch (...) {
                std::cerr << "error: bad --known-nodes entry '" << item << "'\n";
                return kExitBadInput;
            }
        }
    }

    auto events = scan_frames(frames, known, params);
    if (heartbeat_interval_ms > 0) {
        auto hb = heartbeat_monitor(frames, heartbeat_interval_ms, miss_threshold, gateway_id);
        events.insert(events.end(), hb.begin(), hb.end());
    }
    std::cout << format_report(events);
    return events.empty() ? kExitOk : kExitAnomalies;
}

int cmd_craft(const std::string& kind_name, const std::string& home_hex, std::int64_t count,
              std::int64_t interval_ms, const std::string& out_path, const CommandIds& ids) {
    AttackKind kind;
    if (kind_name == "noncense-s0") kind = AttackKind::RoutedNoncenseS0;
    else if (kind_name == "noncense-s2") kind = AttackKind::RoutedNoncenseS2;
    else if (kind_name == "power-of-nope") kind = AttackKind::PowerOfNope;
    else {
        std::cerr << "error: unknown kind '" << kind_name
                  << "' (expected noncense-s0, noncense-s2 or power-of-nope)\n";
        return kExitBadInput;
    }
    HomeId home;
    if (!parse_home_hex(home_hex, home)) {
        std::cerr << "error: bad --home '" << home_hex << "' (hex, up to 8 digits)\n";
        return kExitBadInput;
    }
    if (count < 1) {
        std::cerr << "error: --count must be >= 1\n";
        return kExitBadInput;
    }
    if (interval_ms == 0) interval_ms = default_attack_interval_ms(kind);
    if (interval_ms < 0) {
        std::cerr << "error: --interval-ms must be > 0\n";
        return kExitBadInput;
    }

    auto entries =
        craft_attack_capture(kind, home, static_cast<std::uint32_t>(count), interval_ms, ids);
    if (out_path.empty()) {
        write_capture(std::cout, entries);
        return kExitOk;
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return kExitIo;
    }
    write_capture(out, entries);
    std::cout << "wrote " << entries.size() << " frames to " << out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CommandIds ids = default_command_ids();
    if (const char* constants_path = std::getenv("WAVECRUSH_CONSTANTS")) {
        std::ifstream in(constants_path);
        if (!in) {
            std::cerr << "error: WAVECRUSH_CONSTANTS: cannot open '" << constants_path << "'\n";
            return kExitBadInput;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string err = load_command_ids(buf.str(), ids);
        if (!err.empty()) {
            std::cerr << "error: WAVECRUSH_CONSTANTS: " << err << "\n";
            return kExitBadInput;
        }
    }

    CLI::App app{"Z-Wave frame codec, gateway-DoS simulator and detector"};
    app.require_subcommand(1);

    std::string config_path, capture_out, metrics_out;
    auto* sim = app.add_subcommand("simulate", "Run a scenario config");
    sim->add_option("config", config_path, "Scenario config file")->required();
    sim->add_option("--capture", capture_out, "Capture output path (default: <config>.capture)");
    sim->add_option("--metrics", metrics_out, "Metrics output path (default: <config>.metrics)");

    std::string decode_path;
    auto* dec = app.add_subcommand("decode", "Pretty-print a capture file");
    dec->add_option("capture", decode_path, "Capture file")->required();

    std::string detect_path, known_csv;
    std::int64_t hb_interval = 0, hb_window = 5000;
    int hb_miss = 3, nonce_rate = 10;
    NodeId gateway_id = kDefaultGatewayId;
    auto* det = app.add_subcommand("detect", "Scan a capture for anomalies");
    det->add_option("capture", detect_path, "Capture file")->required();
    det->add_option("--gateway-id", gateway_id, "Gateway node id (default 1)");
    det->add_option("--known-nodes", known_csv, "Comma-separated roster for UnknownSource");
    det->add_option("--heartbeat-interval", hb_interval, "Heartbeat interval ms (enables monitor)");
    det->add_option("--miss-threshold", hb_miss, "Missed beacons before HeartbeatLost");
    det->add_option("--nonce-rate", nonce_rate, "NonceStorm threshold per window");
    det->add_option("--window-ms", hb_window, "NonceStorm window");

    std::string craft_kind, craft_home, craft_out;
    std::int64_t craft_count = 1, craft_interval = 0;
    auto* cr = app.add_subcommand("craft", "Export forged attack frames");
    cr->add_option("kind", craft_kind, "noncense-s0 | noncense-s2 | power-of-nope")->required();
    cr->add_option("--home", craft_home, "Target HomeID (hex)")->required();
    cr->add_option("--count", craft_count, "Number of frames (default 1)");
    cr->add_option("--interval-ms", craft_interval, "Synthetic spacing (default per kind)");
    cr->add_option("--out", craft_out, "Output capture path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    if (sim->parsed()) return cmd_simulate(config_path, capture_out, metrics_out, ids);
    if (dec->parsed()) return cmd_decode(decode_path, ids);
    if (det->parsed())
        return cmd_detect(detect_path, gateway_id, known_csv, hb_interval, hb_miss, nonce_rate,
                          hb_window, ids);
    if (cr->parsed())
        return cmd_craft(craft_kind, craft_home, craft_count, craft_interval, craft_out, ids);
    return kExitBadInput;
}
