#include "wavecrush/config.hpp"

#include <fstream>
#include <sstream>

namespace wavecrush {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

struct Parser {
    Scenario scn;
    std::string error;
    int lineno = 0;

    bool fail(const std::string& msg) {
        error = "line " + std::to_string(lineno) + ": " + msg;
        return false;
    }

    bool parse_int(const std::string& val, std::int64_t& out) {
        try {
            std::size_t pos = 0;
            out = std::stoll(val, &pos, 0);
            if (pos != val.size()) return fail("bad integer '" + val + "'");
        } catch (...) {
            return fail("bad integer '" + val + "'");
        }
        return true;
    }

    bool parse_u8(const std::string& val, std::uint8_t& out) {
        std::int64_t v = 0;
        if (!parse_int(val, v)) return false;
        if (v < 0 || v > 255) return fail("value '" + val + "' outside 0..255");
        out = static_cast<std::uint8_t>(v);
        return true;
    }

    bool parse_bool(const std::string& val, bool& out) {
        if (val == "true" || val == "on" || val == "yes" || val == "1") out = true;
        else if (val == "false" || val == "off" || val == "no" || val == "0") out = false;
        else return fail("bad boolean '" + val + "'");
        return true;
    }

    bool parse_home(const std::string& val, HomeId& out) {
        std::string v = val;
        if (v.rfind("0x", 0) == 0 || v.rfind("0X", 0) == 0) v = v.substr(2);
        if (v.empty() || v.size() > 8) return fail("bad home id '" + val + "'");
        std::uint32_t acc = 0;
        for (char c : v) {
            int nib;
            if (c >= '0' && c <= '9') nib = c - '0';
            else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
            else return fail("bad home id '" + val + "'");
            acc = (acc << 4) | static_cast<std::uint32_t>(nib);
        }
        out.value = acc;
        return true;
    }

    bool global_key(const std::string& key, const std::string& val) {
        std::int64_t v = 0;
        if (key == "duration_ms") return parse_int(val, scn.duration_ms);
        if (key == "seed") {
            if (!parse_int(val, v)) return false;
            scn.seed = static_cast<std::uint64_t>(v);
            return true;
        }
        if (key == "home_id") return parse_home(val, scn.home_id);
        return fail("unknown key '" + key + "'");
    }

    bool node_key(NodeProfile& node, const std::string& key, const std::string& val) {
        if (key == "kind") {
            if (val == "gateway") node.kind = NodeKind::Gateway;
            else if (val == "device") node.kind = NodeKind::Device;
            else return fail("bad kind '" + val + "'");
            return true;
        }
        if (key == "era") {
            if (val == "legacy_s0") node.era = Era::LegacyS0;
            else if (val == "modern_s2") node.era = Era::ModernS2;
            else return fail("bad era '" + val + "'");
            return true;
        }
        if (key == "patched") {
            if (!parse_bool(val, node.patched)) return false;
            node.routes_to_unknown = !node.patched;
            return true;
        }
        if (key == "routing_capable") return parse_bool(val, node.routing_capable);
        if (key == "in_inclusion") return parse_bool(val, node.in_inclusion);
        if (key == "routes_to_unknown") return parse_bool(val, node.routes_to_unknown);
        if (key == "heartbeat_interval_ms") return parse_int(val, node.heartbeat_interval_ms);
        return fail("unknown key '" + key + "' in [node]");
    }

    bool radio_key(const std::string& key, const std::string& val) {
        if (key == "prop_delay_us") return parse_int(val, scn.prop_delay_us);
        if (key == "links") {
            std::string item;
            std::istringstream in(val);
            while (std::getline(in, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                auto dash = item.find('-');
                if (dash == std::string::npos) return fail("bad link '" + item + "'");
                std::uint8_t a, b;
                if (!parse_u8(trim(item.substr(0, dash)), a)) return false;
                if (!parse_u8(trim(item.substr(dash + 1)), b)) return false;
                scn.links.emplace_back(a, b);
            }
            return true;
        }
        if (key == "attacker_hears") {
            std::string item;
            std::istringstream in(val);
            while (std::getline(in, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                std::uint8_t id;
                if (!parse_u8(item, id)) return false;
                scn.attacker_hears.insert(id);
            }
            return true;
        }
        return fail("unknown key '" + key + "' in [radio]");
    }

    bool timing_key(const std::string& key, const std::string& val) {
        TimingParams& t = scn.timing;
        if (key == "nop_wait_ms") return parse_int(val, t.nop_wait_ms);
        if (key == "fnir_passes") return parse_int(val, t.fnir_passes);
        if (key == "route_retry_budget_ms") return parse_int(val, t.route_retry_budget_ms);
        if (key == "route_attempts") return parse_int(val, t.route_attempts);
        if (key == "turnaround_ms") return parse_int(val, t.turnaround_ms);
        if (key == "hop_ms") return parse_int(val, t.hop_ms);
        if (key == "app_timeout_ms") return parse_int(val, t.app_timeout_ms);
        return fail("unknown key '" + key + "' in [timing]");
    }

    bool attack_key(const std::string& key, const std::string& val) {
        AttackPlan& a = *scn.attack;
        if (key == "kind") {
            if (val == "routed_noncense_s0") a.kind = AttackKind::RoutedNoncenseS0;
            else if (val == "routed_noncense_s2") a.kind = AttackKind::RoutedNoncenseS2;
            else if (val == "power_of_nope") a.kind = AttackKind::PowerOfNope;
            else return fail("bad attack kind '" + val + "'");
            if (!interval_set) a.interval_ms = default_attack_interval_ms(a.kind);
            return true;
        }
        std::int64_t v = 0;
        if (key == "count") {
            if (!parse_int(val, v)) return false;
            if (v < 0) return fail("attack count must be >= 0");
            a.count = static_cast<std::uint32_t>(v);
            return true;
        }
        if (key == "interval_ms") {
            interval_set = true;
            return parse_int(val, a.interval_ms);
        }
        if (key == "start_ms") return parse_int(val, a.start_ms);
        if (key == "use_command_complete_timing")
            return parse_bool(val, a.use_command_complete_timing);
        if (key == "spoof_src") return parse_u8(val, a.spoof_src);
        if (key == "target_dst") return parse_u8(val, a.target_dst);
        return fail("unknown key '" + key + "' in [attack]");
    }

    bool heartbeat_key(const std::string& key, const std::string& val) {
        if (key == "interval_ms") return parse_int(val, scn.heartbeat_interval_ms);
        if (key == "miss_threshold") {
            std::int64_t v = 0;
            if (!parse_int(val, v)) return false;
            if (v < 1) return fail("miss_threshold must be >= 1");
            scn.heartbeat_miss_threshold = static_cast<int>(v);
            return true;
        }
        return fail("unknown key '" + key + "' in [heartbeat]");
    }

    bool app_key(const std::string& key, const std::string& val) {
        if (key != "send") return fail("unknown key '" + key + "' in [app]");
        std::istringstream in(val);
        std::string at_s, dst_s, class_s, cmd_s, params_s;
        if (!(in >> at_s >> dst_s >> class_s >> cmd_s))
            return fail("send needs: <at_ms> <dst> <class> <cmd> [params hex]");
        AppSend send;
        if (!parse_int(at_s, send.at_ms)) return false;
        if (!parse_u8(dst_s, send.dst)) return false;
        if (!parse_u8(class_s, send.cmd.cmd_class)) return false;
        if (!parse_u8(cmd_s, send.cmd.cmd)) return false;
        if (in >> params_s) {
            if (!from_hex(params_s, send.cmd.params))
                return fail("bad params hex '" + params_s + "'");
        }
        std::string extra;
        if (in >> extra) return fail("trailing tokens in send");
        scn.app_schedule.push_back(std::move(send));
        return true;
    }

    bool interval_set = false;
};

}  // namespace

std::variant<Scenario, ConfigError> parse_scenario(const std::string& text) {
    Parser p;
    enum class Section { Global, Node, Radio, Timing, Attack, Heartbeat, App };
    Section section = Section::Global;
    NodeProfile* node = nullptr;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++p.lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                p.fail("unterminated section header");
                return ConfigError{p.error};
            }
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.rfind("node", 0) == 0) {
                std::string id_s = trim(name.substr(4));
                std::uint8_t id;
                if (id_s.empty() || !p.parse_u8(id_s, id)) {
                    if (p.error.empty()) p.fail("bad node id in section header");
                    return ConfigError{p.error};
                }
                NodeProfile prof;
                prof.node_id = id;
                p.scn.nodes.push_back(prof);
                node = &p.scn.nodes.back();
                section = Section::Node;
            } else if (name == "radio") {
                section = Section::Radio;
            } else if (name == "timing") {
                section = Section::Timing;
            } else if (name == "attack") {
                section = Section::Attack;
                if (!p.scn.attack) p.scn.attack = AttackPlan{};
            } else if (name == "heartbeat") {
                section = Section::Heartbeat;
            } else if (name == "app") {
                section = Section::App;
            } else {
                p.fail("unknown section '[" + name + "]'");
                return ConfigError{p.error};
            }
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.fail("expected key = value");
            return ConfigError{p.error};
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        bool ok = false;
        switch (section) {
            case Section::Global: ok = p.global_key(key, val); break;
            case Section::Node: ok = p.node_key(*node, key, val); break;
            case Section::Radio: ok = p.radio_key(key, val); break;
            case Section::Timing: ok = p.timing_key(key, val); break;
            case Section::Attack: ok = p.attack_key(key, val); break;
            case Section::Heartbeat: ok = p.heartbeat_key(key, val); break;
            case Section::App: ok = p.app_key(key, val); break;
        }
        if (!ok) return ConfigError{p.error};
    }

    // The [heartbeat] section configures the gateway's beacon.
    if (p.scn.heartbeat_interval_ms > 0) {
        for (auto& n : p.scn.nodes)
            if (n.kind == NodeKind::Gateway && n.heartbeat_interval_ms == 0)
                n.heartbeat_interval_ms = p.scn.heartbeat_interval_ms;
    }
    // Default radio range: everyone hears everyone.
    if (p.scn.links.empty()) {
        for (std::size_t i = 0; i < p.scn.nodes.size(); ++i)
            for (std::size_t j = i + 1; j < p.scn.nodes.size(); ++j)
                p.scn.links.emplace_back(p.scn.nodes[i].node_id, p.scn.nodes[j].node_id);
    }
    if (p.scn.attacker_hears.empty()) {
        for (const auto& n : p.scn.nodes) p.scn.attacker_hears.insert(n.node_id);
    }
    return p.scn;
}

std::variant<Scenario, ConfigError> load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return ConfigError{"cannot open '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace wavecrush
