#include "wavecrush/detect.hpp"

#include <algorithm>
#include <deque>

#include "wavecrush/node.hpp"

namespace wavecrush {

const char* to_string(AnomalyRule rule) {
    switch (rule) {
        case AnomalyRule::SelfAddressed: return "SELF_ADDRESSED";
        case AnomalyRule::FnirToGateway: return "FNIR_TO_GATEWAY";
        case AnomalyRule::NonceStorm: return "NONCE_STORM";
        case AnomalyRule::UnknownSource: return "UNKNOWN_SOURCE";
        case AnomalyRule::HeartbeatLost: return "HEARTBEAT_LOST";
    }
    return "UNKNOWN_RULE";
}

static bool is_nonce_request_frame(const Frame& f) {
    return std::holds_alternative<NonceGet>(f.command) ||
           std::holds_alternative<S2NonceGet>(f.command);
}

std::vector<AnomalyEvent> scan_frames(const std::vector<TimedFrame>& capture,
                                      const std::set<NodeId>& known_nodes,
                                      const ScanParams& params) {
    std::vector<AnomalyEvent> events;
    std::deque<Timestamp> nonce_times;
    bool in_storm = false;
    const Timestamp window_us = params.window_ms * us_per_ms;

    for (const auto& tf : capture) {
        const Frame& f = tf.frame;

        if (f.src == f.dst) {
            events.push_back({tf.t_us, AnomalyRule::SelfAddressed, f,
                              "src=dst=" + node_str(f.src) + " " + describe_command(f.command)});
        }
        if (std::holds_alternative<FindNodesInRange>(f.command) && f.dst == params.gateway_id) {
            events.push_back({tf.t_us, AnomalyRule::FnirToGateway, f,
                              describe_command(f.command) + " dst=" + node_str(f.dst)});
        }
        if (params.check_known && !known_nodes.contains(f.src)) {
            events.push_back({tf.t_us, AnomalyRule::UnknownSource, f,
                              "src=" + node_str(f.src) + " not in known set"});
        }
        if (is_nonce_request_frame(f)) {
            nonce_times.push_back(tf.t_us);
            while (!nonce_times.empty() && nonce_times.front() < tf.t_us - window_us)
                nonce_times.pop_front();
            if (static_cast<int>(nonce_times.size()) > params.nonce_rate) {
                if (!in_storm) {
                    in_storm = true;
                    events.push_back({tf.t_us, AnomalyRule::NonceStorm, f,
                                      std::to_string(nonce_times.size()) + " nonce requests in " +
                                          std::to_string(params.window_ms) + " ms"});
                }
            } else {
                in_storm = false;
            }
        }
    }
    return events;
}

std::vector<AnomalyEvent> heartbeat_monitor(const std::vector<TimedFrame>& capture,
                                            std::int64_t interval_ms, int miss_threshold,
                                            NodeId gateway_id) {
    std::vector<AnomalyEvent> events;
    if (capture.empty() || interval_ms <= 0 || miss_threshold < 1) return events;

    const Timestamp allowance_us = Timestamp(miss_threshold) * interval_ms * us_per_ms;
    Timestamp last_beat = capture.front().t_us;
    bool outage = false;

    for (const auto& tf : capture) {
        if (!outage && tf.t_us > last_beat + allowance_us) {
            outage = true;
            events.push_back({last_beat + allowance_us, AnomalyRule::HeartbeatLost, std::nullopt,
                              "no gateway heartbeat for " +
                                  std::to_string(miss_threshold * interval_ms) +
                                  " ms (last at " + std::to_string(last_beat) + ")"});
        }
        if (is_heartbeat_frame(tf.frame, gateway_id)) {
            last_beat = tf.t_us;
            outage = false;
        }
    }
    return events;
}

std::string format_report(std::vector<AnomalyEvent> events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const AnomalyEvent& a, const AnomalyEvent& b) { return a.at < b.at; });
    std::string out;
    for (const auto& e : events) {
        out += std::to_string(e.at);
        out += " ";
        out += to_string(e.rule);
        out += " ";
        out += e.detail;
        out += "\n";
    }
    return out;
}

}  // namespace wavecrush
