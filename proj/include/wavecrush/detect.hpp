#ifndef WAVECRUSH_DETECT_HPP
#define WAVECRUSH_DETECT_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wavecrush/capture.hpp"

namespace wavecrush {

enum class AnomalyRule { SelfAddressed, FnirToGateway, NonceStorm, UnknownSource, HeartbeatLost };

const char* to_string(AnomalyRule rule);

/// One sniffer finding. Events reference frames only; the spoofed header is
/// all the attribution a passive sniffer can offer.
struct AnomalyEvent {
    Timestamp at = 0;
    AnomalyRule rule = AnomalyRule::SelfAddressed;
    std::optional<Frame> frame;
    std::string detail;
};

struct ScanParams {
    NodeId gateway_id = kDefaultGatewayId;
    /// NonceStorm threshold: more than nonce_rate requests inside window_ms.
    int nonce_rate = 10;
    std::int64_t window_ms = 5000;
    /// UnknownSource needs the roster; disabled when check_known is false.
    bool check_known = true;
};

/// Passive anomaly rules over a decoded capture:
///   SelfAddressed  - src equals dst
///   FnirToGateway  - Find Nodes In Range aimed at the gateway
///   NonceStorm     - nonce-request rate above threshold (one event per burst)
///   UnknownSource  - src outside the known-node roster
std::vector<AnomalyEvent> scan_frames(const std::vector<TimedFrame>& capture,
                                      const std::set<NodeId>& known_nodes,
                                      const ScanParams& params);

/// HeartbeatLost when no gateway heartbeat shows up for
/// miss_threshold * interval_ms; one event per outage, timestamped at the
/// moment the outage became detectable.
std::vector<AnomalyEvent> heartbeat_monitor(const std::vector<TimedFrame>& capture,
                                            std::int64_t interval_ms, int miss_threshold,
                                            NodeId gateway_id = kDefaultGatewayId);

/// `<t_us> <RULE> <detail>` lines, ordered by timestamp.
std::string format_report(std::vector<AnomalyEvent> events);

}  // namespace wavecrush

#endif
