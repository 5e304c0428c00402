#ifndef WAVECRUSH_SIM_HPP
#define WAVECRUSH_SIM_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "wavecrush/attack.hpp"
#include "wavecrush/capture.hpp"
#include "wavecrush/detect.hpp"
#include "wavecrush/node.hpp"

namespace wavecrush {

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct AppSend {
    std::int64_t at_ms = 0;
    NodeId dst = 0;
    AppCommand cmd;
};

struct Scenario {
    std::int64_t duration_ms = 0;
    std::uint64_t seed = 1;
    HomeId home_id;
    std::int64_t prop_delay_us = 1000;

    std::vector<NodeProfile> nodes;
    /// Symmetric radio adjacency; a pair (a,b) means a and b hear each other.
    std::vector<std::pair<NodeId, NodeId>> links;
    /// Nodes whose transmissions the attacker (and the sniffer tap) hears;
    /// also the set of nodes that hear the attacker.
    std::set<NodeId> attacker_hears;

    TimingParams timing;
    std::optional<AttackPlan> attack;
    std::vector<AppSend> app_schedule;

    std::int64_t heartbeat_interval_ms = 0;  // gateway heartbeat; 0 = off
    int heartbeat_miss_threshold = 3;

    CommandIds ids;

    const NodeProfile* gateway() const;
    /// Field-level diagnostics; empty means the scenario is runnable.
    std::vector<std::string> validate() const;
};

/// In-range listeners for a transmission (excludes the transmitter itself).
/// `from_attacker` selects the attacker as transmitter. The returned flag
/// marks whether the attacker hears this transmission.
struct Fanout {
    std::vector<NodeId> nodes;
    bool attacker = false;
};
Fanout deliver_fanout(const Scenario& scenario, NodeId from, bool from_attacker);

// ---------------------------------------------------------------------------
// Events & metrics
// ---------------------------------------------------------------------------

/// Scheduler event. Processed in (at, insertion-order); the insertion tie
/// break keeps runs deterministic.
struct Event {
    enum class Kind { Deliver, NodeTimer, AttackerTick, HeartbeatDue, End };
    enum class TimerTag { BusyEnd, RouteStep, AppTimeout, AppArrival };

    Timestamp at = 0;
    std::uint64_t seq = 0;  // insertion order
    Kind kind = Kind::End;

    // Deliver
    Frame frame;
    NodeId to = 0;
    bool to_attacker = false;
    // NodeTimer / HeartbeatDue
    NodeId node = 0;
    TimerTag tag = TimerTag::BusyEnd;
    std::uint64_t aux = 0;
};

struct BusySegment {
    Timestamp start = 0;
    Timestamp end = 0;
    BusyReason reason = BusyReason::None;
};

struct RunMetrics {
    std::int64_t duration_ms = 0;
    std::int64_t gateway_busy_ms = 0;
    std::map<std::string, std::int64_t> gateway_busy_by_reason_ms;
    std::vector<BusySegment> busy_segments;  // clipped to the run window
    std::int64_t first_block_ms = -1;
    std::int64_t last_block_ms = -1;

    std::int64_t app_processed = 0;
    std::int64_t app_blocked = 0;

    std::int64_t frames_on_air = 0;
    std::map<std::string, std::int64_t> frames_by_kind;
    std::int64_t attack_frames_sent = 0;

    std::int64_t heartbeats_sent = 0;
    std::int64_t heartbeats_skipped = 0;

    std::map<std::string, std::int64_t> drops;
    std::map<std::string, std::int64_t> events;

    std::int64_t detection_events = 0;
    std::int64_t heartbeat_lost = 0;

    /// Flat `key = value` text, stable ordering, for machine diffing.
    std::string to_text() const;
};

struct RunResult {
    RunMetrics metrics;
    std::vector<CaptureEntry> capture;
    std::vector<AnomalyEvent> anomalies;  // post-run scan of the capture
};

struct ScenarioError {
    std::vector<std::string> problems;
};

/// Deterministic discrete-event run: same scenario, bit-identical capture
/// and metrics.
std::variant<RunResult, ScenarioError> run(const Scenario& scenario);

}  // namespace wavecrush

#endif
