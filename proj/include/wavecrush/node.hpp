#ifndef WAVECRUSH_NODE_HPP
#define WAVECRUSH_NODE_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "wavecrush/codec.hpp"

namespace wavecrush {

enum class NodeKind { Gateway, Device };
enum class Era { LegacyS0, ModernS2 };

struct NodeProfile {
    NodeId node_id = 0;
    NodeKind kind = NodeKind::Device;
    bool routing_capable = true;
    bool in_inclusion = false;
    Era era = Era::ModernS2;
    bool patched = false;
    /// Whether the gateway will try to route replies to addresses it has
    /// never seen. On for vulnerable gateways, off for patched ones.
    bool routes_to_unknown = true;
    std::int64_t heartbeat_interval_ms = 0;  // 0 = no heartbeat
};

/// Per-step timing knobs, milliseconds. The defaults are calibrated so a
/// full-mask sweep takes 111 360 ms and one futile routing episode 4 700 ms.
struct TimingParams {
    std::int64_t nop_wait_ms = 120;
    std::int64_t fnir_passes = 4;  // 1..16
    std::int64_t route_retry_budget_ms = 4700;
    std::int64_t route_attempts = 3;
    std::int64_t turnaround_ms = 10;
    std::int64_t hop_ms = 15;
    std::int64_t app_timeout_ms = 5000;
};

// ---------------------------------------------------------------------------
// Nonces
// ---------------------------------------------------------------------------

struct Nonce {
    Bytes value;  // 8 bytes (S0) or 16 bytes (S2)
    Timestamp issued_at = 0;
};

/// Deterministic, collision-free nonce source. Values are a bijective mix
/// of an internal counter, so no value can repeat within a run.
class NonceFactory {
  public:
    explicit NonceFactory(std::uint64_t seed) : seed_(seed) {}
    Nonce next_s0(Timestamp now);
    Nonce next_s2(Timestamp now);

  private:
    std::uint64_t mix(std::uint64_t x) const;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

enum class BusyReason { None, FnirSweep, RoutingNonce };

const char* to_string(BusyReason reason);

struct TransmitAction {
    Frame frame;
    Timestamp at = 0;  // never precedes the triggering event
};
struct SetBusyAction {
    Timestamp from = 0;
    Timestamp until = 0;
    BusyReason reason = BusyReason::None;
};
struct EmitEventAction {
    std::string tag;
    std::string detail;
};
struct DropFrameAction {
    std::string reason;
};

using Action = std::variant<TransmitAction, SetBusyAction, EmitEventAction, DropFrameAction>;

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

/// A pending attempt to deliver a Nonce Report by routing. Served strictly
/// FIFO; each job occupies the gateway for route_retry_budget_ms of wall
/// time regardless of the number of attempts.
struct RouteJob {
    NodeId dst = 0;
    std::optional<std::uint8_t> s2_seq;  // set for S2 jobs: report echoes it
    Timestamp service_start = 0;
    Timestamp service_end = 0;
    int attempts_total = 0;
    int attempts_done = 0;

    Timestamp next_attempt(std::int64_t budget_us) const {
        return service_start +
               (std::int64_t(attempts_done + 1) * budget_us) / attempts_total;
    }
    auto operator<=>(const RouteJob&) const = default;
};

struct AppEntry {
    std::uint64_t id = 0;
    NodeId dst = 0;
    AppCommand cmd;
    Timestamp enqueued_at = 0;
    auto operator<=>(const AppEntry&) const = default;
};

struct GatewayState {
    std::optional<Timestamp> busy_until;
    BusyReason busy_reason = BusyReason::None;
    std::deque<RouteJob> route_queue;
    std::deque<AppEntry> app_inbox;
    std::set<NodeId> known_nodes;
    std::optional<std::uint8_t> s2_seq_seen;
    std::uint8_t tx_seq = 0;

    bool busy_at(Timestamp now) const { return busy_until && now < *busy_until; }
    auto operator<=>(const GatewayState&) const = default;
};

struct DeviceState {
    std::uint8_t tx_seq = 0;
    /// Routed-frame dedup: last frame-control seq forwarded per source.
    std::map<NodeId, std::uint8_t> last_forwarded_seq;
    auto operator<=>(const DeviceState&) const = default;
};

/// Shared per-run context for transitions: the network identity, timing
/// knobs and the run's nonce source.
struct NetContext {
    HomeId home;
    TimingParams timing;
    NonceFactory* nonces = nullptr;
};

struct GatewayTransition {
    GatewayState state;
    std::vector<Action> actions;
};

struct DeviceTransition {
    DeviceState state;
    std::vector<Action> actions;
};

GatewayTransition gateway_handle_frame(const GatewayState& state, const NodeProfile& profile,
                                       const Frame& frame, Timestamp now, NetContext& ctx);

DeviceTransition device_handle_frame(const DeviceState& state, const NodeProfile& profile,
                                     const Frame& frame, Timestamp now, NetContext& ctx);

/// NOP Power sweep over the mask: fnir_passes passes, one transmission per
/// nop_wait_ms step. Returns the sweep-end time (== busy-until for a
/// gateway executor) or nullopt when the mask selects no nodes. LegacyS0
/// executors broadcast CommandComplete at sweep end.
struct FnirPlan {
    std::vector<Action> actions;
    std::optional<Timestamp> sweep_end;
};
FnirPlan execute_fnir(const NodeProfile& executor, std::span<const std::uint8_t> mask,
                      Timestamp now, const NetContext& ctx, std::uint8_t& tx_seq);

/// Serves the head routing job if an attempt is due: emits one routed
/// Nonce Report, decrements the attempt budget, pops the job when
/// exhausted. No-op when nothing is due.
GatewayTransition route_step(const GatewayState& state, const NodeProfile& profile,
                             Timestamp now, NetContext& ctx);

/// Queues (or, when idle, immediately processes) one application command.
GatewayTransition enqueue_app_command(const GatewayState& state, const NodeProfile& profile,
                                      const AppEntry& entry, Timestamp now, NetContext& ctx);

/// Idle transition at busy_until expiry: flushes the app inbox. Returns
/// no actions if the gateway is in fact still busy (stale timer).
GatewayTransition gateway_on_idle(const GatewayState& state, const NodeProfile& profile,
                                  Timestamp now, NetContext& ctx);

/// Drops an app entry that is still queued past its timeout.
GatewayTransition app_timeout(const GatewayState& state, std::uint64_t entry_id, Timestamp now);

/// Heartbeat beacon payload (AppCommand class 0x20, broadcast).
Frame make_heartbeat_frame(HomeId home, NodeId src, std::uint8_t seq);
bool is_heartbeat_frame(const Frame& frame, NodeId gateway_id);

}  // namespace wavecrush

#endif
