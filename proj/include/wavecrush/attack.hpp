#ifndef WAVECRUSH_ATTACK_HPP
#define WAVECRUSH_ATTACK_HPP

#include <optional>
#include <variant>
#include <vector>

#include "wavecrush/capture.hpp"
#include "wavecrush/codec.hpp"

namespace wavecrush {

enum class AttackKind { RoutedNoncenseS0, RoutedNoncenseS2, PowerOfNope };

const char* to_string(AttackKind kind);

struct AttackPlan {
    AttackKind kind = AttackKind::RoutedNoncenseS0;
    /// Number of frames to send; 0 = unbounded.
    std::uint32_t count = 256;
    std::int64_t interval_ms = 100;
    /// PowerOfNope only: fire the next frame the instant the gateway's
    /// CommandComplete is overheard instead of on the fixed period.
    bool use_command_complete_timing = false;
    NodeId spoof_src = 1;
    NodeId target_dst = 1;
    std::int64_t start_ms = 1000;
};

std::int64_t default_attack_interval_ms(AttackKind kind);

enum class SniffError { NoValidFrame };

/// HomeId of the first frame in the stream whose checksum validates.
std::variant<HomeId, SniffError> sniff_home_id(
    const std::vector<CaptureEntry>& stream,
    const CommandIds& ids = default_command_ids());

/// Self-addressed Nonce Get (S0) or S2 Nonce Get carrying `seq`.
Frame build_routed_noncense_frame(HomeId home, bool s2, std::uint8_t seq,
                                  NodeId spoof_src = 1, NodeId target_dst = 1);

/// Forged Find Nodes In Range with a full 32-byte 0xFF mask.
Frame build_power_of_nope_frame(HomeId home, NodeId spoof_src = 1, NodeId target_dst = 1);

/// Deterministic attacker driven by the simulator clock: sniffs the HomeId
/// from observed traffic, then emits per plan. Frames always carry the
/// sniffed HomeId, never a default.
class Attacker {
  public:
    explicit Attacker(AttackPlan plan) : plan_(plan) {}

    struct Emission {
        Frame frame;
        Timestamp at = 0;
    };

    /// Feed one overheard frame. May return an emission (first frame once
    /// the start time passed while unsniffed, or a CommandComplete-timed
    /// follow-up).
    std::optional<Emission> on_frame_observed(const Frame& frame, NodeId gateway_id,
                                              Timestamp now);

    /// Periodic trigger. Returns the emission for this tick (if armed) and
    /// sets next_tick for fixed-interval plans.
    std::optional<Emission> on_tick(Timestamp now);

    std::optional<Timestamp> next_tick() const { return next_tick_; }
    std::optional<HomeId> home() const { return home_; }
    std::uint32_t frames_sent() const { return sent_; }
    const AttackPlan& plan() const { return plan_; }

  private:
    bool exhausted() const { return plan_.count != 0 && sent_ >= plan_.count; }
    Emission emit(Timestamp now);

    AttackPlan plan_;
    std::optional<HomeId> home_;
    std::optional<Timestamp> next_tick_;
    bool start_pending_ = false;  // start time passed before HomeId was known
    std::uint32_t sent_ = 0;
    std::uint8_t s2_seq_ = 0;
};

/// Builds `count` attack frames with synthetic timestamps at the plan's
/// default interval, for export without running a simulation.
std::vector<CaptureEntry> craft_attack_capture(AttackKind kind, HomeId home,
                                               std::uint32_t count,
                                               std::int64_t interval_ms,
                                               const CommandIds& ids = default_command_ids());

}  // namespace wavecrush

#endif
