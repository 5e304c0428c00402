#include "wavecrush/node.hpp"

#include <algorithm>

namespace wavecrush {

const char* to_string(BusyReason reason) {
    switch (reason) {
        case BusyReason::None: return "none";
        case BusyReason::FnirSweep: return "fnir_sweep";
        case BusyReason::RoutingNonce: return "routing_nonce";
    }
    return "none";
}

// ---------------------------------------------------------------------------
// NonceFactory
// ---------------------------------------------------------------------------

std::uint64_t NonceFactory::mix(std::uint64_t x) const {
    // splitmix64 output function; bijective, so distinct counters can
    // never yield colliding nonces.
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

static void append_le64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

Nonce NonceFactory::next_s0(Timestamp now) {
    const std::uint64_t v = mix(seed_ ^ mix(++counter_));
    Nonce n;
    n.issued_at = now;
    append_le64(n.value, v);
    return n;
}

Nonce NonceFactory::next_s2(Timestamp now) {
    const std::uint64_t v = mix(seed_ ^ mix(++counter_));
    Nonce n;
    n.issued_at = now;
    append_le64(n.value, v);
    append_le64(n.value, mix(v ^ 0xA5A5A5A5A5A5A5A5ULL));
    return n;
}

// ---------------------------------------------------------------------------
// Frame builders
// ---------------------------------------------------------------------------

static Frame make_frame(HomeId home, NodeId src, NodeId dst, Command cmd, std::uint8_t seq,
                        bool ack_requested, bool routed = false,
                        HeaderType type = HeaderType::Singlecast) {
    Frame f;
    f.home_id = home;
    f.src = src;
    f.dst = dst;
    f.command = std::move(cmd);
    f.ctrl.header_type = type;
    f.ctrl.ack_requested = ack_requested;
    f.ctrl.routed = routed;
    f.ctrl.seq = seq & 0x0F;
    return f;
}

Frame make_heartbeat_frame(HomeId home, NodeId src, std::uint8_t seq) {
    return make_frame(home, src, kBroadcastNodeId, AppCommand{0x20, 0x01, {0x00}}, seq,
                      /*ack_requested=*/false);
}

bool is_heartbeat_frame(const Frame& frame, NodeId gateway_id) {
    if (frame.src != gateway_id || frame.dst != kBroadcastNodeId) return false;
    const auto* app = std::get_if<AppCommand>(&frame.command);
    return app && app->cmd_class == 0x20;
}

static Command make_report_command(std::optional<std::uint8_t> s2_seq, NonceFactory& nonces,
                                   Timestamp now) {
    if (s2_seq) {
        S2NonceReport r;
        r.seq = *s2_seq;
        Nonce n = nonces.next_s2(now);
        std::copy(n.value.begin(), n.value.end(), r.nonce.begin());
        return r;
    }
    NonceReport r;
    Nonce n = nonces.next_s0(now);
    std::copy(n.value.begin(), n.value.end(), r.nonce.begin());
    return r;
}

// ---------------------------------------------------------------------------
// FNIR sweep
// ---------------------------------------------------------------------------

FnirPlan execute_fnir(const NodeProfile& executor, std::span<const std::uint8_t> mask,
                      Timestamp now, const NetContext& ctx, std::uint8_t& tx_seq) {
    FnirPlan plan;
    auto nodes_or = mask_to_nodes(mask);
    if (std::holds_alternative<CodecError>(nodes_or)) return plan;  // empty mask: no-op
    const auto& nodes = std::get<std::vector<NodeId>>(nodes_or);
    if (nodes.empty()) return plan;

    const Timestamp step_us = ctx.timing.nop_wait_ms * us_per_ms;
    std::int64_t k = 0;
    for (std::int64_t pass = 0; pass < ctx.timing.fnir_passes; ++pass) {
        for (NodeId n : nodes) {
            plan.actions.push_back(TransmitAction{
                make_frame(ctx.home, executor.node_id, n, NopPower{}, tx_seq++,
                           /*ack_requested=*/true),
                now + k * step_us});
            ++k;
        }
    }
    plan.sweep_end = now + k * step_us;
    if (executor.era == Era::LegacyS0) {
        plan.actions.push_back(TransmitAction{
            make_frame(ctx.home, executor.node_id, kBroadcastNodeId, CommandComplete{},
                       tx_seq++, /*ack_requested=*/false),
            *plan.sweep_end});
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

static bool is_nonce_request(const Command& cmd) {
    return std::holds_alternative<NonceGet>(cmd) || std::holds_alternative<S2NonceGet>(cmd);
}

GatewayTransition gateway_handle_frame(const GatewayState& state, const NodeProfile& profile,
                                       const Frame& frame, Timestamp now, NetContext& ctx) {
    GatewayTransition t{state, {}};
    GatewayState& s = t.state;

    if (frame.home_id != ctx.home) {
        t.actions.push_back(DropFrameAction{"home_id_mismatch"});
        return t;
    }
    if (frame.dst != profile.node_id && frame.dst != kBroadcastNodeId) return t;  // overheard
    if (std::holds_alternative<AckCmd>(frame.command)) return t;  // acks always absorbed

    const bool busy = state.busy_at(now);

    if (is_nonce_request(frame.command)) {
        if (frame.ctrl.header_type == HeaderType::Multicast) {
            t.actions.push_back(DropFrameAction{"multicast"});
            return t;
        }
        std::optional<std::uint8_t> s2_seq;
        if (const auto* s2 = std::get_if<S2NonceGet>(&frame.command)) {
            if (state.s2_seq_seen && *state.s2_seq_seen == s2->seq) {
                t.actions.push_back(DropFrameAction{"duplicate s2 seq"});
                return t;
            }
            s2_seq = s2->seq;
        }
        const bool self_addressed = frame.src == profile.node_id;
        const bool known = state.known_nodes.contains(frame.src);

        if (self_addressed || !known) {
            // A reply would go to the gateway itself or an address no node
            // owns; direct delivery can never be acknowledged.
            if (profile.patched) {
                t.actions.push_back(DropFrameAction{"self-or-unknown destination"});
                return t;
            }
            if (!self_addressed && !profile.routes_to_unknown) {
                t.actions.push_back(DropFrameAction{"unknown destination"});
                return t;
            }
            const std::int64_t budget_us = ctx.timing.route_retry_budget_ms * us_per_ms;
            RouteJob job;
            job.dst = frame.src;
            job.s2_seq = s2_seq;
            job.service_start = std::max(now, state.busy_until.value_or(now));
            job.service_end = job.service_start + budget_us;
            job.attempts_total = static_cast<int>(ctx.timing.route_attempts);
            if (s2_seq) s.s2_seq_seen = s2_seq;

            t.actions.push_back(TransmitAction{
                make_frame(ctx.home, profile.node_id, job.dst,
                           make_report_command(s2_seq, *ctx.nonces, now), s.tx_seq++,
                           /*ack_requested=*/true),
                job.service_start});
            t.actions.push_back(
                SetBusyAction{job.service_start, job.service_end, BusyReason::RoutingNonce});
            t.actions.push_back(EmitEventAction{"nonce_job_enqueued", node_str(frame.src)});
            s.busy_until = job.service_end;
            if (!busy) s.busy_reason = BusyReason::RoutingNonce;
            s.route_queue.push_back(job);
            return t;
        }

        // Legitimate request from a known node.
        if (busy) {
            t.actions.push_back(DropFrameAction{"gateway busy"});
            return t;
        }
        if (s2_seq) s.s2_seq_seen = s2_seq;
        t.actions.push_back(TransmitAction{
            make_frame(ctx.home, profile.node_id, frame.src,
                       make_report_command(s2_seq, *ctx.nonces, now), s.tx_seq++,
                       /*ack_requested=*/true),
            now + ctx.timing.turnaround_ms * us_per_ms});
        return t;
    }

    if (busy) {
        t.actions.push_back(DropFrameAction{"gateway busy"});
        return t;
    }

    if (const auto* fnir = std::get_if<FindNodesInRange>(&frame.command)) {
        if (profile.patched) {
            t.actions.push_back(DropFrameAction{"not in inclusion"});
            return t;
        }
        FnirPlan plan = execute_fnir(profile, fnir->mask, now, ctx, s.tx_seq);
        t.actions = std::move(plan.actions);
        if (plan.sweep_end) {
            t.actions.push_back(SetBusyAction{now, *plan.sweep_end, BusyReason::FnirSweep});
            s.busy_until = *plan.sweep_end;
            s.busy_reason = BusyReason::FnirSweep;
        }
        return t;
    }

    if (std::holds_alternative<NopPower>(frame.command)) {
        t.actions.push_back(TransmitAction{
            make_frame(ctx.home, profile.node_id, frame.src, AckCmd{}, frame.ctrl.seq,
                       /*ack_requested=*/false, /*routed=*/false, HeaderType::Ack),
            now + ctx.timing.turnaround_ms * us_per_ms});
        return t;
    }

    // Nonce reports the gateway never asked for, stray protocol frames and
    // device application traffic carry no gateway reaction of their own.
    return t;
}

GatewayTransition route_step(const GatewayState& state, const NodeProfile& profile,
                             Timestamp now, NetContext& ctx) {
    GatewayTransition t{state, {}};
    GatewayState& s = t.state;
    if (s.route_queue.empty()) return t;
    const std::int64_t budget_us = ctx.timing.route_retry_budget_ms * us_per_ms;
    RouteJob& job = s.route_queue.front();
    if (now < job.next_attempt(budget_us)) return t;

    t.actions.push_back(TransmitAction{
        make_frame(ctx.home, profile.node_id, job.dst,
                   make_report_command(job.s2_seq, *ctx.nonces, now), s.tx_seq++,
                   /*ack_requested=*/true, /*routed=*/true),
        now});
    ++job.attempts_done;
    if (job.attempts_done >= job.attempts_total) s.route_queue.pop_front();
    return t;
}

GatewayTransition enqueue_app_command(const GatewayState& state, const NodeProfile& profile,
                                      const AppEntry& entry, Timestamp now, NetContext& ctx) {
    GatewayTransition t{state, {}};
    if (!state.busy_at(now)) {
        t.actions.push_back(EmitEventAction{"app_processed", describe_command(Command{entry.cmd})});
        t.actions.push_back(TransmitAction{
            make_frame(ctx.home, profile.node_id, entry.dst, entry.cmd, t.state.tx_seq++,
                       /*ack_requested=*/true),
            now});
        return t;
    }
    t.state.app_inbox.push_back(entry);
    return t;
}

GatewayTransition gateway_on_idle(const GatewayState& state, const NodeProfile& profile,
                                  Timestamp now, NetContext& ctx) {
    GatewayTransition t{state, {}};
    GatewayState& s = t.state;
    if (!s.busy_until || now < *s.busy_until) return t;   // stale timer
    if (!s.route_queue.empty()) return t;                 // final attempts still due now
    s.busy_until.reset();
    s.busy_reason = BusyReason::None;
    while (!s.app_inbox.empty()) {
        AppEntry entry = s.app_inbox.front();
        s.app_inbox.pop_front();
        t.actions.push_back(EmitEventAction{"app_processed", describe_command(Command{entry.cmd})});
        t.actions.push_back(TransmitAction{
            make_frame(ctx.home, profile.node_id, entry.dst, entry.cmd, s.tx_seq++,
                       /*ack_requested=*/true),
            now});
    }
    return t;
}

GatewayTransition app_timeout(const GatewayState& state, std::uint64_t entry_id, Timestamp now) {
    GatewayTransition t{state, {}};
    // Blocked only when still queued PAST the timeout; if the block ends at
    // this very instant the pending idle flush takes the entry instead.
    if (!state.busy_at(now)) return t;
    auto& inbox = t.state.app_inbox;
    auto it = std::find_if(inbox.begin(), inbox.end(),
                           [&](const AppEntry& e) { return e.id == entry_id; });
    if (it == inbox.end()) return t;  // already processed
    t.actions.push_back(EmitEventAction{"app_blocked", describe_command(Command{it->cmd})});
    inbox.erase(it);
    return t;
}

// ---------------------------------------------------------------------------
// Device
// ---------------------------------------------------------------------------

DeviceTransition device_handle_frame(const DeviceState& state, const NodeProfile& profile,
                                     const Frame& frame, Timestamp now, NetContext& ctx) {
    DeviceTransition t{state, {}};
    DeviceState& s = t.state;

    if (frame.home_id != ctx.home) {
        t.actions.push_back(DropFrameAction{"home_id_mismatch"});
        return t;
    }

    const bool addressed = frame.dst == profile.node_id || frame.dst == kBroadcastNodeId;
    if (!addressed) {
        // Mesh relay: rebroadcast a routed frame once per (src, seq).
        if (frame.ctrl.routed && profile.routing_capable) {
            auto it = s.last_forwarded_seq.find(frame.src);
            if (it == s.last_forwarded_seq.end() || it->second != frame.ctrl.seq) {
                s.last_forwarded_seq[frame.src] = frame.ctrl.seq;
                TransmitAction fwd{frame, now + ctx.timing.hop_ms * us_per_ms};
                t.actions.push_back(fwd);
            }
        }
        return t;
    }

    if (is_nonce_request(frame.command)) {
        if (frame.ctrl.header_type == HeaderType::Multicast) {
            t.actions.push_back(DropFrameAction{"multicast"});
            return t;
        }
        std::optional<std::uint8_t> s2_seq;
        if (const auto* s2 = std::get_if<S2NonceGet>(&frame.command)) s2_seq = s2->seq;
        t.actions.push_back(TransmitAction{
            make_frame(ctx.home, profile.node_id, frame.src,
                       make_report_command(s2_seq, *ctx.nonces, now), s.tx_seq++,
                       /*ack_requested=*/true),
            now + ctx.timing.turnaround_ms * us_per_ms});
        return t;
    }

    if (const auto* fnir = std::get_if<FindNodesInRange>(&frame.command)) {
        if (!profile.in_inclusion) {
            t.actions.push_back(DropFrameAction{"not in inclusion"});
            return t;
        }
        FnirPlan plan = execute_fnir(profile, fnir->mask, now, ctx, s.tx_seq);
        t.actions = std::move(plan.actions);
        return t;
    }

    if (std::holds_alternative<NopPower>(frame.command)) {
        t.actions.push_back(TransmitAction{
            make_frame(ctx.home, profile.node_id, frame.src, AckCmd{}, frame.ctrl.seq,
                       /*ack_requested=*/false, /*routed=*/false, HeaderType::Ack),
            now + ctx.timing.turnaround_ms * us_per_ms});
        return t;
    }

    return t;
}

}  // namespace wavecrush
