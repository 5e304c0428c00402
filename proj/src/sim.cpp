#include "wavecrush/sim.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace wavecrush {

const NodeProfile* Scenario::gateway() const {
    for (const auto& n : nodes)
        if (n.kind == NodeKind::Gateway) return &n;
    return nullptr;
}

std::vector<std::string> Scenario::validate() const {
    std::vector<std::string> problems;
    if (duration_ms <= 0) problems.push_back("duration_ms: must be > 0");

    int gateways = 0;
    std::set<NodeId> ids_seen;
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::Gateway) ++gateways;
        if (n.node_id == 0 || n.node_id > kMaxNodeId)
            problems.push_back("node " + node_str(n.node_id) + ": id outside 1..232");
        if (!ids_seen.insert(n.node_id).second)
            problems.push_back("node " + node_str(n.node_id) + ": duplicate id");
        if (n.heartbeat_interval_ms < 0)
            problems.push_back("node " + node_str(n.node_id) + ": negative heartbeat interval");
    }
    if (gateways != 1)
        problems.push_back("nodes: exactly one gateway required, found " +
                           std::to_string(gateways));
    for (const auto& [a, b] : links) {
        if (!ids_seen.contains(a) || !ids_seen.contains(b))
            problems.push_back("links: " + node_str(a) + "-" + node_str(b) +
                               " references unknown node");
        if (a == b) problems.push_back("links: self link " + node_str(a));
    }
    for (NodeId id : attacker_hears)
        if (!ids_seen.contains(id))
            problems.push_back("attacker_hears: unknown node " + node_str(id));
    if (timing.fnir_passes < 1 || timing.fnir_passes > 16)
        problems.push_back("timing.fnir_passes: must be 1..16");
    if (timing.route_attempts < 1) problems.push_back("timing.route_attempts: must be >= 1");
    if (timing.nop_wait_ms <= 0) problems.push_back("timing.nop_wait_ms: must be > 0");
    if (timing.route_retry_budget_ms <= 0)
        problems.push_back("timing.route_retry_budget_ms: must be > 0");
    if (prop_delay_us < 0) problems.push_back("radio.prop_delay_us: must be >= 0");
    for (const auto& send : app_schedule) {
        if (send.at_ms < 0 || send.at_ms > duration_ms)
            problems.push_back("app.send at " + std::to_string(send.at_ms) +
                               " ms outside run window");
    }
    if (attack) {
        if (attack->start_ms < 0) problems.push_back("attack.start_ms: must be >= 0");
        if (attack->interval_ms <= 0) problems.push_back("attack.interval_ms: must be > 0");
    }
    return problems;
}

Fanout deliver_fanout(const Scenario& scenario, NodeId from, bool from_attacker) {
    Fanout out;
    if (from_attacker) {
        out.nodes.assign(scenario.attacker_hears.begin(), scenario.attacker_hears.end());
        return out;  // the attacker never hears its own transmission
    }
    std::set<NodeId> heard;
    for (const auto& [a, b] : scenario.links) {
        if (a == from) heard.insert(b);
        if (b == from) heard.insert(a);
    }
    out.nodes.assign(heard.begin(), heard.end());
    out.attacker = scenario.attacker_hears.contains(from);
    return out;
}

// ---------------------------------------------------------------------------
// Event queue
// ---------------------------------------------------------------------------

namespace {

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.seq > b.seq;
    }
};

class Simulation {
  public:
    explicit Simulation(const Scenario& scn)
        : scn_(scn),
          nonces_(scn.seed),
          ctx_{scn.home_id, scn.timing, &nonces_},
          duration_us_(scn.duration_ms * us_per_ms) {}

    RunResult run();

  private:
    void push(Event e) {
        e.seq = next_seq_++;
        queue_.push(std::move(e));
    }
    void schedule_timer(Timestamp at, NodeId node, Event::TimerTag tag, std::uint64_t aux = 0) {
        Event e;
        e.at = at;
        e.kind = Event::Kind::NodeTimer;
        e.node = node;
        e.tag = tag;
        e.aux = aux;
        push(e);
    }

    const NodeProfile& profile(NodeId id) const {
        for (const auto& n : scn_.nodes)
            if (n.node_id == id) return n;
        throw std::logic_error("unknown node id");
    }

    void transmit(const Frame& frame, NodeId from, bool from_attacker, Timestamp at);
    void apply_gateway(GatewayTransition&& t);
    void apply_device(NodeId id, DeviceTransition&& t);
    void apply_actions(const std::vector<Action>& actions, NodeId actor);
    void handle_deliver(const Event& e);
    void handle_timer(const Event& e);
    void handle_heartbeat(const Event& e);
    void handle_attacker_tick(const Event& e);
    void attacker_emit(const Attacker::Emission& e);
    void finish_metrics();

    const Scenario& scn_;
    NonceFactory nonces_;
    NetContext ctx_;
    Timestamp duration_us_;

    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
    std::uint64_t next_seq_ = 0;

    GatewayState gw_;
    NodeId gw_id_ = 0;
    std::map<NodeId, DeviceState> devices_;
    std::optional<Attacker> attacker_;

    std::uint64_t app_ids_ = 0;
    std::uint8_t gw_heartbeat_seq_ = 0;
    std::map<NodeId, std::uint8_t> device_beacon_seq_;

    std::vector<BusySegment> segments_;
    RunResult result_;
};

void Simulation::transmit(const Frame& frame, NodeId from, bool from_attacker, Timestamp at) {
    if (at > duration_us_) return;  // the run ended before this hit the air

    auto encoded = encode_frame(frame, scn_.ids);
    if (std::holds_alternative<CodecError>(encoded)) return;  // unencodable, nothing on air
    result_.capture.push_back({at, std::get<Bytes>(encoded)});
    ++result_.metrics.frames_on_air;
    ++result_.metrics.frames_by_kind[command_kind_name(frame.command)];

    Fanout fan = deliver_fanout(scn_, from, from_attacker);
    for (NodeId to : fan.nodes) {
        Event e;
        e.at = at + scn_.prop_delay_us;
        e.kind = Event::Kind::Deliver;
        e.frame = frame;
        e.to = to;
        push(e);
    }
    if (fan.attacker && attacker_) {
        Event e;
        e.at = at + scn_.prop_delay_us;
        e.kind = Event::Kind::Deliver;
        e.frame = frame;
        e.to_attacker = true;
        push(e);
    }
}

void Simulation::apply_actions(const std::vector<Action>& actions, NodeId actor) {
    for (const auto& action : actions) {
        if (const auto* tx = std::get_if<TransmitAction>(&action)) {
            transmit(tx->frame, actor, false, tx->at);
        } else if (const auto* busy = std::get_if<SetBusyAction>(&action)) {
            segments_.push_back({busy->from, busy->until, busy->reason});
            schedule_timer(busy->until, actor, Event::TimerTag::BusyEnd);
        } else if (const auto* ev = std::get_if<EmitEventAction>(&action)) {
            ++result_.metrics.events[ev->tag];
            if (ev->tag == "app_processed") ++result_.metrics.app_processed;
            if (ev->tag == "app_blocked") ++result_.metrics.app_blocked;
        } else if (const auto* drop = std::get_if<DropFrameAction>(&action)) {
            std::string key = drop->reason;
            std::replace(key.begin(), key.end(), ' ', '_');
            std::replace(key.begin(), key.end(), '-', '_');
            ++result_.metrics.drops[key];
        }
    }
}

void Simulation::apply_gateway(GatewayTransition&& t) {
    const bool queue_was_empty = gw_.route_queue.empty();
    gw_ = std::move(t.state);
    apply_actions(t.actions, gw_id_);
    if (!gw_.route_queue.empty() && queue_was_empty) {
        schedule_timer(gw_.route_queue.front().next_attempt(
                           scn_.timing.route_retry_budget_ms * us_per_ms),
                       gw_id_, Event::TimerTag::RouteStep);
    }
}

void Simulation::apply_device(NodeId id, DeviceTransition&& t) {
    devices_[id] = std::move(t.state);
    apply_actions(t.actions, id);
}

void Simulation::handle_deliver(const Event& e) {
    if (e.to_attacker) {
        if (auto emission = attacker_->on_frame_observed(e.frame, gw_id_, e.at)) {
            attacker_emit(*emission);
            if (attacker_->next_tick()) {
                Event tick;
                tick.at = *attacker_->next_tick();
                tick.kind = Event::Kind::AttackerTick;
                push(tick);
            }
        }
        return;
    }
    const NodeProfile& prof = profile(e.to);
    if (prof.kind == NodeKind::Gateway) {
        apply_gateway(gateway_handle_frame(gw_, prof, e.frame, e.at, ctx_));
    } else {
        apply_device(e.to, device_handle_frame(devices_[e.to], prof, e.frame, e.at, ctx_));
    }
}

void Simulation::handle_timer(const Event& e) {
    const NodeProfile& prof = profile(e.node);
    switch (e.tag) {
        case Event::TimerTag::BusyEnd: {
            if (gw_.busy_until && e.at >= *gw_.busy_until && !gw_.route_queue.empty()) {
                // Final routed attempts land at this same instant; run after them.
                schedule_timer(e.at, e.node, Event::TimerTag::BusyEnd);
                return;
            }
            apply_gateway(gateway_on_idle(gw_, prof, e.at, ctx_));
            break;
        }
        case Event::TimerTag::RouteStep: {
            if (gw_.route_queue.empty()) return;
            const std::int64_t budget_us = scn_.timing.route_retry_budget_ms * us_per_ms;
            if (e.at < gw_.route_queue.front().next_attempt(budget_us)) return;  // stale
            apply_gateway(route_step(gw_, prof, e.at, ctx_));
            if (!gw_.route_queue.empty()) {
                schedule_timer(gw_.route_queue.front().next_attempt(budget_us), gw_id_,
                               Event::TimerTag::RouteStep);
            }
            break;
        }
        case Event::TimerTag::AppTimeout:
            apply_gateway(app_timeout(gw_, e.aux, e.at));
            break;
        case Event::TimerTag::AppArrival: {
            const AppSend& send = scn_.app_schedule[e.aux];
            AppEntry entry;
            entry.id = ++app_ids_;
            entry.dst = send.dst;
            entry.cmd = send.cmd;
            entry.enqueued_at = e.at;
            const bool was_busy = gw_.busy_at(e.at);
            apply_gateway(enqueue_app_command(gw_, prof, entry, e.at, ctx_));
            if (was_busy)
                schedule_timer(e.at + scn_.timing.app_timeout_ms * us_per_ms, gw_id_,
                               Event::TimerTag::AppTimeout, entry.id);
            break;
        }
    }
}

void Simulation::handle_heartbeat(const Event& e) {
    const NodeProfile& prof = profile(e.node);
    if (prof.kind == NodeKind::Gateway) {
        if (gw_.busy_at(e.at)) {
            ++result_.metrics.heartbeats_skipped;  // a blocked gateway beacons nothing
        } else {
            transmit(make_heartbeat_frame(scn_.home_id, e.node, gw_heartbeat_seq_++), e.node,
                     false, e.at);
            ++result_.metrics.heartbeats_sent;
        }
    } else {
        transmit(make_heartbeat_frame(scn_.home_id, e.node, device_beacon_seq_[e.node]++),
                 e.node, false, e.at);
    }
    Event next;
    next.at = e.at + prof.heartbeat_interval_ms * us_per_ms;
    next.kind = Event::Kind::HeartbeatDue;
    next.node = e.node;
    push(next);
}

void Simulation::attacker_emit(const Attacker::Emission& emission) {
    transmit(emission.frame, 0, true, emission.at);
    ++result_.metrics.attack_frames_sent;
}

void Simulation::handle_attacker_tick(const Event& e) {
    if (!attacker_) return;
    if (auto emission = attacker_->on_tick(e.at)) attacker_emit(*emission);
    if (attacker_->next_tick()) {
        Event tick;
        tick.at = *attacker_->next_tick();
        tick.kind = Event::Kind::AttackerTick;
        push(tick);
    }
}

void Simulation::finish_metrics() {
    RunMetrics& m = result_.metrics;
    m.duration_ms = scn_.duration_ms;

    // Busy segments are appended in service order and never overlap.
    for (auto seg : segments_) {
        seg.end = std::min(seg.end, duration_us_);
        if (seg.end <= seg.start) continue;
        m.busy_segments.push_back(seg);
        m.gateway_busy_ms += (seg.end - seg.start) / us_per_ms;
        m.gateway_busy_by_reason_ms[to_string(seg.reason)] +=
            (seg.end - seg.start) / us_per_ms;
        if (m.first_block_ms < 0) m.first_block_ms = seg.start / us_per_ms;
        m.last_block_ms = seg.end / us_per_ms;
    }

    std::stable_sort(result_.capture.begin(), result_.capture.end(),
                     [](const CaptureEntry& a, const CaptureEntry& b) { return a.t_us < b.t_us; });

    // Post-run sniffer pass over the capture.
    std::vector<TimedFrame> frames;
    frames.reserve(result_.capture.size());
    for (const auto& entry : result_.capture) {
        auto decoded = decode_frame(entry.bytes, scn_.ids);
        if (auto* f = std::get_if<Frame>(&decoded)) frames.push_back({entry.t_us, *f});
    }
    std::set<NodeId> known;
    for (const auto& n : scn_.nodes) known.insert(n.node_id);
    ScanParams params;
    params.gateway_id = gw_id_;
    result_.anomalies = scan_frames(frames, known, params);
    m.detection_events = static_cast<std::int64_t>(result_.anomalies.size());
    if (scn_.heartbeat_interval_ms > 0) {
        auto hb = heartbeat_monitor(frames, scn_.heartbeat_interval_ms,
                                    scn_.heartbeat_miss_threshold, gw_id_);
        m.heartbeat_lost = static_cast<std::int64_t>(hb.size());
        result_.anomalies.insert(result_.anomalies.end(), hb.begin(), hb.end());
    }
}

RunResult Simulation::run() {
    gw_id_ = scn_.gateway()->node_id;
    gw_.known_nodes.clear();
    for (const auto& n : scn_.nodes) gw_.known_nodes.insert(n.node_id);

    Event end;
    end.at = duration_us_;
    end.kind = Event::Kind::End;
    push(end);

    for (const auto& n : scn_.nodes) {
        if (n.heartbeat_interval_ms > 0) {
            Event hb;
            hb.at = 0;
            hb.kind = Event::Kind::HeartbeatDue;
            hb.node = n.node_id;
            push(hb);
        }
    }
    for (std::size_t i = 0; i < scn_.app_schedule.size(); ++i)
        schedule_timer(scn_.app_schedule[i].at_ms * us_per_ms, gw_id_,
                       Event::TimerTag::AppArrival, i);
    if (scn_.attack) {
        attacker_.emplace(*scn_.attack);
        Event tick;
        tick.at = scn_.attack->start_ms * us_per_ms;
        tick.kind = Event::Kind::AttackerTick;
        push(tick);
    }

    while (!queue_.empty()) {
        Event e = queue_.top();
        queue_.pop();
        if (e.kind == Event::Kind::End) break;
        switch (e.kind) {
            case Event::Kind::Deliver: handle_deliver(e); break;
            case Event::Kind::NodeTimer: handle_timer(e); break;
            case Event::Kind::HeartbeatDue: handle_heartbeat(e); break;
            case Event::Kind::AttackerTick: handle_attacker_tick(e); break;
            case Event::Kind::End: break;
        }
    }
    finish_metrics();
    return std::move(result_);
}

}  // namespace

std::variant<RunResult, ScenarioError> run(const Scenario& scenario) {
    auto problems = scenario.validate();
    if (!problems.empty()) return ScenarioError{std::move(problems)};
    Simulation sim(scenario);
    return sim.run();
}

// ---------------------------------------------------------------------------
// Metrics text
// ---------------------------------------------------------------------------

std::string RunMetrics::to_text() const {
    std::ostringstream out;
    out << "duration_ms = " << duration_ms << "\n";
    out << "frames_on_air = " << frames_on_air << "\n";
    for (const auto& [kind, count] : frames_by_kind)
        out << "frames_on_air." << kind << " = " << count << "\n";
    out << "attack_frames_sent = " << attack_frames_sent << "\n";
    out << "gateway_busy_ms = " << gateway_busy_ms << "\n";
    for (const auto& [reason, ms] : gateway_busy_by_reason_ms)
        out << "gateway_busy_ms." << reason << " = " << ms << "\n";
    out << "first_block_ms = " << first_block_ms << "\n";
    out << "last_block_ms = " << last_block_ms << "\n";
    out << "app_processed = " << app_processed << "\n";
    out << "app_blocked = " << app_blocked << "\n";
    out << "heartbeats_sent = " << heartbeats_sent << "\n";
    out << "heartbeats_skipped = " << heartbeats_skipped << "\n";
    out << "detection_events = " << detection_events << "\n";
    out << "heartbeat_lost = " << heartbeat_lost << "\n";
    for (const auto& [reason, count] : drops) out << "drops." << reason << " = " << count << "\n";
    for (const auto& [tag, count] : events) {
        if (tag == "app_processed" || tag == "app_blocked") continue;
        out << "events." << tag << " = " << count << "\n";
    }
    return out.str();
}

}  // namespace wavecrush
