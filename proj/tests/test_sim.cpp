#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "wavecrush/sim.hpp"

using namespace wavecrush;

namespace {

Scenario base_scenario() {
    Scenario s;
    s.duration_ms = 40'000;
    s.seed = 3;
    s.home_id = HomeId{0xC0FFEE01};

    NodeProfile gw;
    gw.node_id = 1;
    gw.kind = NodeKind::Gateway;
    gw.heartbeat_interval_ms = 10'000;
    s.nodes.push_back(gw);

    NodeProfile d2;
    d2.node_id = 2;
    d2.kind = NodeKind::Device;
    s.nodes.push_back(d2);

    NodeProfile d3 = d2;
    d3.node_id = 3;
    s.nodes.push_back(d3);

    s.links = {{1, 2}, {1, 3}, {2, 3}};
    s.attacker_hears = {1, 2, 3};
    s.heartbeat_interval_ms = 10'000;
    return s;
}

RunResult must_run(const Scenario& s) {
    auto r = run(s);
    REQUIRE(std::holds_alternative<RunResult>(r));
    return std::get<RunResult>(std::move(r));
}

std::string capture_text(const RunResult& r) {
    std::ostringstream out;
    write_capture(out, r.capture);
    return out.str();
}

}  // namespace

TEST_CASE("benign scenario: everything processed, nothing detected") {
    Scenario s = base_scenario();
    s.app_schedule.push_back({5'000, 2, AppCommand{0x25, 0x01, {0xFF}}});
    s.app_schedule.push_back({15'000, 3, AppCommand{0x25, 0x02, {}}});
    s.app_schedule.push_back({25'000, 2, AppCommand{0x20, 0x02, {0x01}}});

    auto r = must_run(s);
    CHECK(r.metrics.app_processed == 3);
    CHECK(r.metrics.app_blocked == 0);
    CHECK(r.metrics.gateway_busy_ms == 0);
    CHECK(r.metrics.detection_events == 0);
    CHECK(r.metrics.heartbeat_lost == 0);
    CHECK(r.metrics.attack_frames_sent == 0);
    CHECK(r.metrics.heartbeats_sent == 4);  // t = 0, 10, 20, 30 s
    CHECK(r.metrics.frames_on_air == static_cast<std::int64_t>(r.capture.size()));
    CHECK(!r.capture.empty());
    for (std::size_t i = 1; i < r.capture.size(); ++i)
        CHECK(r.capture[i - 1].t_us <= r.capture[i].t_us);
}

TEST_CASE("determinism: identical scenario, identical bytes") {
    Scenario s = base_scenario();
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::RoutedNoncenseS0;
    s.attack->count = 4;
    s.attack->interval_ms = 100;
    s.app_schedule.push_back({2'000, 2, AppCommand{0x25, 0x01, {}}});

    auto a = must_run(s);
    auto b = must_run(s);
    CHECK(capture_text(a) == capture_text(b));
    CHECK(a.metrics.to_text() == b.metrics.to_text());
}

TEST_CASE("deliver fan-out respects adjacency and the attacker tap") {
    Scenario s = base_scenario();

    auto fan = deliver_fanout(s, 1, false);
    CHECK(fan.nodes == std::vector<NodeId>{2, 3});
    CHECK(fan.attacker);

    s.attacker_hears = {2};
    fan = deliver_fanout(s, 1, false);
    CHECK_FALSE(fan.attacker);

    // Isolated node: nobody in range.
    s.links = {{2, 3}};
    fan = deliver_fanout(s, 1, false);
    CHECK(fan.nodes.empty());

    // Attacker transmissions reach what it hears; never itself.
    s.attacker_hears = {1, 3};
    fan = deliver_fanout(s, 0, true);
    CHECK(fan.nodes == std::vector<NodeId>{1, 3});
    CHECK_FALSE(fan.attacker);
}

TEST_CASE("routed noncense: five frames block five budgets") {
    Scenario s = base_scenario();
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::RoutedNoncenseS0;
    s.attack->count = 5;
    s.attack->interval_ms = 100;
    s.attack->start_ms = 1000;

    auto r = must_run(s);
    CHECK(r.metrics.attack_frames_sent == 5);
    CHECK(r.metrics.gateway_busy_ms == 5 * 4700);
    CHECK(r.metrics.gateway_busy_by_reason_ms.at("routing_nonce") == 5 * 4700);
    CHECK(r.metrics.first_block_ms == 1001);  // start + propagation
    CHECK(r.metrics.last_block_ms == 1001 + 5 * 4700);
    CHECK(r.metrics.frames_by_kind.at("nonce_get") == 5);
    // 5 direct + 15 routed reports, plus relayed copies from both devices.
    CHECK(r.metrics.frames_by_kind.at("nonce_report") == 5 + 15 + 15 * 2);
    CHECK(r.metrics.detection_events > 0);

    std::int64_t by_reason_total = 0;
    for (const auto& [reason, ms] : r.metrics.gateway_busy_by_reason_ms) by_reason_total += ms;
    CHECK(by_reason_total == r.metrics.gateway_busy_ms);
}

TEST_CASE("nonce uniqueness: a nonce never appears in two distinct frames") {
    Scenario s = base_scenario();
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::RoutedNoncenseS0;
    s.attack->count = 5;
    s.attack->interval_ms = 100;
    s.app_schedule.push_back({30'000, 2, AppCommand{0x25, 0x01, {}}});

    auto r = must_run(s);
    std::map<Bytes, std::set<Bytes>> frames_by_nonce;
    for (const auto& entry : r.capture) {
        auto decoded = decode_frame(entry.bytes);
        REQUIRE(std::holds_alternative<Frame>(decoded));
        const Frame& f = std::get<Frame>(decoded);
        if (const auto* nr = std::get_if<NonceReport>(&f.command)) {
            frames_by_nonce[Bytes(nr->nonce.begin(), nr->nonce.end())].insert(entry.bytes);
        } else if (const auto* s2 = std::get_if<S2NonceReport>(&f.command)) {
            frames_by_nonce[Bytes(s2->nonce.begin(), s2->nonce.end())].insert(entry.bytes);
        }
    }
    CHECK(!frames_by_nonce.empty());
    for (const auto& [nonce, frames] : frames_by_nonce) CHECK(frames.size() == 1);
}

TEST_CASE("power of nope: one frame, exact sweep arithmetic, apps starve") {
    Scenario s = base_scenario();
    s.duration_ms = 10'000;
    s.timing.fnir_passes = 1;
    s.timing.nop_wait_ms = 10;      // sweep = 232 * 10 ms = 2320 ms
    s.timing.app_timeout_ms = 1000;  // expires mid-sweep
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::PowerOfNope;
    s.attack->count = 1;
    s.attack->start_ms = 500;
    s.app_schedule.push_back({600, 2, AppCommand{0x25, 0x01, {}}});   // mid-sweep
    s.app_schedule.push_back({5'000, 3, AppCommand{0x25, 0x01, {}}});  // after sweep

    auto r = must_run(s);
    CHECK(r.metrics.gateway_busy_ms == 2320);
    CHECK(r.metrics.gateway_busy_by_reason_ms.at("fnir_sweep") == 2320);
    CHECK(r.metrics.first_block_ms == 501);
    CHECK(r.metrics.frames_by_kind.at("nop_power") == 232);
    CHECK(r.metrics.app_blocked == 1);    // the mid-sweep command times out
    CHECK(r.metrics.app_processed == 1);  // the late one goes through
    // Devices 2 and 3 each acknowledge their own probe.
    CHECK(r.metrics.frames_by_kind.at("ack") == 2);
}

TEST_CASE("queued app command survives if the block ends before its timeout") {
    Scenario s = base_scenario();
    s.duration_ms = 10'000;
    s.timing.fnir_passes = 1;
    s.timing.nop_wait_ms = 10;
    s.timing.app_timeout_ms = 5000;
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::PowerOfNope;
    s.attack->count = 1;
    s.attack->start_ms = 500;
    // Sweep runs [501, 2821] ms; enqueued at 2000, timeout would hit 7000.
    s.app_schedule.push_back({2'000, 2, AppCommand{0x25, 0x01, {}}});

    auto r = must_run(s);
    CHECK(r.metrics.app_processed == 1);
    CHECK(r.metrics.app_blocked == 0);
}

TEST_CASE("busy time is clipped at the end of the run") {
    Scenario s = base_scenario();
    s.duration_ms = 3'000;
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::RoutedNoncenseS0;
    s.attack->count = 1;
    s.attack->start_ms = 1000;

    auto r = must_run(s);
    // Block starts at 1001 ms and would run 4700 ms; the run ends first.
    CHECK(r.metrics.gateway_busy_ms == 3'000 - 1001);
    CHECK(r.metrics.gateway_busy_ms <= r.metrics.duration_ms);
}

TEST_CASE("blocked gateway skips heartbeats") {
    Scenario s = base_scenario();
    s.duration_ms = 50'000;
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::RoutedNoncenseS0;
    s.attack->count = 8;  // busy [1001, 38601] ms
    s.attack->interval_ms = 100;

    auto r = must_run(s);
    // Beat at 0 s sent; 10/20/30 s fall inside the block; 40 s is idle again.
    CHECK(r.metrics.heartbeats_sent == 2);
    CHECK(r.metrics.heartbeats_skipped == 3);
    // Silence exceeds miss_threshold * interval = 30 s: one outage.
    CHECK(r.metrics.heartbeat_lost == 1);
}

TEST_CASE("patched gateway shrugs both attacks off") {
    for (auto kind : {AttackKind::RoutedNoncenseS0, AttackKind::PowerOfNope}) {
        Scenario s = base_scenario();
        s.nodes[0].patched = true;
        s.nodes[0].routes_to_unknown = false;
        s.attack = AttackPlan{};
        s.attack->kind = kind;
        s.attack->count = kind == AttackKind::PowerOfNope ? 1 : 8;
        s.attack->interval_ms = 100;
        s.app_schedule.push_back({5'000, 2, AppCommand{0x25, 0x01, {}}});

        auto r = must_run(s);
        CHECK(r.metrics.gateway_busy_ms == 0);
        CHECK(r.metrics.app_blocked == 0);
        CHECK(r.metrics.app_processed == 1);
        CHECK(r.metrics.attack_frames_sent > 0);
    }
}

TEST_CASE("legacy gateway leaks CommandComplete; modern stays silent") {
    Scenario s = base_scenario();
    s.duration_ms = 20'000;
    s.timing.fnir_passes = 1;
    s.timing.nop_wait_ms = 10;
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::PowerOfNope;
    s.attack->count = 2;
    s.attack->use_command_complete_timing = true;
    s.attack->start_ms = 500;

    SUBCASE("legacy: the second shot lands right after the sweep") {
        s.nodes[0].era = Era::LegacyS0;
        auto r = must_run(s);
        CHECK(r.metrics.frames_by_kind.at("command_complete") == 2);
        CHECK(r.metrics.attack_frames_sent == 2);
        REQUIRE(r.metrics.busy_segments.size() == 2);
        // Sweep 1 ends, CommandComplete + reaction + propagation = 2 ms gap.
        CHECK(r.metrics.busy_segments[1].start - r.metrics.busy_segments[0].end ==
              2 * us_per_ms);
    }
    SUBCASE("modern: no CommandComplete, no second trigger") {
        s.nodes[0].era = Era::ModernS2;
        auto r = must_run(s);
        CHECK(r.metrics.frames_by_kind.find("command_complete") ==
              r.metrics.frames_by_kind.end());
        CHECK(r.metrics.attack_frames_sent == 1);  // nothing to synchronize on
    }
}

TEST_CASE("nonexistent-source variant: same blockage, different fingerprint") {
    Scenario s = base_scenario();
    s.attack = AttackPlan{};
    s.attack->kind = AttackKind::RoutedNoncenseS0;
    s.attack->count = 3;
    s.attack->interval_ms = 100;
    s.attack->spoof_src = 200;  // no such node on this network

    auto r = must_run(s);
    CHECK(r.metrics.gateway_busy_ms == 3 * 4700);
    bool unknown_source = false, self_addressed = false;
    for (const auto& e : r.anomalies) {
        unknown_source |= e.rule == AnomalyRule::UnknownSource;
        self_addressed |= e.rule == AnomalyRule::SelfAddressed && e.frame &&
                          std::holds_alternative<NonceGet>(e.frame->command);
    }
    CHECK(unknown_source);        // src=200 is not in the roster
    CHECK_FALSE(self_addressed);  // src != dst, so that rule stays quiet
}

TEST_CASE("invalid scenarios are rejected with diagnostics") {
    Scenario s;  // no nodes, zero duration
    auto r = run(s);
    REQUIRE(std::holds_alternative<ScenarioError>(r));
    CHECK(!std::get<ScenarioError>(r).problems.empty());
}

TEST_CASE("metrics text is stable and flat") {
    Scenario s = base_scenario();
    auto r = must_run(s);
    std::string text = r.metrics.to_text();
    CHECK(text.find("duration_ms = 40000\n") != std::string::npos);
    CHECK(text.find("gateway_busy_ms = 0\n") != std::string::npos);
    CHECK(text.find("app_processed = 0\n") != std::string::npos);
    // Every line is key = value.
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) CHECK(line.find(" = ") != std::string::npos);
}
