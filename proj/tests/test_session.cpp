#include "adscout/session.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace adscout;
using namespace adscout::test;

namespace {

AppBundle dict_loop() { return load_bundle(fixture_path("bundles/dict_loop.bundle")); }

} // namespace

TEST_CASE("reset is deterministic and restores the initial state") {
    const AppBundle bundle = dict_loop();
    Session a(bundle, 42);
    Session b(bundle, 42);
    CHECK(a.reset().state_fingerprint == b.reset().state_fingerprint);

    a.step("tap:0");
    a.step("tap:1");
    const UiState after_reset = a.reset();
    CHECK(after_reset.activity == "MainActivity");
    CHECK(after_reset.clock_seconds == 0.0);
    CHECK(a.emission_log().empty());
}

TEST_CASE("observe is pure and matches reset") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 1);
    const UiState initial = s.reset();
    CHECK(s.observe().state_fingerprint == initial.state_fingerprint);
    CHECK(s.observe().state_fingerprint == s.observe().state_fingerprint);
}

TEST_CASE("dict_loop exposes the ad on open-drawer then other-app") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 7);
    s.reset();
    StepOutcome first = s.step("tap:0");
    CHECK_FALSE(first.ad_exposed.has_value());
    StepOutcome second = s.step("tap:1");
    REQUIRE(second.ad_exposed.has_value());
    CHECK(*second.ad_exposed == "play_redirect");
    CHECK(second.next.activity == "GooglePlayActivity");
}

TEST_CASE("exhaustive length-3 search finds exactly one exposing path") {
    const AppBundle bundle = dict_loop();
    std::vector<std::string> actions;
    for (int i = 0; i < 13; ++i) actions.push_back("tap:" + std::to_string(i));
    actions.push_back("back");

    // Independent oracle: replay every dead-tap-free sequence through a
    // fresh session and keep those whose final step exposes.
    std::set<std::vector<std::string>> exposing;
    std::vector<std::vector<std::string>> frontier{{}};
    for (int len = 1; len <= 3; ++len) {
        std::vector<std::vector<std::string>> next;
        for (const auto& prefix : frontier) {
            for (const auto& action : actions) {
                auto seq = prefix;
                seq.push_back(action);
                Session s(bundle, 1);
                s.reset();
                bool valid_path = true;
                bool exposed_midway = false;
                bool exposed_last = false;
                for (size_t i = 0; i < seq.size(); ++i) {
                    StepOutcome o = s.step(seq[i]);
                    if (o.noop) valid_path = false;
                    if (o.ad_exposed) (i + 1 == seq.size() ? exposed_last : exposed_midway) = true;
                }
                if (valid_path && exposed_last && !exposed_midway) exposing.insert(seq);
                if (valid_path) next.push_back(std::move(seq));
            }
        }
        frontier = std::move(next);
    }
    REQUIRE(exposing.size() == 1);
    CHECK(*exposing.begin() == std::vector<std::string>{"tap:0", "tap:1"});
}

TEST_CASE("dead taps are no-ops that still advance the clock") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 1);
    const UiState before = s.reset();
    StepOutcome out = s.step("tap:99");
    CHECK(out.noop);
    CHECK(out.next.state_fingerprint == before.state_fingerprint);
    CHECK(s.clock_seconds() == doctest::Approx(5.0));
}

TEST_CASE("self-loop advances the clock but keeps the fingerprint") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 1);
    s.reset();
    s.step("tap:2"); // Music 1 -> page_1
    const UiState page = s.observe();
    StepOutcome out = s.step("tap:1"); // Play: self-loop with delay 2
    CHECK(out.next.state_fingerprint == page.state_fingerprint);
    CHECK(s.clock_seconds() == doctest::Approx(5.0 + 7.0));
}

TEST_CASE("time-gated trigger fires on the first qualifying step") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A", "B"]},
        "rendering": {
            "s": {"mode": "hierarchy", "activity": "A",
                  "widgets": [{"class": "android.widget.Button", "text": "Watch", "bounds": [0,0,10,10], "clickable": true}]},
            "v": {"mode": "hierarchy", "activity": "B", "widgets": []}
        },
        "behavior": {
            "initial_state": "s",
            "transitions": {"s": {"tap:0": {"next": "v"}}},
            "ad_triggers": [{"id": "gated", "host_state": "v", "context": ["tap:0"], "min_dwell": 5.0}]
        }
    })";
    const AppBundle bundle = parse_bundle_text(doc, "inline");
    // Event interval 5s: the arriving step lasts exactly min_dwell.
    Session s(bundle, 1, 5.0);
    s.reset();
    CHECK(s.step("tap:0").ad_exposed.has_value());

    // With a 2s interval the dwell is not met.
    Session fast(bundle, 1, 2.0);
    fast.reset();
    CHECK_FALSE(fast.step("tap:0").ad_exposed.has_value());
}

TEST_CASE("full outcome stream is identical across runs") {
    const AppBundle bundle = dict_loop();
    const std::vector<std::string> script = {"tap:0", "tap:2", "back", "tap:0",
                                             "tap:1", "back",  "back"};
    auto run = [&]() {
        Session s(bundle, 9);
        s.reset();
        std::string log;
        for (const auto& a : script) {
            StepOutcome o = s.step(a);
            log += o.next.state_fingerprint + "|" + (o.ad_exposed ? *o.ad_exposed : "-") + "|" +
                   std::to_string(o.noop) + "|" + std::to_string(s.clock_seconds()) + "\n";
        }
        return log;
    };
    CHECK(run() == run());
}

TEST_CASE("clock is monotone across arbitrary actions") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 3);
    s.reset();
    double last = 0.0;
    for (const std::string& a : {"tap:5", "tap:1", "tap:2", "back", "tap:99", "restart", "tap:0"}) {
        s.step(a);
        CHECK(s.clock_seconds() >= last);
        last = s.clock_seconds();
    }
}

TEST_CASE("background and recovery round trip") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 3);
    s.reset();
    StepOutcome out = s.step("back");
    CHECK(out.backgrounded);
    CHECK(out.next.activity == "Launcher");
    CHECK(s.step("back").next.activity == "MainActivity");
}

TEST_CASE("restart returns to the initial state without clearing the clock") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 3);
    s.reset();
    s.step("tap:0");
    StepOutcome out = s.step("restart");
    CHECK(out.next.activity == "MainActivity");
    CHECK(s.clock_seconds() > 0.0);
}

TEST_CASE("emissions carry step-relative timestamps") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 3);
    s.reset();
    s.step("tap:0");                       // emits at 0.2
    StepOutcome out = s.step("tap:1");     // emits at 5 + 1.5 and 5 + 2.0
    REQUIRE(out.events.size() == 2);
    CHECK(out.events[0].timestamp == doctest::Approx(6.5));
    CHECK(out.events[1].timestamp == doctest::Approx(7.0));
    CHECK(format_syslog_line(out.events[0]).rfind("6.500|AdNetwork|", 0) == 0);
}

TEST_CASE("coordinate taps resolve against clickable widgets") {
    const AppBundle bundle = dict_loop();
    Session s(bundle, 3);
    s.reset();
    CHECK(s.resolve_action("tap_xy:84,186") == "tap:0");  // drawer button
    CHECK(s.resolve_action("tap_xy:540,375") == "tap:1"); // list container
    CHECK(s.resolve_action("tap_xy:540,2450") == "tap_xy:540,2450"); // AdView: not clickable
}
