#include "adscout/bundle.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace adscout;
using namespace adscout::test;

TEST_CASE("minimal bundle loads with a single state") {
    const AppBundle b = load_bundle(fixture_path("bundles/minimal.bundle"));
    CHECK(b.app_id == "com.example.minimal");
    CHECK(b.rendering.size() == 1);
    CHECK(b.behavior.ad_triggers.empty());
    CHECK(b.behavior.initial_state == "start");
}

TEST_CASE("bundle referencing an undeclared activity is rejected") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["MainActivity"]},
        "rendering": {"s": {"mode": "hierarchy", "activity": "GhostActivity", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    CHECK_THROWS_WITH_AS(parse_bundle_text(doc, "inline"),
                         doctest::Contains("unknown activity"), BundleError);
}

TEST_CASE("duplicate manifest activities are rejected") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A", "A"]},
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    CHECK_THROWS_AS(parse_bundle_text(doc, "inline"), BundleError);
}

TEST_CASE("layout resource ids must resolve in the resource map") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A"]},
        "layouts": {"A": {"class": "android.widget.FrameLayout",
                          "children": [{"class": "com.sdk.ads.AdView", "id": "missing"}]}},
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    CHECK_THROWS_WITH_AS(parse_bundle_text(doc, "inline"),
                         doctest::Contains("not in resource_map"), BundleError);
}

TEST_CASE("superclass cycles are rejected") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A"]},
        "code_summary": [
            {"class": "p.Foo", "superclass": "p.Bar", "methods": []},
            {"class": "p.Bar", "superclass": "p.Foo", "methods": []}
        ],
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    CHECK_THROWS_WITH_AS(parse_bundle_text(doc, "inline"),
                         doctest::Contains("cycle"), BundleError);
}

TEST_CASE("transition targets and trigger hosts must exist") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A"]},
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s",
                     "transitions": {"s": {"tap:0": {"next": "nowhere"}}}}
    })";
    CHECK_THROWS_WITH_AS(parse_bundle_text(doc, "inline"),
                         doctest::Contains("unknown target state"), BundleError);
}

TEST_CASE("malformed json reports the parse position") {
    CHECK_THROWS_AS(parse_bundle_text("{\"app_id\": ", "broken.bundle"), BundleError);
}

TEST_CASE("dict_loop fixture parses with one ad trigger") {
    const AppBundle b = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    REQUIRE(b.behavior.ad_triggers.size() == 1);
    const AdTriggerInstance& trig = b.behavior.ad_triggers[0];
    CHECK(trig.ad_id == "play_redirect");
    CHECK(trig.host_state == "playstore");
    CHECK(trig.required_context == std::vector<std::string>{"tap:0", "tap:1"});
    CHECK(b.rendering.size() == 16); // entry, drawer, 10 pages, playstore, rate, about, home
    CHECK(b.screen("entry").widgets.size() == 13);
}

TEST_CASE("canonical serialization ignores bounds and index renumbering") {
    UiState a = hierarchy_state("Main", {widget(0, "android.widget.Button", "Go", {0, 0, 10, 10}),
                                         widget(1, "android.widget.TextView", "Hi", {0, 20, 10, 30})});
    UiState b = hierarchy_state("Main", {widget(5, "android.widget.Button", "Go", {3, 4, 77, 99}),
                                         widget(9, "android.widget.TextView", "Hi", {5, 6, 70, 90})});
    CHECK(canonical_state_serialization(a) == canonical_state_serialization(b));

    UiState c = a;
    c.widgets[0].text = "Stop";
    CHECK(canonical_state_serialization(a) != canonical_state_serialization(c));
}

TEST_CASE("structural digest ignores text but keeps classes and ids") {
    UiState a = hierarchy_state("Main", {widget(0, "android.widget.Button", "Word 1", {0, 0, 10, 10})});
    UiState b = hierarchy_state("Main", {widget(0, "android.widget.Button", "Word 2", {0, 0, 10, 10})});
    CHECK(structural_digest(a) == structural_digest(b));
    CHECK(canonical_state_serialization(a) != canonical_state_serialization(b));
}

TEST_CASE("iou basics") {
    CHECK(iou(Rect{0, 0, 10, 10}, Rect{0, 0, 10, 10}) == doctest::Approx(1.0));
    CHECK(iou(Rect{0, 0, 10, 10}, Rect{20, 20, 30, 30}) == doctest::Approx(0.0));
    CHECK(iou(Rect{0, 0, 10, 10}, Rect{5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0));
}
