#include "adscout/perception.hpp"

#include "adscout/fingerprint.hpp"
#include "adscout/rng.hpp"
#include "adscout/session.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace adscout;
using namespace adscout::test;

namespace {

UiState menu_state() {
    const AppBundle bundle = load_bundle(fixture_path("bundles/egg_canvas.bundle"));
    Session s(bundle, 1);
    return s.reset();
}

} // namespace

TEST_CASE("state with no clickable widgets yields only global actions") {
    UiState s = hierarchy_state("Main", {widget(0, "android.widget.TextView", "hello", {0, 0, 10, 10}, false)});
    const auto elements = normalize_hierarchy(s);
    REQUIRE(elements.size() == 1);
    CHECK(elements[0].global_action);
    CHECK(elements[0].action_key == "back");
}

TEST_CASE("dict_loop entry screen normalizes to 13 elements") {
    const AppBundle bundle = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    Session s(bundle, 1);
    const UiState entry = s.reset();
    const auto elements = normalize_hierarchy(entry);
    REQUIRE(elements.size() == 13);
    CHECK(elements[0].class_or_kind == "ImageButton");
    CHECK(elements[0].text == "Open navigation drawer");
    CHECK(elements[0].action_key == "tap:0");
    CHECK(elements[1].class_or_kind == "ListView");
    CHECK(elements[2].text == "Music 1");
    CHECK(elements[12].class_or_kind == "BackButton");
    CHECK(elements[12].text == "[BACK] Return to previous screen");
    CHECK(elements[12].global_action);
}

TEST_CASE("identical metadata widgets stay distinct elements via bounds") {
    UiState s = hierarchy_state("Main", {widget(0, "android.widget.ImageView", "", {0, 0, 100, 100}),
                                         widget(1, "android.widget.ImageView", "", {0, 200, 100, 300})});
    const auto elements = normalize_hierarchy(s);
    REQUIRE(elements.size() == 3);
    CHECK(elements[0].class_or_kind == elements[1].class_or_kind);
    CHECK_FALSE(elements[0].text.has_value());
    CHECK(elements[0].bounds.top != elements[1].bounds.top);
    CHECK(elements[0].action_key != elements[1].action_key);
}

TEST_CASE("normalize_hierarchy rejects canvas states") {
    UiState canvas;
    canvas.mode = RenderingMode::Canvas;
    CHECK_THROWS_AS(normalize_hierarchy(canvas), std::invalid_argument);
}

TEST_CASE("identity detector reproduces the bundle regions exactly") {
    UiState menu = menu_state();
    SimulatedDeepDetector detector(DetectorConfig{1.0, 0, 7});
    const DetectionResult result = detect_regions(menu, detector);
    CHECK_FALSE(result.degraded);
    int deep = 0;
    for (const auto& p : result.proposals) {
        if (p.origin == ProposalOrigin::DeepDetector) ++deep;
    }
    CHECK(deep == 19);
    for (size_t i = 0; i < 19; ++i) {
        CHECK(result.proposals[i].bounds == menu.canvas_regions[i].bounds);
    }
}

TEST_CASE("recall 0.5 over 20 regions keeps exactly 10, reproducibly") {
    UiState s;
    s.mode = RenderingMode::Canvas;
    s.activity = "Game";
    s.state_fingerprint = "abc123";
    s.canvas_bounds = Rect{0, 0, 1000, 1000};
    for (int i = 0; i < 20; ++i) {
        GroundTruthRegion r;
        r.bounds = Rect{0, i * 50, 100, i * 50 + 40};
        r.label = "r" + std::to_string(i);
        r.tag = "UI_ELEMENT";
        s.canvas_regions.push_back(r);
    }
    SimulatedDeepDetector detector(DetectorConfig{0.5, 0, 42});
    const auto first = detector.detect(s);
    const auto second = detector.detect(s);
    REQUIRE(first.size() == 10);
    REQUIRE(second.size() == 10);
    for (size_t i = 0; i < first.size(); ++i) CHECK(first[i].bounds == second[i].bounds);

    // Oracle: the kept set is the seeded shuffle's prefix, sorted by index.
    Rng rng(42 ^ fnv1a64(s.state_fingerprint));
    std::vector<size_t> order(20);
    for (size_t i = 0; i < 20; ++i) order[i] = i;
    rng.shuffle(order);
    order.resize(10);
    std::sort(order.begin(), order.end());
    for (size_t i = 0; i < 10; ++i) {
        CHECK(first[i].bounds == s.canvas_regions[order[i]].bounds);
    }
}

TEST_CASE("detector failure degrades to heuristic-only proposals") {
    struct Failing : RegionDetector {
        std::vector<RegionProposal> detect(const UiState&) override {
            throw std::runtime_error("model missing");
        }
    } failing;
    UiState menu = menu_state();
    const DetectionResult result = detect_regions(menu, failing);
    CHECK(result.degraded);
    CHECK_FALSE(result.proposals.empty());
    for (const auto& p : result.proposals) CHECK(p.origin == ProposalOrigin::HeuristicAnalyzer);
}

TEST_CASE("consolidation is greedy by confidence and idempotent") {
    std::vector<RegionProposal> a{{Rect{0, 0, 100, 100}, 0.9, ProposalOrigin::DeepDetector}};
    std::vector<RegionProposal> b{{Rect{200, 200, 300, 300}, 0.5, ProposalOrigin::HeuristicAnalyzer}};

    SUBCASE("disjoint sets concatenate") {
        const auto merged = consolidate_regions(a, b, 0.5);
        CHECK(merged.size() == 2);
    }
    SUBCASE("identical boxes keep the higher-confidence origin") {
        std::vector<RegionProposal> dup{{Rect{0, 0, 100, 100}, 0.5, ProposalOrigin::HeuristicAnalyzer}};
        const auto merged = consolidate_regions(a, dup, 0.5);
        REQUIRE(merged.size() == 1);
        CHECK(merged[0].origin == ProposalOrigin::DeepDetector);
        CHECK(merged[0].confidence == doctest::Approx(0.9));
    }
    SUBCASE("random inputs never keep a pair at or above the threshold") {
        Rng rng(31);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<RegionProposal> xs;
            const int n = 2 + static_cast<int>(rng.pick(20));
            for (int i = 0; i < n; ++i) {
                const int x = static_cast<int>(rng.pick(300));
                const int y = static_cast<int>(rng.pick(300));
                const int w = 20 + static_cast<int>(rng.pick(200));
                const int h = 20 + static_cast<int>(rng.pick(200));
                xs.push_back(RegionProposal{Rect{x, y, x + w, y + h}, rng.unit(),
                                            ProposalOrigin::DeepDetector});
            }
            const double threshold = 0.3 + rng.unit() * 0.6;
            const auto merged = consolidate_regions(xs, {}, threshold);
            for (size_t i = 0; i < merged.size(); ++i) {
                for (size_t j = i + 1; j < merged.size(); ++j) {
                    CHECK(iou(merged[i].bounds, merged[j].bounds) < threshold);
                }
            }
            const auto again = consolidate_regions(merged, {}, threshold);
            REQUIRE(again.size() == merged.size());
            for (size_t i = 0; i < merged.size(); ++i) {
                CHECK(again[i].bounds == merged[i].bounds);
            }
        }
    }
    CHECK_THROWS_AS(consolidate_regions(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("selective invocation rule") {
    const std::vector<std::string> media = {"ImageView", "ImageButton", "WebView"};
    ActionableElement button;
    button.class_or_kind = "Button";
    button.text = "Rate";
    CHECK_FALSE(should_invoke_vlm(button, RenderingMode::Hierarchy, media));

    ActionableElement bare_image;
    bare_image.class_or_kind = "ImageView";
    CHECK(should_invoke_vlm(bare_image, RenderingMode::Hierarchy, media));

    ActionableElement described_image;
    described_image.class_or_kind = "ImageButton";
    described_image.text = "Open navigation drawer";
    CHECK_FALSE(should_invoke_vlm(described_image, RenderingMode::Hierarchy, media));

    ActionableElement region;
    region.source = ElementSource::Region;
    region.class_or_kind = "Region";
    CHECK(should_invoke_vlm(region, RenderingMode::Canvas, media));

    ActionableElement back;
    back.class_or_kind = "BackButton";
    back.global_action = true;
    back.text = "[BACK] Return to previous screen";
    CHECK_FALSE(should_invoke_vlm(back, RenderingMode::Canvas, media));
}

TEST_CASE("scripted captioner echoes bundle labels through the caption op") {
    UiState menu = menu_state();
    ScriptedCaptioner captioner;
    captioner.set_context(menu);
    std::vector<CaptionTarget> targets{{0, menu.canvas_regions[7].bounds, "Region"},
                                       {1, menu.canvas_regions[0].bounds, "Region"}};
    const auto tags = caption(targets, captioner);
    REQUIRE(tags.size() == 2);
    CHECK(tags[0].tag == "AD");
    CHECK(tags[0].description == "A large promotional image featuring a 'FREE' surprise egg.");
    CHECK(tags[1].tag == "UI_ELEMENT");
    CHECK(tags[1].description == "A blue Facebook icon indicating social media sharing.");

    CHECK_THROWS_AS(caption({}, captioner), std::invalid_argument);
}

TEST_CASE("malformed captioner replies fall back to UI_ELEMENT with raw text kept") {
    struct Garbled : VisionCaptioner {
        int calls = 0;
        std::string annotate(const std::string&, const std::vector<CaptionTarget>&) override {
            ++calls;
            return "sorry, I cannot produce JSON today";
        }
    } garbled;
    std::vector<CaptionTarget> targets{{0, Rect{0, 0, 10, 10}, "Region"}};
    const auto tags = caption(targets, garbled);
    CHECK(garbled.calls == 3); // two structured attempts plus the preserved raw reply
    REQUIRE(tags.size() == 1);
    CHECK(tags[0].tag == "UI_ELEMENT");
    CHECK(tags[0].description == "sorry, I cannot produce JSON today");
}

TEST_CASE("full canvas perception yields 19 captioned regions plus back") {
    UiState menu = menu_state();
    EngineConfig config = default_config();
    SimulatedDeepDetector detector(config.detector);
    ScriptedCaptioner captioner;
    const PerceptionResult result = perceive(menu, config, &detector, &captioner);
    REQUIRE(result.elements.size() == 20);
    CHECK(result.captioner_calls == 19);
    CHECK(result.elements[7].semantic_caption ==
          "[AD] A large promotional image featuring a 'FREE' surprise egg.");
    CHECK(result.elements[18].semantic_caption ==
          "[AD] A round button featuring a frog and the label 'More Games'.");
    CHECK(result.elements[19].global_action);

    // every region element taps the center of its box
    const auto& egg = result.elements[7];
    CHECK(egg.action_key == "tap_xy:540,1800");
}

TEST_CASE("cross-rendering uniformity: hierarchy and canvas yield the same element shape") {
    const AppBundle bundle = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    Session s(bundle, 1);
    EngineConfig config = default_config();
    ScriptedCaptioner captioner;
    SimulatedDeepDetector detector(config.detector);

    const PerceptionResult h = perceive(s.reset(), config, &detector, &captioner);
    const PerceptionResult c = perceive(menu_state(), config, &detector, &captioner);
    for (const auto& el : h.elements) CHECK(el.source == ElementSource::Hierarchy);
    for (const auto& el : c.elements) {
        CHECK(el.source == ElementSource::Region);
        if (!el.global_action) CHECK(el.semantic_caption.has_value());
    }
    // indices contiguous from zero in both modes
    for (size_t i = 0; i < h.elements.size(); ++i) CHECK(h.elements[i].index == static_cast<int>(i));
    for (size_t i = 0; i < c.elements.size(); ++i) CHECK(c.elements[i].index == static_cast<int>(i));
}

TEST_CASE("hierarchy perception captions only ambiguous media widgets") {
    const AppBundle bundle = load_bundle(fixture_path("bundles/obfuscated_news.bundle"));
    Session s(bundle, 1);
    s.reset();
    s.step("tap:1"); // article
    const UiState overlay = s.step("tap:1").next;

    EngineConfig config = default_config();
    ScriptedCaptioner captioner;
    const PerceptionResult selective = perceive(overlay, config, nullptr, &captioner);
    CHECK(selective.captioner_calls == 1); // the bare ImageView only
    REQUIRE(selective.elements.size() == 3);
    CHECK(selective.elements[0].semantic_caption ==
          "[AD] A full screen promotional poster with a countdown timer.");
    CHECK_FALSE(selective.elements[1].semantic_caption.has_value()); // Close has a desc

    const PerceptionResult everything = perceive(overlay, config, nullptr, &captioner, true);
    CHECK(everything.captioner_calls == 2);
}
