#include "adscout/profiler.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace adscout;
using namespace adscout::test;

namespace {

EngineConfig cfg() { return default_config(); }

} // namespace

TEST_CASE("bundle with no sdk traces yields an empty screen prior") {
    const AppBundle b = load_bundle(fixture_path("bundles/no_ad.bundle"));
    const ScreenPrior prior = extract_screen_prior(b, cfg().signatures);
    CHECK(prior.empty());
}

TEST_CASE("admob-style metadata and AdActivity produce the screen prior") {
    const AppBundle b = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    const ScreenPrior prior = extract_screen_prior(b, cfg().signatures);
    REQUIRE(prior.ad_related_activities.size() == 1);
    CHECK(prior.ad_related_activities[0] == "com.google.android.gms.ads.AdActivity");
    REQUIRE(prior.matched_metadata.size() == 1);
    CHECK(prior.matched_metadata[0] == "com.google.android.gms.ads.APPLICATION_ID");
    CHECK(prior.detected_libraries == std::vector<std::string>{"Google AdMob"});
}

TEST_CASE("obfuscated bundle: empty screen prior but non-empty trigger prior") {
    const AppBundle b = load_bundle(fixture_path("bundles/obfuscated_news.bundle"));
    CHECK(extract_screen_prior(b, cfg().signatures).empty());
    const TriggerPrior trig = extract_trigger_prior(b, cfg().signatures);
    CHECK_FALSE(trig.methods_by_activity.empty());
    REQUIRE(trig.methods_by_activity.count("HomeActivity") == 1);
    CHECK(trig.methods_by_activity.at("HomeActivity")[0].signature == "loadAd");
    CHECK(trig.methods_by_activity.at("HomeActivity")[0].importance_rank == 2);
    // clue whose chain dies at java.lang.Object
    REQUIRE(trig.methods_by_activity.count("unattributed") == 1);
    CHECK(trig.methods_by_activity.at("unattributed")[0].importance_rank == 3);
}

TEST_CASE("slot prior resolves ids through the resource map and infers the format") {
    const AppBundle b = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    const SlotPrior prior = extract_slot_prior(b, cfg().signatures);
    REQUIRE(prior.entries.size() == 1);
    const SlotEntry& e = prior.entries[0];
    CHECK(e.activity == "MainActivity");
    CHECK(e.view_class == "com.google.android.gms.ads.AdView");
    CHECK(e.resource_id_string == "adView");
    REQUIRE(e.resource_id_hex.has_value());
    CHECK(*e.resource_id_hex == "0x7f090042");
    CHECK(e.inferred_ad_type == "banner");
    CHECK(e.depth == 1);
    CHECK(prior.warnings.empty());
}

TEST_CASE("layout without matching classes yields an empty slot prior") {
    const AppBundle b = load_bundle(fixture_path("bundles/no_ad.bundle"));
    CHECK(extract_slot_prior(b, cfg().signatures).entries.empty());
}

TEST_CASE("slot nodes without a resource id are kept with a warning") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A"]},
        "layouts": {"A": {"class": "android.widget.FrameLayout",
                          "children": [{"class": "com.facebook.ads.NativeAdLayout"}]}},
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    const AppBundle b = parse_bundle_text(doc, "inline");
    const SlotPrior prior = extract_slot_prior(b, cfg().signatures);
    REQUIRE(prior.entries.size() == 1);
    CHECK_FALSE(prior.entries[0].resource_id_hex.has_value());
    CHECK(prior.entries[0].inferred_ad_type == "native");
    REQUIRE(prior.warnings.size() == 1);
}

TEST_CASE("two-hop superclass chain attributes the clue to the registered activity") {
    const AppBundle b = load_bundle(fixture_path("bundles/chain_attr.bundle"));
    const TriggerPrior prior = extract_trigger_prior(b, cfg().signatures);
    REQUIRE(prior.methods_by_activity.count("MainActivity") == 1);
    const auto& methods = prior.methods_by_activity.at("MainActivity");
    REQUIRE(methods.size() == 1);
    CHECK(methods[0].signature == "loadAd");
    CHECK(methods[0].importance_rank == 2);

    // the activity's own show() call ranks highest
    REQUIRE(prior.methods_by_activity.count("SettingsActivity") == 1);
    CHECK(prior.methods_by_activity.at("SettingsActivity")[0].importance_rank == 3);

    // CrashReporter's initialize() dies on java.lang.Object
    REQUIRE(prior.methods_by_activity.count("unattributed") == 1);
    CHECK(prior.methods_by_activity.at("unattributed")[0].importance_rank == 1);
}

TEST_CASE("rank ordering: show entries precede load entries") {
    const std::string doc = R"({
        "app_id": "x",
        "manifest": {"activities": ["A"]},
        "code_summary": [
            {"class": "A", "superclass": "android.app.Activity", "methods": [
                {"signature": "warmCache", "ad_apis": ["sdk.ads.loadAd"]},
                {"signature": "onResume", "ad_apis": ["sdk.ads.showInterstitial"]},
                {"signature": "onCreate", "ad_apis": ["sdk.ads.initialize"]}
            ]}
        ],
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    const AppBundle b = parse_bundle_text(doc, "inline");
    EngineConfig c = cfg();
    c.signatures.sdk_prefixes.push_back("sdk.ads");
    const TriggerPrior prior = extract_trigger_prior(b, c.signatures);
    const auto& methods = prior.methods_by_activity.at("A");
    REQUIRE(methods.size() == 3);
    CHECK(methods[0].importance_rank == 3);
    CHECK(methods[1].importance_rank == 2);
    CHECK(methods[2].importance_rank == 1);
}

TEST_CASE("profiler is additive: extra matching layout nodes never remove entries") {
    const std::string base = R"({
        "app_id": "x",
        "manifest": {"activities": ["A"]},
        "layouts": {"A": {"class": "android.widget.FrameLayout", "children": [
            {"class": "com.google.android.gms.ads.AdView", "id": "first"}ADDITION]}},
        "resource_map": {"first": "0x01", "second": "0x02"},
        "rendering": {"s": {"mode": "hierarchy", "activity": "A", "widgets": []}},
        "behavior": {"initial_state": "s"}
    })";
    auto with = [&](const std::string& addition) {
        std::string doc = base;
        doc.replace(doc.find("ADDITION"), 8, addition);
        return extract_slot_prior(parse_bundle_text(doc, "inline"), cfg().signatures);
    };
    const SlotPrior small = with("");
    const SlotPrior grown = with(", {\"class\": \"com.google.android.gms.ads.AdView\", \"id\": \"second\"}");
    REQUIRE(grown.entries.size() == small.entries.size() + 1);
    for (const auto& e : small.entries) {
        bool still_there = false;
        for (const auto& g : grown.entries) {
            if (g.resource_id_string == e.resource_id_string) still_there = true;
        }
        CHECK(still_there);
    }
}

TEST_CASE("knowledge base fuses all four priors") {
    const AppBundle b = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    const ScreenPrior screen = extract_screen_prior(b, cfg().signatures);
    const SlotPrior slot = extract_slot_prior(b, cfg().signatures);
    const TriggerPrior trigger = extract_trigger_prior(b, cfg().signatures);
    NetworkPrior network;
    network.links.push_back(NetworkLink{0, "https://googleads.g.doubleclick.net/pagead/ads?x=1", 2.0});

    const PriorKnowledgeBase kb = build_knowledge_base(screen, slot, trigger, network);
    CHECK(kb.is_ad_activity("MainActivity")); // trigger + slot evidence
    CHECK(kb.is_ad_activity("com.google.android.gms.ads.AdActivity"));
    REQUIRE(kb.methods_for("MainActivity") != nullptr);
    CHECK(kb.methods_for("MainActivity")->at(0).signature == "onCreate");
    CHECK(kb.libraries == std::vector<std::string>{"Google AdMob"});
    CHECK(kb.ad_domains == std::vector<std::string>{"googleads.g.doubleclick.net"});

    // lookups by short id, hex id, and full runtime id all hit the entry
    CHECK(kb.slot_match("adView") != nullptr);
    CHECK(kb.slot_match("0x7f090042") != nullptr);
    CHECK(kb.slot_match("com.picolina.aymane.serhani:id/adView") != nullptr);
    CHECK(kb.slot_match("com.picolina.aymane.serhani:id/list1") == nullptr);
}

TEST_CASE("empty priors build an empty knowledge base") {
    const PriorKnowledgeBase kb =
        build_knowledge_base(ScreenPrior{}, SlotPrior{}, TriggerPrior{}, NetworkPrior{});
    CHECK(kb.ad_activities.empty());
    CHECK(kb.slots.empty());
    CHECK(kb.libraries.empty());
    CHECK_FALSE(kb.is_ad_activity("Anything"));
}

TEST_CASE("knowledge base serialization round-trips") {
    const AppBundle b = load_bundle(fixture_path("bundles/dict_loop.bundle"));
    PriorKnowledgeBase kb = build_knowledge_base(extract_screen_prior(b, cfg().signatures),
                                                 extract_slot_prior(b, cfg().signatures),
                                                 extract_trigger_prior(b, cfg().signatures),
                                                 NetworkPrior{});
    kb.success_activities.insert("GooglePlayActivity");
    kb.success_activity_ads["GooglePlayActivity"] = "play_redirect";
    const PriorKnowledgeBase back = PriorKnowledgeBase::from_json(kb.to_json());
    CHECK(back.to_json() == kb.to_json());
}
