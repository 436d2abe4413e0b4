#include "adscout/policy.hpp"

#include "adscout/campaign.hpp"
#include "adscout/events.hpp"
#include "adscout/prober.hpp"
#include "adscout/session.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace adscout;
using namespace adscout::test;

namespace {

struct Pipeline {
    AppBundle bundle;
    EngineConfig config;
    PriorKnowledgeBase kb;
    Utg graph;
    HashedBagEmbedder embedder{256};
    ExperienceStore store{256};
    HistoryBuffer history{5};

    explicit Pipeline(const std::string& name)
        : bundle(load_bundle(fixture_path("bundles/" + name))), config(default_config()) {
        kb = build_knowledge_base(extract_screen_prior(bundle, config.signatures),
                                  extract_slot_prior(bundle, config.signatures),
                                  extract_trigger_prior(bundle, config.signatures), NetworkPrior{});
        attach_success_ground_truth(kb, bundle);
        graph.set_initial_score(config.initial_node_score);
    }

    PromptContext context_for(const UiState& state) {
        return build_context(state, normalize_hierarchy(state), graph, history, store, embedder,
                             kb, config.retrieval_k);
    }
};

} // namespace

TEST_CASE("fresh app context: restart-only history and empty memory") {
    Pipeline p("dict_loop.bundle");
    Session s(p.bundle, 1);
    const UiState entry = s.reset();
    p.graph.record_transition("166c5c", "SystemLauncher", "RestartAppEvent()",
                              entry.state_fingerprint, entry.activity);
    p.history.push(HistoryRecord{1, "166c5c", "RestartAppEvent()", entry.state_fingerprint, false, 0.0});

    const PromptContext ctx = p.context_for(entry);
    REQUIRE(ctx.history_window.size() == 1);
    CHECK(ctx.history_window[0].action_desc == "RestartAppEvent()");
    CHECK(ctx.experiences.empty());
    CHECK(ctx.current_visits == 1);
}

TEST_CASE("sigma slice carries activity, method, component and library lines") {
    Pipeline p("dict_loop.bundle");
    Session s(p.bundle, 1);
    const UiState entry = s.reset();
    p.graph.record_transition("x", "SystemLauncher", "RestartAppEvent()", entry.state_fingerprint,
                              entry.activity);

    const PromptContext ctx = p.context_for(entry);
    REQUIRE(ctx.sigma_lines.size() == 4);
    CHECK(ctx.sigma_lines[0] ==
          "[Activity Match] Current activity 'MainActivity' is listed as ad-related.");
    CHECK(ctx.sigma_lines[1] ==
          "[Activity Match] This activity contains potential ad trigger(s) in method(s): ['onCreate'].");
    CHECK(ctx.sigma_lines[2] ==
          "[Component Match] A component with resource_id "
          "'com.picolina.aymane.serhani:id/adView' is a known ad container.");
    CHECK(ctx.sigma_lines[3] == "[General Info] App uses ad libraries: ['Google AdMob']");
}

TEST_CASE("prompt renders four ordered sections and is deterministic") {
    Pipeline p("dict_loop.bundle");
    Session s(p.bundle, 1);
    const UiState entry = s.reset();
    p.graph.record_transition("x", "SystemLauncher", "RestartAppEvent()", entry.state_fingerprint,
                              entry.activity);
    const PromptContext ctx = p.context_for(entry);

    const RenderedPrompt first = render_prompt(ctx);
    const RenderedPrompt second = render_prompt(ctx);
    CHECK(first.integrated == second.integrated);
    CHECK(first.system == second.system);

    const size_t s1 = first.integrated.find("1. Current Screen Options");
    const size_t s2 = first.integrated.find("2. Static App Knowledge");
    const size_t s3 = first.integrated.find("3. Strategic Context");
    const size_t s4 = first.integrated.find("4. Past Experiences");
    REQUIRE(s1 != std::string::npos);
    REQUIRE(s2 != std::string::npos);
    REQUIRE(s3 != std::string::npos);
    REQUIRE(s4 != std::string::npos);
    CHECK(s1 < s2);
    CHECK(s2 < s3);
    CHECK(s3 < s4);

    CHECK(first.integrated.find("- View 0: Type='ImageButton', Text='Open navigation drawer'") !=
          std::string::npos);
    CHECK(first.integrated.find("- View 1: Type='ListView', "
                                "Res-ID='com.picolina.aymane.serhani:id/list1'") != std::string::npos);
    CHECK(first.integrated.find("- View 12: Type='BackButton', Text='[BACK] Return to previous "
                                "screen'") != std::string::npos);
}

TEST_CASE("empty context still renders all four sections") {
    PromptContext ctx;
    ctx.current_node_id = "000000";
    ctx.current_score = 0.10;
    const RenderedPrompt prompt = render_prompt(ctx);
    CHECK(prompt.integrated.find("1. Current Screen Options\n- (none)") != std::string::npos);
    CHECK(prompt.integrated.find("2. Static App Knowledge\n- (none)") != std::string::npos);
    CHECK(prompt.integrated.find("(b) Recent History\n- (none)") != std::string::npos);
    CHECK(prompt.integrated.find("4. Past Experiences\n- (none)") != std::string::npos);
}

TEST_CASE("caption text renders into the option line") {
    PromptContext ctx;
    ctx.current_node_id = "aaaaaa";
    ActionableElement el;
    el.index = 0;
    el.class_or_kind = "ImageView";
    el.semantic_caption = "[AD] A button with a play icon likely for a video advertisement.";
    el.action_key = "tap:0";
    ctx.elements.push_back(el);
    const RenderedPrompt prompt = render_prompt(ctx);
    CHECK(prompt.integrated.find("- View 0: Type='ImageView', Text='[AD] A button with a play icon "
                                 "likely for a video advertisement.'") != std::string::npos);
}

TEST_CASE("parse_decision handles the appendix-style replies") {
    const std::string b3 = R"({"reasoning": "Choosing element 7, as it features a large promotional image with the text 'FREE', which is a high-confidence ad trigger indicating a potential advertisement opportunity.",
"ad_score": 0.8,
"choice": 7}")";
    const Decision d = parse_decision(b3);
    CHECK(d.choice == 7);
    CHECK(d.ad_score == doctest::Approx(0.8));
    CHECK(d.reasoning.find("Choosing element 7") == 0);

    const Decision chatty = parse_decision(
        "Sure! Here is my decision: {\"reasoning\": \"ok\", \"ad_score\": 0.1, \"choice\": 2} "
        "hope that helps");
    CHECK(chatty.choice == 2);

    const Decision braces = parse_decision(
        "{\"reasoning\": \"text with {braces} inside\", \"ad_score\": 0.2, \"choice\": 0}");
    CHECK(braces.choice == 0);
    CHECK(braces.reasoning == "text with {braces} inside");

    const Decision global = parse_decision("{\"choice\": \"back\", \"ad_score\": 0.0}");
    CHECK_FALSE(global.is_index());
    CHECK(global.global_key == "back");

    CHECK_THROWS_AS(parse_decision(""), DecisionParseError);
    CHECK_THROWS_AS(parse_decision("no json here"), DecisionParseError);
    CHECK_THROWS_AS(parse_decision("{\"other\": 1}"), DecisionParseError);
}

namespace {

// Backend that replays a fixed list of replies.
struct SeqBackend : DecisionBackend {
    std::vector<std::string> replies;
    size_t at = 0;
    std::vector<std::string> prompts;
    std::string complete(const DecisionQuery& query) override {
        prompts.push_back(query.user);
        if (at >= replies.size()) throw EpisodeAbort("drained");
        return replies[at++];
    }
};

} // namespace

TEST_CASE("decide validates, reprompts once, then falls back to the least-visited neighbor") {
    Pipeline p("dict_loop.bundle");
    Session s(p.bundle, 1);
    const UiState entry = s.reset();
    p.graph.record_transition("x", "SystemLauncher", "RestartAppEvent()", entry.state_fingerprint,
                              entry.activity);
    const PromptContext ctx = p.context_for(entry);
    const RenderedPrompt prompt = render_prompt(ctx);

    SUBCASE("valid reply passes through") {
        SeqBackend backend;
        backend.replies = {R"({"reasoning": "r", "ad_score": 0.3, "choice": 4})"};
        const Decision d = decide(prompt, backend, ctx, p.graph);
        CHECK(d.choice == 4);
        CHECK_FALSE(d.used_fallback);
    }
    SUBCASE("out-of-range choice triggers one correction reprompt") {
        SeqBackend backend;
        backend.replies = {R"({"reasoning": "r", "ad_score": 0.3, "choice": 99})",
                           R"({"reasoning": "r", "ad_score": 0.3, "choice": 1})"};
        const Decision d = decide(prompt, backend, ctx, p.graph);
        CHECK(d.choice == 1);
        REQUIRE(backend.prompts.size() == 2);
        CHECK(backend.prompts[1].find("[Correction]") != std::string::npos);
    }
    SUBCASE("ad_score out of bounds is rejected, not clamped") {
        SeqBackend backend;
        backend.replies = {R"({"reasoning": "r", "ad_score": 1.7, "choice": 0})",
                           R"({"reasoning": "r", "ad_score": 1.7, "choice": 0})"};
        const Decision d = decide(prompt, backend, ctx, p.graph);
        CHECK(d.used_fallback);
        CHECK(d.choice >= 0);
        CHECK(static_cast<size_t>(d.choice) < ctx.elements.size());
    }
    SUBCASE("backend abort propagates") {
        SeqBackend backend; // no replies at all
        CHECK_THROWS_AS(decide(prompt, backend, ctx, p.graph), EpisodeAbort);
    }
}

TEST_CASE("fallback picks the least-visited known successor") {
    Pipeline p("dict_loop.bundle");
    Session s(p.bundle, 1);
    const UiState entry = s.reset();
    const std::string entry_fp = entry.state_fingerprint;
    // drawer heavily visited, page_1 fresh
    Session probe(p.bundle, 2);
    probe.reset();
    const UiState drawer = probe.step("tap:0").next;
    probe.reset();
    probe.step("tap:2");
    const UiState page = probe.observe();

    for (int i = 0; i < 5; ++i) {
        p.graph.record_transition(entry_fp, entry.activity, canonical_event_desc(entry, "tap:0"),
                                  drawer.state_fingerprint, drawer.activity);
    }
    p.graph.record_transition(entry_fp, entry.activity, canonical_event_desc(entry, "tap:2"),
                              page.state_fingerprint, page.activity);

    const PromptContext ctx = p.context_for(entry);
    const RenderedPrompt prompt = render_prompt(ctx);
    SeqBackend backend;
    backend.replies = {"garbage", "more garbage"};
    const Decision d = decide(prompt, backend, ctx, p.graph);
    CHECK(d.used_fallback);
    // least-visited among known successors is page_1 via tap:2 (element 2);
    // unknown successors count as zero visits, so element 1 (tap:1) wins
    CHECK(d.choice == 1);
}
