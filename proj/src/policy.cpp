#include "adscout/policy.hpp"

#include "adscout/events.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>

namespace adscout {

using nlohmann::json;

namespace {

std::string fmt_score(double score) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", score);
    return buf;
}

std::string quoted_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += "'" + items[i] + "'";
    }
    return out + "]";
}

} // namespace

std::string system_prompt_text() {
    return "You are an agent designed to explore mobile apps and expose the screens and "
           "interactions that display advertisements. At every step you receive the current "
           "screen options, static app knowledge, strategic context (a local map of reachable "
           "states plus your recent history) and past experiences from similar apps. Prefer "
           "elements that plausibly lead to promotional content, avoid repeating interactions "
           "on heavily visited states, and use the past experiences as heuristics. Reply with "
           "exactly one JSON object: {\"reasoning\": <one sentence>, \"ad_score\": <relevance "
           "of the current screen to advertising, in [0,1]>, \"choice\": <index of one listed "
           "option>}.";
}

PromptContext build_context(const UiState& state, const std::vector<ActionableElement>& elements,
                            const Utg& graph, const HistoryBuffer& history,
                            const ExperienceStore& store, TextEmbedder& embedder,
                            const PriorKnowledgeBase& kb, int retrieval_k) {
    PromptContext ctx;
    ctx.state = state;
    ctx.elements = elements;
    ctx.kb = &kb;

    // Offline-knowledge slice: activity-level, component-level, then global.
    if (kb.is_ad_activity(state.activity)) {
        ctx.sigma_lines.push_back("[Activity Match] Current activity '" + state.activity +
                                  "' is listed as ad-related.");
    }
    if (const auto* methods = kb.methods_for(state.activity); methods && !methods->empty()) {
        std::vector<std::string> names;
        for (const auto& m : *methods) names.push_back(m.signature);
        ctx.sigma_lines.push_back("[Activity Match] This activity contains potential ad trigger(s) "
                                  "in method(s): " +
                                  quoted_list(names) + ".");
    }
    std::set<std::string> seen_rids;
    for (const auto& w : state.widgets) {
        if (!w.resource_id) continue;
        if (const SlotEntry* slot = kb.slot_match(*w.resource_id)) {
            (void)slot;
            if (seen_rids.insert(*w.resource_id).second) {
                ctx.sigma_lines.push_back("[Component Match] A component with resource_id '" +
                                          *w.resource_id + "' is a known ad container.");
            }
        }
    }
    if (!kb.libraries.empty()) {
        ctx.sigma_lines.push_back("[General Info] App uses ad libraries: " + quoted_list(kb.libraries));
    }
    if (!kb.ad_domains.empty()) {
        ctx.sigma_lines.push_back("[General Info] Observed ad-related domains: " +
                                  quoted_list(kb.ad_domains));
    }

    ctx.history_window = history.window();

    if (store.size() > 0) {
        for (const auto& hit : store.retrieve_state(state, embedder, static_cast<size_t>(retrieval_k))) {
            ctx.experiences.push_back(hit);
        }
    }

    ctx.current_node_id = state.state_fingerprint;
    if (graph.has_node(ctx.current_node_id)) {
        const UtgNode& node = graph.node(ctx.current_node_id);
        ctx.current_visits = node.visits;
        ctx.current_score = node.score;
        for (const auto& entry : graph.neighborhood(ctx.current_node_id, 2)) {
            if (entry.hops == 0) continue;
            ctx.local_map.push_back(LocalMapEntry{entry.hops, entry.node->id, entry.node->visits,
                                                  entry.node->score, entry.via_event});
        }
    } else {
        ctx.current_score = graph.initial_score();
    }
    return ctx;
}

RenderedPrompt render_prompt(const PromptContext& ctx) {
    std::string out;

    out += "1. Current Screen Options\n";
    for (const auto& el : ctx.elements) {
        if (el.source == ElementSource::Region && !el.global_action) {
            out += "- View " + std::to_string(el.index) + ", Text='" +
                   el.semantic_caption.value_or(el.text.value_or("N/A")) + "'\n";
            continue;
        }
        out += "- View " + std::to_string(el.index) + ": Type='" + el.class_or_kind + "'";
        if (el.semantic_caption) {
            out += ", Text='" + *el.semantic_caption + "'";
        } else if (el.text && !el.text->empty()) {
            out += ", Text='" + *el.text + "'";
        } else if (el.resource_id && !el.resource_id->empty()) {
            out += ", Res-ID='" + *el.resource_id + "'";
        } else {
            out += ", Text='N/A'";
        }
        out += "\n";
    }
    if (ctx.elements.empty()) out += "- (none)\n";

    out += "2. Static App Knowledge\n";
    if (ctx.sigma_lines.empty()) {
        out += "- (none)\n";
    } else {
        for (const auto& line : ctx.sigma_lines) out += line + "\n";
    }

    out += "3. Strategic Context\n";
    out += "(a) Annotated Local Map (from UTG, 2-hop neighborhood)\n";
    out += "Current State[" + ctx.current_node_id + "] (visited: " +
           std::to_string(ctx.current_visits) + " times), ad_score: " + fmt_score(ctx.current_score) +
           "\n";
    for (int hop = 1; hop <= 2; ++hop) {
        out += "**Reachable in " + std::to_string(hop) + "-hop(s):**\n";
        bool any = false;
        for (const auto& entry : ctx.local_map) {
            if (entry.hops != hop) continue;
            any = true;
            out += "- State: [" + entry.id + "], event: '" + entry.via_event +
                   "', ad_score: " + fmt_score(entry.score) + " (visited: " +
                   std::to_string(entry.visits) + " times)\n";
        }
        if (!any) out += "- (none)\n";
    }
    out += "(b) Recent History\n";
    if (ctx.history_window.empty()) {
        out += "- (none)\n";
    } else {
        for (const auto& rec : ctx.history_window) {
            out += "- Step " + std::to_string(rec.step_index) + " [" + rec.obs_digest + "] -> [" +
                   rec.next_digest + "] " + rec.action_desc + "\n";
        }
    }

    out += "4. Past Experiences\n";
    if (ctx.experiences.empty()) {
        out += "- (none)\n";
    } else {
        for (const auto& hit : ctx.experiences) {
            out += "- " + hit.experience.summary + "\n";
        }
    }

    RenderedPrompt prompt{system_prompt_text(), out};

    // Four-slot layout is a hard invariant of the rendered text.
    const char* sections[] = {"1. Current Screen Options", "2. Static App Knowledge",
                              "3. Strategic Context", "4. Past Experiences"};
    size_t at = 0;
    for (const char* section : sections) {
        const size_t pos = prompt.integrated.find(section, at);
        if (pos == std::string::npos) throw std::logic_error("prompt section missing");
        at = pos;
    }
    return prompt;
}

Decision parse_decision(const std::string& raw_text) {
    for (size_t start = raw_text.find('{'); start != std::string::npos;
         start = raw_text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < raw_text.size(); ++i) {
            const char c = raw_text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                --depth;
                if (depth == 0) {
                    json doc = json::parse(raw_text.substr(start, i - start + 1), nullptr, false);
                    if (doc.is_discarded() || !doc.is_object() || !doc.contains("choice")) break;
                    Decision d;
                    const json& choice = doc.at("choice");
                    if (choice.is_number_integer()) {
                        d.choice = choice.get<int>();
                    } else if (choice.is_string()) {
                        const std::string s = choice.get<std::string>();
                        if (s == "back" || s == "scroll" || s == "restart") {
                            d.global_key = s;
                        } else {
                            try {
                                d.choice = std::stoi(s);
                            } catch (const std::exception&) {
                                throw DecisionParseError("non-numeric choice '" + s + "'");
                            }
                        }
                    } else {
                        throw DecisionParseError("choice has unsupported type");
                    }
                    if (doc.contains("ad_score")) d.ad_score = doc.at("ad_score").get<double>();
                    if (doc.contains("reasoning") && doc.at("reasoning").is_string()) {
                        d.reasoning = doc.at("reasoning").get<std::string>();
                    }
                    return d;
                }
            }
        }
    }
    throw DecisionParseError("no decision object found in reply");
}

namespace {

std::optional<std::string> validate_decision(const Decision& d, size_t option_count) {
    if (d.ad_score < 0.0 || d.ad_score > 1.0) {
        return "ad_score " + std::to_string(d.ad_score) + " outside [0,1]";
    }
    if (d.is_index()) {
        if (static_cast<size_t>(d.choice) >= option_count) {
            return "choice " + std::to_string(d.choice) + " outside the presented 0.." +
                   std::to_string(option_count ? option_count - 1 : 0) + " range";
        }
    } else if (d.global_key.empty()) {
        return std::string("no actionable choice");
    }
    return std::nullopt;
}

Decision fallback_decision(const PromptContext& ctx, const Utg& graph) {
    Decision d;
    d.used_fallback = true;
    d.ad_score = ctx.current_score;
    d.reasoning = "Fallback: choosing the least-visited neighbor.";
    long best_visits = -1;
    int best_index = 0;
    for (const auto& el : ctx.elements) {
        const std::string event = canonical_event_desc(ctx.state, el.action_key);
        const auto succ = graph.successor(ctx.current_node_id, event);
        const long visits = succ && graph.has_node(*succ) ? graph.node(*succ).visits : 0;
        if (best_visits < 0 || visits < best_visits) {
            best_visits = visits;
            best_index = el.index;
        }
    }
    d.choice = best_index;
    return d;
}

} // namespace

Decision decide(const RenderedPrompt& prompt, DecisionBackend& backend, const PromptContext& ctx,
                const Utg& graph) {
    DecisionQuery query{prompt.system, prompt.integrated, &ctx};
    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string reply = backend.complete(query); // EpisodeAbort propagates
        try {
            Decision d = parse_decision(reply);
            if (auto why = validate_decision(d, ctx.elements.size())) {
                problem = *why;
            } else {
                return d;
            }
        } catch (const DecisionParseError& e) {
            problem = e.what();
        }
        query.user = prompt.integrated +
                     "\n\n[Correction] Your previous reply was invalid (" + problem +
                     "). Reply with exactly one JSON object {\"reasoning\": string, \"ad_score\": "
                     "number in [0,1], \"choice\": integer index of one presented option}.";
    }
    return fallback_decision(ctx, graph);
}

} // namespace adscout
