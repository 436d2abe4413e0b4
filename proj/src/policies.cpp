#include "adscout/policies.hpp"

#include "adscout/events.hpp"

#include <algorithm>
#include <cctype>

namespace adscout {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

int keyword_hits(const ActionableElement& el, const std::vector<std::string>& keywords) {
    const std::string haystack = lowercase(el.text.value_or("") + "|" + el.resource_id.value_or("") +
                                           "|" + el.class_or_kind);
    int hits = 0;
    for (const auto& kw : keywords) {
        const std::string needle = lowercase(kw);
        if (needle.size() <= 3) {
            // short keywords ("ad") must match whole tokens
            size_t pos = 0;
            bool found = false;
            while ((pos = haystack.find(needle, pos)) != std::string::npos) {
                const bool left =
                    pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
                const size_t end = pos + needle.size();
                const bool right = end >= haystack.size() ||
                                   !std::isalnum(static_cast<unsigned char>(haystack[end]));
                if (left && right) {
                    found = true;
                    break;
                }
                pos = end;
            }
            hits += found ? 1 : 0;
        } else if (haystack.find(needle) != std::string::npos) {
            ++hits;
        }
    }
    return hits;
}

long successor_visits(const ActionableElement& el, const Utg& graph, const std::string& current,
                      const UiState& state, bool& known) {
    const std::string event = canonical_event_desc(state, el.action_key);
    const auto succ = graph.successor(current, event);
    if (succ && graph.has_node(*succ)) {
        known = true;
        return graph.node(*succ).visits;
    }
    known = false;
    return 0;
}

} // namespace

Decision RandomPolicy::choose(const PromptContext& ctx, const Utg&) {
    if (ctx.elements.empty()) throw EpisodeAbort("no actionable elements");
    Decision d;
    d.choice = static_cast<int>(rng_.pick(ctx.elements.size()));
    d.ad_score = 0.0;
    d.reasoning = "random";
    return d;
}

Decision BfsPolicy::choose(const PromptContext& ctx, const Utg& graph) {
    if (ctx.elements.empty()) throw EpisodeAbort("no actionable elements");
    int best = -1;
    long best_visits = 0;
    for (const auto& el : ctx.elements) {
        bool known = false;
        const long visits = successor_visits(el, graph, ctx.current_node_id, ctx.state, known);
        if (!known) {
            best = el.index;
            break; // first unknown wins
        }
        if (best < 0 || visits < best_visits) {
            best = el.index;
            best_visits = visits;
        }
    }
    Decision d;
    d.choice = best;
    d.ad_score = 0.0;
    d.reasoning = "bfs";
    return d;
}

Decision KeywordPolicy::choose(const PromptContext& ctx, const Utg& graph) {
    if (ctx.elements.empty()) throw EpisodeAbort("no actionable elements");
    int best = -1;
    int best_hits = 0;
    for (const auto& el : ctx.elements) {
        const int hits = keyword_hits(el, config_->ui_ad_keywords);
        if (hits > best_hits) {
            best_hits = hits;
            best = el.index;
        }
    }
    if (best < 0) return fallback_.choose(ctx, graph);
    Decision d;
    d.choice = best;
    d.ad_score = 0.0;
    d.reasoning = "keyword";
    return d;
}

double criterion_step_value(const ActionableElement& element, double r_sem, const Utg& graph,
                            const std::string& current_node, const UiState& state, double lambda) {
    if (r_sem < 0.0 || r_sem > 1.0) throw std::invalid_argument("r_sem outside [0,1]");
    bool known = false;
    const long visits = successor_visits(element, graph, current_node, state, known);
    return r_sem - lambda * static_cast<double>(known ? visits : 0);
}

double CriterionPolicy::r_sem(const ActionableElement& element) const {
    if (config_.source == RSemSource::Scripted) {
        auto it = config_.scripted_table.find(element.text.value_or(""));
        return it == config_.scripted_table.end() ? config_.scripted_default : it->second;
    }
    if (element.semantic_caption) {
        for (const auto& [tag, score] : config_.caption_score_map) {
            if (element.semantic_caption->rfind("[" + tag + "]", 0) == 0) return score;
        }
    }
    return config_.scripted_default;
}

Decision CriterionPolicy::choose(const PromptContext& ctx, const Utg& graph) {
    if (ctx.elements.empty()) throw EpisodeAbort("no actionable elements");
    int best = 0;
    double best_value = -1e18;
    double best_sem = 0.0;
    for (const auto& el : ctx.elements) {
        const double sem = r_sem(el);
        const double value =
            criterion_step_value(el, sem, graph, ctx.current_node_id, ctx.state, config_.lambda);
        if (value > best_value) {
            best_value = value;
            best = el.index;
            best_sem = sem;
        }
    }
    Decision d;
    d.choice = best;
    d.ad_score = std::clamp(best_sem, 0.0, 1.0);
    d.reasoning = "criterion";
    return d;
}

Decision EnginePolicy::choose(const PromptContext& ctx, const Utg& graph) {
    last_prompt_ = render_prompt(ctx);
    return decide(last_prompt_, *backend_, ctx, graph);
}

} // namespace adscout
