#include "adscout/backends.hpp"

#include "adscout/events.hpp"
#include "adscout/fingerprint.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

namespace adscout {

using nlohmann::json;

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Keywords of three characters or fewer ("ad") match whole tokens only, so
// that "Read" or "Badge" do not light up.
bool keyword_hit(const std::string& haystack_lower, const std::string& keyword_lower) {
    if (keyword_lower.size() > 3) {
        return haystack_lower.find(keyword_lower) != std::string::npos;
    }
    size_t pos = 0;
    while ((pos = haystack_lower.find(keyword_lower, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack_lower[pos - 1]));
        const size_t end = pos + keyword_lower.size();
        const bool right_ok =
            end >= haystack_lower.size() || !std::isalnum(static_cast<unsigned char>(haystack_lower[end]));
        if (left_ok && right_ok) return true;
        pos = end;
    }
    return false;
}

} // namespace

std::string prompt_hash(const std::string& text) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

Transcript Transcript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read transcript '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty transcript");
    json header = json::parse(line);
    if (header.value("format", "") != "adscout-transcript") {
        throw std::runtime_error(path + ": not a transcript file");
    }
    Transcript t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json doc = json::parse(line);
        t.entries_.push_back(Entry{doc.at("type").get<std::string>(),
                                   doc.value("prompt_hash", ""),
                                   doc.at("response").get<std::string>()});
    }
    return t;
}

Transcript Transcript::from_entries(std::vector<Entry> entries) {
    Transcript t;
    t.entries_ = std::move(entries);
    return t;
}

void Transcript::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write transcript '" + path + "'");
    out << json{{"format", "adscout-transcript"}, {"version", 1}}.dump() << "\n";
    for (const auto& e : entries_) {
        json doc{{"type", e.type}, {"response", e.response}};
        if (!e.prompt_hash.empty()) doc["prompt_hash"] = e.prompt_hash;
        out << doc.dump() << "\n";
    }
}

const Transcript::Entry& Transcript::next(const std::string& type) {
    while (cursor_ < entries_.size()) {
        const Entry& e = entries_[cursor_++];
        if (e.type == type) return e;
    }
    throw EpisodeAbort("transcript drained while looking for a '" + type + "' entry");
}

std::string ReplayBackend::complete(const DecisionQuery& query) {
    const Transcript::Entry& entry = transcript_->next("decision");
    if (strict_ && !entry.prompt_hash.empty() && entry.prompt_hash != prompt_hash(query.user)) {
        throw EpisodeAbort("replay prompt diverged from the recorded run");
    }
    return entry.response;
}

std::string RecordingBackend::complete(const DecisionQuery& query) {
    const std::string response = inner_->complete(query);
    transcript_->append(Transcript::Entry{"decision", prompt_hash(query.user), response});
    return response;
}

double element_semantic_evidence(const ActionableElement& element, const EngineConfig& config,
                                 const PriorKnowledgeBase* kb) {
    double evidence = 0.05;
    if (element.semantic_caption) {
        for (const auto& [tag, score] : config.caption_score_map) {
            if (element.semantic_caption->rfind("[" + tag + "]", 0) == 0) {
                evidence = std::max(evidence, score);
            }
        }
    }
    const std::string haystack =
        lowercase(element.text.value_or("") + "|" + element.resource_id.value_or("") + "|" +
                  element.class_or_kind);
    for (const auto& kw : config.ui_ad_keywords) {
        if (keyword_hit(haystack, lowercase(kw))) {
            evidence = std::max(evidence, 0.8);
            break;
        }
    }
    if (kb && element.resource_id && kb->slot_match(*element.resource_id)) {
        evidence = std::max(evidence, 0.85);
    }
    return evidence;
}

std::string KeywordScorerBackend::complete(const DecisionQuery& query) {
    if (!query.ctx) throw EpisodeAbort("scripted oracle requires the structured context");
    const PromptContext& ctx = *query.ctx;
    if (ctx.elements.empty()) throw EpisodeAbort("no options to score");

    int best_index = 0;
    double best_value = -1e9;
    double best_evidence = 0.0;
    double screen_evidence = 0.0;
    for (const auto& el : ctx.elements) {
        double evidence = element_semantic_evidence(el, *config_, ctx.kb);
        if (el.global_action) evidence = 0.02;
        screen_evidence = std::max(screen_evidence, el.global_action ? 0.0 : evidence);

        const std::string event = canonical_event_desc(ctx.state, el.action_key);
        const auto succ = graph_->successor(ctx.current_node_id, event);
        const long visits = succ && graph_->has_node(*succ) ? graph_->node(*succ).visits : 0;
        const double value = evidence - config_->lambda * static_cast<double>(visits);
        if (value > best_value) {
            best_value = value;
            best_index = el.index;
            best_evidence = evidence;
        }
    }

    char score[16];
    std::snprintf(score, sizeof(score), "%.2f", std::min(1.0, std::max(0.0, screen_evidence)));
    json reply{{"reasoning", "Choosing element " + std::to_string(best_index) +
                                 ", scored " + std::to_string(best_evidence).substr(0, 4) +
                                 " from keywords, captions and offline knowledge."},
               {"ad_score", json::parse(score)},
               {"choice", best_index}};
    return reply.dump();
}

std::string summarizer_prompt(const std::vector<TrajectoryStep>& trajectory) {
    std::string out =
        "You are an expert Android app tester specializing in identifying ad-triggering "
        "patterns. Your task is to distill the interaction steps below into one reusable "
        "heuristic sentence.\n";
    int step = 1;
    for (const auto& s : trajectory) {
        out += "Step " + std::to_string(step++) + ": Touched a '" + s.widget_class +
               "' with text/desc: '" + s.widget_text + "'.\n";
    }
    return out;
}

std::string ReplaySummarizer::summarize(const std::vector<TrajectoryStep>& trajectory,
                                        const std::string&) {
    (void)trajectory;
    return transcript_->next("summary").response;
}

} // namespace adscout
