#pragma once

#include "adscout/history.hpp"
#include "adscout/memory.hpp"
#include "adscout/perception.hpp"
#include "adscout/profiler.hpp"
#include "adscout/utg.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adscout {

struct LocalMapEntry {
    int hops = 0;
    std::string id;
    long visits = 0;
    double score = 0.0;
    std::string via_event;
};

struct PromptContext {
    UiState state;
    std::vector<ActionableElement> elements;  // M_t with V_t captions attached
    std::vector<std::string> sigma_lines;     // offline-knowledge slice
    std::vector<HistoryRecord> history_window;
    std::vector<RetrievalHit> experiences;
    std::vector<LocalMapEntry> local_map;     // 2-hop neighborhood, hop order
    std::string current_node_id;
    long current_visits = 0;
    double current_score = 0.0;
    const PriorKnowledgeBase* kb = nullptr;
};

struct Decision {
    int choice = -1;               // element index; -1 when a global key was named
    std::string global_key;        // "back" / "scroll" / "restart"
    double ad_score = 0.0;         // instantaneous relevance of the current state
    std::string reasoning;
    bool used_fallback = false;

    bool is_index() const { return choice >= 0; }
};

struct RenderedPrompt {
    std::string system;
    std::string integrated; // exactly four ordered sections
};

class DecisionParseError : public std::runtime_error {
public:
    explicit DecisionParseError(const std::string& what) : std::runtime_error(what) {}
};

class EpisodeAbort : public std::runtime_error {
public:
    explicit EpisodeAbort(const std::string& what) : std::runtime_error(what) {}
};

struct DecisionQuery {
    std::string system;
    std::string user;
    const PromptContext* ctx = nullptr; // scripted backends may use the structured view
};

class DecisionBackend {
public:
    virtual ~DecisionBackend() = default;
    // Returns the raw completion text. Throws EpisodeAbort when the backend
    // is unrecoverable (transport retries exhausted, transcript drained).
    virtual std::string complete(const DecisionQuery& query) = 0;
};

PromptContext build_context(const UiState& state, const std::vector<ActionableElement>& elements,
                            const Utg& graph, const HistoryBuffer& history,
                            const ExperienceStore& store, TextEmbedder& embedder,
                            const PriorKnowledgeBase& kb, int retrieval_k);

// Deterministic text assembly; the four-slot layout is asserted on every
// render.
RenderedPrompt render_prompt(const PromptContext& ctx);

// Extracts the {reasoning, ad_score, choice} object, tolerating surrounding
// prose. Throws DecisionParseError when nothing parseable is present.
Decision parse_decision(const std::string& raw_text);

// Queries the backend, validates, reprompts once on an invalid payload and
// finally falls back to the least-visited 1-hop neighbor.
Decision decide(const RenderedPrompt& prompt, DecisionBackend& backend, const PromptContext& ctx,
                const Utg& graph);

std::string system_prompt_text();

} // namespace adscout
