#pragma once

#include "adscout/config.hpp"
#include "adscout/memory.hpp"
#include "adscout/policy.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace adscout {

// Line-delimited record/replay log shared by decision and summarizer
// backends. Entries are consumed in order; prompts are hash-checked so a
// replay cannot silently drift from the recorded run.
class Transcript {
public:
    struct Entry {
        std::string type; // "decision" | "summary"
        std::string prompt_hash;
        std::string response;
    };

    static Transcript load(const std::string& path);
    static Transcript from_entries(std::vector<Entry> entries);
    void save(const std::string& path) const;
    void append(const Entry& entry) { entries_.push_back(entry); }

    // Next entry of the given type; throws EpisodeAbort when drained.
    const Entry& next(const std::string& type);
    void rewind() { cursor_ = 0; }
    size_t remaining() const { return entries_.size() - cursor_; }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
    size_t cursor_ = 0;
};

std::string prompt_hash(const std::string& text);

class ReplayBackend : public DecisionBackend {
public:
    explicit ReplayBackend(Transcript& transcript, bool strict = true)
        : transcript_(&transcript), strict_(strict) {}
    std::string complete(const DecisionQuery& query) override;

private:
    Transcript* transcript_;
    bool strict_;
};

// Wraps another backend and records every exchange for later replay.
class RecordingBackend : public DecisionBackend {
public:
    RecordingBackend(DecisionBackend& inner, Transcript& transcript)
        : inner_(&inner), transcript_(&transcript) {}
    std::string complete(const DecisionQuery& query) override;

private:
    DecisionBackend* inner_;
    Transcript* transcript_;
};

// Deterministic oracle: scores the presented options from ad keywords,
// caption tags, offline slot matches and the visit counts of known
// successors, then replies in the same JSON shape a chat model would use.
class KeywordScorerBackend : public DecisionBackend {
public:
    KeywordScorerBackend(const EngineConfig& config, const Utg& graph)
        : config_(&config), graph_(&graph) {}
    std::string complete(const DecisionQuery& query) override;

private:
    const EngineConfig* config_;
    const Utg* graph_;
};

class ReplaySummarizer : public TrajectorySummarizer {
public:
    explicit ReplaySummarizer(Transcript& transcript) : transcript_(&transcript) {}
    std::string summarize(const std::vector<TrajectoryStep>& trajectory,
                          const std::string& ad_type) override;

private:
    Transcript* transcript_;
};

// Scoring shared with the criterion policy: strongest evidence wins.
double element_semantic_evidence(const ActionableElement& element, const EngineConfig& config,
                                 const PriorKnowledgeBase* kb);

std::string summarizer_prompt(const std::vector<TrajectoryStep>& trajectory);

} // namespace adscout
