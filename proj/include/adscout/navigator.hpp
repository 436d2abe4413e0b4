#pragma once

#include "adscout/backends.hpp"
#include "adscout/config.hpp"
#include "adscout/history.hpp"
#include "adscout/memory.hpp"
#include "adscout/perception.hpp"
#include "adscout/policy.hpp"
#include "adscout/profiler.hpp"
#include "adscout/session.hpp"
#include "adscout/utg.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adscout {

enum class TerminationReason { AdBudget, StepBudget, TimeBudget, Abort };

std::string to_string(TerminationReason reason);

struct StepLog {
    int step = 0;
    std::string from_state;
    std::string action_key;
    std::string action_desc;
    std::string to_state;
    std::string to_activity;
    std::optional<std::string> ad_found;
    double s_hat = 0.0;
    std::string reasoning;
    bool fallback = false;
    double clock_seconds = 0.0;
};

struct EpisodeReport {
    std::string app_id;
    uint64_t seed = 0;
    std::set<std::string> distinct_ads;
    int steps_taken = 0;
    std::vector<int> steps_to_each_ad; // actions from the trajectory start to each find
    std::vector<StepLog> trajectory;
    TerminationReason termination_reason = TerminationReason::StepBudget;
    std::string abort_message;
    int captioner_calls = 0;
    double final_clock_seconds = 0.0;

    nlohmann::json to_json() const;
};

// Exploration policies choose among the presented elements. Baselines ignore
// most of the context; the engine policy renders it into a prompt.
class ExplorationPolicy {
public:
    virtual ~ExplorationPolicy() = default;
    virtual std::string name() const = 0;
    virtual void begin_episode(uint64_t seed) { (void)seed; }
    virtual Decision choose(const PromptContext& ctx, const Utg& graph) = 0;
};

// Deduplicating success check: exposure flags win, otherwise arriving at a
// registered success activity counts once under a synthetic id.
std::optional<std::string> detect_success(const StepOutcome& outcome, const PriorKnowledgeBase& kb,
                                          std::set<std::string>& seen_ads);

struct RecoveryResult {
    std::string action; // "back", "restart" or empty when nothing was wrong
    StepOutcome outcome;
};

RecoveryResult recover(Session& session, const StepOutcome& outcome);

struct EpisodeRuntime {
    ExplorationPolicy* policy = nullptr;
    TextEmbedder* embedder = nullptr;
    TrajectorySummarizer* summarizer = nullptr;
    VisionCaptioner* captioner = nullptr; // null: run metadata-only
    RegionDetector* detector = nullptr;   // null: heuristic-only canvas perception
    bool caption_everything = false;
    std::string episode_log_path; // line-delimited step records when set
};

// Five-phase loop: success check, recovery, perception, reasoning, state
// update. Finding an ad stores an experience and restarts the app; the
// episode ends on a budget or on backend abort (partial report).
EpisodeReport run_episode(const AppBundle& bundle, const PriorKnowledgeBase& kb, Utg& graph,
                          ExperienceStore& store, const EpisodeRuntime& runtime,
                          const EngineConfig& config, uint64_t seed);

struct CorpusMetrics {
    double detection_rate = 0.0;
    std::optional<double> average_steps;
    int distinct_found = 0;
    int total_ads = 0;
};

// Reports must come from the same corpus manifest; total_ground_truth_ads is
// that manifest's ad count.
CorpusMetrics compute_metrics(const std::vector<EpisodeReport>& reports, int total_ground_truth_ads);

} // namespace adscout
