#pragma once

#include "adscout/config.hpp"
#include "adscout/navigator.hpp"
#include "adscout/policy.hpp"
#include "adscout/rng.hpp"

#include <map>
#include <memory>
#include <string>

namespace adscout {

// Monkey-style: uniform over the presented options.
class RandomPolicy : public ExplorationPolicy {
public:
    std::string name() const override { return "random"; }
    void begin_episode(uint64_t seed) override { rng_ = Rng(seed ^ 0x52414e44ULL); }
    Decision choose(const PromptContext& ctx, const Utg& graph) override;

private:
    Rng rng_{0};
};

// DroidBot-style breadth-first: actions with unknown successors first (ties
// by index), otherwise the action whose known successor is least visited.
class BfsPolicy : public ExplorationPolicy {
public:
    std::string name() const override { return "bfs"; }
    Decision choose(const PromptContext& ctx, const Utg& graph) override;
};

// Keyword prioritization over text / resource-id / class; no hit anywhere
// falls back to the random policy.
class KeywordPolicy : public ExplorationPolicy {
public:
    explicit KeywordPolicy(const EngineConfig& config) : config_(&config) {}
    std::string name() const override { return "keyword"; }
    void begin_episode(uint64_t seed) override { fallback_.begin_episode(seed); }
    Decision choose(const PromptContext& ctx, const Utg& graph) override;

private:
    const EngineConfig* config_;
    RandomPolicy fallback_;
};

enum class RSemSource { Scripted, CaptionDerived };

struct CriterionConfig {
    double lambda = 0.1;
    RSemSource source = RSemSource::CaptionDerived;
    std::map<std::string, double> scripted_table; // element text -> semantic gain
    double scripted_default = 0.1;
    std::map<std::string, double> caption_score_map{{"AD", 0.9}, {"POTENTIAL_AD", 0.6}, {"UI_ELEMENT", 0.1}};
};

// r_sem - lambda * visits(successor), with unknown successors unpenalized.
double criterion_step_value(const ActionableElement& element, double r_sem, const Utg& graph,
                            const std::string& current_node, const UiState& state, double lambda);

// Greedy argmax of the per-step criterion; ties resolve to the lower index,
// so uninformative semantics with lambda=0 degenerate to index order.
class CriterionPolicy : public ExplorationPolicy {
public:
    explicit CriterionPolicy(CriterionConfig config) : config_(std::move(config)) {
        if (config_.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    }
    std::string name() const override { return "criterion"; }
    Decision choose(const PromptContext& ctx, const Utg& graph) override;

    double r_sem(const ActionableElement& element) const;

private:
    CriterionConfig config_;
};

// Full pipeline policy: renders the structured prompt and routes it through
// a decision backend.
class EnginePolicy : public ExplorationPolicy {
public:
    EnginePolicy(std::string name, DecisionBackend& backend)
        : name_(std::move(name)), backend_(&backend) {}
    std::string name() const override { return name_; }
    Decision choose(const PromptContext& ctx, const Utg& graph) override;

    const RenderedPrompt& last_prompt() const { return last_prompt_; }

private:
    std::string name_;
    DecisionBackend* backend_;
    RenderedPrompt last_prompt_;
};

} // namespace adscout
