#pragma once

#include "adscout/config.hpp"
#include "adscout/navigator.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace adscout {

struct CorpusApp {
    std::string path;
    int ads = 0;
};

struct CorpusManifest {
    std::vector<CorpusApp> apps;
    static CorpusManifest load(const std::string& path);
    int total_ads() const;
};

struct CampaignSpec {
    std::string corpus_manifest_path;
    std::vector<std::string> policies; // random | bfs | keyword | criterion | mana
    int runs_per_app = 5;
    std::vector<uint64_t> seeds; // one per run; filled 1..R when absent
    int probe_budget = 30;
    static CampaignSpec load(const std::string& path);
};

// Ground truth per bundle: declared triggers plus success activities that no
// trigger already covers (counted as custom redirects).
std::vector<std::pair<std::string, std::string>> ground_truth_ads(const AppBundle& bundle);

// Success-check ground truth riding on the knowledge base (never rendered).
void attach_success_ground_truth(PriorKnowledgeBase& kb, const AppBundle& bundle);

struct AdTypeStats {
    int found = 0;
    int total = 0;
};

struct PolicyCampaignResult {
    std::string policy;
    CorpusMetrics metrics;
    std::map<std::string, AdTypeStats> by_ad_type;
    std::vector<EpisodeReport> episodes;
};

struct CampaignReport {
    std::vector<PolicyCampaignResult> policies;
    nlohmann::json to_json(bool include_episodes = false) const;
    std::string to_text() const;
};

// Executes every (policy, seed) cell; cells run in parallel, apps within a
// cell sequentially in manifest order over one shared experience store.
// Reports are byte-stable for fixed seeds and scripted backends.
CampaignReport run_campaign(const CampaignSpec& spec, const EngineConfig& config, int threads = 0);

struct CoveragePolicyRow {
    std::string policy;
    double mean_coverage = 0.0;
    double escape_rate = 0.0;
};

struct CoverageStats {
    std::vector<CoveragePolicyRow> rows;
    std::map<std::string, double> sign_test_p; // baseline -> one-sided p vs criterion
    int seeds = 0;
};

// Paired Monte-Carlo over the gate family: same bundle per seed for every
// policy, criterion compared to each baseline with a sign test.
CoverageStats coverage_experiment(const std::vector<int>& loop_sizes, int n_seeds, int budget_steps,
                                  const EngineConfig& config);

// One-sided sign test: probability of >= n_plus successes in n_plus+n_minus
// fair coin flips.
double sign_test_p_value(int n_plus, int n_minus);

} // namespace adscout
