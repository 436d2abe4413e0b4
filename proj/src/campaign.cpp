#include "adscout/campaign.hpp"

#include "adscout/backends.hpp"
#include "adscout/fingerprint.hpp"
#include "adscout/loopfamily.hpp"
#include "adscout/policies.hpp"
#include "adscout/prober.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

namespace adscout {

using nlohmann::json;

CorpusManifest CorpusManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read corpus manifest '" + path + "'");
    json doc = json::parse(in);
    CorpusManifest manifest;
    std::string base;
    const size_t slash = path.rfind('/');
    if (slash != std::string::npos) base = path.substr(0, slash + 1);
    for (const auto& app : doc.at("bundles")) {
        CorpusApp entry;
        entry.path = app.at("path").get<std::string>();
        if (!entry.path.empty() && entry.path.front() != '/') entry.path = base + entry.path;
        entry.ads = app.at("ads").get<int>();
        manifest.apps.push_back(std::move(entry));
    }
    if (manifest.apps.empty()) throw std::runtime_error(path + ": empty corpus");
    return manifest;
}

int CorpusManifest::total_ads() const {
    int total = 0;
    for (const auto& app : apps) total += app.ads;
    return total;
}

CampaignSpec CampaignSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read campaign spec '" + path + "'");
    json doc = json::parse(in);
    CampaignSpec spec;
    spec.corpus_manifest_path = doc.at("corpus").get<std::string>();
    if (!spec.corpus_manifest_path.empty() && spec.corpus_manifest_path.front() != '/') {
        const size_t slash = path.rfind('/');
        if (slash != std::string::npos) {
            spec.corpus_manifest_path = path.substr(0, slash + 1) + spec.corpus_manifest_path;
        }
    }
    for (const auto& p : doc.at("policies")) spec.policies.push_back(p.get<std::string>());
    spec.runs_per_app = doc.value("runs_per_app", 5);
    if (spec.runs_per_app < 1) throw std::runtime_error("runs_per_app must be >= 1");
    if (doc.contains("seeds")) {
        for (const auto& s : doc.at("seeds")) spec.seeds.push_back(s.get<uint64_t>());
    }
    spec.probe_budget = doc.value("probe_budget", 30);
    return spec;
}

std::vector<std::pair<std::string, std::string>> ground_truth_ads(const AppBundle& bundle) {
    std::vector<std::pair<std::string, std::string>> ads;
    std::set<std::string> trigger_activities;
    for (const auto& trig : bundle.behavior.ad_triggers) {
        ads.emplace_back(trig.ad_id, trig.ad_type);
        trigger_activities.insert(bundle.screen(trig.host_state).activity);
    }
    for (const auto& activity : bundle.manifest.registered_success_activities) {
        if (!trigger_activities.count(activity)) {
            ads.emplace_back("activity:" + activity, "custom");
        }
    }
    return ads;
}

void attach_success_ground_truth(PriorKnowledgeBase& kb, const AppBundle& bundle) {
    for (const auto& activity : bundle.manifest.registered_success_activities) {
        kb.success_activities.insert(activity);
        // Arrivals at the activity resolve to the hosted trigger when there
        // is exactly one, so exposure and activity detection dedup together.
        std::string mapped = "activity:" + activity;
        int hosted = 0;
        for (const auto& trig : bundle.behavior.ad_triggers) {
            if (bundle.screen(trig.host_state).activity == activity) {
                mapped = trig.ad_id;
                ++hosted;
            }
        }
        if (hosted <= 1) kb.success_activity_ads[activity] = mapped;
    }
}

namespace {

struct CellRequest {
    size_t policy_index = 0;
    std::string policy;
    uint64_t seed = 0;
};

std::vector<EpisodeReport> run_cell(const CellRequest& cell, const CorpusManifest& manifest,
                                    const CampaignSpec& spec, const EngineConfig& config) {
    std::vector<EpisodeReport> reports;
    HashedBagEmbedder embedder(256);
    TemplateSummarizer summarizer;
    ExperienceStore store(embedder.dimension());

    for (const auto& app : manifest.apps) {
        const AppBundle bundle = load_bundle(app.path);
        const uint64_t seed = cell.seed ^ fnv1a64(bundle.app_id);

        const ScreenPrior screen = extract_screen_prior(bundle, config.signatures);
        const SlotPrior slot = extract_slot_prior(bundle, config.signatures);
        const TriggerPrior trigger = extract_trigger_prior(bundle, config.signatures);

        auto [coarse, trace] =
            random_probe(bundle, spec.probe_budget, seed, config.limits.event_interval_seconds);
        const auto traffic = extract_ad_traffic(trace.syslog, config.ad_domains, config.traffic_keywords);
        const NetworkPrior network =
            correlate(trace.events, traffic, config.correlation_delta_seconds);

        PriorKnowledgeBase kb = build_knowledge_base(screen, slot, trigger, network);
        attach_success_ground_truth(kb, bundle);

        Utg graph;
        graph.set_initial_score(config.initial_node_score);
        graph.merge(coarse, MergeMode::StructureOnly);

        EpisodeRuntime runtime;
        runtime.embedder = &embedder;
        runtime.summarizer = &summarizer;

        RandomPolicy random_policy;
        BfsPolicy bfs_policy;
        KeywordPolicy keyword_policy(config);
        CriterionConfig crit_cfg;
        crit_cfg.lambda = config.lambda;
        crit_cfg.source = RSemSource::CaptionDerived;
        crit_cfg.caption_score_map = {{"AD", 0.9}, {"POTENTIAL_AD", 0.6}, {"UI_ELEMENT", 0.1}};
        CriterionPolicy criterion_policy(crit_cfg);
        KeywordScorerBackend oracle(config, graph);
        EnginePolicy mana_policy("mana", oracle);

        ScriptedCaptioner captioner;
        SimulatedDeepDetector detector(config.detector);

        if (cell.policy == "random") {
            runtime.policy = &random_policy;
        } else if (cell.policy == "bfs") {
            runtime.policy = &bfs_policy;
        } else if (cell.policy == "keyword") {
            runtime.policy = &keyword_policy;
        } else if (cell.policy == "criterion") {
            runtime.policy = &criterion_policy;
            runtime.captioner = &captioner;
            runtime.detector = &detector;
        } else if (cell.policy == "mana") {
            runtime.policy = &mana_policy;
            runtime.captioner = &captioner;
            runtime.detector = &detector;
        } else {
            throw std::runtime_error("unknown policy '" + cell.policy + "'");
        }

        reports.push_back(run_episode(bundle, kb, graph, store, runtime, config, seed));
    }
    return reports;
}

} // namespace

json CampaignReport::to_json(bool include_episodes) const {
    json rows = json::array();
    for (const auto& p : policies) {
        json by_type = json::object();
        for (const auto& [type, stats] : p.by_ad_type) {
            by_type[type] = json{{"found", stats.found}, {"total", stats.total}};
        }
        json row{{"policy", p.policy},
                 {"detection_rate", p.metrics.detection_rate},
                 {"distinct_found", p.metrics.distinct_found},
                 {"total_ads", p.metrics.total_ads},
                 {"by_ad_type", by_type}};
        if (p.metrics.average_steps) row["average_steps"] = *p.metrics.average_steps;
        if (include_episodes) {
            json episodes = json::array();
            for (const auto& e : p.episodes) episodes.push_back(e.to_json());
            row["episodes"] = std::move(episodes);
        }
        rows.push_back(std::move(row));
    }
    return json{{"format", "adscout-campaign-report"}, {"version", 1}, {"policies", rows}};
}

std::string CampaignReport::to_text() const {
    char line[160];
    std::string out;
    out += "policy      detection    avg-steps   found/total   by-type\n";
    for (const auto& p : policies) {
        std::string by_type;
        for (const auto& [type, stats] : p.by_ad_type) {
            by_type += type + " " + std::to_string(stats.found) + "/" + std::to_string(stats.total) + "  ";
        }
        std::snprintf(line, sizeof(line), "%-10s  %8.3f     %8s    %3d/%-3d      %s\n",
                      p.policy.c_str(), p.metrics.detection_rate,
                      p.metrics.average_steps
                          ? ([](double v) {
                                static char buf[16];
                                std::snprintf(buf, sizeof(buf), "%.2f", v);
                                return std::string(buf);
                            })(*p.metrics.average_steps).c_str()
                          : "n/a",
                      p.metrics.distinct_found, p.metrics.total_ads, by_type.c_str());
        out += line;
    }
    return out;
}

CampaignReport run_campaign(const CampaignSpec& spec, const EngineConfig& config, int threads) {
    if (spec.policies.empty()) throw std::invalid_argument("campaign needs at least one policy");
    const CorpusManifest manifest = CorpusManifest::load(spec.corpus_manifest_path);

    std::vector<uint64_t> seeds = spec.seeds;
    if (seeds.empty()) {
        for (int i = 1; i <= spec.runs_per_app; ++i) seeds.push_back(static_cast<uint64_t>(i));
    }

    std::vector<CellRequest> cells;
    for (size_t pi = 0; pi < spec.policies.size(); ++pi) {
        for (uint64_t seed : seeds) {
            cells.push_back(CellRequest{pi, spec.policies[pi], seed});
        }
    }

    std::vector<std::vector<EpisodeReport>> results(cells.size());
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                results[i] = run_cell(cells[i], manifest, spec, config);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    // Ground-truth ad types per corpus app.
    std::map<std::string, std::string> type_of; // app_id|ad_id -> type
    std::map<std::string, int> type_totals;
    std::map<std::string, std::string> app_of_path;
    for (const auto& app : manifest.apps) {
        const AppBundle bundle = load_bundle(app.path);
        for (const auto& [ad, type] : ground_truth_ads(bundle)) {
            type_of[bundle.app_id + "|" + ad] = type;
            type_totals[type] += 1;
        }
    }

    CampaignReport report;
    for (size_t pi = 0; pi < spec.policies.size(); ++pi) {
        PolicyCampaignResult row;
        row.policy = spec.policies[pi];
        for (size_t ci = 0; ci < cells.size(); ++ci) {
            if (cells[ci].policy_index != pi) continue;
            for (auto& episode : results[ci]) row.episodes.push_back(episode);
        }
        row.metrics = compute_metrics(row.episodes, manifest.total_ads());
        for (auto& [type, total] : type_totals) row.by_ad_type[type].total = total;
        std::set<std::string> counted;
        for (const auto& e : row.episodes) {
            for (const auto& ad : e.distinct_ads) {
                const std::string key = e.app_id + "|" + ad;
                if (!counted.insert(key).second) continue;
                auto it = type_of.find(key);
                if (it != type_of.end()) row.by_ad_type[it->second].found += 1;
            }
        }
        report.policies.push_back(std::move(row));
    }
    return report;
}

double sign_test_p_value(int n_plus, int n_minus) {
    const int n = n_plus + n_minus;
    if (n == 0) return 1.0;
    // sum_{k=n_plus}^{n} C(n,k) / 2^n via log-gamma
    double p = 0.0;
    for (int k = n_plus; k <= n; ++k) {
        const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        p += std::exp(log_c - n * std::log(2.0));
    }
    return std::min(1.0, p);
}

CoverageStats coverage_experiment(const std::vector<int>& loop_sizes, int n_seeds, int budget_steps,
                                  const EngineConfig& config) {
    if (loop_sizes.empty()) throw std::invalid_argument("no loop sizes given");
    for (int m : loop_sizes) {
        if (m < 2) throw std::invalid_argument("degenerate family: loop size below 2");
    }
    if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");

    EngineConfig run_cfg = config;
    run_cfg.limits.max_steps = budget_steps;
    run_cfg.limits.max_seconds = 1e9; // step budget governs this experiment

    const std::vector<std::string> policy_names = {"criterion", "random", "bfs", "keyword"};
    std::map<std::string, std::vector<int>> found;
    std::map<std::string, std::vector<int>> escaped;
    for (const auto& name : policy_names) {
        found[name] = std::vector<int>(static_cast<size_t>(n_seeds), 0);
        escaped[name] = std::vector<int>(static_cast<size_t>(n_seeds), 0);
    }

    HashedBagEmbedder embedder(64);
    TemplateSummarizer summarizer;

    for (int s = 0; s < n_seeds; ++s) {
        const int m = loop_sizes[static_cast<size_t>(s) % loop_sizes.size()];
        const GateFamily family = make_gate_family(m, static_cast<uint64_t>(s + 1));
        PriorKnowledgeBase kb; // no offline knowledge in this experiment

        for (const auto& name : policy_names) {
            Utg graph;
            graph.set_initial_score(run_cfg.initial_node_score);
            ExperienceStore store(embedder.dimension());

            RandomPolicy random_policy;
            BfsPolicy bfs_policy;
            KeywordPolicy keyword_policy(run_cfg);
            CriterionConfig crit_cfg;
            crit_cfg.lambda = run_cfg.lambda;
            crit_cfg.source = RSemSource::Scripted;
            crit_cfg.scripted_table = family.r_sem_table;
            crit_cfg.scripted_default = 0.1;
            CriterionPolicy criterion_policy(crit_cfg);

            EpisodeRuntime runtime;
            runtime.embedder = &embedder;
            runtime.summarizer = &summarizer;
            if (name == "criterion") runtime.policy = &criterion_policy;
            if (name == "random") runtime.policy = &random_policy;
            if (name == "bfs") runtime.policy = &bfs_policy;
            if (name == "keyword") runtime.policy = &keyword_policy;

            const EpisodeReport report = run_episode(family.bundle, kb, graph, store, runtime,
                                                     run_cfg, static_cast<uint64_t>(s + 1));
            found[name][static_cast<size_t>(s)] = static_cast<int>(report.distinct_ads.size());
            for (const auto& step : report.trajectory) {
                if (step.to_activity != family.loop_activity) {
                    escaped[name][static_cast<size_t>(s)] = 1;
                    break;
                }
            }
        }
    }

    CoverageStats stats;
    stats.seeds = n_seeds;
    for (const auto& name : policy_names) {
        CoveragePolicyRow row;
        row.policy = name;
        double cov = 0.0;
        double esc = 0.0;
        for (int s = 0; s < n_seeds; ++s) {
            cov += found[name][static_cast<size_t>(s)];
            esc += escaped[name][static_cast<size_t>(s)];
        }
        row.mean_coverage = cov / n_seeds;
        row.escape_rate = esc / n_seeds;
        stats.rows.push_back(row);
    }
    for (const auto& name : policy_names) {
        if (name == "criterion") continue;
        int n_plus = 0;
        int n_minus = 0;
        for (int s = 0; s < n_seeds; ++s) {
            const int diff = found["criterion"][static_cast<size_t>(s)] - found[name][static_cast<size_t>(s)];
            if (diff > 0) ++n_plus;
            if (diff < 0) ++n_minus;
        }
        stats.sign_test_p[name] = sign_test_p_value(n_plus, n_minus);
    }
    return stats;
}

} // namespace adscout
