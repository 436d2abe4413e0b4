#include "adscout/backends.hpp"
#include "adscout/campaign.hpp"
#include "adscout/http_client.hpp"
#include "adscout/loopfamily.hpp"
#include "adscout/navigator.hpp"
#include "adscout/policies.hpp"
#include "adscout/profiler.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>

using namespace adscout;
using nlohmann::json;

namespace {

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << content;
}

EngineConfig load_config_or_default(const std::string& path) {
    return path.empty() ? default_config() : load_config(path);
}

int cmd_profile(const std::string& bundle_path, const std::string& config_path,
                const std::string& out_path) {
    const EngineConfig config = load_config_or_default(config_path);
    const AppBundle bundle = load_bundle(bundle_path);
    const ScreenPrior screen = extract_screen_prior(bundle, config.signatures);
    const SlotPrior slot = extract_slot_prior(bundle, config.signatures);
    const TriggerPrior trigger = extract_trigger_prior(bundle, config.signatures);
    PriorKnowledgeBase kb = build_knowledge_base(screen, slot, trigger, NetworkPrior{});
    attach_success_ground_truth(kb, bundle);

    json doc{{"app_id", bundle.app_id},
             {"screen_prior", screen_prior_to_json(screen)},
             {"slot_prior", slot_prior_to_json(slot)},
             {"trigger_prior", trigger_prior_to_json(trigger)},
             {"knowledge_base", kb.to_json()}};
    write_or_print(out_path, doc.dump(2));
    return 0;
}

int cmd_probe(const std::string& bundle_path, const std::string& config_path, int budget,
              uint64_t seed, const std::string& out_path, const std::string& utg_out) {
    const EngineConfig config = load_config_or_default(config_path);
    const AppBundle bundle = load_bundle(bundle_path);
    auto [graph, trace] = random_probe(bundle, budget, seed, config.limits.event_interval_seconds);
    const auto traffic = extract_ad_traffic(trace.syslog, config.ad_domains, config.traffic_keywords);
    const NetworkPrior network = correlate(trace.events, traffic, config.correlation_delta_seconds);

    json links = json::array();
    for (const auto& l : network.links) {
        links.push_back(json{{"event", l.event_index}, {"url", l.url}, {"lag", l.lag_seconds}});
    }
    json unlinked = json::array();
    for (const auto& u : network.unlinked) {
        unlinked.push_back(json{{"url", u.url}, {"timestamp", u.timestamp}});
    }
    json doc{{"app_id", bundle.app_id},
             {"events", trace.events.size()},
             {"syslog_lines", trace.syslog.size()},
             {"utg", graph.to_json()},
             {"network_prior",
              json{{"delta_seconds", network.window_delta_seconds}, {"links", links}, {"unlinked", unlinked}}}};
    write_or_print(out_path, doc.dump(2));
    if (!utg_out.empty()) write_or_print(utg_out, graph.to_json().dump(2));
    return 0;
}

int cmd_explore(const std::string& bundle_path, const std::string& config_path,
                const std::string& policy_name, const std::string& backend_spec, uint64_t seed,
                int max_steps, int max_ads, int probe_budget, const std::string& out_path,
                const std::string& log_path, const std::string& record_path,
                const std::string& utg_out) {
    EngineConfig config = load_config_or_default(config_path);
    if (max_steps > 0) config.limits.max_steps = max_steps;
    if (max_ads > 0) config.limits.max_ads = max_ads;
    const AppBundle bundle = load_bundle(bundle_path);

    const ScreenPrior screen = extract_screen_prior(bundle, config.signatures);
    const SlotPrior slot = extract_slot_prior(bundle, config.signatures);
    const TriggerPrior trigger = extract_trigger_prior(bundle, config.signatures);

    Utg graph;
    graph.set_initial_score(config.initial_node_score);
    NetworkPrior network;
    if (probe_budget > 0) {
        auto [coarse, trace] = random_probe(bundle, probe_budget, seed, config.limits.event_interval_seconds);
        const auto traffic = extract_ad_traffic(trace.syslog, config.ad_domains, config.traffic_keywords);
        network = correlate(trace.events, traffic, config.correlation_delta_seconds);
        graph.merge(coarse, MergeMode::StructureOnly);
    }
    PriorKnowledgeBase kb = build_knowledge_base(screen, slot, trigger, network);
    attach_success_ground_truth(kb, bundle);

    HashedBagEmbedder embedder(256);
    TemplateSummarizer template_summarizer;
    ScriptedCaptioner captioner;
    SimulatedDeepDetector detector(config.detector);

    Transcript replay_transcript;
    Transcript recorded;
    std::unique_ptr<TrajectorySummarizer> replay_summarizer;
    std::unique_ptr<DecisionBackend> backend;
    std::unique_ptr<RemoteChatBackend> remote;
    KeywordScorerBackend oracle(config, graph);

    EpisodeRuntime runtime;
    runtime.embedder = &embedder;
    runtime.summarizer = &template_summarizer;
    runtime.episode_log_path = log_path;

    RandomPolicy random_policy;
    BfsPolicy bfs_policy;
    KeywordPolicy keyword_policy(config);
    CriterionConfig crit_cfg;
    crit_cfg.lambda = config.lambda;
    crit_cfg.source = RSemSource::CaptionDerived;
    CriterionPolicy criterion_policy(crit_cfg);
    std::unique_ptr<EnginePolicy> engine_policy;

    if (policy_name == "random") {
        runtime.policy = &random_policy;
    } else if (policy_name == "bfs") {
        runtime.policy = &bfs_policy;
    } else if (policy_name == "keyword") {
        runtime.policy = &keyword_policy;
    } else if (policy_name == "criterion") {
        runtime.policy = &criterion_policy;
        runtime.captioner = &captioner;
        runtime.detector = &detector;
    } else if (policy_name == "mana") {
        DecisionBackend* chosen = nullptr;
        if (backend_spec == "oracle" || backend_spec.empty()) {
            chosen = &oracle;
        } else if (backend_spec.rfind("replay:", 0) == 0) {
            replay_transcript = Transcript::load(backend_spec.substr(7));
            backend = std::make_unique<ReplayBackend>(replay_transcript);
            replay_summarizer = std::make_unique<ReplaySummarizer>(replay_transcript);
            runtime.summarizer = replay_summarizer.get();
            chosen = backend.get();
        } else if (backend_spec == "remote") {
            remote = std::make_unique<RemoteChatBackend>(config.backend);
            chosen = remote.get();
        } else {
            throw std::runtime_error("unknown backend '" + backend_spec + "'");
        }
        if (!record_path.empty()) {
            backend = std::make_unique<RecordingBackend>(*chosen, recorded);
            chosen = backend.get();
        }
        engine_policy = std::make_unique<EnginePolicy>("mana", *chosen);
        runtime.policy = engine_policy.get();
        runtime.captioner = &captioner;
        runtime.detector = &detector;
    } else {
        throw std::runtime_error("unknown policy '" + policy_name + "'");
    }

    ExperienceStore store(embedder.dimension());
    const EpisodeReport report = run_episode(bundle, kb, graph, store, runtime, config, seed);
    if (!record_path.empty()) recorded.save(record_path);
    if (!utg_out.empty()) write_or_print(utg_out, graph.to_json().dump(2));
    write_or_print(out_path, report.to_json().dump(2));
    return report.distinct_ads.empty() ? 1 : 0;
}

int cmd_campaign(const std::string& spec_path, const std::string& config_path, int threads,
                 const std::string& out_path, bool text) {
    const EngineConfig config = load_config_or_default(config_path);
    const CampaignSpec spec = CampaignSpec::load(spec_path);
    const CampaignReport report = run_campaign(spec, config, threads);
    if (text || out_path.empty()) std::cout << report.to_text();
    if (!out_path.empty()) write_or_print(out_path, report.to_json().dump(2));
    return 0;
}

int cmd_export_utg(const std::string& utg_path, const std::string& format,
                   const std::string& out_path) {
    std::ifstream in(utg_path);
    if (!in) throw std::runtime_error("cannot read '" + utg_path + "'");
    const Utg graph = Utg::from_json(json::parse(in));
    if (format == "json") {
        write_or_print(out_path, graph.to_json().dump(2));
    } else if (format == "dot") {
        write_or_print(out_path, graph.to_dot());
    } else {
        throw std::runtime_error("unknown format '" + format + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adscout: reasoning-guided UI exploration for ad-trigger discovery"};
    app.require_subcommand(1);

    std::string bundle_path;
    std::string config_path;
    std::string out_path;
    std::string log_path;
    std::string record_path;
    std::string utg_out;
    std::string policy_name = "mana";
    std::string backend_spec = "oracle";
    std::string spec_path;
    std::string utg_path;
    std::string format = "dot";
    uint64_t seed = 1;
    int budget = 30;
    int max_steps = 0;
    int max_ads = 0;
    int probe_budget = 30;
    int threads = 0;
    bool text = false;

    auto* profile = app.add_subcommand("profile", "extract offline priors from a bundle");
    profile->add_option("bundle", bundle_path)->required();
    profile->add_option("--config", config_path);
    profile->add_option("--out", out_path);

    auto* probe = app.add_subcommand("probe", "random exploration: coarse UTG + network prior");
    probe->add_option("bundle", bundle_path)->required();
    probe->add_option("--config", config_path);
    probe->add_option("--budget", budget);
    probe->add_option("--seed", seed);
    probe->add_option("--out", out_path);
    probe->add_option("--utg-out", utg_out);

    auto* explore = app.add_subcommand("explore", "run one exploration episode");
    explore->add_option("bundle", bundle_path)->required();
    explore->add_option("--config", config_path);
    explore->add_option("--policy", policy_name)
        ->check(CLI::IsMember({"random", "bfs", "keyword", "criterion", "mana"}));
    explore->add_option("--backend", backend_spec, "oracle | replay:<transcript> | remote");
    explore->add_option("--seed", seed);
    explore->add_option("--max-steps", max_steps);
    explore->add_option("--max-ads", max_ads);
    explore->add_option("--probe-budget", probe_budget);
    explore->add_option("--out", out_path);
    explore->add_option("--log", log_path);
    explore->add_option("--record", record_path);
    explore->add_option("--utg-out", utg_out);

    auto* campaign = app.add_subcommand("campaign", "run a corpus campaign across policies");
    campaign->add_option("spec", spec_path)->required();
    campaign->add_option("--config", config_path);
    campaign->add_option("--threads", threads);
    campaign->add_option("--out", out_path);
    campaign->add_flag("--text", text);

    auto* export_utg = app.add_subcommand("export-utg", "convert a saved UTG document");
    export_utg->add_option("utg", utg_path)->required();
    export_utg->add_option("--format", format)->check(CLI::IsMember({"json", "dot"}));
    export_utg->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (profile->parsed()) return cmd_profile(bundle_path, config_path, out_path);
        if (probe->parsed()) return cmd_probe(bundle_path, config_path, budget, seed, out_path, utg_out);
        if (explore->parsed()) {
            return cmd_explore(bundle_path, config_path, policy_name, backend_spec, seed, max_steps,
                               max_ads, probe_budget, out_path, log_path, record_path, utg_out);
        }
        if (campaign->parsed()) return cmd_campaign(spec_path, config_path, threads, out_path, text);
        if (export_utg->parsed()) return cmd_export_utg(utg_path, format, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
