#include "adscout/navigator.hpp"

#include "adscout/events.hpp"
#include "adscout/fingerprint.hpp"

#include <algorithm>
#include <fstream>

namespace adscout {

using nlohmann::json;

std::string to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::AdBudget: return "ad_budget";
        case TerminationReason::StepBudget: return "step_budget";
        case TerminationReason::TimeBudget: return "time_budget";
        case TerminationReason::Abort: return "abort";
    }
    return "unknown";
}

json EpisodeReport::to_json() const {
    json steps = json::array();
    for (const auto& s : trajectory) {
        json rec{{"step", s.step},
                 {"from", s.from_state},
                 {"action_key", s.action_key},
                 {"action", s.action_desc},
                 {"to", s.to_state},
                 {"to_activity", s.to_activity},
                 {"s_hat", s.s_hat},
                 {"fallback", s.fallback},
                 {"clock", s.clock_seconds}};
        if (s.ad_found) rec["ad"] = *s.ad_found;
        if (!s.reasoning.empty()) rec["reasoning"] = s.reasoning;
        steps.push_back(std::move(rec));
    }
    return json{{"app_id", app_id},
                {"seed", seed},
                {"distinct_ads", std::vector<std::string>(distinct_ads.begin(), distinct_ads.end())},
                {"steps_taken", steps_taken},
                {"steps_to_each_ad", steps_to_each_ad},
                {"termination_reason", to_string(termination_reason)},
                {"abort_message", abort_message},
                {"captioner_calls", captioner_calls},
                {"final_clock_seconds", final_clock_seconds},
                {"trajectory", steps}};
}

std::optional<std::string> detect_success(const StepOutcome& outcome, const PriorKnowledgeBase& kb,
                                          std::set<std::string>& seen_ads) {
    if (outcome.ad_exposed) {
        if (seen_ads.insert(*outcome.ad_exposed).second) return *outcome.ad_exposed;
        return std::nullopt;
    }
    if (kb.success_activities.count(outcome.next.activity)) {
        std::string id = "activity:" + outcome.next.activity;
        auto it = kb.success_activity_ads.find(outcome.next.activity);
        if (it != kb.success_activity_ads.end()) id = it->second;
        if (seen_ads.insert(id).second) return id;
    }
    return std::nullopt;
}

RecoveryResult recover(Session& session, const StepOutcome& outcome) {
    RecoveryResult result;
    if (outcome.crashed) {
        result.action = "restart";
    } else if (outcome.backgrounded) {
        result.action = "back";
    } else {
        return result; // precondition unmet: no-op
    }
    result.outcome = session.step(result.action);
    return result;
}

namespace {

const char* kLauncherActivity = "SystemLauncher";

std::string launcher_fingerprint() {
    UiState launcher;
    launcher.activity = kLauncherActivity;
    return short_hash(canonical_state_serialization(launcher));
}

std::string ad_type_of(const AppBundle& bundle, const std::string& ad_id) {
    for (const auto& trig : bundle.behavior.ad_triggers) {
        if (trig.ad_id == ad_id) return trig.ad_type;
    }
    return "custom";
}

struct ChoiceInfo {
    std::string action_key;
    std::string widget_class;
    std::string widget_text;
};

ChoiceInfo resolve_choice(const Decision& decision, const std::vector<ActionableElement>& elements) {
    ChoiceInfo info;
    if (decision.is_index()) {
        const auto& el = elements.at(static_cast<size_t>(decision.choice));
        info.action_key = el.action_key;
        info.widget_class = el.class_or_kind;
        info.widget_text = el.semantic_caption.value_or(el.text.value_or(""));
    } else {
        info.action_key = decision.global_key;
        info.widget_class = "KeyEvent";
        info.widget_text = decision.global_key;
    }
    return info;
}

} // namespace

EpisodeReport run_episode(const AppBundle& bundle, const PriorKnowledgeBase& kb, Utg& graph,
                          ExperienceStore& store, const EpisodeRuntime& runtime,
                          const EngineConfig& config, uint64_t seed) {
    EpisodeReport report;
    report.app_id = bundle.app_id;
    report.seed = seed;

    Session session(bundle, seed, config.limits.event_interval_seconds);
    HistoryBuffer history(config.k_base);
    std::set<std::string> seen_ads;
    std::vector<TrajectoryStep> trajectory;
    std::ofstream episode_log;
    if (!runtime.episode_log_path.empty()) {
        episode_log.open(runtime.episode_log_path, std::ios::trunc);
    }

    runtime.policy->begin_episode(seed);
    graph.set_initial_score(config.initial_node_score);

    UiState obs = session.reset();
    const std::string launcher_fp = launcher_fingerprint();
    graph.record_transition(launcher_fp, kLauncherActivity, "RestartAppEvent()",
                            obs.state_fingerprint, obs.activity);
    int history_index = 1;
    history.push(HistoryRecord{history_index, launcher_fp, "RestartAppEvent()",
                               obs.state_fingerprint, false, session.clock_seconds()});

    auto record_restart = [&](const UiState& from) {
        StepOutcome restarted = session.step("restart");
        graph.record_transition(from.state_fingerprint, from.activity, "RestartAppEvent()",
                                restarted.next.state_fingerprint, restarted.next.activity);
        history.push(HistoryRecord{++history_index, from.state_fingerprint, "RestartAppEvent()",
                                   restarted.next.state_fingerprint, false, session.clock_seconds()});
        trajectory.clear();
        return restarted.next;
    };

    while (true) {
        if (report.steps_taken >= config.limits.max_steps) {
            report.termination_reason = TerminationReason::StepBudget;
            break;
        }
        if (session.clock_seconds() >= config.limits.max_seconds) {
            report.termination_reason = TerminationReason::TimeBudget;
            break;
        }
        if (config.limits.max_ads > 0 &&
            static_cast<int>(report.distinct_ads.size()) >= config.limits.max_ads) {
            report.termination_reason = TerminationReason::AdBudget;
            break;
        }

        obs = session.observe();
        PerceptionResult perception =
            perceive(obs, config, runtime.detector, runtime.captioner, runtime.caption_everything);
        report.captioner_calls += perception.captioner_calls;

        PromptContext ctx = build_context(obs, perception.elements, graph, history, store,
                                          *runtime.embedder, kb, config.retrieval_k);

        Decision decision;
        try {
            decision = runtime.policy->choose(ctx, graph);
        } catch (const EpisodeAbort& e) {
            report.termination_reason = TerminationReason::Abort;
            report.abort_message = e.what();
            break;
        }

        const double s_hat = std::clamp(decision.ad_score, 0.0, 1.0);
        if (graph.has_node(obs.state_fingerprint)) {
            graph.update_score(obs.state_fingerprint, s_hat, config.alpha);
        }

        const ChoiceInfo choice = resolve_choice(decision, ctx.elements);
        const std::string resolved = session.resolve_action(choice.action_key);
        const std::string event_desc = canonical_event_desc(obs, resolved);
        StepOutcome outcome = session.step(resolved);

        ++report.steps_taken;
        history.push(HistoryRecord{++history_index, obs.state_fingerprint, event_desc,
                                   outcome.next.state_fingerprint, outcome.ad_exposed.has_value(),
                                   session.clock_seconds()});
        if (!outcome.noop) {
            graph.record_transition(obs.state_fingerprint, obs.activity, event_desc,
                                    outcome.next.state_fingerprint, outcome.next.activity);
        }
        trajectory.push_back(TrajectoryStep{event_desc, choice.widget_class, choice.widget_text});

        const auto found = detect_success(outcome, kb, seen_ads);

        StepLog log;
        log.step = report.steps_taken;
        log.from_state = obs.state_fingerprint;
        log.action_key = resolved;
        log.action_desc = event_desc;
        log.to_state = outcome.next.state_fingerprint;
        log.to_activity = outcome.next.activity;
        log.ad_found = found;
        log.s_hat = s_hat;
        log.reasoning = decision.reasoning;
        log.fallback = decision.used_fallback;
        log.clock_seconds = session.clock_seconds();
        report.trajectory.push_back(log);
        if (episode_log.is_open()) {
            episode_log << json{{"step", log.step},
                                {"from", log.from_state},
                                {"action", log.action_desc},
                                {"to", log.to_state},
                                {"ad", found ? json(*found) : json(nullptr)},
                                {"s_hat", log.s_hat},
                                {"reasoning", log.reasoning},
                                {"clock", log.clock_seconds}}
                               .dump()
                        << "\n";
        }

        if (found) {
            report.distinct_ads.insert(*found);
            report.steps_to_each_ad.push_back(static_cast<int>(trajectory.size()));

            Experience exp;
            exp.fingerprint = state_fingerprint_text(obs); // the state preceding the exposure
            exp.embedding = runtime.embedder->embed(exp.fingerprint);
            exp.summary =
                summarize_trajectory(trajectory, *runtime.summarizer, ad_type_of(bundle, *found));
            exp.source_app = bundle.app_id;
            exp.trajectory = trajectory;
            store.store(exp);

            obs = record_restart(outcome.next);
            continue;
        }

        if (outcome.crashed || outcome.backgrounded) {
            if (outcome.crashed) trajectory.clear();
            RecoveryResult recovery = recover(session, outcome);
            graph.record_transition(outcome.next.state_fingerprint, outcome.next.activity,
                                    canonical_event_desc(outcome.next, recovery.action),
                                    recovery.outcome.next.state_fingerprint,
                                    recovery.outcome.next.activity);
            history.push(HistoryRecord{++history_index, outcome.next.state_fingerprint,
                                       canonical_event_desc(outcome.next, recovery.action),
                                       recovery.outcome.next.state_fingerprint, false,
                                       session.clock_seconds()});
            obs = recovery.outcome.next;
        }
    }

    report.final_clock_seconds = session.clock_seconds();
    return report;
}

CorpusMetrics compute_metrics(const std::vector<EpisodeReport>& reports, int total_ground_truth_ads) {
    if (reports.empty()) throw std::invalid_argument("no reports to aggregate");
    CorpusMetrics metrics;
    metrics.total_ads = total_ground_truth_ads;

    std::set<std::pair<std::string, std::string>> distinct;
    long step_sum = 0;
    long step_count = 0;
    for (const auto& r : reports) {
        for (const auto& ad : r.distinct_ads) distinct.insert({r.app_id, ad});
        for (int s : r.steps_to_each_ad) {
            step_sum += s;
            ++step_count;
        }
    }
    metrics.distinct_found = static_cast<int>(distinct.size());
    metrics.detection_rate = total_ground_truth_ads > 0
                                 ? static_cast<double>(metrics.distinct_found) / total_ground_truth_ads
                                 : 0.0;
    if (step_count > 0) {
        metrics.average_steps = static_cast<double>(step_sum) / static_cast<double>(step_count);
    }
    return metrics;
}

} // namespace adscout
