#pragma once

#include "adscout/bundle.hpp"
#include "adscout/config.hpp"
#include "adscout/prober.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adscout {

struct ScreenPrior {
    std::vector<std::string> ad_related_activities;
    std::vector<std::string> matched_permissions;
    std::vector<std::string> matched_metadata;
    std::vector<std::string> detected_libraries;

    bool empty() const {
        return ad_related_activities.empty() && matched_permissions.empty() &&
               matched_metadata.empty() && detected_libraries.empty();
    }
};

struct SlotEntry {
    std::string activity;
    std::string view_class;
    std::string resource_id_string;
    std::optional<std::string> resource_id_hex;
    std::string inferred_ad_type; // banner | interstitial | native | rewarded | unknown
    int depth = 0;                // recorded, not scored
};

struct SlotPrior {
    std::vector<SlotEntry> entries;
    std::vector<std::string> warnings;
};

struct TriggerMethod {
    std::string signature;
    int importance_rank = 1; // show=3, load=2, init/other=1
};

struct TriggerPrior {
    // Keys are manifest-registered activities, plus the reserved key
    // "unattributed" for clues whose superclass chain never reaches one.
    std::map<std::string, std::vector<TriggerMethod>> methods_by_activity;
};

ScreenPrior extract_screen_prior(const AppBundle& bundle, const SdkSignatureConfig& config);
SlotPrior extract_slot_prior(const AppBundle& bundle, const SdkSignatureConfig& config);
TriggerPrior extract_trigger_prior(const AppBundle& bundle, const SdkSignatureConfig& config);

// Fused offline knowledge injected into the decision context. Success
// activities are ground truth for the success check and are never rendered
// into prompts.
class PriorKnowledgeBase {
public:
    PriorKnowledgeBase() = default;

    std::set<std::string> ad_activities;
    std::map<std::string, std::vector<TriggerMethod>> methods_by_activity;
    std::vector<SlotEntry> slots;
    std::vector<std::string> libraries;
    std::vector<std::string> ad_domains;
    std::set<std::string> success_activities;
    // Success activity -> canonical ad id, so activity arrivals and exposure
    // flags count the same ad once.
    std::map<std::string, std::string> success_activity_ads;

    bool is_ad_activity(const std::string& activity) const { return ad_activities.count(activity) > 0; }
    const std::vector<TriggerMethod>* methods_for(const std::string& activity) const;

    // Matches a runtime resource id against slot entries; accepts either the
    // bare layout id, the hex id, or the full "<pkg>:id/<name>" form.
    const SlotEntry* slot_match(const std::string& runtime_resource_id) const;

    nlohmann::json to_json() const;
    static PriorKnowledgeBase from_json(const nlohmann::json& doc);
};

PriorKnowledgeBase build_knowledge_base(const ScreenPrior& screen, const SlotPrior& slot,
                                        const TriggerPrior& trigger, const NetworkPrior& network);

nlohmann::json screen_prior_to_json(const ScreenPrior& prior);
nlohmann::json slot_prior_to_json(const SlotPrior& prior);
nlohmann::json trigger_prior_to_json(const TriggerPrior& prior);

} // namespace adscout
