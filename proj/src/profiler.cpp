#include "adscout/profiler.hpp"

#include <algorithm>
#include <cctype>

namespace adscout {

using nlohmann::json;

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool contains_any_prefix(const std::string& value, const std::vector<std::string>& prefixes) {
    for (const auto& p : prefixes) {
        if (value.find(p) != std::string::npos) return true;
    }
    return false;
}

std::optional<std::string> matched_prefix(const std::string& value,
                                          const std::vector<std::string>& prefixes) {
    for (const auto& p : prefixes) {
        if (value.find(p) != std::string::npos) return p;
    }
    return std::nullopt;
}

std::string library_display(const SdkSignatureConfig& config, const std::string& prefix) {
    auto it = config.library_names.find(prefix);
    return it == config.library_names.end() ? prefix : it->second;
}

std::string simple_name(const std::string& qualified) {
    const size_t dot = qualified.rfind('.');
    return dot == std::string::npos ? qualified : qualified.substr(dot + 1);
}

int rank_for_call(const std::string& api_simple_name) {
    if (api_simple_name.rfind("show", 0) == 0) return 3;
    if (api_simple_name.rfind("load", 0) == 0) return 2;
    return 1;
}

void push_library(std::vector<std::string>& libs, const std::string& name) {
    if (std::find(libs.begin(), libs.end(), name) == libs.end()) libs.push_back(name);
}

std::string infer_ad_type(const SdkSignatureConfig& config, const std::string& view_class,
                          const std::string& resource_id) {
    const std::string haystack = lowercase(view_class + "|" + resource_id);
    for (const auto& [hint, format] : config.ad_format_name_hints) {
        if (haystack.find(hint) != std::string::npos) return format;
    }
    return "unknown";
}

void walk_layout(const AppBundle& bundle, const SdkSignatureConfig& config,
                 const std::string& activity, const LayoutNode& node, int depth, SlotPrior& prior) {
    if (contains_any_prefix(node.widget_class, config.sdk_prefixes)) {
        SlotEntry entry;
        entry.activity = activity;
        entry.view_class = node.widget_class;
        entry.resource_id_string = node.resource_id.value_or("");
        entry.depth = depth;
        if (node.resource_id) {
            auto it = bundle.resource_map.find(*node.resource_id);
            if (it != bundle.resource_map.end()) {
                entry.resource_id_hex = it->second;
            } else {
                prior.warnings.push_back("unresolvable resource id '" + *node.resource_id +
                                         "' in layout for " + activity);
            }
        } else {
            prior.warnings.push_back("ad view without resource id in layout for " + activity);
        }
        entry.inferred_ad_type = infer_ad_type(config, node.widget_class, entry.resource_id_string);
        prior.entries.push_back(std::move(entry));
    }
    for (const auto& child : node.children) {
        walk_layout(bundle, config, activity, child, depth + 1, prior);
    }
}

} // namespace

ScreenPrior extract_screen_prior(const AppBundle& bundle, const SdkSignatureConfig& config) {
    ScreenPrior prior;
    for (const auto& activity : bundle.manifest.activities) {
        if (auto p = matched_prefix(activity, config.sdk_prefixes)) {
            prior.ad_related_activities.push_back(activity);
            push_library(prior.detected_libraries, library_display(config, *p));
        }
    }
    for (const auto& perm : bundle.manifest.permissions) {
        if (auto p = matched_prefix(perm, config.sdk_prefixes)) {
            prior.matched_permissions.push_back(perm);
            push_library(prior.detected_libraries, library_display(config, *p));
        }
    }
    for (const auto& [key, value] : bundle.manifest.metadata) {
        auto p = matched_prefix(key, config.sdk_prefixes);
        if (!p) p = matched_prefix(value, config.sdk_prefixes);
        if (p) {
            prior.matched_metadata.push_back(key);
            push_library(prior.detected_libraries, library_display(config, *p));
        }
    }
    return prior;
}

SlotPrior extract_slot_prior(const AppBundle& bundle, const SdkSignatureConfig& config) {
    SlotPrior prior;
    for (const auto& [activity, root] : bundle.layouts) {
        walk_layout(bundle, config, activity, root, 0, prior);
    }
    return prior;
}

TriggerPrior extract_trigger_prior(const AppBundle& bundle, const SdkSignatureConfig& config) {
    TriggerPrior prior;
    std::set<std::string> registered(bundle.manifest.activities.begin(),
                                     bundle.manifest.activities.end());
    std::map<std::string, const ClassSummary*> by_name;
    for (const auto& cls : bundle.code_summary) by_name[cls.class_name] = &cls;

    auto is_registered = [&](const std::string& cls) {
        return registered.count(cls) > 0 || registered.count(simple_name(cls)) > 0;
    };

    for (const auto& cls : bundle.code_summary) {
        for (const auto& method : cls.methods) {
            int rank = 0;
            for (const auto& api : method.invoked_ad_apis) {
                const std::string name = simple_name(api);
                const bool known_name =
                    std::find(config.ad_api_names.begin(), config.ad_api_names.end(), name) !=
                    config.ad_api_names.end();
                if (known_name || contains_any_prefix(api, config.sdk_prefixes)) {
                    rank = std::max(rank, rank_for_call(name));
                }
            }
            for (const auto& listener : method.implemented_listeners) {
                if (contains_any_prefix(listener, config.ad_listener_names)) {
                    rank = std::max(rank, 1);
                }
            }
            if (rank == 0) continue;

            // Activity-centric attribution: bind the clue to the first class
            // up the inheritance chain that the manifest registers.
            std::string owner = "unattributed";
            const ClassSummary* cur = &cls;
            while (cur) {
                if (is_registered(cur->class_name)) {
                    owner = registered.count(cur->class_name) ? cur->class_name
                                                              : simple_name(cur->class_name);
                    break;
                }
                auto it = by_name.find(cur->superclass);
                cur = it == by_name.end() ? nullptr : it->second;
            }
            prior.methods_by_activity[owner].push_back(TriggerMethod{method.signature, rank});
        }
    }

    for (auto& [activity, methods] : prior.methods_by_activity) {
        std::sort(methods.begin(), methods.end(), [](const TriggerMethod& a, const TriggerMethod& b) {
            if (a.importance_rank != b.importance_rank) return a.importance_rank > b.importance_rank;
            return a.signature < b.signature;
        });
    }
    return prior;
}

const std::vector<TriggerMethod>* PriorKnowledgeBase::methods_for(const std::string& activity) const {
    auto it = methods_by_activity.find(activity);
    return it == methods_by_activity.end() ? nullptr : &it->second;
}

const SlotEntry* PriorKnowledgeBase::slot_match(const std::string& runtime_resource_id) const {
    for (const auto& entry : slots) {
        if (runtime_resource_id == entry.resource_id_string) return &entry;
        if (entry.resource_id_hex && runtime_resource_id == *entry.resource_id_hex) return &entry;
        const std::string suffix = ":id/" + entry.resource_id_string;
        if (!entry.resource_id_string.empty() && runtime_resource_id.size() > suffix.size() &&
            runtime_resource_id.compare(runtime_resource_id.size() - suffix.size(), suffix.size(),
                                        suffix) == 0) {
            return &entry;
        }
    }
    return nullptr;
}

PriorKnowledgeBase build_knowledge_base(const ScreenPrior& screen, const SlotPrior& slot,
                                        const TriggerPrior& trigger, const NetworkPrior& network) {
    PriorKnowledgeBase kb;
    for (const auto& a : screen.ad_related_activities) kb.ad_activities.insert(a);
    for (const auto& [activity, methods] : trigger.methods_by_activity) {
        if (activity != "unattributed") kb.ad_activities.insert(activity);
        kb.methods_by_activity[activity] = methods;
    }
    for (const auto& entry : slot.entries) {
        kb.ad_activities.insert(entry.activity);
        kb.slots.push_back(entry);
    }
    kb.libraries = screen.detected_libraries;

    std::set<std::string> domains;
    for (const auto& link : network.links) {
        if (auto host = url_host(link.url)) domains.insert(*host);
    }
    for (const auto& item : network.unlinked) {
        if (auto host = url_host(item.url)) domains.insert(*host);
    }
    kb.ad_domains.assign(domains.begin(), domains.end());
    return kb;
}

json screen_prior_to_json(const ScreenPrior& prior) {
    return json{{"ad_related_activities", prior.ad_related_activities},
                {"matched_permissions", prior.matched_permissions},
                {"matched_metadata", prior.matched_metadata},
                {"detected_libraries", prior.detected_libraries}};
}

json slot_prior_to_json(const SlotPrior& prior) {
    json entries = json::array();
    for (const auto& e : prior.entries) {
        json v{{"activity", e.activity},
               {"view_class", e.view_class},
               {"resource_id", e.resource_id_string},
               {"ad_type", e.inferred_ad_type},
               {"depth", e.depth}};
        if (e.resource_id_hex) v["resource_id_hex"] = *e.resource_id_hex;
        entries.push_back(std::move(v));
    }
    return json{{"entries", entries}, {"warnings", prior.warnings}};
}

json trigger_prior_to_json(const TriggerPrior& prior) {
    json by_activity = json::object();
    for (const auto& [activity, methods] : prior.methods_by_activity) {
        json list = json::array();
        for (const auto& m : methods) {
            list.push_back(json{{"signature", m.signature}, {"rank", m.importance_rank}});
        }
        by_activity[activity] = std::move(list);
    }
    return json{{"methods_by_activity", by_activity}};
}

json PriorKnowledgeBase::to_json() const {
    json slots_doc = json::array();
    for (const auto& e : slots) {
        json v{{"activity", e.activity},
               {"view_class", e.view_class},
               {"resource_id", e.resource_id_string},
               {"ad_type", e.inferred_ad_type},
               {"depth", e.depth}};
        if (e.resource_id_hex) v["resource_id_hex"] = *e.resource_id_hex;
        slots_doc.push_back(std::move(v));
    }
    json methods_doc = json::object();
    for (const auto& [activity, methods] : methods_by_activity) {
        json list = json::array();
        for (const auto& m : methods) {
            list.push_back(json{{"signature", m.signature}, {"rank", m.importance_rank}});
        }
        methods_doc[activity] = std::move(list);
    }
    json success_map = json::object();
    for (const auto& [activity, ad] : success_activity_ads) success_map[activity] = ad;
    return json{{"format", "adscout-kb"},
                {"version", 1},
                {"ad_activities", std::vector<std::string>(ad_activities.begin(), ad_activities.end())},
                {"methods_by_activity", methods_doc},
                {"slots", slots_doc},
                {"libraries", libraries},
                {"ad_domains", ad_domains},
                {"success_activities",
                 std::vector<std::string>(success_activities.begin(), success_activities.end())},
                {"success_activity_ads", success_map}};
}

PriorKnowledgeBase PriorKnowledgeBase::from_json(const json& doc) {
    if (doc.value("format", "") != "adscout-kb") {
        throw std::invalid_argument("not a knowledge-base document");
    }
    PriorKnowledgeBase kb;
    for (const auto& a : doc.at("ad_activities")) kb.ad_activities.insert(a.get<std::string>());
    for (const auto& [activity, list] : doc.at("methods_by_activity").items()) {
        std::vector<TriggerMethod> methods;
        for (const auto& m : list) {
            methods.push_back(TriggerMethod{m.at("signature").get<std::string>(), m.at("rank").get<int>()});
        }
        kb.methods_by_activity[activity] = std::move(methods);
    }
    for (const auto& s : doc.at("slots")) {
        SlotEntry e;
        e.activity = s.at("activity").get<std::string>();
        e.view_class = s.at("view_class").get<std::string>();
        e.resource_id_string = s.at("resource_id").get<std::string>();
        if (s.contains("resource_id_hex")) e.resource_id_hex = s.at("resource_id_hex").get<std::string>();
        e.inferred_ad_type = s.at("ad_type").get<std::string>();
        e.depth = s.value("depth", 0);
        kb.slots.push_back(std::move(e));
    }
    for (const auto& l : doc.at("libraries")) kb.libraries.push_back(l.get<std::string>());
    for (const auto& d : doc.at("ad_domains")) kb.ad_domains.push_back(d.get<std::string>());
    for (const auto& a : doc.at("success_activities")) kb.success_activities.insert(a.get<std::string>());
    if (doc.contains("success_activity_ads")) {
        for (const auto& [activity, ad] : doc.at("success_activity_ads").items()) {
            kb.success_activity_ads[activity] = ad.get<std::string>();
        }
    }
    return kb;
}

} // namespace adscout
