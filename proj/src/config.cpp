#include "adscout/config.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace adscout {

using nlohmann::json;

EngineConfig default_config() {
    EngineConfig cfg;
    cfg.signatures.sdk_prefixes = {
        "com.google.android.gms.ads",
        "com.facebook.ads",
        "com.applovin",
        "com.unity3d.ads",
        "com.mopub",
    };
    cfg.signatures.library_names = {
        {"com.google.android.gms.ads", "Google AdMob"},
        {"com.facebook.ads", "Meta Audience Network"},
        {"com.applovin", "AppLovin"},
        {"com.unity3d.ads", "Unity Ads"},
        {"com.mopub", "MoPub"},
    };
    cfg.signatures.ad_api_names = {
        "loadAd", "loadBanner", "loadInterstitial", "show", "showAd",
        "showInterstitial", "showRewardedVideo", "initialize", "initAdSdk",
    };
    cfg.signatures.ad_listener_names = {
        "AdListener", "OnAdLoadedListener", "InterstitialAdListener", "RewardedAdCallback",
    };
    cfg.signatures.ad_format_name_hints = {
        {"interstitial", "interstitial"},
        {"banner", "banner"},
        {"native", "native"},
        {"reward", "rewarded"},
        {"adview", "banner"},
    };
    cfg.ad_domains = {
        "doubleclick.net", "googleads.g.doubleclick.net", "googlesyndication.com",
        "facebook.com/ads", "applovin.com", "unityads.unity3d.com",
    };
    cfg.traffic_keywords = {"adserver", "adrequest", "ad_unit", "pagead", "banner_fill"};
    cfg.ui_ad_keywords = {
        "install now", "learn more", "other app", "more apps", "more games",
        "free coins", "remove ads", "sponsored", "claim reward", "watch video", "ad",
    };
    cfg.media_container_classes = {"ImageView", "ImageButton", "WebView"};
    cfg.caption_score_map = {{"AD", 0.9}, {"POTENTIAL_AD", 0.6}, {"UI_ELEMENT", 0.1}};
    return cfg;
}

namespace {

void read_string_list(const json& doc, const char* key, std::vector<std::string>& out) {
    if (!doc.contains(key)) return;
    out.clear();
    for (const auto& v : doc.at(key)) out.push_back(v.get<std::string>());
}

} // namespace

EngineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    json doc = json::parse(in);

    EngineConfig cfg = default_config();
    if (doc.contains("signatures")) {
        const json& sig = doc.at("signatures");
        read_string_list(sig, "sdk_prefixes", cfg.signatures.sdk_prefixes);
        if (cfg.signatures.sdk_prefixes.empty()) {
            throw std::runtime_error(path + ": signatures.sdk_prefixes must be non-empty");
        }
        if (sig.contains("library_names")) {
            cfg.signatures.library_names.clear();
            for (const auto& [k, v] : sig.at("library_names").items()) {
                cfg.signatures.library_names[k] = v.get<std::string>();
            }
        }
        read_string_list(sig, "ad_api_names", cfg.signatures.ad_api_names);
        read_string_list(sig, "ad_listener_names", cfg.signatures.ad_listener_names);
        if (sig.contains("ad_format_name_hints")) {
            cfg.signatures.ad_format_name_hints.clear();
            for (const auto& [k, v] : sig.at("ad_format_name_hints").items()) {
                cfg.signatures.ad_format_name_hints.emplace_back(k, v.get<std::string>());
            }
        }
    }
    read_string_list(doc, "ad_domains", cfg.ad_domains);
    read_string_list(doc, "traffic_keywords", cfg.traffic_keywords);
    read_string_list(doc, "ui_ad_keywords", cfg.ui_ad_keywords);
    read_string_list(doc, "media_container_classes", cfg.media_container_classes);

    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.initial_node_score = doc.value("initial_node_score", cfg.initial_node_score);
    cfg.tau = doc.value("tau", cfg.tau);
    cfg.lambda = doc.value("lambda", cfg.lambda);
    cfg.k_base = doc.value("k_base", cfg.k_base);
    cfg.retrieval_k = doc.value("retrieval_k", cfg.retrieval_k);
    cfg.iou_threshold = doc.value("iou_threshold", cfg.iou_threshold);
    cfg.correlation_delta_seconds = doc.value("delta_seconds", cfg.correlation_delta_seconds);
    if (doc.contains("caption_score_map")) {
        cfg.caption_score_map.clear();
        for (const auto& [k, v] : doc.at("caption_score_map").items()) {
            cfg.caption_score_map[k] = v.get<double>();
        }
    }
    if (doc.contains("limits")) {
        const json& lim = doc.at("limits");
        cfg.limits.max_steps = lim.value("max_steps", cfg.limits.max_steps);
        cfg.limits.max_seconds = lim.value("max_seconds", cfg.limits.max_seconds);
        cfg.limits.event_interval_seconds = lim.value("event_interval_seconds", cfg.limits.event_interval_seconds);
        cfg.limits.max_ads = lim.value("max_ads", cfg.limits.max_ads);
    }
    if (doc.contains("detector")) {
        const json& det = doc.at("detector");
        cfg.detector.recall = det.value("recall", cfg.detector.recall);
        cfg.detector.noise_regions = det.value("noise_regions", cfg.detector.noise_regions);
        cfg.detector.seed = det.value("seed", cfg.detector.seed);
    }
    if (doc.contains("backend")) {
        const json& be = doc.at("backend");
        cfg.backend.endpoint = be.value("endpoint", cfg.backend.endpoint);
        cfg.backend.model = be.value("model", cfg.backend.model);
        cfg.backend.temperature = be.value("temperature", cfg.backend.temperature);
        cfg.backend.timeout_seconds = be.value("timeout_seconds", cfg.backend.timeout_seconds);
        cfg.backend.max_retries = be.value("max_retries", cfg.backend.max_retries);
        cfg.backend.api_key_env = be.value("api_key_env", cfg.backend.api_key_env);
    }
    return cfg;
}

} // namespace adscout
