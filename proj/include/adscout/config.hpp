#pragma once

#include <map>
#include <string>
#include <vector>

namespace adscout {

struct SdkSignatureConfig {
    std::vector<std::string> sdk_prefixes;
    std::map<std::string, std::string> library_names; // prefix -> display name
    std::vector<std::string> ad_api_names;
    std::vector<std::string> ad_listener_names;
    // substring hint (lowercase) -> ad format (banner/interstitial/native/rewarded)
    std::vector<std::pair<std::string, std::string>> ad_format_name_hints;
};

struct DetectorConfig {
    double recall = 1.0;     // fraction of ground-truth regions the deep detector recovers
    int noise_regions = 0;   // spurious proposals added per screen
    uint64_t seed = 7;
};

struct BackendConfig {
    std::string endpoint = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    double temperature = 0.0;
    int timeout_seconds = 30;
    int max_retries = 3;
    std::string api_key_env = "ADSCOUT_API_KEY";
};

struct EpisodeLimits {
    int max_steps = 60;
    double max_seconds = 300.0;
    double event_interval_seconds = 5.0;
    int max_ads = 0; // 0 = unlimited
};

struct EngineConfig {
    SdkSignatureConfig signatures;
    std::vector<std::string> ad_domains;
    std::vector<std::string> traffic_keywords;
    std::vector<std::string> ui_ad_keywords;
    std::vector<std::string> media_container_classes;

    double alpha = 0.3;           // belief smoothing
    double initial_node_score = 0.10;
    double tau = 0.95;            // memory dedup threshold
    double lambda = 0.1;          // exploration penalty weight
    int k_base = 5;               // history window base
    int retrieval_k = 3;
    double iou_threshold = 0.5;
    double correlation_delta_seconds = 5.0;
    std::map<std::string, double> caption_score_map; // tag -> semantic gain

    EpisodeLimits limits;
    DetectorConfig detector;
    BackendConfig backend;
};

// Built-in defaults used when no config file is given; mirrors
// fixtures/config/default.json.
EngineConfig default_config();

EngineConfig load_config(const std::string& path);

} // namespace adscout
