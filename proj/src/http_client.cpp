#include "adscout/http_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace adscout {

using nlohmann::json;

namespace {

void split_endpoint(const std::string& endpoint, std::string& base, std::string& prefix) {
    const size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw HttpError("endpoint must include a scheme: " + endpoint);
    const size_t slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) {
        base = endpoint;
        prefix.clear();
    } else {
        base = endpoint.substr(0, slash);
        prefix = endpoint.substr(slash);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

bool retriable_status(int status) {
    return status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

std::string post_with_retries(const std::string& base_url, const std::string& path,
                              const std::string& body, const BackendConfig& config,
                              int retry_base_ms, const std::string& wire_log_path) {
    httplib::Client client(base_url);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            const int delay = retry_base_ms * (1 << std::min(attempt - 1, 4));
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min(delay, 5000)));
        }
        auto result = client.Post(path, headers, body, "application/json");
        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        if (!wire_log_path.empty()) {
            std::ofstream log(wire_log_path, std::ios::app);
            log << json{{"path", path}, {"status", result->status}, {"request", body},
                        {"response", result->body}}
                       .dump()
                << "\n";
        }
        if (result->status == 200) return result->body;
        last_error = "status " + std::to_string(result->status) + ": " + result->body;
        if (!retriable_status(result->status)) break;
    }
    throw HttpError("POST " + base_url + path + " failed after retries (" + last_error + ")");
}

} // namespace

ChatCompletionClient::ChatCompletionClient(BackendConfig config, int retry_base_ms)
    : config_(std::move(config)), retry_base_ms_(retry_base_ms) {
    split_endpoint(config_.endpoint, base_url_, path_prefix_);
}

std::string ChatCompletionClient::post_json(const std::string& path, const std::string& body) {
    return post_with_retries(base_url_, path_prefix_ + path, body, config_, retry_base_ms_,
                             wire_log_path_);
}

std::string ChatCompletionClient::complete(const std::string& system, const std::string& user) {
    json request{{"model", config_.model},
                 {"temperature", config_.temperature},
                 {"messages", json::array({json{{"role", "system"}, {"content", system}},
                                           json{{"role", "user"}, {"content", user}}})}};
    const std::string body = post_json("/chat/completions", request.dump());
    json reply = json::parse(body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply.at("choices").empty()) {
        throw HttpError("malformed chat completion reply");
    }
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
}

std::string RemoteChatBackend::complete(const DecisionQuery& query) {
    try {
        return client_.complete(query.system, query.user);
    } catch (const HttpError& e) {
        throw EpisodeAbort(e.what());
    }
}

RemoteEmbedder::RemoteEmbedder(BackendConfig config, size_t dimension, int retry_base_ms)
    : config_(std::move(config)), dim_(dimension), retry_base_ms_(retry_base_ms) {}

std::vector<float> RemoteEmbedder::embed(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("cannot embed empty text");
    std::string base;
    std::string prefix;
    split_endpoint(config_.endpoint, base, prefix);
    json request{{"model", config_.model}, {"input", text}};
    const std::string body =
        post_with_retries(base, prefix + "/embeddings", request.dump(), config_, retry_base_ms_, "");
    json reply = json::parse(body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("data") || reply.at("data").empty()) {
        throw HttpError("malformed embedding reply");
    }
    std::vector<float> v = reply.at("data").at(0).at("embedding").get<std::vector<float>>();
    if (v.size() != dim_) throw HttpError("embedding dimension mismatch");
    double norm2 = 0.0;
    for (float x : v) norm2 += static_cast<double>(x) * x;
    if (norm2 <= 0.0) throw HttpError("embedding backend returned a zero vector");
    const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
    for (auto& x : v) x *= inv;
    return v;
}

} // namespace adscout
