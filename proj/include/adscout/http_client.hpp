#pragma once

#include "adscout/config.hpp"
#include "adscout/memory.hpp"
#include "adscout/policy.hpp"

#include <stdexcept>
#include <string>

namespace adscout {

class HttpError : public std::runtime_error {
public:
    explicit HttpError(const std::string& what) : std::runtime_error(what) {}
};

// Minimal chat-completion client: bearer auth from the environment,
// connect/read timeouts, capped exponential retries on 429/5xx and
// transport failures. Requests and responses go to an optional wire log.
class ChatCompletionClient {
public:
    explicit ChatCompletionClient(BackendConfig config, int retry_base_ms = 200);

    std::string complete(const std::string& system, const std::string& user);

    void set_wire_log(const std::string& path) { wire_log_path_ = path; }

private:
    std::string post_json(const std::string& path, const std::string& body);

    BackendConfig config_;
    int retry_base_ms_;
    std::string base_url_;
    std::string path_prefix_;
    std::string wire_log_path_;
};

class RemoteChatBackend : public DecisionBackend {
public:
    explicit RemoteChatBackend(BackendConfig config, int retry_base_ms = 200)
        : client_(std::move(config), retry_base_ms) {}
    std::string complete(const DecisionQuery& query) override;

    ChatCompletionClient& client() { return client_; }

private:
    ChatCompletionClient client_;
};

class RemoteEmbedder : public TextEmbedder {
public:
    RemoteEmbedder(BackendConfig config, size_t dimension, int retry_base_ms = 200);
    size_t dimension() const override { return dim_; }
    std::vector<float> embed(const std::string& text) override;

private:
    BackendConfig config_;
    size_t dim_;
    int retry_base_ms_;
};

} // namespace adscout
