#include "arbor/http_backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "arbor/errors.hpp"

namespace arbor {

namespace {

using nlohmann::json;

// Splits "http://host:port/v1" into ("http://host:port", "/v1").
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint URL '" + url + "' must start with http:// or https://");
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw ConfigError("endpoint URL '" + url + "' has unsupported scheme '" + scheme + "'");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string base = url.substr(0, path_start);
    std::string path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {base, path};
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint_url.empty())
        throw ConfigError("model backend requires an endpoint URL");
    if (cfg_.model_name.empty())
        throw ConfigError("model backend requires a model name");
    std::tie(host_, path_base_) = split_url(cfg_.endpoint_url);
}

std::string HttpBackend::name() const { return "http:" + cfg_.model_name; }

std::string HttpBackend::complete(const Prompt& prompt) {
    json body{
        {"model", cfg_.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt.text}}})},
        {"temperature", cfg_.temperature},
        {"max_tokens", cfg_.max_new_tokens},
        {"top_p", cfg_.top_p},
    };
    const std::string payload = body.dump();
    const std::string path = path_base_ + "/chat/completions";

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        // Key comes from the environment only; never from flags or config
        // files, so it cannot end up in traces or process listings.
        if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::mt19937_64 jitter_rng(std::random_device{}());
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, cfg_.max_attempts); ++attempt) {
        if (attempt > 1) {
            // base * 2^(attempt-2), +/-25% jitter
            auto base = cfg_.retry_base_delay.count();
            double delay = static_cast<double>(base) * std::pow(2.0, attempt - 2);
            std::uniform_real_distribution<double> dist(0.75, 1.25);
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long>(delay * dist(jitter_rng))));
        }

        // A fresh client per request keeps this method safely callable from
        // several threads at once.
        httplib::Client client(host_);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
        client.set_connection_timeout(secs.count(), 0);
        client.set_read_timeout(secs.count(), 0);
        client.set_write_timeout(secs.count(), 0);

        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_error = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            json reply = json::parse(res->body);
            const auto& choices = reply.at("choices");
            if (!choices.is_array() || choices.empty())
                throw std::runtime_error("empty choices array");
            return choices.at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            last_error = std::string("malformed completion payload: ") + e.what();
            continue;
        }
    }
    throw BackendError("model server '" + host_ + "' failed after " +
                       std::to_string(std::max(1, cfg_.max_attempts)) + " attempts (" +
                       last_error + ")");
}

}  // namespace arbor
