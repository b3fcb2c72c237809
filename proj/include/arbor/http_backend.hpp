#pragma once

#include "arbor/judging.hpp"

namespace arbor {

// Client for an OpenAI-compatible chat-completions server (e.g. a vLLM
// deployment). POSTs {endpoint_url}/chat/completions with the configured
// decoding parameters and returns the first choice's message content.
// Transport failures and non-2xx statuses are retried with jittered
// exponential backoff up to cfg.max_attempts, then raise BackendError.
class HttpBackend : public JudgeBackend {
public:
    explicit HttpBackend(BackendConfig cfg);  // throws ConfigError on bad URL

    std::string complete(const Prompt& prompt) override;
    std::string name() const override;

    const BackendConfig& config() const { return cfg_; }

private:
    BackendConfig cfg_;
    std::string host_;       // scheme://authority
    std::string path_base_;  // path prefix of the endpoint URL ("" or "/v1", ...)
};

}  // namespace arbor
