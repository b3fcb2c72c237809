#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arbor {

// Error categories. The numeric values double as CLI process exit codes.
enum class ErrorCode : int {
    Generic = 1,    // unspecified failure
    Config = 2,     // invalid configuration or input files
    Backend = 3,    // model backend unreachable / HTTP failure after retries
    Parse = 4,      // model response unparseable after the reprompt
    Integrity = 5,  // trace verification failed or trace is malformed
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(ErrorCode::Config, message) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string& message) : Error(ErrorCode::Backend, message) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(ErrorCode::Parse, message) {}
};

// Trace verification or schema failure. Carries the ids of the diverging
// nodes (empty for structural/schema problems).
class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message, std::vector<std::string> nodes = {})
        : Error(ErrorCode::Integrity, message), nodes_(std::move(nodes)) {}

    const std::vector<std::string>& divergent_nodes() const noexcept { return nodes_; }

private:
    std::vector<std::string> nodes_;
};

}  // namespace arbor
