#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "arbor/core.hpp"
#include "arbor/prompts.hpp"

namespace arbor {

// ---------------------------------------------------------------------------
// Model backend.
// ---------------------------------------------------------------------------

struct BackendConfig {
    std::string endpoint_url;   // e.g. http://localhost:8000/v1
    std::string model_name;
    // Decoding parameters; the defaults are the engine's standard settings.
    double temperature = 0.2;
    int max_new_tokens = 512;
    double top_p = 0.95;
    // API key is read from this environment variable (never passed as a
    // flag so it cannot leak into process listings or traces). Empty or
    // unset variable => no Authorization header.
    std::string api_key_env = "ARBOR_API_KEY";
    int max_attempts = 3;  // total tries per request, exponential backoff
    std::chrono::milliseconds retry_base_delay{1000};
    std::chrono::milliseconds timeout{120000};
};

// A completion backend. Implementations must be safe for concurrent
// complete() calls from several threads.
class JudgeBackend {
public:
    virtual ~JudgeBackend() = default;
    // Returns the raw completion text. Throws BackendError on transport
    // failure after retries.
    virtual std::string complete(const Prompt& prompt) = 0;
    virtual std::string name() const = 0;
};

// Decorator counting calls per prompt kind; used by tests and run statistics.
class CountingBackend : public JudgeBackend {
public:
    explicit CountingBackend(std::shared_ptr<JudgeBackend> inner);

    std::string complete(const Prompt& prompt) override;
    std::string name() const override;

    int count(PromptKind k) const;
    int total() const;

private:
    std::shared_ptr<JudgeBackend> inner_;
    mutable std::mutex mu_;
    std::map<PromptKind, int> counts_;
};

// ---------------------------------------------------------------------------
// Response parsing (two tiers + one reprompt).
//
// Tier 1: the last non-empty line of the response, stripped of surrounding
//         whitespace/punctuation (and an optional "answer:" prefix), matches
//         a token case-insensitively.
// Tier 2: exactly one of the expected tokens occurs exactly once in the whole
//         response (word-boundary, case-insensitive).
// If both tiers fail, the judge is reprompted once with a stricter
// instruction appended; a second failure raises ParseError.
// ---------------------------------------------------------------------------

// Returns the matched token (canonical spelling from `tokens`) or nullopt.
std::optional<std::string> parse_token(const std::string& response,
                                       const std::vector<std::string>& tokens);

// Same two tiers for a bare decimal number. Performs no range check.
std::optional<double> parse_decimal(const std::string& response);

// ---------------------------------------------------------------------------
// Judge operations.
// ---------------------------------------------------------------------------

enum class JudgeOutcome { SupportWins, AttackWins, Tie };

const char* to_string(JudgeOutcome o);
JudgeOutcome judge_outcome_from_string(const std::string& s);  // throws ConfigError

// Audit record of one logical judge interaction: the first prompt sent and
// every raw response received (two entries when a reprompt was needed).
struct JudgeCall {
    std::string prompt;
    std::vector<std::string> responses;
};

struct CompareResult {
    JudgeOutcome outcome = JudgeOutcome::Tie;
    JudgeCall call;
};

struct IntrinsicResult {
    double value = 0.0;
    JudgeCall call;
};

struct YesNoResult {
    bool yes = false;
    JudgeCall call;
};

// Head-to-head judgement of one supporting vs one attacking argument under a
// shared parent statement. `swapped` selects the presentation order probe.
CompareResult compare(const std::string& parent_text, const std::string& support_text,
                      const std::string& attack_text, JudgeBackend& judge,
                      const PromptLibrary& prompts, bool swapped = false);

// Intrinsic strength of an argument relative to its parent. The score must
// lie in [0,1]; an out-of-range score triggers the reprompt and then a
// ParseError — it is never clamped.
IntrinsicResult intrinsic_strength(const std::string& parent_text,
                                   const std::string& argument_text, Polarity polarity,
                                   JudgeBackend& judge, const PromptLibrary& prompts);

// Intrinsic plausibility of the bare claim (used for the tree root).
IntrinsicResult intrinsic_claim(const std::string& claim_text, JudgeBackend& judge,
                                const PromptLibrary& prompts);

// Single-shot verdicts used by the baseline methods.
YesNoResult ask_direct(const std::string& claim_text, JudgeBackend& judge,
                       const PromptLibrary& prompts);
YesNoResult ask_cot(const std::string& claim_text, JudgeBackend& judge,
                    const PromptLibrary& prompts);

// ---------------------------------------------------------------------------
// Evaluator routing: SELF scores the tree with the same backend that
// generated it, SEPARATE routes every judging call (intrinsic scores and
// head-to-head comparisons, including the root score) to a second backend.
// ---------------------------------------------------------------------------

enum class EvaluatorMode { Self, Separate };

const char* to_string(EvaluatorMode m);
EvaluatorMode evaluator_mode_from_string(const std::string& s);  // throws ConfigError

}  // namespace arbor
