#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "arbor/judging.hpp"

namespace arbor {

// Behaviour overrides for the mock backend. Lookup keys are argument /
// claim texts, which the test rigs know because generation is deterministic.
struct MockOverrides {
    // Head-to-head outcomes. Key: parent \x1f support \x1f attack.
    std::optional<JudgeOutcome> compare_default;
    std::map<std::string, JudgeOutcome> compare_by_key;

    // Intrinsic scores (also used for the bare-claim score, keyed by claim
    // text). Values are emitted verbatim through the decimal formatter.
    std::optional<double> intrinsic_default;  // unset => 0.5
    std::map<std::string, double> intrinsic_by_argument;

    // Direct / chain-of-thought verdicts by claim text.
    std::map<std::string, bool> direct_by_claim;

    // Verbatim raw response per prompt kind name (see to_string(PromptKind)),
    // e.g. to exercise parse-failure paths. Applied before everything else.
    std::map<std::string, std::string> forced_response;
};

std::string mock_compare_key(const std::string& parent, const std::string& support,
                             const std::string& attack);

// Deterministic offline stand-in for a model server. Every reply is a pure
// function of (seed, prompt kind, prompt fields, overrides): no clocks, no
// global RNG, no call-order dependence, identical across platforms. Two
// instances with the same seed and overrides are interchangeable.
class MockJudge : public JudgeBackend {
public:
    explicit MockJudge(std::uint64_t seed, MockOverrides overrides = {});

    std::string complete(const Prompt& prompt) override;
    std::string name() const override;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t hash_fields(const char* kind_tag, const Prompt& prompt) const;

    std::uint64_t seed_;
    MockOverrides overrides_;
};

}  // namespace arbor
