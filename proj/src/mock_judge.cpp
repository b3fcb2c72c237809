#include "arbor/mock_judge.hpp"

#include <sstream>

#include "arbor/errors.hpp"
#include "arbor/util.hpp"

namespace arbor {

namespace {

const std::string kSep = "\x1f";

std::string field_value(const Prompt& prompt, const std::string& name) {
    for (const auto& [k, v] : prompt.fields)
        if (k == name) return v;
    throw ConfigError(std::string("mock backend: prompt '") + to_string(prompt.kind) +
                      "' is missing field '" + name + "'");
}

// Default-precision ostream formatting gives minimal forms for the scores
// the mock emits ("0.5", "0.725", ...).
std::string format_decimal(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

// Small phrase tables for synthesised argument text. Content is immaterial;
// the texts only need to be non-empty, readable, and deterministic.
constexpr const char* kOpeners[8] = {
    "Independent evidence indicates",  "A careful reading shows",
    "Domain experts maintain",         "Recent analysis suggests",
    "Historical records confirm",      "Practical experience shows",
    "A straightforward check shows",   "Field observations indicate",
};
constexpr const char* kCores[8] = {
    "the key premise holds",          "the central mechanism is real",
    "the main objection misses",      "the cited figures line up",
    "the causal link is solid",       "the definition fits this case",
    "the best source is reliable",    "the underlying trend is stable",
};

}  // namespace

std::string mock_compare_key(const std::string& parent, const std::string& support,
                             const std::string& attack) {
    return parent + kSep + support + kSep + attack;
}

MockJudge::MockJudge(std::uint64_t seed, MockOverrides overrides)
    : seed_(seed), overrides_(std::move(overrides)) {}

std::string MockJudge::name() const { return "mock"; }

std::uint64_t MockJudge::hash_fields(const char* kind_tag, const Prompt& prompt) const {
    std::string material = std::to_string(seed_) + kSep + kind_tag;
    for (const auto& [k, v] : prompt.fields) material += kSep + k + "=" + v;
    return fnv1a64(material);
}

std::string MockJudge::complete(const Prompt& prompt) {
    if (auto it = overrides_.forced_response.find(to_string(prompt.kind));
        it != overrides_.forced_response.end())
        return it->second;

    switch (prompt.kind) {
        case PromptKind::Compare:
        case PromptKind::CompareSwapped: {
            // Both presentation orders hash the same semantic triple, so the
            // order probe and repeat judgements agree with the original.
            std::string parent = field_value(prompt, "parent");
            std::string support = field_value(prompt, "support");
            std::string attack = field_value(prompt, "attack");

            JudgeOutcome outcome;
            if (support == attack) {
                outcome = JudgeOutcome::Tie;
            } else if (auto it =
                           overrides_.compare_by_key.find(mock_compare_key(parent, support, attack));
                       it != overrides_.compare_by_key.end()) {
                outcome = it->second;
            } else if (overrides_.compare_default) {
                outcome = *overrides_.compare_default;
            } else {
                Prompt canonical = prompt;
                canonical.fields = {{"parent", parent}, {"support", support}, {"attack", attack}};
                std::uint64_t h = hash_fields("compare", canonical);
                int bucket = static_cast<int>(h % 10);
                outcome = bucket < 4   ? JudgeOutcome::SupportWins
                          : bucket < 8 ? JudgeOutcome::AttackWins
                                       : JudgeOutcome::Tie;
            }
            switch (outcome) {
                case JudgeOutcome::SupportWins:
                    return "The supporting argument carries more weight here.\nSUPPORT";
                case JudgeOutcome::AttackWins:
                    return "The attacking argument carries more weight here.\nATTACK";
                case JudgeOutcome::Tie:
                    return "Neither argument clearly prevails.\nTIE";
            }
            break;
        }

        case PromptKind::IntrinsicSupport:
        case PromptKind::IntrinsicAttack:
        case PromptKind::IntrinsicClaim: {
            std::string subject = prompt.kind == PromptKind::IntrinsicClaim
                                      ? field_value(prompt, "claim")
                                      : field_value(prompt, "argument");
            double value = overrides_.intrinsic_default.value_or(0.5);
            if (auto it = overrides_.intrinsic_by_argument.find(subject);
                it != overrides_.intrinsic_by_argument.end())
                value = it->second;
            return format_decimal(value);
        }

        case PromptKind::Direct:
        case PromptKind::Cot: {
            std::string claim = field_value(prompt, "claim");
            bool yes;
            if (auto it = overrides_.direct_by_claim.find(claim);
                it != overrides_.direct_by_claim.end()) {
                yes = it->second;
            } else {
                yes = (hash_fields("verdict", prompt) & 1ULL) == 0;
            }
            if (prompt.kind == PromptKind::Direct) return yes ? "Yes" : "No";
            return std::string("Weighing the statement step by step against what is known.\n") +
                   "The balance of considerations points one way.\n" +
                   (yes ? "Answer: Yes" : "Answer: No");
        }

        case PromptKind::GenerateSupport:
        case PromptKind::GenerateAttack: {
            std::uint64_t h = hash_fields(to_string(prompt.kind), prompt);
            const char* opener = kOpeners[(h >> 8) & 7];
            const char* core = kCores[(h >> 16) & 7];
            bool support = prompt.kind == PromptKind::GenerateSupport;
            std::ostringstream text;
            text << opener << " that " << core
                 << (support ? ", which backs the statement" : ", which undercuts the statement")
                 << " [mk-" << hex64(h).substr(8) << "].";
            return text.str();
        }
    }
    throw ConfigError("mock backend: unhandled prompt kind");
}

}  // namespace arbor
