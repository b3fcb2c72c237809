#include "arbor/judging.hpp"

#include <cstdlib>

#include "arbor/errors.hpp"
#include "arbor/util.hpp"

namespace arbor {

// ---------------------------------------------------------------------------
// CountingBackend
// ---------------------------------------------------------------------------

CountingBackend::CountingBackend(std::shared_ptr<JudgeBackend> inner)
    : inner_(std::move(inner)) {}

std::string CountingBackend::complete(const Prompt& prompt) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++counts_[prompt.kind];
    }
    return inner_->complete(prompt);
}

std::string CountingBackend::name() const { return inner_->name() + "+counting"; }

int CountingBackend::count(PromptKind k) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
}

int CountingBackend::total() const {
    std::lock_guard<std::mutex> lock(mu_);
    int t = 0;
    for (const auto& [k, v] : counts_) {
        (void)k;
        t += v;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

// Strips surrounding whitespace and light punctuation, plus an optional
// leading "answer:"/"answer" prefix, so "Answer: Yes." matches "Yes".
std::string normalize_line(std::string_view line) {
    std::string s = trim(line);
    auto strip_edges = [&](std::string& v) {
        const std::string punct = ".,:;!?\"'()[]*`";
        std::size_t b = 0, e = v.size();
        while (b < e && punct.find(v[b]) != std::string::npos) ++b;
        while (e > b && punct.find(v[e - 1]) != std::string::npos) --e;
        v = v.substr(b, e - b);
    };
    strip_edges(s);
    std::string lower = to_lower(s);
    const std::string prefix = "answer";
    if (lower.rfind(prefix, 0) == 0) {
        std::string rest = trim(s.substr(prefix.size()));
        if (!rest.empty() && (rest[0] == ':' || rest[0] == '-')) {
            s = trim(rest.substr(1));
            strip_edges(s);
        }
    }
    return s;
}

std::optional<std::string> last_nonempty_line(const std::string& text) {
    auto lines = split_lines(text);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (!trim_view(*it).empty()) return *it;
    }
    return std::nullopt;
}

// Counts case-insensitive word-boundary occurrences of `token` in `text`.
int count_word_occurrences(const std::string& text, const std::string& token) {
    std::string haystack = to_lower(text);
    std::string needle = to_lower(token);
    if (needle.empty()) return 0;
    int count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word_char(static_cast<unsigned char>(haystack[pos - 1]));
        std::size_t end = pos + needle.size();
        bool right_ok =
            end >= haystack.size() || !is_word_char(static_cast<unsigned char>(haystack[end]));
        if (left_ok && right_ok) ++count;
        pos += 1;
    }
    return count;
}

std::optional<double> parse_full_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (errno != 0 || end != begin + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::optional<std::string> parse_token(const std::string& response,
                                       const std::vector<std::string>& tokens) {
    // Tier 1: final non-empty line.
    if (auto line = last_nonempty_line(response)) {
        std::string norm = to_lower(normalize_line(*line));
        for (const auto& t : tokens)
            if (norm == to_lower(t)) return t;
    }
    // Tier 2: unique occurrence anywhere; every other token absent.
    const std::string* found = nullptr;
    for (const auto& t : tokens) {
        int n = count_word_occurrences(response, t);
        if (n == 0) continue;
        if (n > 1 || found) return std::nullopt;  // ambiguous
        found = &t;
    }
    if (found) return *found;
    return std::nullopt;
}

std::optional<double> parse_decimal(const std::string& response) {
    // Tier 1: final non-empty line parses fully as a number.
    if (auto line = last_nonempty_line(response)) {
        if (auto v = parse_full_double(normalize_line(*line))) return v;
    }
    // Tier 2: exactly one numeric token in the whole response.
    std::optional<double> found;
    std::size_t i = 0;
    while (i < response.size()) {
        unsigned char c = static_cast<unsigned char>(response[i]);
        if (std::isdigit(c) ||
            (c == '.' && i + 1 < response.size() &&
             std::isdigit(static_cast<unsigned char>(response[i + 1])))) {
            std::size_t j = i;
            bool seen_dot = false;
            while (j < response.size()) {
                unsigned char d = static_cast<unsigned char>(response[j]);
                if (std::isdigit(d)) {
                    ++j;
                } else if (d == '.' && !seen_dot && j + 1 < response.size() &&
                           std::isdigit(static_cast<unsigned char>(response[j + 1]))) {
                    seen_dot = true;
                    ++j;
                } else {
                    break;
                }
            }
            // Reject tokens glued to word characters ("v1.2" or "2x").
            bool left_ok = i == 0 || !is_word_char(static_cast<unsigned char>(response[i - 1]));
            bool right_ok =
                j >= response.size() || !is_word_char(static_cast<unsigned char>(response[j]));
            if (left_ok && right_ok) {
                if (found) return std::nullopt;  // more than one number
                found = parse_full_double(response.substr(i, j - i));
                if (!found) return std::nullopt;
            }
            i = j;
        } else {
            ++i;
        }
    }
    return found;
}

// ---------------------------------------------------------------------------
// Judge operations
// ---------------------------------------------------------------------------

const char* to_string(JudgeOutcome o) {
    switch (o) {
        case JudgeOutcome::SupportWins: return "SUPPORT_WINS";
        case JudgeOutcome::AttackWins: return "ATTACK_WINS";
        case JudgeOutcome::Tie: return "TIE";
    }
    return "TIE";
}

JudgeOutcome judge_outcome_from_string(const std::string& s) {
    if (s == "SUPPORT_WINS") return JudgeOutcome::SupportWins;
    if (s == "ATTACK_WINS") return JudgeOutcome::AttackWins;
    if (s == "TIE") return JudgeOutcome::Tie;
    throw ConfigError("unknown judge outcome '" + s + "'");
}

namespace {

constexpr const char* kCompareReprompt =
    "\n\nYour previous reply could not be interpreted. Reply with exactly one word and "
    "nothing else: SUPPORT, ATTACK, or TIE.";
constexpr const char* kDecimalReprompt =
    "\n\nYour previous reply could not be interpreted. Reply with a single decimal number "
    "between 0 and 1 and nothing else.";
constexpr const char* kYesNoReprompt =
    "\n\nYour previous reply could not be interpreted. Reply with exactly one word and "
    "nothing else: Yes or No.";

// Runs prompt -> parse with one stricter reprompt. `parse` returns nullopt to
// reject a response. Records every raw response in the returned JudgeCall.
template <typename T>
std::pair<T, JudgeCall> judged_exchange(JudgeBackend& judge, const Prompt& prompt,
                                        const char* reprompt_suffix,
                                        const std::function<std::optional<T>(const std::string&)>& parse,
                                        const char* what) {
    JudgeCall call;
    call.prompt = prompt.text;
    std::string first = judge.complete(prompt);
    call.responses.push_back(first);
    if (auto v = parse(first)) return {*v, std::move(call)};

    Prompt retry = prompt;
    retry.text += reprompt_suffix;
    std::string second = judge.complete(retry);
    call.responses.push_back(second);
    if (auto v = parse(second)) return {*v, std::move(call)};

    throw ParseError(std::string("judge response for ") + what +
                     " could not be parsed after reprompt: '" + trim(second) + "'");
}

std::optional<JudgeOutcome> parse_compare(const std::string& response) {
    auto tok = parse_token(response, {"SUPPORT", "ATTACK", "TIE"});
    if (!tok) return std::nullopt;
    if (*tok == "SUPPORT") return JudgeOutcome::SupportWins;
    if (*tok == "ATTACK") return JudgeOutcome::AttackWins;
    return JudgeOutcome::Tie;
}

// In-range check happens inside the parser so an out-of-range score follows
// the same reprompt-then-error path as garbage output.
std::optional<double> parse_unit_decimal(const std::string& response) {
    auto v = parse_decimal(response);
    if (!v || *v < 0.0 || *v > 1.0) return std::nullopt;
    return v;
}

std::optional<bool> parse_yes_no(const std::string& response) {
    auto tok = parse_token(response, {"Yes", "No"});
    if (!tok) return std::nullopt;
    return *tok == "Yes";
}

}  // namespace

CompareResult compare(const std::string& parent_text, const std::string& support_text,
                      const std::string& attack_text, JudgeBackend& judge,
                      const PromptLibrary& prompts, bool swapped) {
    Prompt p = prompts.render(swapped ? PromptKind::CompareSwapped : PromptKind::Compare,
                              {{"parent", parent_text},
                               {"support", support_text},
                               {"attack", attack_text}});
    auto [outcome, call] = judged_exchange<JudgeOutcome>(
        judge, p, kCompareReprompt, parse_compare, "head-to-head comparison");
    return CompareResult{outcome, std::move(call)};
}

IntrinsicResult intrinsic_strength(const std::string& parent_text,
                                   const std::string& argument_text, Polarity polarity,
                                   JudgeBackend& judge, const PromptLibrary& prompts) {
    PromptKind kind = polarity == Polarity::Support ? PromptKind::IntrinsicSupport
                                                    : PromptKind::IntrinsicAttack;
    Prompt p = prompts.render(kind, {{"parent", parent_text}, {"argument", argument_text}});
    auto [value, call] = judged_exchange<double>(judge, p, kDecimalReprompt,
                                                 parse_unit_decimal, "intrinsic strength");
    return IntrinsicResult{value, std::move(call)};
}

IntrinsicResult intrinsic_claim(const std::string& claim_text, JudgeBackend& judge,
                                const PromptLibrary& prompts) {
    Prompt p = prompts.render(PromptKind::IntrinsicClaim, {{"claim", claim_text}});
    auto [value, call] = judged_exchange<double>(judge, p, kDecimalReprompt,
                                                 parse_unit_decimal, "claim plausibility");
    return IntrinsicResult{value, std::move(call)};
}

YesNoResult ask_direct(const std::string& claim_text, JudgeBackend& judge,
                       const PromptLibrary& prompts) {
    Prompt p = prompts.render(PromptKind::Direct, {{"claim", claim_text}});
    auto [yes, call] =
        judged_exchange<bool>(judge, p, kYesNoReprompt, parse_yes_no, "direct verdict");
    return YesNoResult{yes, std::move(call)};
}

YesNoResult ask_cot(const std::string& claim_text, JudgeBackend& judge,
                    const PromptLibrary& prompts) {
    Prompt p = prompts.render(PromptKind::Cot, {{"claim", claim_text}});
    auto [yes, call] =
        judged_exchange<bool>(judge, p, kYesNoReprompt, parse_yes_no, "reasoned verdict");
    return YesNoResult{yes, std::move(call)};
}

const char* to_string(EvaluatorMode m) {
    return m == EvaluatorMode::Self ? "self" : "separate";
}

EvaluatorMode evaluator_mode_from_string(const std::string& s) {
    if (s == "self") return EvaluatorMode::Self;
    if (s == "separate") return EvaluatorMode::Separate;
    throw ConfigError("unknown evaluator mode '" + s + "' (expected 'self' or 'separate')");
}

}  // namespace arbor
