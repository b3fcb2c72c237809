#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace arbor {

// The fixed set of prompt templates the engine uses. Templates live as plain
// text files in a prompt directory and contain {placeholder} slots.
enum class PromptKind {
    GenerateSupport,
    GenerateAttack,
    IntrinsicSupport,
    IntrinsicAttack,
    IntrinsicClaim,
    Compare,
    CompareSwapped,  // same judgement, attacker presented first (order-bias probe)
    Direct,
    Cot,
};

const char* to_string(PromptKind k);
const char* template_filename(PromptKind k);

using PromptFields = std::vector<std::pair<std::string, std::string>>;

// A fully rendered prompt, plus the structured inputs it was rendered from.
// Backends that talk to a real model use `text`; the deterministic mock keys
// off `kind` and `fields`; traces record `text` verbatim.
struct Prompt {
    PromptKind kind = PromptKind::Direct;
    std::string text;
    PromptFields fields;
};

class PromptLibrary {
public:
    // Loads all templates from `dir`. Throws ConfigError if any file is
    // missing or unreadable.
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& raw(PromptKind k) const;
    const std::filesystem::path& directory() const { return dir_; }

    // Replaces each {name} from `fields` in the template. Throws ConfigError
    // if the rendered text still contains an unfilled {placeholder}.
    Prompt render(PromptKind k, const PromptFields& fields) const;

private:
    std::filesystem::path dir_;
    std::map<PromptKind, std::string> templates_;
};

}  // namespace arbor
