#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arbor/core.hpp"
#include "arbor/errors.hpp"
#include "arbor/judging.hpp"
#include "arbor/prompts.hpp"

namespace arbor {

// Raised when tree construction fails part-way. Carries the tree as built up
// to the last completed level, and the error category of the root cause
// (backend transport vs unusable generator output).
class GenerationError : public Error {
public:
    GenerationError(ErrorCode code, const std::string& message, ReasoningTree partial)
        : Error(code, message), partial_(std::move(partial)) {}

    const ReasoningTree& partial_tree() const noexcept { return partial_; }

private:
    ReasoningTree partial_;
};

struct GenerationConfig {
    int depth = 1;
    int breadth = 1;
    // Shapes beyond depth/breadth 2 explode quadratically in judge calls and
    // are refused unless explicitly unlocked.
    bool allow_large = false;
    int parallelism = 8;           // in-flight generation requests per level
    std::uint64_t schedule_seed = 0;  // nonzero => shuffled dispatch order
};

// Enforces depth >= 0, breadth >= 1 and the size cap. Throws ConfigError.
void validate(const GenerationConfig& cfg);

struct GeneratedArgument {
    std::string text;
    JudgeCall call;
};

// Audit record for one generated node.
struct GenerationRecord {
    std::string node_id;
    std::string prompt;
    std::vector<std::string> responses;
};

// Asks the generator for one new argument of `polarity` under `parent_text`.
// Texts of earlier siblings of the same polarity are included in the prompt
// with an instruction to make a different point (diversity pressure).
// A blank completion is retried once; a second blank raises ParseError.
GeneratedArgument generate_argument(const std::string& parent_text, Polarity polarity,
                                    const std::vector<std::string>& prior_siblings,
                                    JudgeBackend& generator, const PromptLibrary& prompts);

struct BuildResult {
    ReasoningTree tree;
    std::vector<GenerationRecord> log;  // one entry per generated node, id order
};

// Grows the complete (depth, breadth) argument tree under `claim_text`,
// level by level. Node ids follow the <parent>.s<k>/<parent>.a<k> scheme.
// On failure, throws GenerationError carrying the partial tree.
BuildResult build_tree(const std::string& claim_text, const GenerationConfig& cfg,
                       JudgeBackend& generator, const PromptLibrary& prompts);

}  // namespace arbor
