#include "arbor/generation.hpp"

#include <functional>

#include "arbor/errors.hpp"
#include "arbor/util.hpp"

namespace arbor {

namespace {

constexpr int kMaxUnlockedShape = 2;
constexpr const char* kEmptyReprompt =
    "\n\nYour previous reply was empty. Reply with the argument sentence only.";

std::string prior_siblings_binding(const std::vector<std::string>& prior) {
    if (prior.empty()) return "";
    std::string out = "\n\nAlready proposed arguments:";
    for (const auto& text : prior) out += "\n- " + text;
    out +=
        "\nYour new argument must make a clearly different point from every argument "
        "listed above.";
    return out;
}

}  // namespace

void validate(const GenerationConfig& cfg) {
    if (cfg.depth < 0) throw ConfigError("depth must be >= 0");
    if (cfg.breadth < 1) throw ConfigError("breadth must be >= 1");
    if (!cfg.allow_large &&
        (cfg.depth > kMaxUnlockedShape || cfg.breadth > kMaxUnlockedShape))
        throw ConfigError(
            "depth/breadth beyond 2 multiplies judge calls steeply; pass the explicit "
            "large-tree override to unlock");
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    // Even with the override, the shape must stay materializable.
    try {
        node_count(cfg.depth, cfg.breadth);
    } catch (const std::overflow_error& e) {
        throw ConfigError(std::string("tree shape is not materializable: ") + e.what());
    }
}

GeneratedArgument generate_argument(const std::string& parent_text, Polarity polarity,
                                    const std::vector<std::string>& prior_siblings,
                                    JudgeBackend& generator, const PromptLibrary& prompts) {
    PromptKind kind = polarity == Polarity::Support ? PromptKind::GenerateSupport
                                                    : PromptKind::GenerateAttack;
    Prompt p = prompts.render(kind, {{"parent", parent_text},
                                     {"prior_siblings", prior_siblings_binding(prior_siblings)}});
    JudgeCall call;
    call.prompt = p.text;

    std::string first = generator.complete(p);
    call.responses.push_back(first);
    if (std::string text = trim(first); !text.empty())
        return GeneratedArgument{std::move(text), std::move(call)};

    Prompt retry = p;
    retry.text += kEmptyReprompt;
    std::string second = generator.complete(retry);
    call.responses.push_back(second);
    if (std::string text = trim(second); !text.empty())
        return GeneratedArgument{std::move(text), std::move(call)};

    throw ParseError("generator returned an empty argument twice for a " +
                     std::string(to_string(polarity)) + " of: " + parent_text);
}

BuildResult build_tree(const std::string& claim_text, const GenerationConfig& cfg,
                       JudgeBackend& generator, const PromptLibrary& prompts) {
    validate(cfg);
    if (trim_view(claim_text).empty())
        throw ConfigError("claim text must not be empty");

    BuildResult result;
    ReasoningTree& tree = result.tree;
    tree.root_id = kRootId;
    tree.depth = cfg.depth;
    tree.breadth = cfg.breadth;
    tree.nodes[kRootId] = ArgumentNode{kRootId, claim_text, std::nullopt,
                                       std::nullopt, std::nullopt, std::nullopt, {}};

    std::vector<std::string> frontier{kRootId};
    for (int level = 0; level < cfg.depth; ++level) {
        // One task per (parent, polarity): siblings of the same polarity see
        // their predecessors' texts, so each such chain runs sequentially,
        // while chains proceed independently.
        struct Chain {
            std::string parent_id;
            Polarity polarity;
        };
        std::vector<Chain> chains;
        chains.reserve(frontier.size() * 2);
        for (const auto& pid : frontier) {
            chains.push_back({pid, Polarity::Support});
            chains.push_back({pid, Polarity::Attack});
        }

        std::vector<std::vector<GeneratedArgument>> generated;
        try {
            generated = parallel_map<std::vector<GeneratedArgument>>(
                chains.size(), cfg.parallelism, cfg.schedule_seed,
                [&](std::size_t i) {
                    const Chain& chain = chains[i];
                    const std::string& parent_text = tree.node(chain.parent_id).text;
                    std::vector<GeneratedArgument> out;
                    std::vector<std::string> prior;
                    for (int k = 0; k < cfg.breadth; ++k) {
                        out.push_back(generate_argument(parent_text, chain.polarity, prior,
                                                        generator, prompts));
                        prior.push_back(out.back().text);
                    }
                    return out;
                });
        } catch (const Error& e) {
            // Keep the completed levels so the failure can be diagnosed.
            throw GenerationError(e.code(),
                                  std::string("tree generation failed at level ") +
                                      std::to_string(level + 1) + ": " + e.what(),
                                  tree);
        }

        std::vector<std::string> next;
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const Chain& chain = chains[c];
            ArgumentNode& parent = tree.node(chain.parent_id);
            for (int k = 0; k < cfg.breadth; ++k) {
                std::string id = child_id(chain.parent_id, chain.polarity, k + 1);
                const GeneratedArgument& gen = generated[c][k];
                tree.nodes[id] = ArgumentNode{id, gen.text, chain.polarity,
                                              std::nullopt, std::nullopt, std::nullopt, {}};
                parent.children.push_back(id);
                result.log.push_back(
                    GenerationRecord{id, gen.call.prompt, gen.call.responses});
                next.push_back(id);
            }
        }
        frontier = std::move(next);
    }
    return result;
}

}  // namespace arbor
