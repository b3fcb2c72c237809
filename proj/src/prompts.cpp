#include "arbor/prompts.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "arbor/errors.hpp"

namespace arbor {

const char* to_string(PromptKind k) {
    switch (k) {
        case PromptKind::GenerateSupport: return "generate_support";
        case PromptKind::GenerateAttack: return "generate_attack";
        case PromptKind::IntrinsicSupport: return "intrinsic_support";
        case PromptKind::IntrinsicAttack: return "intrinsic_attack";
        case PromptKind::IntrinsicClaim: return "intrinsic_claim";
        case PromptKind::Compare: return "compare";
        case PromptKind::CompareSwapped: return "compare_swapped";
        case PromptKind::Direct: return "direct";
        case PromptKind::Cot: return "cot";
    }
    return "unknown";
}

const char* template_filename(PromptKind k) {
    switch (k) {
        case PromptKind::GenerateSupport: return "generate_support.txt";
        case PromptKind::GenerateAttack: return "generate_attack.txt";
        case PromptKind::IntrinsicSupport: return "intrinsic_support.txt";
        case PromptKind::IntrinsicAttack: return "intrinsic_attack.txt";
        case PromptKind::IntrinsicClaim: return "intrinsic_claim.txt";
        case PromptKind::Compare: return "compare.txt";
        case PromptKind::CompareSwapped: return "compare_swapped.txt";
        case PromptKind::Direct: return "direct.txt";
        case PromptKind::Cot: return "cot.txt";
    }
    return "unknown.txt";
}

namespace {

constexpr PromptKind kAllKinds[] = {
    PromptKind::GenerateSupport, PromptKind::GenerateAttack,  PromptKind::IntrinsicSupport,
    PromptKind::IntrinsicAttack, PromptKind::IntrinsicClaim,  PromptKind::Compare,
    PromptKind::CompareSwapped,  PromptKind::Direct,          PromptKind::Cot,
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read prompt template '" + p.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    lib.dir_ = dir;
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("prompt directory '" + dir.string() + "' does not exist");
    for (PromptKind k : kAllKinds)
        lib.templates_[k] = read_file(dir / template_filename(k));
    return lib;
}

const std::string& PromptLibrary::raw(PromptKind k) const {
    auto it = templates_.find(k);
    if (it == templates_.end())
        throw ConfigError(std::string("prompt template '") + to_string(k) + "' not loaded");
    return it->second;
}

Prompt PromptLibrary::render(PromptKind k, const PromptFields& fields) const {
    std::string text = raw(k);
    for (const auto& [name, value] : fields) {
        const std::string slot = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = text.find(slot, pos)) != std::string::npos) {
            text.replace(pos, slot.size(), value);
            pos += value.size();
        }
    }
    // A surviving {placeholder} means template and caller disagree; surface
    // it now rather than sending a broken prompt to a model.
    static const std::regex leftover(R"(\{[a-z_]+\})");
    std::smatch m;
    if (std::regex_search(text, m, leftover))
        throw ConfigError(std::string("prompt template '") + to_string(k) +
                          "' has unfilled placeholder " + m.str());
    return Prompt{k, std::move(text), fields};
}

}  // namespace arbor
