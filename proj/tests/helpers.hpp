#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>

#include "arbor/core.hpp"
#include "arbor/harness.hpp"
#include "arbor/prompts.hpp"

#ifndef ARBOR_PROMPT_DIR
#error "ARBOR_PROMPT_DIR must be defined by the build"
#endif

namespace testutil {

inline const arbor::PromptLibrary& prompts() {
    static arbor::PromptLibrary lib = arbor::PromptLibrary::load(ARBOR_PROMPT_DIR);
    return lib;
}

// Hand-built complete depth-1 breadth-1 tree (root + one supporter + one
// attacker) with the given intrinsic strengths.
inline arbor::ReasoningTree tree11(double tau_root, double tau_support, double tau_attack) {
    arbor::ReasoningTree t;
    t.depth = 1;
    t.breadth = 1;
    arbor::ArgumentNode root;
    root.id = arbor::kRootId;
    root.text = "root claim";
    root.tau = tau_root;
    root.children = {"db0.s1", "db0.a1"};
    arbor::ArgumentNode sup;
    sup.id = "db0.s1";
    sup.text = "a supporting argument";
    sup.polarity = arbor::Polarity::Support;
    sup.tau = tau_support;
    arbor::ArgumentNode att;
    att.id = "db0.a1";
    att.text = "an attacking argument";
    att.polarity = arbor::Polarity::Attack;
    att.tau = tau_attack;
    t.nodes[root.id] = std::move(root);
    t.nodes[sup.id] = std::move(sup);
    t.nodes[att.id] = std::move(att);
    return t;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("arbor-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

// Runs a shell command, capturing all output and the exit code.
inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    std::string full = command + " 2>&1";
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) {
        result.output = "popen failed";
        return result;
    }
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
    int status = pclose(pipe);
    result.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

}  // namespace testutil
