#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arbor {

// ---------------------------------------------------------------------------
// Argumentation tree model.
//
// A claim is verified by growing a tree of natural-language arguments under
// it: every internal node has `breadth` supporting and `breadth` attacking
// children, down to `depth` levels. Strengths attach to nodes in three
// stages: tau (intrinsic plausibility), tau_prime (tournament-calibrated),
// and s (propagated score).
// ---------------------------------------------------------------------------

enum class Polarity { Support, Attack };

const char* to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);  // throws ConfigError

// Final decision for a claim. The label is TRUE iff probability is strictly
// greater than 0.5 (exactly 0.5 therefore maps to FALSE).
struct Verdict {
    double probability = 0.0;
    bool label = false;
};

Verdict verdict_from_probability(double probability);

struct ArgumentNode {
    std::string id;
    std::string text;
    std::optional<Polarity> polarity;  // absent on the root only
    std::optional<double> tau;         // intrinsic strength in [0,1]
    std::optional<double> tau_prime;   // calibrated strength in [0,1]
    std::optional<double> s;           // propagated strength in [0,1]
    std::vector<std::string> children; // supporter ids first, then attacker ids
};

// Root id of every tree.
inline constexpr const char* kRootId = "db0";

// Children are named <parent>.s<k> / <parent>.a<k>, k starting at 1.
std::string child_id(const std::string& parent_id, Polarity polarity, int index);

struct ReasoningTree {
    std::string root_id = kRootId;
    int depth = 0;    // levels below the root
    int breadth = 1;  // children per polarity per internal node
    std::map<std::string, ArgumentNode> nodes;  // keyed by id; map => stable order

    const ArgumentNode& node(const std::string& id) const;  // throws if unknown
    ArgumentNode& node(const std::string& id);
    const ArgumentNode& root() const { return node(root_id); }
    ArgumentNode& root() { return node(root_id); }

    // Child ids of `id` restricted to one polarity, preserving child order.
    std::vector<std::string> supporters(const std::string& id) const;
    std::vector<std::string> attackers(const std::string& id) const;

    // Breadth-first levels starting with {root}. Level k holds the ids at
    // distance k from the root, in deterministic (parent-order) sequence.
    std::vector<std::vector<std::string>> levels() const;

    // Ids of nodes that have at least one child, in level order.
    std::vector<std::string> internal_ids() const;
};

// ---------------------------------------------------------------------------
// Size formulas. A complete tree with parameters (depth d, breadth b) has
//
//   nodes(d, b)       = ((2b)^(d+1) - 1) / (2b - 1)      [b >= 1; 2b == 1 never occurs]
//   comparisons(d, b) = b^2 * ((2b)^d - 1) / (2b - 1)
//
// computed in exact integer arithmetic. Arguments must be non-negative
// (depth) / positive (breadth); results that would overflow 64 bits raise
// std::overflow_error rather than wrapping.
// ---------------------------------------------------------------------------

std::uint64_t node_count(int depth, int breadth);
std::uint64_t comparison_count(int depth, int breadth);

// ---------------------------------------------------------------------------
// Structural validation.
// ---------------------------------------------------------------------------

struct TreeViolation {
    std::string node_id;  // offending node ("" for whole-tree problems)
    std::string rule;     // short machine-readable rule name
    std::string detail;   // human-readable description
};

// Checks that the tree is a complete (depth, breadth) argument tree: a single
// root without polarity, every internal node with exactly `breadth` children
// of each polarity, all leaves at level `depth`, no cycles/orphans/dangling
// ids, non-empty texts, and any set strengths within [0,1]. Returns all
// violations found (empty means valid).
std::vector<TreeViolation> validate_tree(const ReasoningTree& tree);

}  // namespace arbor
