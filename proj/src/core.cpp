#include "arbor/core.hpp"

#include <deque>
#include <set>
#include <stdexcept>

#include "arbor/errors.hpp"
#include "arbor/util.hpp"

namespace arbor {

const char* to_string(Polarity p) {
    return p == Polarity::Support ? "support" : "attack";
}

Polarity polarity_from_string(const std::string& s) {
    if (s == "support") return Polarity::Support;
    if (s == "attack") return Polarity::Attack;
    throw ConfigError("unknown polarity '" + s + "' (expected 'support' or 'attack')");
}

Verdict verdict_from_probability(double probability) {
    return Verdict{probability, probability > 0.5};
}

std::string child_id(const std::string& parent_id, Polarity polarity, int index) {
    return parent_id + "." + (polarity == Polarity::Support ? "s" : "a") +
           std::to_string(index);
}

const ArgumentNode& ReasoningTree::node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end())
        throw std::out_of_range("tree has no node with id '" + id + "'");
    return it->second;
}

ArgumentNode& ReasoningTree::node(const std::string& id) {
    auto it = nodes.find(id);
    if (it == nodes.end())
        throw std::out_of_range("tree has no node with id '" + id + "'");
    return it->second;
}

std::vector<std::string> ReasoningTree::supporters(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& cid : node(id).children)
        if (node(cid).polarity == Polarity::Support) out.push_back(cid);
    return out;
}

std::vector<std::string> ReasoningTree::attackers(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& cid : node(id).children)
        if (node(cid).polarity == Polarity::Attack) out.push_back(cid);
    return out;
}

std::vector<std::vector<std::string>> ReasoningTree::levels() const {
    std::vector<std::vector<std::string>> out;
    if (nodes.find(root_id) == nodes.end()) return out;
    std::vector<std::string> frontier{root_id};
    std::set<std::string> seen{root_id};
    while (!frontier.empty()) {
        out.push_back(frontier);
        std::vector<std::string> next;
        for (const auto& id : frontier) {
            for (const auto& cid : node(id).children) {
                if (nodes.count(cid) && seen.insert(cid).second) next.push_back(cid);
            }
        }
        frontier = std::move(next);
    }
    return out;
}

std::vector<std::string> ReasoningTree::internal_ids() const {
    std::vector<std::string> out;
    for (const auto& level : levels())
        for (const auto& id : level)
            if (!node(id).children.empty()) out.push_back(id);
    return out;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw std::overflow_error("tree size formula overflows 64-bit integer range");
    return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw std::overflow_error("tree size formula overflows 64-bit integer range");
    return r;
}

// (base^0 + base^1 + ... + base^count-1), i.e. (base^count - 1) / (base - 1),
// accumulated term by term so intermediate values stay exact and overflow is
// detected at the first offending addition.
std::uint64_t geometric_sum(std::uint64_t base, int count) {
    std::uint64_t sum = 0;
    std::uint64_t term = 1;
    for (int i = 0; i < count; ++i) {
        sum = checked_add(sum, term);
        if (i + 1 < count) term = checked_mul(term, base);
    }
    return sum;
}

void check_shape_args(int depth, int breadth) {
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    if (breadth < 1) throw std::invalid_argument("breadth must be >= 1");
}

}  // namespace

std::uint64_t node_count(int depth, int breadth) {
    check_shape_args(depth, breadth);
    // sum_{k=0..d} (2b)^k
    return geometric_sum(2ULL * static_cast<std::uint64_t>(breadth), depth + 1);
}

std::uint64_t comparison_count(int depth, int breadth) {
    check_shape_args(depth, breadth);
    // b^2 * sum_{k=0..d-1} (2b)^k  -- one b*b tournament per internal node.
    std::uint64_t b = static_cast<std::uint64_t>(breadth);
    return checked_mul(checked_mul(b, b),
                       geometric_sum(2ULL * b, depth));
}

namespace {

bool strength_ok(const std::optional<double>& v) {
    return !v || (*v >= 0.0 && *v <= 1.0);
}

}  // namespace

std::vector<TreeViolation> validate_tree(const ReasoningTree& tree) {
    std::vector<TreeViolation> out;
    auto add = [&](const std::string& id, const std::string& rule, const std::string& detail) {
        out.push_back(TreeViolation{id, rule, detail});
    };

    if (tree.nodes.find(tree.root_id) == tree.nodes.end()) {
        add("", "missing-root", "root id '" + tree.root_id + "' is not present");
        return out;  // nothing else is checkable
    }
    if (tree.depth < 0) add("", "bad-depth", "depth must be >= 0");
    if (tree.breadth < 1) add("", "bad-breadth", "breadth must be >= 1");
    if (tree.depth < 0 || tree.breadth < 1) return out;

    // Parent / reachability bookkeeping.
    std::map<std::string, int> referenced;  // child id -> #times listed as a child
    for (const auto& [id, n] : tree.nodes) {
        for (const auto& cid : n.children) {
            ++referenced[cid];
            if (!tree.nodes.count(cid))
                add(id, "dangling-child", "child '" + cid + "' does not exist");
        }
    }
    if (referenced.count(tree.root_id))
        add(tree.root_id, "root-referenced", "root is listed as a child");
    for (const auto& [id, n] : tree.nodes) {
        (void)n;
        if (id == tree.root_id) continue;
        auto it = referenced.find(id);
        if (it == referenced.end())
            add(id, "orphan", "node is not referenced by any parent");
        else if (it->second > 1)
            add(id, "multi-parent", "node is referenced by more than one parent");
    }

    // Levels / completeness. levels() ignores dangling ids and visits each
    // node once, so it is safe even on malformed input.
    auto levels = tree.levels();
    std::size_t reachable = 0;
    for (const auto& level : levels) reachable += level.size();
    if (reachable != tree.nodes.size())
        add("", "unreachable-nodes", "tree contains nodes not reachable from the root");

    for (std::size_t lvl = 0; lvl < levels.size(); ++lvl) {
        bool leaf_level = lvl == static_cast<std::size_t>(tree.depth);
        for (const auto& id : levels[lvl]) {
            const ArgumentNode& n = tree.node(id);
            if (n.id != id)
                add(id, "id-mismatch", "node id field '" + n.id + "' disagrees with key");
            if (trim_view(n.text).empty()) add(id, "empty-text", "node text is empty");
            if (id == tree.root_id) {
                if (n.polarity)
                    add(id, "root-polarity", "root must not carry a polarity");
            } else if (!n.polarity) {
                add(id, "missing-polarity", "non-root node must carry a polarity");
            }
            if (!strength_ok(n.tau)) add(id, "tau-range", "tau outside [0,1]");
            if (!strength_ok(n.tau_prime)) add(id, "tau-prime-range", "tau_prime outside [0,1]");
            if (!strength_ok(n.s)) add(id, "s-range", "s outside [0,1]");

            if (lvl > static_cast<std::size_t>(tree.depth)) {
                add(id, "too-deep", "node lies below the declared depth");
                continue;
            }
            if (leaf_level) {
                if (!n.children.empty())
                    add(id, "leaf-children", "node at leaf level must not have children");
            } else {
                int sup = 0, att = 0;
                for (const auto& cid : n.children) {
                    auto cit = tree.nodes.find(cid);
                    if (cit == tree.nodes.end()) continue;
                    if (cit->second.polarity == Polarity::Support) ++sup;
                    else if (cit->second.polarity == Polarity::Attack) ++att;
                }
                if (sup != tree.breadth || att != tree.breadth)
                    add(id, "child-count",
                        "internal node needs exactly " + std::to_string(tree.breadth) +
                            " supporters and " + std::to_string(tree.breadth) +
                            " attackers (found " + std::to_string(sup) + "/" +
                            std::to_string(att) + ")");
            }
        }
    }

    // Total size must match the closed form (guarded: huge shapes cannot have
    // been materialized, so overflow here is unreachable in practice).
    try {
        std::uint64_t expect = node_count(tree.depth, tree.breadth);
        if (expect != tree.nodes.size())
            add("", "node-count",
                "tree has " + std::to_string(tree.nodes.size()) + " nodes, expected " +
                    std::to_string(expect));
    } catch (const std::overflow_error&) {
        add("", "node-count", "declared shape exceeds representable size");
    }

    return out;
}

}  // namespace arbor
