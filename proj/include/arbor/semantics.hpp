#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arbor/core.hpp"

namespace arbor {

// Signed product gap between the supporter and attacker branches:
//   alpha = prod over supporters (1 - s)  -  prod over attackers (1 - s)
// Empty products are 1, so a childless node gets alpha = 0. Negative alpha
// means support dominates; positive means attack dominates.
double alpha(const std::vector<double>& supporter_strengths,
             const std::vector<double>& attacker_strengths);

// Parent strength update:
//   s = tau_prime - alpha * tau_prime        if alpha > 0   (pulled toward 0)
//   s = tau_prime - alpha * (1 - tau_prime)  if alpha <= 0  (pushed toward 1)
// Continuous at alpha = 0, nonincreasing in alpha, and stays within [0,1].
double node_score(double tau_prime, double alpha_value);

struct NodeAggregation {
    std::optional<double> alpha;  // set for internal nodes only
    double s = 0.0;
};

struct AggregationReport {
    std::map<std::string, NodeAggregation> per_node;
    double root_probability = 0.0;
    Verdict verdict;
};

// Propagates strengths children-before-parents: leaves take s = tau_prime,
// internal nodes combine their children via alpha/node_score, and the root's
// s becomes the claim probability (label TRUE iff strictly above 0.5).
// Requires tau_prime on every node; writes s back into the tree.
AggregationReport aggregate(ReasoningTree& tree);

}  // namespace arbor
