#include "arbor/semantics.hpp"

#include <stdexcept>

namespace arbor {

double alpha(const std::vector<double>& supporter_strengths,
             const std::vector<double>& attacker_strengths) {
    double sup = 1.0, att = 1.0;
    for (double s : supporter_strengths) {
        if (s < 0.0 || s > 1.0)
            throw std::invalid_argument("supporter strength outside [0,1]");
        sup *= 1.0 - s;
    }
    for (double s : attacker_strengths) {
        if (s < 0.0 || s > 1.0)
            throw std::invalid_argument("attacker strength outside [0,1]");
        att *= 1.0 - s;
    }
    return sup - att;
}

double node_score(double tau_prime, double alpha_value) {
    if (tau_prime < 0.0 || tau_prime > 1.0)
        throw std::invalid_argument("tau_prime outside [0,1]");
    if (alpha_value < -1.0 || alpha_value > 1.0)
        throw std::invalid_argument("alpha outside [-1,1]");
    if (alpha_value > 0.0) return tau_prime - alpha_value * tau_prime;
    return tau_prime - alpha_value * (1.0 - tau_prime);
}

AggregationReport aggregate(ReasoningTree& tree) {
    AggregationReport report;

    // Children before parents: walk the levels bottom-up.
    auto levels = tree.levels();
    for (auto level = levels.rbegin(); level != levels.rend(); ++level) {
        for (const auto& id : *level) {
            ArgumentNode& node = tree.node(id);
            if (!node.tau_prime)
                throw std::invalid_argument("node '" + id +
                                            "' has no calibrated strength; aggregate after "
                                            "calibration");
            NodeAggregation agg;
            if (node.children.empty()) {
                agg.s = *node.tau_prime;
            } else {
                std::vector<double> sup, att;
                for (const auto& cid : node.children) {
                    const ArgumentNode& child = tree.node(cid);
                    // Lower levels were already scored.
                    double cs = report.per_node.at(cid).s;
                    if (child.polarity == Polarity::Support) sup.push_back(cs);
                    else att.push_back(cs);
                }
                agg.alpha = alpha(sup, att);
                agg.s = node_score(*node.tau_prime, *agg.alpha);
            }
            node.s = agg.s;
            report.per_node[id] = agg;
        }
    }

    report.root_probability = report.per_node.at(tree.root_id).s;
    report.verdict = verdict_from_probability(report.root_probability);
    return report;
}

}  // namespace arbor
