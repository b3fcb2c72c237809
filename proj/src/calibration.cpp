#include "arbor/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "arbor/errors.hpp"

namespace arbor {

namespace {

// Guard added inside every log so boundary values (theta exactly 0 with a
// zero win count) stay finite; 1e-300 keeps log(theta + g) = log(theta) to
// full precision for any theta of practical size.
constexpr double kLogGuard = 1e-300;

void check_bipartite_inputs(const WinMatrix& matrix,
                            const std::vector<std::string>& supporters,
                            const std::vector<std::string>& attackers) {
    if (supporters.empty() || attackers.empty())
        throw std::invalid_argument("fit_bt needs at least one supporter and one attacker");
    for (const auto& [pair, n] : matrix.counts) {
        if (n < 0) throw std::invalid_argument("win counts must be non-negative");
        const auto& [w, l] = pair;
        bool ws = std::find(supporters.begin(), supporters.end(), w) != supporters.end();
        bool wa = std::find(attackers.begin(), attackers.end(), w) != attackers.end();
        bool ls = std::find(supporters.begin(), supporters.end(), l) != supporters.end();
        bool la = std::find(attackers.begin(), attackers.end(), l) != attackers.end();
        if (!((ws && la) || (wa && ls)))
            throw std::invalid_argument("win matrix entry (" + w + "," + l +
                                        ") is not a supporter/attacker cross pair");
    }
}

}  // namespace

double bt_log_likelihood(const WinMatrix& matrix, const std::vector<std::string>& supporters,
                         const std::vector<std::string>& attackers,
                         const std::map<std::string, double>& theta) {
    auto th = [&](const std::string& id) {
        auto it = theta.find(id);
        if (it == theta.end())
            throw std::invalid_argument("theta is missing node '" + id + "'");
        return it->second;
    };
    double ll = 0.0;
    for (const auto& sid : supporters) {
        for (const auto& aid : attackers) {
            int w_sa = matrix.wins(sid, aid);
            int w_as = matrix.wins(aid, sid);
            int n = w_sa + w_as;
            if (n == 0) continue;  // unplayed pair: no likelihood contribution
            if (w_sa > 0) ll += w_sa * std::log(th(sid) + kLogGuard);
            if (w_as > 0) ll += w_as * std::log(th(aid) + kLogGuard);
            ll -= n * std::log(th(sid) + th(aid) + kLogGuard);
        }
    }
    return ll;
}

BTResult fit_bt(const WinMatrix& matrix, const std::vector<std::string>& supporters,
                const std::vector<std::string>& attackers, const BTConfig& config) {
    check_bipartite_inputs(matrix, supporters, attackers);
    if (config.epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
    if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (config.tol < 0.0) throw std::invalid_argument("tol must be >= 0");

    BTResult result;
    if (matrix.total() == 0) {
        // Nothing was decided (all ties): no usable evidence about relative
        // strength. Callers keep the intrinsic scores untouched.
        result.no_evidence = true;
        return result;
    }

    std::vector<std::string> all;
    all.reserve(supporters.size() + attackers.size());
    all.insert(all.end(), supporters.begin(), supporters.end());
    all.insert(all.end(), attackers.begin(), attackers.end());
    const std::size_t n_nodes = all.size();

    // Flatten the cross pairs once so the iteration runs on indexed arrays
    // instead of string-keyed maps (the fit can run for tens of thousands of
    // iterations on boundary cases).
    struct FlatPair {
        int s, a;
        double w_sa, w_as, n;
    };
    std::vector<FlatPair> pairs;
    std::vector<double> wins(n_nodes, 0.0);
    std::vector<std::vector<std::pair<int, double>>> played(n_nodes);
    for (std::size_t si = 0; si < supporters.size(); ++si) {
        for (std::size_t ai = 0; ai < attackers.size(); ++ai) {
            int a = static_cast<int>(supporters.size() + ai);
            int s = static_cast<int>(si);
            double w_sa = matrix.wins(supporters[si], attackers[ai]);
            double w_as = matrix.wins(attackers[ai], supporters[si]);
            double n = w_sa + w_as;
            wins[s] += w_sa;
            wins[a] += w_as;
            if (n > 0) {
                pairs.push_back({s, a, w_sa, w_as, n});
                played[s].push_back({a, n});
                played[a].push_back({s, n});
            }
        }
    }

    // Same term order as bt_log_likelihood, so the recorded trajectory is
    // bit-identical to what a caller recomputes from the public function.
    auto log_likelihood = [&](const std::vector<double>& th) {
        double ll = 0.0;
        for (const auto& p : pairs) {
            if (p.w_sa > 0) ll += p.w_sa * std::log(th[p.s] + kLogGuard);
            if (p.w_as > 0) ll += p.w_as * std::log(th[p.a] + kLogGuard);
            ll -= p.n * std::log(th[p.s] + th[p.a] + kLogGuard);
        }
        return ll;
    };

    std::vector<double> theta(n_nodes, 1.0);
    result.log_likelihoods.push_back(log_likelihood(theta));

    // theta as used for the convergence delta is always the just-normalized
    // vector; the very first delta is measured against the uniform profile.
    std::vector<double> prev_normalized(n_nodes, 1.0 / static_cast<double>(n_nodes));
    std::vector<double> next(n_nodes, 0.0);

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        // Simultaneous update: every new value is computed from the previous
        // round's vector.
        for (std::size_t u = 0; u < n_nodes; ++u) {
            double den = 0.0;
            for (const auto& [opp, n] : played[u]) den += n / (theta[u] + theta[opp]);
            next[u] = wins[u] / (den + config.epsilon);
        }

        double sum = 0.0;
        for (double v : next) sum += v;
        // sum > 0 because at least one node holds a win and its denominator
        // is finite (every played opponent pair-sum is positive).
        for (double& v : next) v /= sum;

        double delta = 0.0;
        for (std::size_t u = 0; u < n_nodes; ++u)
            delta = std::max(delta, std::abs(next[u] - prev_normalized[u]));

        theta = next;
        prev_normalized = next;
        result.iterations_used = iter;
        result.log_likelihoods.push_back(log_likelihood(theta));
        if (delta <= config.tol) {
            result.converged = true;
            break;
        }
    }

    for (std::size_t u = 0; u < n_nodes; ++u) result.theta[all[u]] = theta[u];
    return result;
}

double blend(double tau, double theta, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("lambda must lie in [0,1]");
    if (lambda == 0.0) return std::clamp(tau, 0.0, 1.0);  // bitwise tau for tau in range
    return std::clamp((1.0 - lambda) * tau + lambda * theta, 0.0, 1.0);
}

CalibrationOutcome calibrate_tree(ReasoningTree& tree,
                                  const std::map<std::string, WinMatrix>& matrices,
                                  const BTConfig& config) {
    for (auto& [id, node] : tree.nodes) {
        if (!node.tau)
            throw std::invalid_argument("node '" + id + "' has no intrinsic strength set");
        node.tau_prime = *node.tau;
    }

    CalibrationOutcome outcome;
    for (const auto& [parent_id, matrix] : matrices) {
        auto supporters = tree.supporters(parent_id);
        auto attackers = tree.attackers(parent_id);
        BTResult bt = fit_bt(matrix, supporters, attackers, config);

        CalibrationRecord rec;
        rec.parent_id = parent_id;
        rec.matrix = matrix;
        rec.lambda = config.lambda;
        if (bt.no_evidence) {
            // Keep tau_prime = tau for every child of this parent.
            rec.bt = std::move(bt);
            outcome.log.push_back(std::move(rec));
            continue;
        }
        for (const auto& [child_id, theta] : bt.theta) {
            ArgumentNode& child = tree.node(child_id);
            child.tau_prime = blend(*child.tau, theta, config.lambda);
            rec.tau_prime[child_id] = *child.tau_prime;
        }
        rec.bt = std::move(bt);
        outcome.log.push_back(std::move(rec));
    }
    return outcome;
}

}  // namespace arbor
