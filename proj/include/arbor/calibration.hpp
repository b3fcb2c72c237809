#pragma once

#include <map>
#include <string>
#include <vector>

#include "arbor/core.hpp"
#include "arbor/tournament.hpp"

namespace arbor {

struct BTConfig {
    double epsilon = 1e-9;   // stabilizer added to each update denominator
    int max_iters = 100;     // fixed-point iteration cap
    double tol = 1e-10;      // convergence threshold on max |theta change|
    double lambda = 0.5;     // blend weight: 0 keeps tau, 1 trusts theta fully
};

struct BTResult {
    // Latent strength per child id, normalized to sum 1 (empty when
    // no_evidence). A node that never won a judgement gets exactly 0.
    std::map<std::string, double> theta;
    int iterations_used = 0;
    bool converged = false;
    // Bipartite log-likelihood trajectory: entry 0 at the initial point,
    // then one entry per iteration. Nondecreasing (MM ascent).
    std::vector<double> log_likelihoods;
    // True iff the matrix held no decisive judgements at all (e.g. all ties),
    // in which case no strengths can be inferred and calibration is skipped.
    bool no_evidence = false;
};

// Fits bipartite Bradley-Terry strengths to the win counts by fixed-point
// iteration: each round recomputes every theta_u = wins_u / (sum over the
// node's cross pairs of n_pair/(theta_u + theta_v) + epsilon) from the
// previous round's values, then normalizes the vector to sum 1. Initial
// theta is 1 for every child. Pairs with zero judgements are skipped (they
// carry no information and would otherwise produce 0/0).
BTResult fit_bt(const WinMatrix& matrix, const std::vector<std::string>& supporters,
                const std::vector<std::string>& attackers, const BTConfig& config);

// Bipartite Bradley-Terry log-likelihood of `theta` under the counts:
//   sum over cross pairs (a,b):  w_ab*log th_a + w_ba*log th_b - n_ab*log(th_a+th_b)
// Logs are guarded with +1e-300 so zero-weight terms at theta=0 stay finite.
// Invariant under rescaling of theta.
double bt_log_likelihood(const WinMatrix& matrix, const std::vector<std::string>& supporters,
                         const std::vector<std::string>& attackers,
                         const std::map<std::string, double>& theta);

// Convex blend of intrinsic strength and tournament strength, clipped to
// [0,1]: clip((1-lambda)*tau + lambda*theta). lambda=0 returns tau exactly.
double blend(double tau, double theta, double lambda);

// Per-parent audit record of one calibration.
struct CalibrationRecord {
    std::string parent_id;
    WinMatrix matrix;
    BTResult bt;
    double lambda = 0.5;
    std::map<std::string, double> tau_prime;  // child id -> calibrated strength
};

struct CalibrationOutcome {
    std::vector<CalibrationRecord> log;  // parent id order
};

// Sets tau_prime on every node: tau_prime = tau everywhere, then for each
// parent with a win matrix, children are re-scored by blending tau with the
// fitted theta (unless the matrix has no evidence, which keeps tau). Every
// node must have tau set. The root keeps tau_prime = tau (it competes in no
// tournament).
CalibrationOutcome calibrate_tree(ReasoningTree& tree,
                                  const std::map<std::string, WinMatrix>& matrices,
                                  const BTConfig& config);

}  // namespace arbor
