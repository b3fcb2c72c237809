#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "arbor/core.hpp"
#include "arbor/judging.hpp"
#include "arbor/prompts.hpp"

namespace arbor {

// Directed win counts among one parent's children. counts[(w, l)] is the
// number of judgements won by w over l; only supporter-vs-attacker pairs ever
// appear. Ties increment nothing.
struct WinMatrix {
    std::string parent_id;
    std::map<std::pair<std::string, std::string>, int> counts;

    void add_win(const std::string& winner, const std::string& loser);
    int wins(const std::string& winner, const std::string& loser) const;
    int total() const;  // all judgements that produced a winner
};

// Audit record of one head-to-head judgement.
struct ComparisonRecord {
    std::string parent_id;
    std::string support_id;
    std::string attack_id;
    std::string prompt;
    std::vector<std::string> responses;
    JudgeOutcome outcome = JudgeOutcome::Tie;
    bool order_swapped = false;  // presentation-order probe duplicate
};

struct TournamentOptions {
    int repeats = 1;                   // judgements per pair
    bool swap_order_duplicate = false; // add one extra judgement per pair with
                                       // the presentation order reversed
    int parallelism = 8;               // in-flight judge requests
    std::uint64_t schedule_seed = 0;   // nonzero => shuffled dispatch order
};

struct TournamentResult {
    WinMatrix matrix;
    std::vector<ComparisonRecord> log;  // canonical pair order, not dispatch order
};

// Judges every supporter x attacker pair under `parent`. The parent must
// have at least one child of each polarity. A judge failure on any pair
// aborts the tournament (no partial matrix), naming the pair.
TournamentResult run_tournament(const std::string& parent_id, const ReasoningTree& tree,
                                JudgeBackend& judge, const PromptLibrary& prompts,
                                const TournamentOptions& options = {});

struct AllTournaments {
    std::map<std::string, WinMatrix> matrices;  // parent id -> matrix
    std::vector<ComparisonRecord> log;          // level order, then pair order
};

// Runs one tournament per node that has both supporters and attackers,
// processing the tree level by level from the root down.
AllTournaments run_all(const ReasoningTree& tree, JudgeBackend& judge,
                       const PromptLibrary& prompts, const TournamentOptions& options = {});

}  // namespace arbor
