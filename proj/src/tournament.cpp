#include "arbor/tournament.hpp"

#include <functional>

#include "arbor/errors.hpp"
#include "arbor/util.hpp"

namespace arbor {

void WinMatrix::add_win(const std::string& winner, const std::string& loser) {
    ++counts[{winner, loser}];
}

int WinMatrix::wins(const std::string& winner, const std::string& loser) const {
    auto it = counts.find({winner, loser});
    return it == counts.end() ? 0 : it->second;
}

int WinMatrix::total() const {
    int t = 0;
    for (const auto& [pair, n] : counts) {
        (void)pair;
        t += n;
    }
    return t;
}

namespace {

struct PairTask {
    std::string parent_id;
    std::string support_id;
    std::string attack_id;
    bool swapped = false;
};

// Enumerates judgements for one parent in canonical order: supporters outer,
// attackers inner, `repeats` straight judgements then the optional
// order-swapped probe.
std::vector<PairTask> enumerate_tasks(const ReasoningTree& tree, const std::string& parent_id,
                                      const TournamentOptions& options) {
    std::vector<PairTask> tasks;
    for (const auto& sid : tree.supporters(parent_id)) {
        for (const auto& aid : tree.attackers(parent_id)) {
            for (int r = 0; r < options.repeats; ++r) tasks.push_back({parent_id, sid, aid, false});
            if (options.swap_order_duplicate) tasks.push_back({parent_id, sid, aid, true});
        }
    }
    return tasks;
}

// Judges a batch of pair tasks (possibly spanning several parents of one
// level) concurrently; the returned records follow the task order, not the
// completion order.
std::vector<ComparisonRecord> judge_tasks(const ReasoningTree& tree,
                                          const std::vector<PairTask>& tasks,
                                          JudgeBackend& judge, const PromptLibrary& prompts,
                                          const TournamentOptions& options) {
    return parallel_map<ComparisonRecord>(
        tasks.size(), options.parallelism, options.schedule_seed, [&](std::size_t i) {
            const PairTask& task = tasks[i];
            try {
                CompareResult res =
                    compare(tree.node(task.parent_id).text, tree.node(task.support_id).text,
                            tree.node(task.attack_id).text, judge, prompts, task.swapped);
                ComparisonRecord rec;
                rec.parent_id = task.parent_id;
                rec.support_id = task.support_id;
                rec.attack_id = task.attack_id;
                rec.prompt = res.call.prompt;
                rec.responses = std::move(res.call.responses);
                rec.outcome = res.outcome;
                rec.order_swapped = task.swapped;
                return rec;
            } catch (const Error& e) {
                throw Error(e.code(), "tournament under '" + task.parent_id +
                                          "' failed on pair (" + task.support_id + " vs " +
                                          task.attack_id + "): " + e.what());
            }
        });
}

void accumulate(WinMatrix& matrix, const ComparisonRecord& rec) {
    switch (rec.outcome) {
        case JudgeOutcome::SupportWins:
            matrix.add_win(rec.support_id, rec.attack_id);
            break;
        case JudgeOutcome::AttackWins:
            matrix.add_win(rec.attack_id, rec.support_id);
            break;
        case JudgeOutcome::Tie:
            break;  // ties contribute no counts
    }
}

}  // namespace

TournamentResult run_tournament(const std::string& parent_id, const ReasoningTree& tree,
                                JudgeBackend& judge, const PromptLibrary& prompts,
                                const TournamentOptions& options) {
    if (options.repeats < 1) throw ConfigError("tournament repeats must be >= 1");
    if (tree.supporters(parent_id).empty() || tree.attackers(parent_id).empty())
        throw ConfigError("tournament requires both supporters and attackers under '" +
                          parent_id + "'");

    TournamentResult result;
    result.matrix.parent_id = parent_id;

    auto tasks = enumerate_tasks(tree, parent_id, options);
    result.log = judge_tasks(tree, tasks, judge, prompts, options);
    for (const auto& rec : result.log) accumulate(result.matrix, rec);
    return result;
}

AllTournaments run_all(const ReasoningTree& tree, JudgeBackend& judge,
                       const PromptLibrary& prompts, const TournamentOptions& options) {
    if (options.repeats < 1) throw ConfigError("tournament repeats must be >= 1");

    AllTournaments out;
    // Level by level; all pairs of one level share a concurrent batch.
    for (const auto& level : tree.levels()) {
        std::vector<PairTask> tasks;
        for (const auto& id : level) {
            if (tree.supporters(id).empty() || tree.attackers(id).empty()) continue;
            out.matrices.emplace(id, WinMatrix{id, {}});
            auto parent_tasks = enumerate_tasks(tree, id, options);
            tasks.insert(tasks.end(), parent_tasks.begin(), parent_tasks.end());
        }
        if (tasks.empty()) continue;
        auto records = judge_tasks(tree, tasks, judge, prompts, options);
        for (auto& rec : records) {
            accumulate(out.matrices.at(rec.parent_id), rec);
            out.log.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace arbor
