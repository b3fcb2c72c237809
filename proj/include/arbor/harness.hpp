#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arbor/calibration.hpp"
#include "arbor/generation.hpp"
#include "arbor/judging.hpp"
#include "arbor/mock_judge.hpp"
#include "arbor/persistence.hpp"
#include "arbor/prompts.hpp"
#include "arbor/tournament.hpp"

namespace arbor {

// ---------------------------------------------------------------------------
// Dataset.
// ---------------------------------------------------------------------------

struct ClaimRecord {
    std::string id;
    std::string claim;
    bool label = false;  // ground truth
};

struct Dataset {
    std::vector<ClaimRecord> records;
    int true_count = 0;
    int false_count = 0;
    std::vector<std::string> warnings;
};

// Reads one record per line, each an object {"id": "...", "claim": "...",
// "label": true|false}. Blank lines are ignored. A malformed line, a missing
// field, an empty claim, or a duplicate id raises ConfigError naming the
// line number. An empty file yields an empty dataset carrying a warning.
Dataset load_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Experiment configuration.
// ---------------------------------------------------------------------------

enum class Method { Direct, Cot, Argllm, Art, ArtEnsemble };

const char* to_string(Method m);
Method method_from_string(const std::string& s);  // throws ConfigError

// Built-in behaviours for the offline mock backend. `Oracle` rigs the mock
// per record so the method under test answers the ground truth: comparisons
// always favour the polarity that agrees with the label, the bare claim's
// intrinsic score is 0.9 (true) / 0.1 (false), and direct questions answer
// the label. Used for pipeline smoke checks where accuracy must be 1.0.
enum class MockRig { None, Oracle };

const char* to_string(MockRig r);
MockRig mock_rig_from_string(const std::string& s);  // throws ConfigError

struct ExperimentConfig {
    Method method = Method::Art;
    GenerationConfig generation;
    BTConfig bt;  // bt.lambda is ignored for ARGLLM, whose blend weight is 0 by definition
    TournamentOptions tournament;
    EvaluatorMode evaluator = EvaluatorMode::Self;
    BackendConfig generator;
    BackendConfig judge;  // consulted only when evaluator == Separate
    bool use_mock = true;
    std::uint64_t seed = 0;
    MockRig rig = MockRig::None;
    MockOverrides mock_overrides;  // explicit entries take precedence over the rig
    int ensemble_size = 2;
    std::uint64_t ensemble_seed_stride = 1;  // member i runs with seed + i*stride
    int record_parallelism = 1;
    std::uint64_t record_schedule_seed = 0;  // nonzero => shuffled record dispatch
    std::optional<std::filesystem::path> trace_dir;

    // The blend weight actually applied: 0 for ARGLLM (that reduction is the
    // method's definition), bt.lambda otherwise.
    double effective_lambda() const;

    void validate() const;  // throws ConfigError
};

struct RunBackends {
    std::shared_ptr<JudgeBackend> generator;
    std::shared_ptr<JudgeBackend> judge;  // same object as generator under SELF
};

// Builds the backend pair for one run: deterministic mocks (seeded; the
// SEPARATE judge gets a distinct derived seed) or HTTP clients.
RunBackends make_backends(const ExperimentConfig& cfg, const ClaimRecord& record,
                          std::uint64_t seed);

// The configuration block echoed into traces and reports. Carries only
// parameters that can influence computed values; execution knobs
// (parallelism, dispatch shuffling, output paths) are deliberately absent so
// traces stay byte-identical across schedules.
nlohmann::ordered_json config_snapshot(const ExperimentConfig& cfg, Method method,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Single-record pipelines. Each returns a complete trace whose verdict is
// the method's answer. Errors propagate as arbor::Error with a phase tag.
// ---------------------------------------------------------------------------

RunTrace run_direct(const ClaimRecord& record, const ExperimentConfig& cfg,
                    JudgeBackend& backend, const PromptLibrary& prompts);
RunTrace run_cot(const ClaimRecord& record, const ExperimentConfig& cfg,
                 JudgeBackend& backend, const PromptLibrary& prompts);

// Baseline tree pipeline: build the tree, score every node's intrinsic
// strength, take calibrated strength = intrinsic strength (no tournaments,
// no blending machinery), aggregate. Deliberately coded without touching the
// calibration stage so it can serve as an independent reference for the
// lambda=0 reduction.
RunTrace run_argllm(const ClaimRecord& record, const ExperimentConfig& cfg,
                    const RunBackends& backends, const PromptLibrary& prompts);

// Full pipeline: build tree -> intrinsic scores -> cross-pair tournaments ->
// strength calibration -> propagation.
RunTrace run_art(const ClaimRecord& record, const ExperimentConfig& cfg,
                 const RunBackends& backends, const PromptLibrary& prompts);

struct EnsembleRun {
    RunTrace summary;               // method "art_ensemble"; carries no tree
    std::vector<RunTrace> members;  // method "art_ensemble_member", one per tree
};

// Runs ensemble_size independent trees with derived seeds and averages their
// root probabilities; the label applies the strict 0.5 threshold to the mean.
EnsembleRun run_ensemble(const ClaimRecord& record, const ExperimentConfig& cfg,
                         const PromptLibrary& prompts);

struct RecordRun {
    RunTrace primary;
    std::vector<RunTrace> members;  // nonempty only for the ensemble method
};

// Dispatches one record to whichever method cfg selects.
RecordRun run_record(const ClaimRecord& record, const ExperimentConfig& cfg,
                     const PromptLibrary& prompts);

// ---------------------------------------------------------------------------
// Benchmark evaluation.
// ---------------------------------------------------------------------------

struct ClaimOutcome {
    std::string id;
    double probability = 0.0;
    bool predicted = false;
    bool ground_truth = false;
    std::vector<std::string> trace_files;  // primary first, then members
};

struct RecordFailure {
    std::string id;
    std::string message;
};

struct RunResult {
    std::map<std::string, ClaimOutcome> per_claim;
    std::vector<RecordFailure> failures;  // errored records, excluded from accuracy
    int total = 0;
    int scored = 0;
    int excluded = 0;
    int correct = 0;
    double accuracy = 0.0;  // correct / scored; 0 when nothing scored
    // Population (divide-by-n) variance of the per-record root probabilities.
    double root_probability_variance = 0.0;
    // Population variance of tournament-calibrated child strengths, pooled
    // over all scored records (0 when no node was calibrated).
    double tau_prime_variance = 0.0;
};

// Runs the configured method over every record (record-level parallelism up
// to cfg.record_parallelism), writes traces into cfg.trace_dir when set, and
// folds metrics in dataset order. Errored records land in `failures` with
// their message and are excluded from accuracy, never counted as wrong.
// Deterministic for a fixed seed and mock backend.
RunResult evaluate(const ExperimentConfig& cfg, const Dataset& dataset,
                   const PromptLibrary& prompts);

double population_variance(const std::vector<double>& values);

// Report writers: a structured document and a flat per-claim table.
std::string results_to_json_string(const RunResult& result, const ExperimentConfig& cfg);
std::string results_to_csv_string(const RunResult& result);
void write_results(const RunResult& result, const ExperimentConfig& cfg,
                   const std::filesystem::path& out_dir);

}  // namespace arbor
