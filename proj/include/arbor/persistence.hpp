#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arbor/calibration.hpp"
#include "arbor/core.hpp"
#include "arbor/generation.hpp"
#include "arbor/judging.hpp"
#include "arbor/semantics.hpp"
#include "arbor/tournament.hpp"

namespace arbor {

inline constexpr int kTraceSchemaVersion = 1;

// Audit record of one intrinsic-strength judgement.
struct IntrinsicRecord {
    std::string node_id;
    std::string prompt;
    std::vector<std::string> responses;
    double value = 0.0;
};

// Audit record of the single exchange behind a direct / chain-of-thought run.
struct DirectRecord {
    std::string prompt;
    std::vector<std::string> responses;
};

// Deterministic run statistics (call and iteration counters). Deliberately
// free of wall-clock values: traces must be byte-identical across reruns, so
// timing lives in logs, never in the artifact.
struct TraceStats {
    int generation_calls = 0;   // logical generate exchanges
    int intrinsic_calls = 0;    // logical intrinsic-score exchanges
    int comparison_calls = 0;   // logical head-to-head exchanges
    int bt_iterations = 0;      // fixed-point iterations across all parents
};

// Complete, self-contained audit record of one claim run: every prompt, every
// raw response (verbatim, parsed or not), all win counts, the strength
// trajectory, and the verdict. Tree sections are absent for direct/cot runs.
struct RunTrace {
    int schema_version = kTraceSchemaVersion;
    std::string method;  // "direct", "cot", "argllm", "art", "art_ensemble_member"
    std::string claim_id;
    std::string claim_text;
    std::optional<bool> ground_truth;
    nlohmann::ordered_json config;  // effective semantic configuration snapshot

    std::optional<ReasoningTree> tree;
    std::vector<GenerationRecord> generation_log;
    std::vector<IntrinsicRecord> intrinsic_log;
    std::vector<ComparisonRecord> tournament_log;
    std::vector<CalibrationRecord> calibration_log;
    std::optional<AggregationReport> aggregation;
    std::optional<DirectRecord> direct_log;

    Verdict verdict;
    TraceStats stats;
};

// Canonical serialization: fixed key order, two-space indent, trailing
// newline. Identical traces produce byte-identical documents.
std::string trace_to_string(const RunTrace& trace);
void write_trace(const RunTrace& trace, const std::filesystem::path& path);

// Parsing rejects unknown schema versions and missing required fields with
// IntegrityError naming the field.
RunTrace trace_from_string(const std::string& text);
RunTrace read_trace(const std::filesystem::path& path);

// Verifying replay: recomputes the calibration (fit_bt on the stored win
// matrices under the stored configuration) and the aggregation from the
// recomputed tau', then checks every recomputed value against the stored
// ones within `tolerance`. Direct/cot traces are re-parsed from the stored
// raw response. Returns the (recomputed) verdict; divergence raises
// IntegrityError listing the offending nodes.
Verdict replay(const RunTrace& trace, double tolerance = 1e-12);

// Counterfactual replay: recomputes the verdict under an overridden blend
// weight and/or decision threshold without verifying against stored values.
struct WhatIf {
    std::optional<double> lambda;
    std::optional<double> threshold;
};

struct WhatIfResult {
    double probability = 0.0;
    bool label = false;
    double lambda_used = 0.5;
    double threshold_used = 0.5;
};

WhatIfResult replay_what_if(const RunTrace& trace, const WhatIf& overrides);

}  // namespace arbor
