#include "arbor/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>

#include "arbor/errors.hpp"
#include "arbor/http_backend.hpp"
#include "arbor/semantics.hpp"
#include "arbor/util.hpp"

namespace arbor {

namespace {
using ordered_json = nlohmann::ordered_json;
}

// ---------------------------------------------------------------------------
// Dataset.
// ---------------------------------------------------------------------------

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read dataset file '" + path.string() + "'");

    Dataset ds;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_view(line).empty()) continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw ConfigError("dataset line " + std::to_string(line_no) +
                              " is not a valid record: " + e.what());
        }
        if (!obj.is_object())
            throw ConfigError("dataset line " + std::to_string(line_no) +
                              " must be an object with fields id/claim/label");

        auto field = [&](const char* name) -> const nlohmann::json& {
            auto it = obj.find(name);
            if (it == obj.end())
                throw ConfigError("dataset line " + std::to_string(line_no) +
                                  " is missing the '" + name + "' field");
            return *it;
        };

        ClaimRecord rec;
        const auto& id = field("id");
        const auto& claim = field("claim");
        const auto& label = field("label");
        if (!id.is_string() || id.get<std::string>().empty())
            throw ConfigError("dataset line " + std::to_string(line_no) +
                              ": 'id' must be a non-empty string");
        if (!claim.is_string() || trim(claim.get<std::string>()).empty())
            throw ConfigError("dataset line " + std::to_string(line_no) +
                              ": 'claim' must be a non-empty string");
        if (!label.is_boolean())
            throw ConfigError("dataset line " + std::to_string(line_no) +
                              ": 'label' must be true or false");
        rec.id = id.get<std::string>();
        rec.claim = claim.get<std::string>();
        rec.label = label.get<bool>();

        if (!seen.insert(rec.id).second)
            throw ConfigError("dataset line " + std::to_string(line_no) + ": duplicate id '" +
                              rec.id + "'");
        (rec.label ? ds.true_count : ds.false_count)++;
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty())
        ds.warnings.push_back("dataset '" + path.string() + "' contains no records");
    return ds;
}

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

const char* to_string(Method m) {
    switch (m) {
        case Method::Direct: return "direct";
        case Method::Cot: return "cot";
        case Method::Argllm: return "argllm";
        case Method::Art: return "art";
        case Method::ArtEnsemble: return "art_ensemble";
    }
    return "art";
}

Method method_from_string(const std::string& s) {
    std::string v = to_lower(trim(s));
    if (v == "direct") return Method::Direct;
    if (v == "cot") return Method::Cot;
    if (v == "argllm") return Method::Argllm;
    if (v == "art") return Method::Art;
    if (v == "art_ensemble" || v == "ensemble") return Method::ArtEnsemble;
    throw ConfigError("unknown method '" + s +
                      "' (expected direct, cot, argllm, art, or art_ensemble)");
}

const char* to_string(MockRig r) { return r == MockRig::Oracle ? "oracle" : "none"; }

MockRig mock_rig_from_string(const std::string& s) {
    std::string v = to_lower(trim(s));
    if (v == "none") return MockRig::None;
    if (v == "oracle") return MockRig::Oracle;
    throw ConfigError("unknown mock rig '" + s + "' (expected none or oracle)");
}

double ExperimentConfig::effective_lambda() const {
    return method == Method::Argllm ? 0.0 : bt.lambda;
}

void ExperimentConfig::validate() const {
    arbor::validate(generation);
    if (!(bt.epsilon > 0.0))
        throw ConfigError("bt epsilon must be positive");
    if (bt.max_iters < 1) throw ConfigError("bt max_iters must be at least 1");
    if (!(bt.tol > 0.0)) throw ConfigError("bt tolerance must be positive");
    if (bt.lambda < 0.0 || bt.lambda > 1.0)
        throw ConfigError("lambda must lie in [0,1]");
    if (tournament.repeats < 1) throw ConfigError("tournament repeats must be at least 1");
    if (tournament.parallelism < 1)
        throw ConfigError("tournament parallelism must be at least 1");
    if (method == Method::ArtEnsemble && ensemble_size < 2)
        throw ConfigError("ensemble size must be at least 2");
    if (record_parallelism < 1) throw ConfigError("record parallelism must be at least 1");
    if (!use_mock) {
        if (generator.endpoint_url.empty() || generator.model_name.empty())
            throw ConfigError("generator endpoint and model are required without --mock");
        if (evaluator == EvaluatorMode::Separate &&
            (judge.endpoint_url.empty() || judge.model_name.empty()))
            throw ConfigError("judge endpoint and model are required for the separate evaluator");
    }
}

RunBackends make_backends(const ExperimentConfig& cfg, const ClaimRecord& record,
                          std::uint64_t seed) {
    RunBackends out;
    if (cfg.use_mock) {
        MockOverrides ov = cfg.mock_overrides;
        if (cfg.rig == MockRig::Oracle) {
            if (!ov.compare_default)
                ov.compare_default =
                    record.label ? JudgeOutcome::SupportWins : JudgeOutcome::AttackWins;
            ov.direct_by_claim.emplace(record.claim, record.label);
            ov.intrinsic_by_argument.emplace(record.claim, record.label ? 0.9 : 0.1);
        }
        auto gen = std::make_shared<MockJudge>(seed, ov);
        out.generator = gen;
        out.judge = cfg.evaluator == EvaluatorMode::Separate
                        ? std::make_shared<MockJudge>(seed + 0x9E3779B97F4A7C15ULL, ov)
                        : gen;
        return out;
    }
    auto gen = std::make_shared<HttpBackend>(cfg.generator);
    out.generator = gen;
    out.judge = cfg.evaluator == EvaluatorMode::Separate
                    ? std::make_shared<HttpBackend>(cfg.judge)
                    : gen;
    return out;
}

namespace {

ordered_json backend_json(const BackendConfig& b) {
    ordered_json j;
    j["endpoint"] = b.endpoint_url;
    j["model"] = b.model_name;
    j["temperature"] = b.temperature;
    j["max_new_tokens"] = b.max_new_tokens;
    j["top_p"] = b.top_p;
    j["api_key_env"] = b.api_key_env;
    return j;
}

}  // namespace

nlohmann::ordered_json config_snapshot(const ExperimentConfig& cfg, Method method,
                                       std::uint64_t seed) {
    ordered_json j;
    j["method"] = to_string(method);
    j["depth"] = cfg.generation.depth;
    j["breadth"] = cfg.generation.breadth;
    j["lambda"] = method == Method::Argllm ? 0.0 : cfg.bt.lambda;
    j["epsilon"] = cfg.bt.epsilon;
    j["max_bt_iters"] = cfg.bt.max_iters;
    j["bt_tol"] = cfg.bt.tol;
    j["tournament_repeats"] = cfg.tournament.repeats;
    j["swap_order_duplicate"] = cfg.tournament.swap_order_duplicate;
    j["evaluator"] = to_string(cfg.evaluator);
    j["mock"] = cfg.use_mock;
    j["mock_rig"] = to_string(cfg.rig);
    j["seed"] = seed;
    j["generator"] = backend_json(cfg.generator);
    j["judge"] = cfg.evaluator == EvaluatorMode::Separate ? backend_json(cfg.judge)
                                                          : ordered_json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// Single-record pipelines.
// ---------------------------------------------------------------------------

namespace {

TraceStats compute_stats(const RunTrace& t) {
    TraceStats s;
    for (const auto& r : t.generation_log)
        s.generation_calls += static_cast<int>(r.responses.size());
    for (const auto& r : t.intrinsic_log)
        s.intrinsic_calls += static_cast<int>(r.responses.size());
    for (const auto& r : t.tournament_log)
        s.comparison_calls += static_cast<int>(r.responses.size());
    for (const auto& r : t.calibration_log) s.bt_iterations += r.bt.iterations_used;
    return s;
}

void fill_claim(RunTrace& t, const ClaimRecord& record) {
    t.claim_id = record.id;
    t.claim_text = record.claim;
    t.ground_truth = record.label;
}

// Scores tau for every node: the bare-claim score at the root, the
// parent-relative score elsewhere. Level order, batched through the
// scheduler; values are written back only after the whole batch returns.
std::vector<IntrinsicRecord> score_intrinsics(ReasoningTree& tree, JudgeBackend& judge,
                                              const PromptLibrary& prompts, int parallelism,
                                              std::uint64_t schedule_seed) {
    std::vector<std::string> ids;
    for (const auto& level : tree.levels())
        for (const auto& id : level) ids.push_back(id);

    std::map<std::string, std::string> parent_of;
    for (const auto& [id, node] : tree.nodes)
        for (const auto& child : node.children) parent_of[child] = id;

    std::function<IntrinsicRecord(std::size_t)> fn = [&](std::size_t i) -> IntrinsicRecord {
        const std::string& id = ids[i];
        const ArgumentNode& node = tree.node(id);
        try {
            IntrinsicResult r =
                id == tree.root_id
                    ? intrinsic_claim(node.text, judge, prompts)
                    : intrinsic_strength(tree.node(parent_of.at(id)).text, node.text,
                                         *node.polarity, judge, prompts);
            return IntrinsicRecord{id, r.call.prompt, r.call.responses, r.value};
        } catch (const Error& e) {
            throw Error(e.code(),
                        "intrinsic scoring failed at node '" + id + "': " + e.what());
        }
    };
    auto records = parallel_map<IntrinsicRecord>(ids.size(), parallelism, schedule_seed, fn);
    for (const auto& r : records) tree.node(r.node_id).tau = r.value;
    return records;
}

// The shared tree pipeline behind "art" and its ensemble members.
RunTrace run_art_core(const ClaimRecord& record, const ExperimentConfig& cfg,
                      const RunBackends& backends, const PromptLibrary& prompts,
                      const std::string& method, ordered_json config) {
    RunTrace t;
    t.method = method;
    fill_claim(t, record);
    t.config = std::move(config);

    BuildResult built = build_tree(record.claim, cfg.generation, *backends.generator, prompts);
    t.tree = std::move(built.tree);
    t.generation_log = std::move(built.log);

    t.intrinsic_log = score_intrinsics(*t.tree, *backends.judge, prompts,
                                       cfg.generation.parallelism, cfg.generation.schedule_seed);

    AllTournaments tournaments;
    try {
        tournaments = run_all(*t.tree, *backends.judge, prompts, cfg.tournament);
    } catch (const Error& e) {
        throw Error(e.code(), std::string("tournament phase: ") + e.what());
    }
    t.tournament_log = std::move(tournaments.log);

    BTConfig bt = cfg.bt;
    bt.lambda = cfg.effective_lambda();
    CalibrationOutcome cal = calibrate_tree(*t.tree, tournaments.matrices, bt);
    t.calibration_log = std::move(cal.log);

    t.aggregation = aggregate(*t.tree);
    t.verdict = t.aggregation->verdict;
    t.stats = compute_stats(t);
    return t;
}

}  // namespace

RunTrace run_direct(const ClaimRecord& record, const ExperimentConfig& cfg,
                    JudgeBackend& backend, const PromptLibrary& prompts) {
    RunTrace t;
    t.method = "direct";
    fill_claim(t, record);
    t.config = config_snapshot(cfg, Method::Direct, cfg.seed);
    YesNoResult r = ask_direct(record.claim, backend, prompts);
    t.direct_log = DirectRecord{r.call.prompt, r.call.responses};
    t.verdict = verdict_from_probability(r.yes ? 1.0 : 0.0);
    return t;
}

RunTrace run_cot(const ClaimRecord& record, const ExperimentConfig& cfg,
                 JudgeBackend& backend, const PromptLibrary& prompts) {
    RunTrace t;
    t.method = "cot";
    fill_claim(t, record);
    t.config = config_snapshot(cfg, Method::Cot, cfg.seed);
    YesNoResult r = ask_cot(record.claim, backend, prompts);
    t.direct_log = DirectRecord{r.call.prompt, r.call.responses};
    t.verdict = verdict_from_probability(r.yes ? 1.0 : 0.0);
    return t;
}

RunTrace run_argllm(const ClaimRecord& record, const ExperimentConfig& cfg,
                    const RunBackends& backends, const PromptLibrary& prompts) {
    RunTrace t;
    t.method = "argllm";
    fill_claim(t, record);
    t.config = config_snapshot(cfg, Method::Argllm, cfg.seed);

    BuildResult built = build_tree(record.claim, cfg.generation, *backends.generator, prompts);
    t.tree = std::move(built.tree);
    t.generation_log = std::move(built.log);

    t.intrinsic_log = score_intrinsics(*t.tree, *backends.judge, prompts,
                                       cfg.generation.parallelism, cfg.generation.schedule_seed);

    // Intrinsic strengths stand as-is; no tournaments are held.
    for (auto& [id, node] : t.tree->nodes) {
        (void)id;
        node.tau_prime = node.tau;
    }
    t.aggregation = aggregate(*t.tree);
    t.verdict = t.aggregation->verdict;
    t.stats = compute_stats(t);
    return t;
}

RunTrace run_art(const ClaimRecord& record, const ExperimentConfig& cfg,
                 const RunBackends& backends, const PromptLibrary& prompts) {
    return run_art_core(record, cfg, backends, prompts, "art",
                        config_snapshot(cfg, Method::Art, cfg.seed));
}

EnsembleRun run_ensemble(const ClaimRecord& record, const ExperimentConfig& cfg,
                         const PromptLibrary& prompts) {
    if (cfg.ensemble_size < 2) throw ConfigError("ensemble size must be at least 2");

    EnsembleRun run;
    ordered_json member_seeds = ordered_json::array();
    ordered_json member_probs = ordered_json::array();
    TraceStats stats;
    double sum = 0.0;
    bool all_equal = true;

    for (int i = 0; i < cfg.ensemble_size; ++i) {
        std::uint64_t member_seed =
            cfg.seed + static_cast<std::uint64_t>(i) * cfg.ensemble_seed_stride;
        ordered_json config = config_snapshot(cfg, Method::Art, member_seed);
        config["member_index"] = i;
        RunTrace member;
        try {
            RunBackends backends = make_backends(cfg, record, member_seed);
            member = run_art_core(record, cfg, backends, prompts, "art_ensemble_member",
                                  std::move(config));
        } catch (const Error& e) {
            throw Error(e.code(), "ensemble member " + std::to_string(i) +
                                      " failed: " + e.what());
        }
        member_seeds.push_back(member_seed);
        member_probs.push_back(member.verdict.probability);
        sum += member.verdict.probability;
        if (!run.members.empty() &&
            member.verdict.probability != run.members.front().verdict.probability)
            all_equal = false;
        stats.generation_calls += member.stats.generation_calls;
        stats.intrinsic_calls += member.stats.intrinsic_calls;
        stats.comparison_calls += member.stats.comparison_calls;
        stats.bt_iterations += member.stats.bt_iterations;
        run.members.push_back(std::move(member));
    }

    // Arithmetic mean; when every member produced the same probability the
    // mean is that value exactly (no needless rounding through sum/n).
    double mean = all_equal ? run.members.front().verdict.probability
                            : sum / static_cast<double>(cfg.ensemble_size);

    RunTrace& s = run.summary;
    s.method = "art_ensemble";
    fill_claim(s, record);
    s.config = config_snapshot(cfg, Method::ArtEnsemble, cfg.seed);
    ordered_json ens;
    ens["size"] = cfg.ensemble_size;
    ens["seed_stride"] = cfg.ensemble_seed_stride;
    ens["member_seeds"] = std::move(member_seeds);
    ens["member_probabilities"] = std::move(member_probs);
    s.config["ensemble"] = std::move(ens);
    s.verdict = verdict_from_probability(mean);
    s.stats = stats;
    return run;
}

RecordRun run_record(const ClaimRecord& record, const ExperimentConfig& cfg,
                     const PromptLibrary& prompts) {
    switch (cfg.method) {
        case Method::Direct: {
            RunBackends b = make_backends(cfg, record, cfg.seed);
            return {run_direct(record, cfg, *b.generator, prompts), {}};
        }
        case Method::Cot: {
            RunBackends b = make_backends(cfg, record, cfg.seed);
            return {run_cot(record, cfg, *b.generator, prompts), {}};
        }
        case Method::Argllm: {
            RunBackends b = make_backends(cfg, record, cfg.seed);
            return {run_argllm(record, cfg, b, prompts), {}};
        }
        case Method::Art: {
            RunBackends b = make_backends(cfg, record, cfg.seed);
            return {run_art(record, cfg, b, prompts), {}};
        }
        case Method::ArtEnsemble: {
            EnsembleRun e = run_ensemble(record, cfg, prompts);
            return {std::move(e.summary), std::move(e.members)};
        }
    }
    throw ConfigError("unknown method");
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

double population_variance(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(values.size());
}

namespace {

std::string sanitize_id(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'
                          ? c
                          : '_');
    return out;
}

struct RecordRow {
    std::optional<ClaimOutcome> outcome;
    std::vector<double> tau_primes;  // calibrated child strengths of this record
    std::string error;
};

void collect_tau_primes(const RunTrace& trace, std::vector<double>& out) {
    for (const auto& rec : trace.calibration_log)
        for (const auto& [id, v] : rec.tau_prime) {
            (void)id;
            out.push_back(v);
        }
}

}  // namespace

RunResult evaluate(const ExperimentConfig& cfg, const Dataset& dataset,
                   const PromptLibrary& prompts) {
    cfg.validate();
    if (dataset.records.empty()) throw ConfigError("dataset has no records");
    if (cfg.trace_dir) std::filesystem::create_directories(*cfg.trace_dir);

    std::function<RecordRow(std::size_t)> worker = [&](std::size_t i) -> RecordRow {
        const ClaimRecord& rec = dataset.records[i];
        RecordRow row;
        try {
            RecordRun rr = run_record(rec, cfg, prompts);
            ClaimOutcome oc;
            oc.id = rec.id;
            oc.probability = rr.primary.verdict.probability;
            oc.predicted = rr.primary.verdict.label;
            oc.ground_truth = rec.label;
            collect_tau_primes(rr.primary, row.tau_primes);
            for (const auto& m : rr.members) collect_tau_primes(m, row.tau_primes);
            if (cfg.trace_dir) {
                // Keyed by claim id only, so the per-claim table is identical
                // across methods that agree on every value.
                std::string base = sanitize_id(rec.id);
                std::string primary_name = base + ".json";
                write_trace(rr.primary, *cfg.trace_dir / primary_name);
                oc.trace_files.push_back(primary_name);
                for (std::size_t m = 0; m < rr.members.size(); ++m) {
                    std::string member_name = base + "_m" + std::to_string(m) + ".json";
                    write_trace(rr.members[m], *cfg.trace_dir / member_name);
                    oc.trace_files.push_back(member_name);
                }
            }
            row.outcome = std::move(oc);
        } catch (const std::exception& e) {
            row.error = e.what();
            if (row.error.empty()) row.error = "unknown error";
        }
        return row;
    };

    auto rows = parallel_map<RecordRow>(dataset.records.size(), cfg.record_parallelism,
                                        cfg.record_schedule_seed, worker);

    RunResult result;
    result.total = static_cast<int>(dataset.records.size());
    std::vector<double> probabilities;
    std::vector<double> tau_primes;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        RecordRow& row = rows[i];
        if (!row.outcome) {
            result.failures.push_back({dataset.records[i].id, row.error});
            ++result.excluded;
            continue;
        }
        ++result.scored;
        if (row.outcome->predicted == row.outcome->ground_truth) ++result.correct;
        probabilities.push_back(row.outcome->probability);
        tau_primes.insert(tau_primes.end(), row.tau_primes.begin(), row.tau_primes.end());
        result.per_claim[row.outcome->id] = std::move(*row.outcome);
    }
    result.accuracy = result.scored > 0
                          ? static_cast<double>(result.correct) / result.scored
                          : 0.0;
    result.root_probability_variance = population_variance(probabilities);
    result.tau_prime_variance = population_variance(tau_primes);
    return result;
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

std::string results_to_json_string(const RunResult& result, const ExperimentConfig& cfg) {
    ordered_json doc;
    doc["config"] = config_snapshot(cfg, cfg.method, cfg.seed);

    ordered_json summary;
    summary["total"] = result.total;
    summary["scored"] = result.scored;
    summary["excluded"] = result.excluded;
    summary["correct"] = result.correct;
    summary["accuracy"] = result.accuracy;
    summary["root_probability_variance"] = result.root_probability_variance;
    summary["tau_prime_variance"] = result.tau_prime_variance;
    doc["summary"] = std::move(summary);

    ordered_json failures = ordered_json::array();
    for (const auto& f : result.failures) {
        ordered_json e;
        e["id"] = f.id;
        e["error"] = f.message;
        failures.push_back(std::move(e));
    }
    doc["failures"] = std::move(failures);

    ordered_json per_claim = ordered_json::array();
    for (const auto& [id, oc] : result.per_claim) {
        (void)id;
        ordered_json e;
        e["id"] = oc.id;
        e["probability"] = oc.probability;
        e["predicted"] = oc.predicted;
        e["ground_truth"] = oc.ground_truth;
        e["correct"] = oc.predicted == oc.ground_truth;
        e["trace_files"] = oc.trace_files;
        per_claim.push_back(std::move(e));
    }
    doc["per_claim"] = std::move(per_claim);

    return doc.dump(2) + "\n";
}

std::string results_to_csv_string(const RunResult& result) {
    std::string out = "id,probability,predicted,ground_truth,correct,trace_file\n";
    for (const auto& [id, oc] : result.per_claim) {
        (void)id;
        out += oc.id;
        out += ',';
        out += ordered_json(oc.probability).dump();  // shortest round-trip form
        out += ',';
        out += oc.predicted ? "true" : "false";
        out += ',';
        out += oc.ground_truth ? "true" : "false";
        out += ',';
        out += oc.predicted == oc.ground_truth ? "true" : "false";
        out += ',';
        out += oc.trace_files.empty() ? "" : oc.trace_files.front();
        out += '\n';
    }
    return out;
}

void write_results(const RunResult& result, const ExperimentConfig& cfg,
                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto dump = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write results file '" + p.string() + "'");
        out << text;
    };
    dump(out_dir / "results.json", results_to_json_string(result, cfg));
    dump(out_dir / "results.csv", results_to_csv_string(result));
}

}  // namespace arbor
