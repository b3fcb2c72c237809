#include "arbor/persistence.hpp"

#include <fstream>

#include "arbor/errors.hpp"

namespace arbor {

namespace {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Serialization helpers (field order below defines the canonical layout).
// ---------------------------------------------------------------------------

ordered_json json_optional(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json json_from_node(const ArgumentNode& n) {
    ordered_json j;
    j["id"] = n.id;
    j["text"] = n.text;
    j["polarity"] = n.polarity ? ordered_json(to_string(*n.polarity)) : ordered_json(nullptr);
    j["tau"] = json_optional(n.tau);
    j["tau_prime"] = json_optional(n.tau_prime);
    j["s"] = json_optional(n.s);
    j["children"] = n.children;
    return j;
}

ordered_json json_from_tree(const ReasoningTree& t) {
    ordered_json j;
    j["root"] = t.root_id;
    j["depth"] = t.depth;
    j["breadth"] = t.breadth;
    ordered_json nodes = ordered_json::array();
    for (const auto& [id, node] : t.nodes) {
        (void)id;
        nodes.push_back(json_from_node(node));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

ordered_json json_from_matrix(const WinMatrix& m) {
    ordered_json counts = ordered_json::array();
    for (const auto& [pair, n] : m.counts) {
        ordered_json e;
        e["winner"] = pair.first;
        e["loser"] = pair.second;
        e["count"] = n;
        counts.push_back(std::move(e));
    }
    ordered_json j;
    j["parent"] = m.parent_id;
    j["counts"] = std::move(counts);
    return j;
}

ordered_json json_from_bt(const BTResult& r) {
    ordered_json j;
    j["no_evidence"] = r.no_evidence;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations_used;
    ordered_json theta = ordered_json::object();
    for (const auto& [id, v] : r.theta) theta[id] = v;
    j["theta"] = std::move(theta);
    j["log_likelihoods"] = r.log_likelihoods;
    return j;
}

ordered_json json_from_aggregation(const AggregationReport& rep) {
    ordered_json per_node = ordered_json::array();
    for (const auto& [id, agg] : rep.per_node) {
        ordered_json e;
        e["id"] = id;
        e["alpha"] = json_optional(agg.alpha);
        e["s"] = agg.s;
        per_node.push_back(std::move(e));
    }
    ordered_json j;
    j["per_node"] = std::move(per_node);
    j["root_probability"] = rep.root_probability;
    return j;
}

// ---------------------------------------------------------------------------
// Parsing helpers.
// ---------------------------------------------------------------------------

const ordered_json& require(const ordered_json& obj, const char* field, const std::string& ctx) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null())
        throw IntegrityError("trace is missing required field '" + ctx + field + "'");
    return *it;
}

std::optional<double> optional_from_json(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

ArgumentNode node_from_json(const ordered_json& j) {
    ArgumentNode n;
    n.id = require(j, "id", "tree.nodes.").get<std::string>();
    n.text = require(j, "text", "tree.nodes.").get<std::string>();
    if (!j.at("polarity").is_null())
        n.polarity = polarity_from_string(j.at("polarity").get<std::string>());
    n.tau = optional_from_json(j.at("tau"));
    n.tau_prime = optional_from_json(j.at("tau_prime"));
    n.s = optional_from_json(j.at("s"));
    n.children = j.at("children").get<std::vector<std::string>>();
    return n;
}

ReasoningTree tree_from_json(const ordered_json& j) {
    ReasoningTree t;
    t.root_id = require(j, "root", "tree.").get<std::string>();
    t.depth = require(j, "depth", "tree.").get<int>();
    t.breadth = require(j, "breadth", "tree.").get<int>();
    for (const auto& nj : require(j, "nodes", "tree.")) {
        ArgumentNode n = node_from_json(nj);
        t.nodes[n.id] = std::move(n);
    }
    return t;
}

WinMatrix matrix_from_json(const ordered_json& j) {
    WinMatrix m;
    m.parent_id = require(j, "parent", "calibration_log.matrix.").get<std::string>();
    for (const auto& e : j.at("counts")) {
        m.counts[{e.at("winner").get<std::string>(), e.at("loser").get<std::string>()}] =
            e.at("count").get<int>();
    }
    return m;
}

BTResult bt_from_json(const ordered_json& j) {
    BTResult r;
    r.no_evidence = j.at("no_evidence").get<bool>();
    r.converged = j.at("converged").get<bool>();
    r.iterations_used = j.at("iterations").get<int>();
    for (const auto& [id, v] : j.at("theta").items()) r.theta[id] = v.get<double>();
    r.log_likelihoods = j.at("log_likelihoods").get<std::vector<double>>();
    return r;
}

AggregationReport aggregation_from_json(const ordered_json& j, const Verdict& verdict) {
    AggregationReport rep;
    for (const auto& e : require(j, "per_node", "aggregation.")) {
        NodeAggregation agg;
        agg.alpha = optional_from_json(e.at("alpha"));
        agg.s = e.at("s").get<double>();
        rep.per_node[e.at("id").get<std::string>()] = agg;
    }
    rep.root_probability = require(j, "root_probability", "aggregation.").get<double>();
    rep.verdict = verdict;
    return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// Canonical document
// ---------------------------------------------------------------------------

std::string trace_to_string(const RunTrace& trace) {
    ordered_json doc;
    doc["schema_version"] = trace.schema_version;
    doc["method"] = trace.method;

    ordered_json claim;
    claim["id"] = trace.claim_id;
    claim["text"] = trace.claim_text;
    claim["ground_truth"] =
        trace.ground_truth ? ordered_json(*trace.ground_truth) : ordered_json(nullptr);
    doc["claim"] = std::move(claim);

    doc["config"] = trace.config;
    doc["tree"] = trace.tree ? json_from_tree(*trace.tree) : ordered_json(nullptr);

    ordered_json gen = ordered_json::array();
    for (const auto& r : trace.generation_log) {
        ordered_json e;
        e["node"] = r.node_id;
        e["prompt"] = r.prompt;
        e["responses"] = r.responses;
        gen.push_back(std::move(e));
    }
    doc["generation_log"] = std::move(gen);

    ordered_json intr = ordered_json::array();
    for (const auto& r : trace.intrinsic_log) {
        ordered_json e;
        e["node"] = r.node_id;
        e["prompt"] = r.prompt;
        e["responses"] = r.responses;
        e["value"] = r.value;
        intr.push_back(std::move(e));
    }
    doc["intrinsic_log"] = std::move(intr);

    ordered_json tour = ordered_json::array();
    for (const auto& r : trace.tournament_log) {
        ordered_json e;
        e["parent"] = r.parent_id;
        e["support"] = r.support_id;
        e["attack"] = r.attack_id;
        e["prompt"] = r.prompt;
        e["responses"] = r.responses;
        e["outcome"] = to_string(r.outcome);
        e["order_swapped"] = r.order_swapped;
        tour.push_back(std::move(e));
    }
    doc["tournament_log"] = std::move(tour);

    ordered_json cal = ordered_json::array();
    for (const auto& r : trace.calibration_log) {
        ordered_json e;
        e["parent"] = r.parent_id;
        e["matrix"] = json_from_matrix(r.matrix);
        e["bt"] = json_from_bt(r.bt);
        e["lambda"] = r.lambda;
        ordered_json tp = ordered_json::object();
        for (const auto& [id, v] : r.tau_prime) tp[id] = v;
        e["tau_prime"] = std::move(tp);
        cal.push_back(std::move(e));
    }
    doc["calibration_log"] = std::move(cal);

    doc["aggregation"] =
        trace.aggregation ? json_from_aggregation(*trace.aggregation) : ordered_json(nullptr);

    if (trace.direct_log) {
        ordered_json e;
        e["prompt"] = trace.direct_log->prompt;
        e["responses"] = trace.direct_log->responses;
        doc["direct_log"] = std::move(e);
    } else {
        doc["direct_log"] = nullptr;
    }

    ordered_json verdict;
    verdict["probability"] = trace.verdict.probability;
    verdict["label"] = trace.verdict.label;
    doc["verdict"] = std::move(verdict);

    ordered_json stats;
    stats["generation_calls"] = trace.stats.generation_calls;
    stats["intrinsic_calls"] = trace.stats.intrinsic_calls;
    stats["comparison_calls"] = trace.stats.comparison_calls;
    stats["bt_iterations"] = trace.stats.bt_iterations;
    doc["stats"] = std::move(stats);

    return doc.dump(2) + "\n";
}

void write_trace(const RunTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write trace file '" + path.string() + "'");
    out << trace_to_string(trace);
    if (!out) throw ConfigError("failed writing trace file '" + path.string() + "'");
}

RunTrace trace_from_string(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IntegrityError(std::string("trace is not valid structured text: ") + e.what());
    }
    if (!doc.is_object()) throw IntegrityError("trace document must be an object");

    const auto& version = require(doc, "schema_version", "");
    int v = version.get<int>();
    if (v != kTraceSchemaVersion)
        throw IntegrityError("unsupported trace schema version " + std::to_string(v) +
                             " (this build reads version " +
                             std::to_string(kTraceSchemaVersion) + ")");

    RunTrace t;
    t.schema_version = v;
    t.method = require(doc, "method", "").get<std::string>();

    const auto& claim = require(doc, "claim", "");
    t.claim_id = require(claim, "id", "claim.").get<std::string>();
    t.claim_text = require(claim, "text", "claim.").get<std::string>();
    if (!claim.at("ground_truth").is_null())
        t.ground_truth = claim.at("ground_truth").get<bool>();

    t.config = require(doc, "config", "");

    const auto& verdict = require(doc, "verdict", "");
    t.verdict.probability = require(verdict, "probability", "verdict.").get<double>();
    t.verdict.label = require(verdict, "label", "verdict.").get<bool>();

    if (auto it = doc.find("tree"); it != doc.end() && !it->is_null())
        t.tree = tree_from_json(*it);

    for (const auto& e : require(doc, "generation_log", "")) {
        GenerationRecord r;
        r.node_id = e.at("node").get<std::string>();
        r.prompt = e.at("prompt").get<std::string>();
        r.responses = e.at("responses").get<std::vector<std::string>>();
        t.generation_log.push_back(std::move(r));
    }
    for (const auto& e : require(doc, "intrinsic_log", "")) {
        IntrinsicRecord r;
        r.node_id = e.at("node").get<std::string>();
        r.prompt = e.at("prompt").get<std::string>();
        r.responses = e.at("responses").get<std::vector<std::string>>();
        r.value = e.at("value").get<double>();
        t.intrinsic_log.push_back(std::move(r));
    }
    for (const auto& e : require(doc, "tournament_log", "")) {
        ComparisonRecord r;
        r.parent_id = e.at("parent").get<std::string>();
        r.support_id = e.at("support").get<std::string>();
        r.attack_id = e.at("attack").get<std::string>();
        r.prompt = e.at("prompt").get<std::string>();
        r.responses = e.at("responses").get<std::vector<std::string>>();
        r.outcome = judge_outcome_from_string(e.at("outcome").get<std::string>());
        r.order_swapped = e.at("order_swapped").get<bool>();
        t.tournament_log.push_back(std::move(r));
    }
    for (const auto& e : require(doc, "calibration_log", "")) {
        CalibrationRecord r;
        r.parent_id = e.at("parent").get<std::string>();
        r.matrix = matrix_from_json(e.at("matrix"));
        r.bt = bt_from_json(e.at("bt"));
        r.lambda = e.at("lambda").get<double>();
        for (const auto& [id, val] : e.at("tau_prime").items())
            r.tau_prime[id] = val.get<double>();
        t.calibration_log.push_back(std::move(r));
    }

    if (auto it = doc.find("aggregation"); it != doc.end() && !it->is_null())
        t.aggregation = aggregation_from_json(*it, t.verdict);
    if (auto it = doc.find("direct_log"); it != doc.end() && !it->is_null()) {
        DirectRecord r;
        r.prompt = it->at("prompt").get<std::string>();
        r.responses = it->at("responses").get<std::vector<std::string>>();
        t.direct_log = std::move(r);
    }

    const auto& stats = require(doc, "stats", "");
    t.stats.generation_calls = stats.at("generation_calls").get<int>();
    t.stats.intrinsic_calls = stats.at("intrinsic_calls").get<int>();
    t.stats.comparison_calls = stats.at("comparison_calls").get<int>();
    t.stats.bt_iterations = stats.at("bt_iterations").get<int>();

    return t;
}

RunTrace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read trace file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return trace_from_string(text);
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

namespace {

bool is_tree_method(const std::string& method) {
    return method == "art" || method == "argllm" || method == "art_ensemble_member";
}

double config_number(const ordered_json& config, const char* field) {
    const auto& v = require(config, field, "config.");
    return v.get<double>();
}

struct Recomputation {
    ReasoningTree tree;  // tau from trace; tau_prime / s recomputed
    std::vector<CalibrationRecord> calibration;
    AggregationReport report;
};

// Re-derives tau_prime and the aggregation from first principles using only
// the stored tree (texts + tau), the stored win matrices, and the given
// blend weight.
Recomputation recompute(const RunTrace& trace, double lambda) {
    if (!trace.tree)
        throw IntegrityError("trace for method '" + trace.method + "' carries no tree");

    Recomputation rc;
    rc.tree = *trace.tree;
    for (auto& [id, node] : rc.tree.nodes) {
        (void)id;
        node.tau_prime.reset();
        node.s.reset();
    }

    BTConfig bt;
    bt.epsilon = config_number(trace.config, "epsilon");
    bt.max_iters = static_cast<int>(config_number(trace.config, "max_bt_iters"));
    bt.tol = config_number(trace.config, "bt_tol");
    bt.lambda = lambda;

    std::map<std::string, WinMatrix> matrices;
    for (const auto& rec : trace.calibration_log) matrices.emplace(rec.parent_id, rec.matrix);

    try {
        CalibrationOutcome cal = calibrate_tree(rc.tree, matrices, bt);
        rc.calibration = std::move(cal.log);
        rc.report = aggregate(rc.tree);
    } catch (const std::invalid_argument& e) {
        throw IntegrityError(std::string("trace cannot be recomputed: ") + e.what());
    }
    return rc;
}

void check_close(double got, double want, double tolerance, const std::string& node,
                 std::vector<std::string>& divergent) {
    if (std::abs(got - want) > tolerance) divergent.push_back(node);
}

// An ensemble summary carries no tree of its own; its verdict is the mean of
// the member probabilities echoed into the config block.
Verdict replay_ensemble(const RunTrace& trace, double tolerance) {
    const auto& ens = require(trace.config, "ensemble", "config.");
    const auto& probs = require(ens, "member_probabilities", "config.ensemble.");
    if (!probs.is_array() || probs.empty())
        throw IntegrityError("trace field 'config.ensemble.member_probabilities' is empty");
    double sum = 0.0;
    for (const auto& p : probs) sum += p.get<double>();
    Verdict v = verdict_from_probability(sum / static_cast<double>(probs.size()));
    std::vector<std::string> divergent;
    check_close(v.probability, trace.verdict.probability, tolerance, "verdict.probability",
                divergent);
    if (v.label != trace.verdict.label) divergent.push_back("verdict.label");
    if (!divergent.empty())
        throw IntegrityError("stored ensemble verdict diverges from the member mean",
                             divergent);
    return v;
}

Verdict replay_direct(const RunTrace& trace, double tolerance) {
    if (!trace.direct_log || trace.direct_log->responses.empty())
        throw IntegrityError("trace for method '" + trace.method +
                             "' carries no recorded exchange");
    auto token = parse_token(trace.direct_log->responses.back(), {"Yes", "No"});
    if (!token)
        throw IntegrityError("stored response no longer parses to a verdict",
                             {"direct_log"});
    Verdict v = verdict_from_probability(*token == "Yes" ? 1.0 : 0.0);
    std::vector<std::string> divergent;
    check_close(v.probability, trace.verdict.probability, tolerance, "verdict", divergent);
    if (v.label != trace.verdict.label) divergent.push_back("verdict.label");
    if (!divergent.empty())
        throw IntegrityError("stored verdict diverges from the re-parsed response",
                             divergent);
    return v;
}

}  // namespace

Verdict replay(const RunTrace& trace, double tolerance) {
    if (trace.method == "art_ensemble") return replay_ensemble(trace, tolerance);
    if (!is_tree_method(trace.method)) return replay_direct(trace, tolerance);

    double lambda = config_number(trace.config, "lambda");
    Recomputation rc = recompute(trace, lambda);
    std::vector<std::string> divergent;

    // Calibration stage: recomputed theta and tau_prime against the stored
    // records and the stored per-node values.
    if (rc.calibration.size() != trace.calibration_log.size())
        throw IntegrityError("trace calibration log shape changed on recomputation");
    for (std::size_t i = 0; i < rc.calibration.size(); ++i) {
        const CalibrationRecord& got = rc.calibration[i];
        const CalibrationRecord& want = trace.calibration_log[i];
        if (got.parent_id != want.parent_id)
            throw IntegrityError("trace calibration log order changed on recomputation");
        if (got.bt.no_evidence != want.bt.no_evidence) {
            divergent.push_back(want.parent_id);
            continue;
        }
        for (const auto& [id, v] : got.bt.theta) {
            auto it = want.bt.theta.find(id);
            if (it == want.bt.theta.end()) divergent.push_back(id + ".theta");
            else check_close(v, it->second, tolerance, id + ".theta", divergent);
        }
        for (const auto& [id, v] : got.tau_prime) {
            auto it = want.tau_prime.find(id);
            if (it == want.tau_prime.end()) divergent.push_back(id + ".tau_prime");
            else check_close(v, it->second, tolerance, id + ".tau_prime", divergent);
        }
    }

    // Per-node strengths against the stored tree.
    for (const auto& [id, node] : trace.tree->nodes) {
        const ArgumentNode& rec_node = rc.tree.node(id);
        if (node.tau_prime)
            check_close(*rec_node.tau_prime, *node.tau_prime, tolerance, id + ".tau_prime",
                        divergent);
        if (node.s) check_close(*rec_node.s, *node.s, tolerance, id + ".s", divergent);
    }

    // Aggregation report and verdict.
    if (trace.aggregation) {
        for (const auto& [id, agg] : trace.aggregation->per_node) {
            auto it = rc.report.per_node.find(id);
            if (it == rc.report.per_node.end()) {
                divergent.push_back(id + ".s");
                continue;
            }
            check_close(it->second.s, agg.s, tolerance, id + ".s", divergent);
            if (agg.alpha && it->second.alpha)
                check_close(*it->second.alpha, *agg.alpha, tolerance, id + ".alpha", divergent);
        }
        check_close(rc.report.root_probability, trace.aggregation->root_probability, tolerance,
                    "root_probability", divergent);
    }
    check_close(rc.report.root_probability, trace.verdict.probability, tolerance,
                "verdict.probability", divergent);
    if (rc.report.verdict.label != trace.verdict.label) divergent.push_back("verdict.label");

    if (!divergent.empty()) {
        std::string msg = "trace verification failed; divergent values:";
        for (const auto& d : divergent) msg += " " + d;
        throw IntegrityError(msg, divergent);
    }
    return rc.report.verdict;
}

WhatIfResult replay_what_if(const RunTrace& trace, const WhatIf& overrides) {
    WhatIfResult result;
    result.threshold_used = overrides.threshold.value_or(0.5);

    if (!is_tree_method(trace.method)) {
        if (overrides.lambda)
            throw ConfigError("blend weight does not apply to method '" + trace.method + "'");
        result.lambda_used = 0.0;
        result.probability = trace.verdict.probability;
        result.label = result.probability > result.threshold_used;
        return result;
    }

    result.lambda_used = overrides.lambda.value_or(config_number(trace.config, "lambda"));
    if (result.lambda_used < 0.0 || result.lambda_used > 1.0)
        throw ConfigError("blend weight must lie in [0,1]");
    Recomputation rc = recompute(trace, result.lambda_used);
    result.probability = rc.report.root_probability;
    result.label = result.probability > result.threshold_used;
    return result;
}

}  // namespace arbor
