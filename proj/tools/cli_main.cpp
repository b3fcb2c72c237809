// arbor — argumentative claim verification from the command line.
//
// Subcommands:
//   verify     run one claim through the configured method and print the tree
//   bench      run a dataset and report accuracy / variance / exclusions
//   replay     re-derive a stored trace (verification or what-if mode)
//   calibrate  fit tournament strengths to a stored win-count document
//
// Every flag has a config-file equivalent (JSON, keys = flag names with
// dashes replaced by underscores); flags override file values. API keys are
// only ever read from the environment variable named by --api-key-env.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "arbor/calibration.hpp"
#include "arbor/errors.hpp"
#include "arbor/harness.hpp"
#include "arbor/persistence.hpp"
#include "arbor/util.hpp"

namespace {

using nlohmann::ordered_json;

std::string num(double v) { return ordered_json(v).dump(); }

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string("-"); }

// ---------------------------------------------------------------------------
// Shared experiment options.
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string config_path;
    std::string method = "art";
    int depth = 1;
    int breadth = 1;
    double lambda = 0.5;
    double epsilon = 1e-9;
    int max_bt_iters = 100;
    double bt_tol = 1e-10;
    std::string evaluator = "self";
    std::string gen_endpoint;
    std::string judge_endpoint;
    std::string model;
    std::string judge_model;
    std::uint64_t seed = 0;
    bool mock = true;
    std::string mock_rig = "none";
    int repeats = 1;
    bool swap_duplicate = false;
    int ensemble_size = 2;
    std::uint64_t seed_stride = 1;
    int parallelism = 8;
    std::uint64_t schedule_seed = 0;
    std::string out = "runs";
    bool allow_large = false;
    std::string prompts = "prompts";
    std::string api_key_env = "ARBOR_API_KEY";
    int max_attempts = 3;
    int retry_base_ms = 1000;
    int timeout_ms = 120000;
    double temperature = 0.2;
    double top_p = 0.95;
    int max_new_tokens = 512;
};

void add_common(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--config", o.config_path,
                    "Configuration file (JSON); explicit flags take precedence");
    sub->add_option("--method", o.method, "direct | cot | argllm | art | art_ensemble");
    sub->add_option("--depth", o.depth, "Tree depth (levels below the root)");
    sub->add_option("--breadth", o.breadth, "Children per polarity per internal node");
    sub->add_option("--lambda", o.lambda, "Blend weight: 0 trusts intrinsic scores, 1 tournaments");
    sub->add_option("--epsilon", o.epsilon, "Fixed-point denominator stabilizer");
    sub->add_option("--max-bt-iters", o.max_bt_iters, "Fixed-point iteration cap");
    sub->add_option("--bt-tol", o.bt_tol, "Fixed-point convergence threshold");
    sub->add_option("--evaluator", o.evaluator, "self | separate");
    sub->add_option("--gen-endpoint", o.gen_endpoint, "Generator endpoint URL");
    sub->add_option("--judge-endpoint", o.judge_endpoint, "Judge endpoint URL (separate evaluator)");
    sub->add_option("--model", o.model, "Generator model name");
    sub->add_option("--judge-model", o.judge_model, "Judge model name (defaults to --model)");
    sub->add_option("--seed", o.seed, "Deterministic mock seed");
    sub->add_flag("--mock,!--no-mock", o.mock, "Use the deterministic offline mock backend");
    sub->add_option("--mock-rig", o.mock_rig, "none | oracle (mock answers the ground truth)");
    sub->add_option("--repeats", o.repeats, "Judgements per tournament pair");
    sub->add_flag("--swap-duplicate", o.swap_duplicate,
                  "Re-judge each pair once with presentation order reversed");
    sub->add_option("--ensemble-size", o.ensemble_size, "Trees per ensemble");
    sub->add_option("--seed-stride", o.seed_stride, "Seed offset between ensemble members");
    sub->add_option("--parallelism", o.parallelism, "In-flight request cap per stage");
    sub->add_option("--schedule-seed", o.schedule_seed,
                    "Nonzero shuffles dispatch order (results are unaffected)");
    sub->add_option("--out", o.out, "Output directory for traces and reports");
    sub->add_flag("--allow-large", o.allow_large, "Unlock depth/breadth beyond 2");
    sub->add_option("--prompts", o.prompts, "Prompt template directory");
    sub->add_option("--api-key-env", o.api_key_env,
                    "Environment variable holding the API key (never a flag)");
    sub->add_option("--max-attempts", o.max_attempts, "HTTP tries per request");
    sub->add_option("--retry-base-ms", o.retry_base_ms, "Base backoff delay in ms");
    sub->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout in ms");
    sub->add_option("--temperature", o.temperature, "Decoding temperature");
    sub->add_option("--top-p", o.top_p, "Nucleus sampling mass");
    sub->add_option("--max-new-tokens", o.max_new_tokens, "Completion length cap");
}

// Applies config-file values to every option the command line left untouched.
void apply_config_file(CLI::App* sub, CommonOpts& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path, std::ios::binary);
    if (!in) throw arbor::ConfigError("cannot read config file '" + o.config_path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw arbor::ConfigError("config file '" + o.config_path + "' is not valid: " + e.what());
    }
    if (!doc.is_object())
        throw arbor::ConfigError("config file '" + o.config_path + "' must hold an object");

    auto set = [&](const char* key, const char* flag, auto& target) {
        if (sub->count(flag) == 0 && doc.contains(key)) {
            try {
                target = doc.at(key).get<std::decay_t<decltype(target)>>();
            } catch (const std::exception& e) {
                throw arbor::ConfigError("config key '" + std::string(key) + "': " + e.what());
            }
        }
    };
    set("method", "--method", o.method);
    set("depth", "--depth", o.depth);
    set("breadth", "--breadth", o.breadth);
    set("lambda", "--lambda", o.lambda);
    set("epsilon", "--epsilon", o.epsilon);
    set("max_bt_iters", "--max-bt-iters", o.max_bt_iters);
    set("bt_tol", "--bt-tol", o.bt_tol);
    set("evaluator", "--evaluator", o.evaluator);
    set("gen_endpoint", "--gen-endpoint", o.gen_endpoint);
    set("judge_endpoint", "--judge-endpoint", o.judge_endpoint);
    set("model", "--model", o.model);
    set("judge_model", "--judge-model", o.judge_model);
    set("seed", "--seed", o.seed);
    set("mock", "--mock", o.mock);
    set("mock_rig", "--mock-rig", o.mock_rig);
    set("repeats", "--repeats", o.repeats);
    set("swap_duplicate", "--swap-duplicate", o.swap_duplicate);
    set("ensemble_size", "--ensemble-size", o.ensemble_size);
    set("seed_stride", "--seed-stride", o.seed_stride);
    set("parallelism", "--parallelism", o.parallelism);
    set("schedule_seed", "--schedule-seed", o.schedule_seed);
    set("out", "--out", o.out);
    set("allow_large", "--allow-large", o.allow_large);
    set("prompts", "--prompts", o.prompts);
    set("api_key_env", "--api-key-env", o.api_key_env);
    set("max_attempts", "--max-attempts", o.max_attempts);
    set("retry_base_ms", "--retry-base-ms", o.retry_base_ms);
    set("timeout_ms", "--timeout-ms", o.timeout_ms);
    set("temperature", "--temperature", o.temperature);
    set("top_p", "--top-p", o.top_p);
    set("max_new_tokens", "--max-new-tokens", o.max_new_tokens);
}

arbor::ExperimentConfig to_experiment_config(const CommonOpts& o) {
    arbor::ExperimentConfig c;
    c.method = arbor::method_from_string(o.method);
    c.generation.depth = o.depth;
    c.generation.breadth = o.breadth;
    c.generation.allow_large = o.allow_large;
    c.generation.parallelism = o.parallelism;
    c.generation.schedule_seed = o.schedule_seed;
    c.bt.epsilon = o.epsilon;
    c.bt.max_iters = o.max_bt_iters;
    c.bt.tol = o.bt_tol;
    c.bt.lambda = o.lambda;
    c.tournament.repeats = o.repeats;
    c.tournament.swap_order_duplicate = o.swap_duplicate;
    c.tournament.parallelism = o.parallelism;
    c.tournament.schedule_seed = o.schedule_seed;
    c.evaluator = arbor::evaluator_mode_from_string(o.evaluator);

    auto backend = [&](const std::string& endpoint, const std::string& model) {
        arbor::BackendConfig b;
        b.endpoint_url = endpoint;
        b.model_name = model;
        b.temperature = o.temperature;
        b.max_new_tokens = o.max_new_tokens;
        b.top_p = o.top_p;
        b.api_key_env = o.api_key_env;
        b.max_attempts = o.max_attempts;
        b.retry_base_delay = std::chrono::milliseconds(o.retry_base_ms);
        b.timeout = std::chrono::milliseconds(o.timeout_ms);
        return b;
    };
    c.generator = backend(o.gen_endpoint, o.model);
    c.judge = backend(o.judge_endpoint, o.judge_model.empty() ? o.model : o.judge_model);

    c.use_mock = o.mock;
    c.seed = o.seed;
    c.rig = arbor::mock_rig_from_string(o.mock_rig);
    c.ensemble_size = o.ensemble_size;
    c.ensemble_seed_stride = o.seed_stride;
    c.record_parallelism = o.parallelism;
    c.record_schedule_seed = o.schedule_seed;
    c.trace_dir = std::filesystem::path(o.out);
    return c;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

void print_tree(const arbor::RunTrace& trace, std::ostream& os) {
    if (!trace.tree) return;
    const arbor::ReasoningTree& tree = *trace.tree;
    std::function<void(const std::string&, int)> walk = [&](const std::string& id, int depth) {
        const arbor::ArgumentNode& n = tree.node(id);
        std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
        os << pad << id;
        if (n.polarity) os << " [" << arbor::to_string(*n.polarity) << "]";
        os << "  tau=" << num(n.tau) << "  tau'=" << num(n.tau_prime) << "  s=" << num(n.s)
           << "\n";
        os << pad << "  " << n.text << "\n";
        for (const auto& child : n.children) walk(child, depth + 1);
    };
    walk(tree.root_id, 0);
    if (!trace.tournament_log.empty()) {
        os << "pairwise judgements:\n";
        for (const auto& c : trace.tournament_log) {
            os << "  " << c.support_id << " vs " << c.attack_id;
            if (c.order_swapped) os << " (order swapped)";
            os << " -> " << arbor::to_string(c.outcome) << "\n";
        }
    }
}

int cmd_verify(const CommonOpts& o, const std::string& claim_arg) {
    std::string text = claim_arg;
    std::error_code ec;
    if (std::filesystem::is_regular_file(claim_arg, ec)) {
        std::ifstream in(claim_arg, std::ios::binary);
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    text = arbor::trim(text);
    if (text.empty()) throw arbor::ConfigError("claim text is empty");

    arbor::ExperimentConfig cfg = to_experiment_config(o);
    cfg.validate();
    arbor::PromptLibrary prompts = arbor::PromptLibrary::load(o.prompts);

    arbor::ClaimRecord rec;
    rec.id = "claim-" + arbor::hex64(arbor::fnv1a64(text)).substr(8);
    rec.claim = text;
    arbor::RecordRun run = arbor::run_record(rec, cfg, prompts);
    run.primary.ground_truth.reset();  // ad-hoc claims carry no ground truth
    for (auto& m : run.members) m.ground_truth.reset();

    std::filesystem::path out_dir(o.out);
    std::filesystem::create_directories(out_dir);
    std::string base = std::string(arbor::to_string(cfg.method)) + "_" + rec.id;
    std::filesystem::path trace_path = out_dir / (base + ".json");
    arbor::write_trace(run.primary, trace_path);
    for (std::size_t i = 0; i < run.members.size(); ++i)
        arbor::write_trace(run.members[i], out_dir / (base + "_m" + std::to_string(i) + ".json"));

    std::cout << "claim:   " << text << "\n";
    std::cout << "method:  " << arbor::to_string(cfg.method) << "\n";
    std::cout << "verdict: " << (run.primary.verdict.label ? "TRUE" : "FALSE")
              << "  (probability " << num(run.primary.verdict.probability) << ")\n";
    print_tree(run.primary, std::cout);
    std::cout << "trace written to " << trace_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const CommonOpts& o, const std::string& dataset_path) {
    arbor::ExperimentConfig cfg = to_experiment_config(o);
    cfg.validate();
    arbor::PromptLibrary prompts = arbor::PromptLibrary::load(o.prompts);

    arbor::Dataset ds = arbor::load_dataset(dataset_path);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "records: " << ds.records.size() << " (true " << ds.true_count << " / false "
              << ds.false_count << ")\n";

    arbor::RunResult result = arbor::evaluate(cfg, ds, prompts);
    arbor::write_results(result, cfg, *cfg.trace_dir);

    std::cout << "method: " << arbor::to_string(cfg.method) << "\n";
    std::cout << "scored: " << result.scored << "  excluded: " << result.excluded << "\n";
    std::cout << "accuracy: " << num(result.accuracy) << "\n";
    std::cout << "root probability variance: " << num(result.root_probability_variance) << "\n";
    std::cout << "calibrated strength variance: " << num(result.tau_prime_variance) << "\n";
    for (const auto& f : result.failures)
        std::cerr << "excluded " << f.id << ": " << f.message << "\n";
    std::cout << "results written to " << (*cfg.trace_dir / "results.json").string() << " and "
              << (*cfg.trace_dir / "results.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

int cmd_replay(const std::string& trace_path, const std::optional<double>& lambda,
               const std::optional<double>& threshold) {
    arbor::RunTrace trace = arbor::read_trace(trace_path);
    if (lambda || threshold) {
        arbor::WhatIf overrides;
        overrides.lambda = lambda;
        overrides.threshold = threshold;
        arbor::WhatIfResult r = arbor::replay_what_if(trace, overrides);
        std::cout << "what-if replay (counterfactual; NOT a verification)\n";
        std::cout << "lambda: " << num(r.lambda_used) << "  threshold: " << num(r.threshold_used)
                  << "\n";
        std::cout << "verdict: " << (r.label ? "TRUE" : "FALSE") << "  (probability "
                  << num(r.probability) << ")\n";
        return 0;
    }
    arbor::Verdict v = arbor::replay(trace);
    std::cout << "verified: stored verdict " << (v.label ? "TRUE" : "FALSE") << " (probability "
              << num(v.probability) << ") reproduced within 1e-12\n";
    return 0;
}

// ---------------------------------------------------------------------------
// calibrate
//
// Input document:
//   { "parent": "p", "supporters": ["s1",...], "attackers": ["a1",...],
//     "counts": [{"winner": "s1", "loser": "a1", "count": 3}, ...],
//     "tau": {"s1": 0.5, ...} }        (tau optional)
// ---------------------------------------------------------------------------

int cmd_calibrate(const CommonOpts& o, const std::string& matrix_path) {
    std::ifstream in(matrix_path, std::ios::binary);
    if (!in) throw arbor::ConfigError("cannot read win-count file '" + matrix_path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw arbor::ConfigError("win-count file is not valid: " + std::string(e.what()));
    }
    if (!doc.contains("supporters") || !doc.contains("attackers"))
        throw arbor::ConfigError("win-count file needs 'supporters' and 'attackers' arrays");

    auto supporters = doc.at("supporters").get<std::vector<std::string>>();
    auto attackers = doc.at("attackers").get<std::vector<std::string>>();
    arbor::WinMatrix matrix;
    matrix.parent_id = doc.value("parent", std::string("parent"));
    for (const auto& e : doc.value("counts", nlohmann::json::array()))
        matrix.counts[{e.at("winner").get<std::string>(), e.at("loser").get<std::string>()}] =
            e.at("count").get<int>();

    arbor::BTConfig bt;
    bt.epsilon = o.epsilon;
    bt.max_iters = o.max_bt_iters;
    bt.tol = o.bt_tol;
    bt.lambda = o.lambda;

    arbor::BTResult fit;
    try {
        fit = arbor::fit_bt(matrix, supporters, attackers, bt);
    } catch (const std::invalid_argument& e) {
        throw arbor::ConfigError(std::string("win counts rejected: ") + e.what());
    }

    ordered_json out;
    out["parent"] = matrix.parent_id;
    out["no_evidence"] = fit.no_evidence;
    out["converged"] = fit.converged;
    out["iterations"] = fit.iterations_used;
    ordered_json theta = ordered_json::object();
    for (const auto& [id, v] : fit.theta) theta[id] = v;
    out["theta"] = std::move(theta);
    out["log_likelihoods"] = fit.log_likelihoods;
    if (doc.contains("tau")) {
        ordered_json tp = ordered_json::object();
        for (const auto& [id, tj] : doc.at("tau").items()) {
            double tau = tj.get<double>();
            double theta_id = fit.no_evidence ? tau : fit.theta.at(id);
            tp[id] = fit.no_evidence ? std::min(std::max(tau, 0.0), 1.0)
                                     : arbor::blend(tau, theta_id, o.lambda);
        }
        out["tau_prime"] = std::move(tp);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"arbor — argumentative claim verification"};
    app.require_subcommand(1);

    CommonOpts opts;

    std::string claim_arg;
    CLI::App* verify = app.add_subcommand("verify", "Verify one claim (text or file path)");
    verify->add_option("claim", claim_arg, "Claim text, or a file containing it")->required();
    add_common(verify, opts);

    std::string dataset_arg;
    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark dataset");
    bench->add_option("dataset", dataset_arg, "Line-delimited claim records")->required();
    add_common(bench, opts);

    std::string trace_arg;
    double replay_lambda = 0.0;
    double replay_threshold = 0.0;
    CLI::App* replay = app.add_subcommand("replay", "Re-derive a stored trace");
    replay->add_option("trace", trace_arg, "Trace file")->required();
    CLI::Option* opt_lambda =
        replay->add_option("--lambda", replay_lambda, "What-if blend weight override");
    CLI::Option* opt_threshold =
        replay->add_option("--threshold", replay_threshold, "What-if decision threshold");

    std::string matrix_arg;
    CLI::App* calibrate = app.add_subcommand("calibrate", "Fit strengths to stored win counts");
    calibrate->add_option("counts", matrix_arg, "Win-count document")->required();
    add_common(calibrate, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(arbor::ErrorCode::Config);
    }

    try {
        if (verify->parsed()) {
            apply_config_file(verify, opts);
            return cmd_verify(opts, claim_arg);
        }
        if (bench->parsed()) {
            apply_config_file(bench, opts);
            return cmd_bench(opts, dataset_arg);
        }
        if (replay->parsed()) {
            std::optional<double> lambda;
            std::optional<double> threshold;
            if (*opt_lambda) lambda = replay_lambda;
            if (*opt_threshold) threshold = replay_threshold;
            return cmd_replay(trace_arg, lambda, threshold);
        }
        if (calibrate->parsed()) {
            apply_config_file(calibrate, opts);
            return cmd_calibrate(opts, matrix_arg);
        }
        std::cerr << "error: no subcommand selected\n";
        return static_cast<int>(arbor::ErrorCode::Config);
    } catch (const arbor::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(arbor::ErrorCode::Generic);
    }
}
