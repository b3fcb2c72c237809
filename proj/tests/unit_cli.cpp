// End-to-end checks of the command-line binary (subprocess level): command
// wiring, output contract, exit codes, and the config-file/flag precedence.
#include <doctest.h>

#include <string>

#include "helpers.hpp"

#ifndef ARBOR_CLI
#error "ARBOR_CLI must point at the built command-line binary"
#endif

namespace {

using testutil::CommandResult;
using testutil::run_command;
using testutil::shell_quote;

std::string cli() { return shell_quote(ARBOR_CLI); }
std::string prompts_flag() { return " --prompts " + shell_quote(ARBOR_PROMPT_DIR); }

std::string dataset_jsonl() {
    return R"({"id": "c1", "claim": "the lighthouse predates the breakwater", "label": true})"
           "\n"
           R"({"id": "c2", "claim": "the ferry crossing takes under an hour", "label": false})"
           "\n"
           R"({"id": "c3", "claim": "the market hall reopened after the flood", "label": true})"
           "\n"
           R"({"id": "c4", "claim": "the northern quay is closed to trawlers", "label": false})"
           "\n";
}

// Pulls the path out of the "trace written to <path>" line.
std::string trace_path_from(const std::string& output) {
    const std::string marker = "trace written to ";
    auto pos = output.find(marker);
    if (pos == std::string::npos) return "";
    auto end = output.find('\n', pos);
    return output.substr(pos + marker.size(), end - pos - marker.size());
}

}  // namespace

TEST_CASE("verify runs a claim end to end and its trace replays verbatim") {
    testutil::TempDir dir;
    CommandResult r = run_command(cli() + " verify 'the pier was rebuilt in 1931'" +
                                  prompts_flag() + " --out " + shell_quote(dir.path()) +
                                  " --seed 7");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("claim:") != std::string::npos);
    CHECK(r.output.find("method:  art") != std::string::npos);
    CHECK(r.output.find("verdict:") != std::string::npos);
    CHECK(r.output.find("db0") != std::string::npos);  // the tree is printed
    CHECK(r.output.find("tau'") != std::string::npos);

    std::string trace = trace_path_from(r.output);
    REQUIRE(!trace.empty());
    CHECK(std::filesystem::exists(trace));

    CommandResult rep = run_command(cli() + " replay " + shell_quote(trace));
    CHECK(rep.exit_code == 0);
    CHECK(rep.output.find("verified: stored verdict") != std::string::npos);

    SUBCASE("what-if replay prints the counterfactual disclaimer") {
        CommandResult wi = run_command(cli() + " replay " + shell_quote(trace) + " --lambda 0");
        CHECK(wi.exit_code == 0);
        CHECK(wi.output.find("what-if replay (counterfactual; NOT a verification)") !=
              std::string::npos);
        // With calibration off every mock strength is 0.5, which is not
        // strictly above the threshold.
        CHECK(wi.output.find("FALSE") != std::string::npos);

        CommandResult th =
            run_command(cli() + " replay " + shell_quote(trace) + " --threshold 0.99");
        CHECK(th.exit_code == 0);
        CHECK(th.output.find("what-if") != std::string::npos);
    }

    SUBCASE("a truncated trace is an integrity failure, exit code 5") {
        std::string bytes = testutil::read_file(trace);
        testutil::write_file(trace, bytes.substr(0, bytes.size() / 2));
        CommandResult broken = run_command(cli() + " replay " + shell_quote(trace));
        CHECK(broken.exit_code == 5);
        CHECK(broken.output.find("error:") != std::string::npos);
    }
}

TEST_CASE("verify reads the claim from a file when the argument is a path") {
    testutil::TempDir dir;
    auto claim_file = dir.path() / "claim.txt";
    testutil::write_file(claim_file, "the old mill still grinds flour\n");
    CommandResult r = run_command(cli() + " verify " + shell_quote(claim_file) + prompts_flag() +
                                  " --out " + shell_quote(dir.path() / "runs"));
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("claim:   the old mill still grinds flour") != std::string::npos);
}

TEST_CASE("bench scores a rigged dataset perfectly and writes both reports") {
    testutil::TempDir dir;
    auto ds = dir.path() / "claims.jsonl";
    testutil::write_file(ds, dataset_jsonl());
    CommandResult r = run_command(cli() + " bench " + shell_quote(ds) + prompts_flag() +
                                  " --method art --mock-rig oracle --out " +
                                  shell_quote(dir.path() / "runs"));
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("records: 4 (true 2 / false 2)") != std::string::npos);
    CHECK(r.output.find("scored: 4  excluded: 0") != std::string::npos);
    CHECK(r.output.find("accuracy: 1") != std::string::npos);
    CHECK(std::filesystem::exists(dir.path() / "runs" / "results.json"));
    CHECK(std::filesystem::exists(dir.path() / "runs" / "results.csv"));
    CHECK(std::filesystem::exists(dir.path() / "runs" / "c1.json"));  // per-claim trace
}

TEST_CASE("the no-calibration baseline and the lambda-zero pipeline emit one table") {
    testutil::TempDir dir;
    auto ds = dir.path() / "claims.jsonl";
    testutil::write_file(ds, dataset_jsonl());
    std::string common = " bench " + shell_quote(ds) + prompts_flag() +
                         " --mock-rig oracle --seed 11 --out ";
    CommandResult a = run_command(cli() + common + shell_quote(dir.path() / "argllm_runs") +
                                  " --method argllm");
    CommandResult b = run_command(cli() + common + shell_quote(dir.path() / "art0_runs") +
                                  " --method art --lambda 0");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    std::string csv_a = testutil::read_file(dir.path() / "argllm_runs" / "results.csv");
    std::string csv_b = testutil::read_file(dir.path() / "art0_runs" / "results.csv");
    CHECK(!csv_a.empty());
    CHECK(csv_a == csv_b);  // byte-identical per-claim tables
}

TEST_CASE("calibrate fits strengths straight from a win-count document") {
    testutil::TempDir dir;
    auto counts = dir.path() / "counts.json";
    testutil::write_file(counts, R"({
        "parent": "db0",
        "supporters": ["s1"],
        "attackers": ["a1"],
        "counts": [{"winner": "s1", "loser": "a1", "count": 2},
                   {"winner": "a1", "loser": "s1", "count": 1}],
        "tau": {"s1": 0.5, "a1": 0.5}
    })");
    CommandResult r = run_command(cli() + " calibrate " + shell_quote(counts) + prompts_flag());
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("\"theta\"") != std::string::npos);
    CHECK(r.output.find("\"tau_prime\"") != std::string::npos);
    CHECK(r.output.find("\"converged\": true") != std::string::npos);

    SUBCASE("a malformed matrix is a configuration error") {
        testutil::write_file(counts, R"({
            "supporters": ["s1", "s2"],
            "attackers": ["a1"],
            "counts": [{"winner": "s1", "loser": "s2", "count": 1}]
        })");
        CommandResult bad = run_command(cli() + " calibrate " + shell_quote(counts));
        CHECK(bad.exit_code == 2);
        CHECK(bad.output.find("win counts rejected") != std::string::npos);
    }
}

TEST_CASE("configuration errors exit with code 2") {
    testutil::TempDir dir;
    SUBCASE("missing dataset") {
        CommandResult r = run_command(cli() + " bench " +
                                      shell_quote(dir.path() / "nope.jsonl") + prompts_flag());
        CHECK(r.exit_code == 2);
        CHECK(r.output.find("error:") != std::string::npos);
    }
    SUBCASE("oversized tree without the override") {
        CommandResult r = run_command(cli() + " verify 'claim'" + prompts_flag() +
                                      " --depth 3 --out " + shell_quote(dir.path()));
        CHECK(r.exit_code == 2);
        CommandResult ok = run_command(cli() + " verify 'claim'" + prompts_flag() +
                                       " --depth 3 --allow-large --out " +
                                       shell_quote(dir.path()));
        CHECK(ok.exit_code == 0);
    }
    SUBCASE("unknown flag") {
        CHECK(run_command(cli() + " verify 'claim' --frobnicate").exit_code == 2);
    }
    SUBCASE("missing subcommand") {
        CHECK(run_command(cli()).exit_code == 2);
    }
    SUBCASE("blank claim") {
        CHECK(run_command(cli() + " verify ' '" + prompts_flag()).exit_code == 2);
    }
}

TEST_CASE("an unreachable model server exits with code 3 after retries") {
    testutil::TempDir dir;
    CommandResult r = run_command(
        cli() + " verify 'claim'" + prompts_flag() + " --out " + shell_quote(dir.path()) +
        " --no-mock --gen-endpoint http://127.0.0.1:9/v1 --model m"
        " --max-attempts 2 --retry-base-ms 1 --timeout-ms 500");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("help is available and succeeds") {
    CHECK(run_command(cli() + " --help").exit_code == 0);
    CommandResult r = run_command(cli() + " verify --help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("--lambda") != std::string::npos);
    CHECK(r.output.find("--mock") != std::string::npos);
}

TEST_CASE("config files fill in flags, and explicit flags beat the file") {
    testutil::TempDir dir;
    auto config = dir.path() / "run.json";
    testutil::write_file(config, R"({"depth": 2, "seed": 9})");

    // Depth 2 from the file: the printed tree reaches a second level.
    CommandResult from_file = run_command(cli() + " verify 'claim'" + prompts_flag() +
                                          " --config " + shell_quote(config) + " --out " +
                                          shell_quote(dir.path() / "a"));
    REQUIRE(from_file.exit_code == 0);
    CHECK(from_file.output.find("db0.s1.s1") != std::string::npos);

    // The explicit flag wins: depth 1 again.
    CommandResult flag_wins = run_command(cli() + " verify 'claim'" + prompts_flag() +
                                          " --config " + shell_quote(config) +
                                          " --depth 1 --out " + shell_quote(dir.path() / "b"));
    REQUIRE(flag_wins.exit_code == 0);
    CHECK(flag_wins.output.find("db0.s1.s1") == std::string::npos);
    CHECK(flag_wins.output.find("db0.s1") != std::string::npos);

    SUBCASE("an unreadable config file is a configuration error") {
        CommandResult r = run_command(cli() + " verify 'claim'" + prompts_flag() +
                                      " --config " + shell_quote(dir.path() / "missing.json"));
        CHECK(r.exit_code == 2);
    }
}
