// Pairwise tournaments, strength fitting on the win matrix, the blend step,
// and the product-based aggregation semantics.
#include <doctest.h>

#include <cmath>
#include <random>

#include "arbor/calibration.hpp"
#include "arbor/errors.hpp"
#include "arbor/mock_judge.hpp"
#include "arbor/semantics.hpp"
#include "arbor/tournament.hpp"
#include "helpers.hpp"

using namespace arbor;

namespace {

// Depth-1, breadth-2 tree with fixed texts so overrides can key off them.
ReasoningTree tree12() {
    ReasoningTree t;
    t.root_id = kRootId;
    t.depth = 1;
    t.breadth = 2;
    auto add = [&](const std::string& id, const std::string& text,
                   std::optional<Polarity> pol) {
        ArgumentNode n;
        n.id = id;
        n.text = text;
        n.polarity = pol;
        n.tau = 0.5;
        t.nodes[id] = std::move(n);
    };
    add(kRootId, "root claim", std::nullopt);
    add("db0.s1", "first supporter", Polarity::Support);
    add("db0.s2", "second supporter", Polarity::Support);
    add("db0.a1", "first attacker", Polarity::Attack);
    add("db0.a2", "second attacker", Polarity::Attack);
    t.nodes[kRootId].children = {"db0.s1", "db0.s2", "db0.a1", "db0.a2"};
    return t;
}

MockJudge forced_outcome_judge(JudgeOutcome outcome) {
    MockOverrides ov;
    ov.compare_default = outcome;
    return MockJudge(1, ov);
}

WinMatrix matrix_1v1(int support_wins, int attack_wins) {
    WinMatrix m;
    m.parent_id = kRootId;
    if (support_wins > 0) m.counts[{"db0.s1", "db0.a1"}] = support_wins;
    if (attack_wins > 0) m.counts[{"db0.a1", "db0.s1"}] = attack_wins;
    return m;
}

const std::vector<std::string> kOneSupporter{"db0.s1"};
const std::vector<std::string> kOneAttacker{"db0.a1"};

}  // namespace

// ---------------------------------------------------------------------------
// Tournaments.
// ---------------------------------------------------------------------------

TEST_CASE("a decisive judgement credits the winner; a tie credits nobody") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    SUBCASE("support wins") {
        MockJudge judge = forced_outcome_judge(JudgeOutcome::SupportWins);
        TournamentResult r = run_tournament(kRootId, tree, judge, testutil::prompts());
        CHECK(r.matrix.wins("db0.s1", "db0.a1") == 1);
        CHECK(r.matrix.wins("db0.a1", "db0.s1") == 0);
        CHECK(r.matrix.total() == 1);
    }
    SUBCASE("attack wins") {
        MockJudge judge = forced_outcome_judge(JudgeOutcome::AttackWins);
        TournamentResult r = run_tournament(kRootId, tree, judge, testutil::prompts());
        CHECK(r.matrix.wins("db0.a1", "db0.s1") == 1);
        CHECK(r.matrix.total() == 1);
    }
    SUBCASE("tie") {
        MockJudge judge = forced_outcome_judge(JudgeOutcome::Tie);
        TournamentResult r = run_tournament(kRootId, tree, judge, testutil::prompts());
        CHECK(r.matrix.total() == 0);
        CHECK(r.log.size() == 1);  // the judgement is still recorded
        CHECK(r.log[0].outcome == JudgeOutcome::Tie);
    }
}

TEST_CASE("repeats multiply the judgements per pair") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    MockJudge judge = forced_outcome_judge(JudgeOutcome::SupportWins);
    TournamentOptions opt;
    opt.repeats = 3;
    TournamentResult r = run_tournament(kRootId, tree, judge, testutil::prompts(), opt);
    CHECK(r.log.size() == 3);
    CHECK(r.matrix.wins("db0.s1", "db0.a1") == 3);
}

TEST_CASE("the order-swapped probe adds one distinctly-marked judgement per pair") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    MockJudge judge = forced_outcome_judge(JudgeOutcome::SupportWins);
    TournamentOptions opt;
    opt.swap_order_duplicate = true;
    TournamentResult r = run_tournament(kRootId, tree, judge, testutil::prompts(), opt);
    REQUIRE(r.log.size() == 2);
    CHECK(r.log[0].order_swapped == false);
    CHECK(r.log[1].order_swapped == true);
    CHECK(r.log[0].prompt != r.log[1].prompt);  // different presentation order
    CHECK(r.matrix.wins("db0.s1", "db0.a1") == 2);  // probe counts like any judgement
}

TEST_CASE("pairs are logged in canonical order: supporters outer, attackers inner") {
    ReasoningTree tree = tree12();
    MockJudge judge = forced_outcome_judge(JudgeOutcome::SupportWins);
    TournamentResult r = run_tournament(kRootId, tree, judge, testutil::prompts());
    REQUIRE(r.log.size() == 4);
    auto pair_at = [&](std::size_t i) {
        return std::make_pair(r.log[i].support_id, r.log[i].attack_id);
    };
    CHECK(pair_at(0) == std::make_pair(std::string("db0.s1"), std::string("db0.a1")));
    CHECK(pair_at(1) == std::make_pair(std::string("db0.s1"), std::string("db0.a2")));
    CHECK(pair_at(2) == std::make_pair(std::string("db0.s2"), std::string("db0.a1")));
    CHECK(pair_at(3) == std::make_pair(std::string("db0.s2"), std::string("db0.a2")));
}

TEST_CASE("tournament results are independent of parallelism and dispatch order") {
    ReasoningTree tree = tree12();
    MockJudge judge(77);
    TournamentOptions base;
    base.repeats = 2;
    base.swap_order_duplicate = true;
    base.parallelism = 1;
    base.schedule_seed = 0;
    TournamentOptions wide = base;
    wide.parallelism = 6;
    wide.schedule_seed = 999;
    TournamentResult a = run_tournament(kRootId, tree, judge, testutil::prompts(), base);
    TournamentResult b = run_tournament(kRootId, tree, judge, testutil::prompts(), wide);
    CHECK(a.matrix.counts == b.matrix.counts);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].support_id == b.log[i].support_id);
        CHECK(a.log[i].attack_id == b.log[i].attack_id);
        CHECK(a.log[i].outcome == b.log[i].outcome);
        CHECK(a.log[i].order_swapped == b.log[i].order_swapped);
    }
}

TEST_CASE("tournament preconditions") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    MockJudge judge(1);
    SUBCASE("repeats below one") {
        TournamentOptions opt;
        opt.repeats = 0;
        CHECK_THROWS_AS(run_tournament(kRootId, tree, judge, testutil::prompts(), opt),
                        ConfigError);
    }
    SUBCASE("a parent missing one side cannot hold a tournament") {
        ReasoningTree lopsided = tree;
        lopsided.nodes.erase("db0.a1");
        lopsided.node(kRootId).children = {"db0.s1"};
        try {
            run_tournament(kRootId, lopsided, judge, testutil::prompts());
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(kRootId) != std::string::npos);
        }
    }
}

TEST_CASE("a judge failure aborts the tournament naming the pair") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    MockOverrides ov;
    ov.forced_response["compare"] = "mumble";   // unparseable twice -> ParseError
    ov.forced_response["compare_swapped"] = "mumble";
    MockJudge judge(1, ov);
    try {
        run_tournament(kRootId, tree, judge, testutil::prompts());
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        std::string msg = e.what();
        CHECK(msg.find("db0.s1") != std::string::npos);
        CHECK(msg.find("db0.a1") != std::string::npos);
    }
}

TEST_CASE("run_all covers every contested parent level by level") {
    // Depth-2, breadth-1: the root and both of its children are contested.
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    tree.depth = 2;
    auto graft = [&](const std::string& parent) {
        for (Polarity pol : {Polarity::Support, Polarity::Attack}) {
            std::string id = child_id(parent, pol, 1);
            ArgumentNode n;
            n.id = id;
            n.text = "argument " + id;
            n.polarity = pol;
            n.tau = 0.5;
            tree.nodes[id] = std::move(n);
            tree.node(parent).children.push_back(id);
        }
    };
    graft("db0.s1");
    graft("db0.a1");
    MockJudge judge = forced_outcome_judge(JudgeOutcome::SupportWins);
    AllTournaments all = run_all(tree, judge, testutil::prompts());
    CHECK(all.matrices.size() == 3);
    CHECK(all.matrices.count(kRootId) == 1);
    CHECK(all.matrices.count("db0.s1") == 1);
    CHECK(all.matrices.count("db0.a1") == 1);
    REQUIRE(all.log.size() == 3);
    CHECK(all.log[0].parent_id == kRootId);  // root level judged first
    CHECK(all.matrices.at("db0.s1").wins("db0.s1.s1", "db0.s1.a1") == 1);
}

TEST_CASE("run_all skips leaves and uncontested parents without creating matrices") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    SUBCASE("leaf-only tree below the root") {
        MockJudge judge(1);
        AllTournaments all = run_all(tree, judge, testutil::prompts());
        CHECK(all.matrices.size() == 1);  // only the root is contested
    }
    SUBCASE("a root with a single polarity holds no tournament at all") {
        tree.nodes.erase("db0.a1");
        tree.node(kRootId).children = {"db0.s1"};
        MockJudge judge(1);
        AllTournaments all = run_all(tree, judge, testutil::prompts());
        CHECK(all.matrices.empty());
        CHECK(all.log.empty());
    }
}

// ---------------------------------------------------------------------------
// Strength fitting on the win matrix.
// ---------------------------------------------------------------------------

TEST_CASE("a one-sided pair converges to the degenerate optimum exactly") {
    BTResult r = fit_bt(matrix_1v1(1, 0), kOneSupporter, kOneAttacker, {});
    CHECK(r.converged);
    CHECK(!r.no_evidence);
    CHECK(r.theta.at("db0.s1") == 1.0);
    CHECK(r.theta.at("db0.a1") == 0.0);
}

TEST_CASE("a balanced pair splits strength evenly") {
    BTResult r = fit_bt(matrix_1v1(1, 1), kOneSupporter, kOneAttacker, {});
    CHECK(r.converged);
    CHECK(r.theta.at("db0.s1") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.theta.at("db0.a1") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a 2:1 pair recovers the closed-form optimum") {
    BTResult r = fit_bt(matrix_1v1(2, 1), kOneSupporter, kOneAttacker, {});
    CHECK(r.converged);
    CHECK(r.theta.at("db0.s1") == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(r.theta.at("db0.a1") == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("the likelihood trajectory starts at the uniform profile and never falls") {
    BTResult r = fit_bt(matrix_1v1(1, 0), kOneSupporter, kOneAttacker, {});
    REQUIRE(!r.log_likelihoods.empty());
    // One game at even strength: log(1) - log(2).
    CHECK(r.log_likelihoods.front() == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(static_cast<int>(r.log_likelihoods.size()) == r.iterations_used + 1);
    for (std::size_t i = 1; i < r.log_likelihoods.size(); ++i)
        CHECK(r.log_likelihoods[i] >= r.log_likelihoods[i - 1] - 1e-12);
}

TEST_CASE("random matrices: monotone ascent, count-scale invariance, normalization") {
    std::vector<std::string> sup{"db0.s1", "db0.s2"};
    std::vector<std::string> att{"db0.a1", "db0.a2"};
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dist(0, 3);
    int fitted = 0;
    for (int trial = 0; trial < 40; ++trial) {
        WinMatrix m;
        m.parent_id = kRootId;
        for (const auto& s : sup) {
            for (const auto& a : att) {
                if (int w = dist(rng); w > 0) m.counts[{s, a}] = w;
                if (int w = dist(rng); w > 0) m.counts[{a, s}] = w;
            }
        }
        BTResult r = fit_bt(m, sup, att, {});
        if (r.no_evidence) continue;
        ++fitted;
        for (std::size_t i = 1; i < r.log_likelihoods.size(); ++i)
            CHECK(r.log_likelihoods[i] >= r.log_likelihoods[i - 1] - 1e-12);
        double total = 0.0;
        for (const auto& [id, v] : r.theta) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

        // Tripling every count moves the optimum nowhere. (Some random
        // matrices are degenerate and stop at the iteration cap, where the
        // two runs' stabilizer terms leave a drift of at most iters*epsilon.)
        WinMatrix scaled = m;
        for (auto& [pair, n] : scaled.counts) n *= 3;
        BTResult rs = fit_bt(scaled, sup, att, {});
        for (const auto& [id, v] : r.theta)
            CHECK(rs.theta.at(id) == doctest::Approx(v).epsilon(1e-6));
    }
    CHECK(fitted > 30);  // the loop actually exercised the fitter
}

TEST_CASE("the likelihood itself is invariant under rescaling theta") {
    WinMatrix m = matrix_1v1(2, 1);
    std::map<std::string, double> theta{{"db0.s1", 0.7}, {"db0.a1", 0.3}};
    std::map<std::string, double> doubled{{"db0.s1", 1.4}, {"db0.a1", 0.6}};
    CHECK(bt_log_likelihood(m, kOneSupporter, kOneAttacker, theta) ==
          doctest::Approx(bt_log_likelihood(m, kOneSupporter, kOneAttacker, doubled))
              .epsilon(1e-12));
}

TEST_CASE("no decisive judgement means no evidence, not a zero fit") {
    BTResult r = fit_bt(matrix_1v1(0, 0), kOneSupporter, kOneAttacker, {});
    CHECK(r.no_evidence);
    CHECK(r.theta.empty());
    CHECK(r.iterations_used == 0);
}

TEST_CASE("a node that never wins gets strength exactly zero") {
    WinMatrix m;
    m.parent_id = kRootId;
    m.counts[{"db0.s1", "db0.a1"}] = 2;  // s1 beats the attacker twice
    m.counts[{"db0.a1", "db0.s2"}] = 1;  // the attacker beats s2
    BTResult r = fit_bt(m, {"db0.s1", "db0.s2"}, kOneAttacker, {});
    CHECK(r.theta.at("db0.s2") == 0.0);
    CHECK(r.theta.at("db0.s1") > r.theta.at("db0.a1"));
}

TEST_CASE("the fitter rejects malformed inputs") {
    CHECK_THROWS_AS(fit_bt(matrix_1v1(1, 0), {}, kOneAttacker, {}), std::invalid_argument);
    WinMatrix negative = matrix_1v1(1, 0);
    negative.counts[{"db0.s1", "db0.a1"}] = -1;
    CHECK_THROWS_AS(fit_bt(negative, kOneSupporter, kOneAttacker, {}), std::invalid_argument);
    WinMatrix same_side;
    same_side.counts[{"db0.s1", "db0.s2"}] = 1;
    CHECK_THROWS_AS(fit_bt(same_side, {"db0.s1", "db0.s2"}, kOneAttacker, {}),
                    std::invalid_argument);
    BTConfig bad;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(fit_bt(matrix_1v1(1, 0), kOneSupporter, kOneAttacker, bad),
                    std::invalid_argument);
    bad = BTConfig{};
    bad.max_iters = 0;
    CHECK_THROWS_AS(fit_bt(matrix_1v1(1, 0), kOneSupporter, kOneAttacker, bad),
                    std::invalid_argument);
    std::map<std::string, double> missing{{"db0.s1", 1.0}};
    CHECK_THROWS_AS(bt_log_likelihood(matrix_1v1(1, 1), kOneSupporter, kOneAttacker, missing),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Blending.
// ---------------------------------------------------------------------------

TEST_CASE("blend endpoints and midpoint") {
    CHECK(blend(0.3777, 0.9, 0.0) == 0.3777);  // bitwise: calibration fully off
    CHECK(blend(0.3777, 0.9, 1.0) == doctest::Approx(0.9));
    CHECK(blend(0.5, 1.0, 0.5) == doctest::Approx(0.75));
    CHECK(blend(0.5, 0.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("blend clips stray inputs into the unit interval") {
    CHECK(blend(1.5, 0.5, 0.0) == 1.0);
    CHECK(blend(-0.25, 0.5, 0.0) == 0.0);
    CHECK(blend(1.5, 1.0, 0.5) == 1.0);
    CHECK_THROWS_AS(blend(0.5, 0.5, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(blend(0.5, 0.5, 1.1), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Tree calibration.
// ---------------------------------------------------------------------------

TEST_CASE("calibrate_tree blends fitted strengths into the children") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    std::map<std::string, WinMatrix> matrices{{kRootId, matrix_1v1(1, 0)}};
    BTConfig cfg;
    cfg.lambda = 0.5;
    CalibrationOutcome out = calibrate_tree(tree, matrices, cfg);
    CHECK(*tree.node(kRootId).tau_prime == 0.5);  // the root competes in no tournament
    CHECK(*tree.node("db0.s1").tau_prime == doctest::Approx(0.8));   // (0.6 + 1.0) / 2
    CHECK(*tree.node("db0.a1").tau_prime == doctest::Approx(0.2));   // (0.4 + 0.0) / 2
    REQUIRE(out.log.size() == 1);
    const CalibrationRecord& rec = out.log[0];
    CHECK(rec.parent_id == kRootId);
    CHECK(rec.lambda == 0.5);
    CHECK(rec.tau_prime.at("db0.s1") == *tree.node("db0.s1").tau_prime);
    CHECK(rec.tau_prime.at("db0.a1") == *tree.node("db0.a1").tau_prime);
}

TEST_CASE("without matrices every node keeps its intrinsic strength") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    CalibrationOutcome out = calibrate_tree(tree, {}, {});
    CHECK(out.log.empty());
    CHECK(*tree.node("db0.s1").tau_prime == 0.6);
    CHECK(*tree.node("db0.a1").tau_prime == 0.4);
}

TEST_CASE("an all-ties matrix is recorded but changes nothing") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    std::map<std::string, WinMatrix> matrices{{kRootId, matrix_1v1(0, 0)}};
    CalibrationOutcome out = calibrate_tree(tree, matrices, {});
    REQUIRE(out.log.size() == 1);
    CHECK(out.log[0].bt.no_evidence);
    CHECK(out.log[0].tau_prime.empty());
    CHECK(*tree.node("db0.s1").tau_prime == 0.6);
}

TEST_CASE("calibration demands intrinsic scores everywhere") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    tree.node("db0.a1").tau.reset();
    try {
        calibrate_tree(tree, {}, {});
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("db0.a1") != std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// Aggregation semantics.
// ---------------------------------------------------------------------------

TEST_CASE("alpha is the signed gap between the two survival products") {
    CHECK(alpha({}, {}) == 0.0);
    CHECK(alpha({0.7}, {0.4}) == doctest::Approx(-0.3));
    CHECK(alpha({}, {0.5}) == doctest::Approx(0.5));    // attackers only: positive
    CHECK(alpha({0.5}, {}) == doctest::Approx(-0.5));   // supporters only: negative
    CHECK(alpha({1.0}, {0.0}) == doctest::Approx(-1.0));
    CHECK(alpha({0.5, 0.5}, {}) == doctest::Approx(-0.75));  // products, not sums
    CHECK_THROWS_AS(alpha({1.5}, {}), std::invalid_argument);
    CHECK_THROWS_AS(alpha({}, {-0.1}), std::invalid_argument);
}

TEST_CASE("node_score attenuates on positive alpha, amplifies on negative") {
    CHECK(node_score(0.8, 0.25) == doctest::Approx(0.6));    // 0.8 - 0.25*0.8
    CHECK(node_score(0.5, -0.3) == doctest::Approx(0.65));   // 0.5 + 0.3*0.5
    CHECK(node_score(0.5, -1.0) == doctest::Approx(1.0));
    CHECK(node_score(0.5, 1.0) == doctest::Approx(0.0));
    CHECK(node_score(0.7, 0.0) == doctest::Approx(0.7));     // neutral balance
    CHECK_THROWS_AS(node_score(1.2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(node_score(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("node_score properties over a random sweep") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> signed_unit(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double tau = unit(rng);
        double a1 = signed_unit(rng), a2 = signed_unit(rng);
        double s1 = node_score(tau, a1);
        CHECK(s1 >= 0.0);
        CHECK(s1 <= 1.0);
        // Monotone: more attack pressure (larger alpha) never raises the score.
        if (a1 > a2) std::swap(a1, a2);
        CHECK(node_score(tau, a1) >= node_score(tau, a2) - 1e-12);
        // The two branch formulas meet continuously at alpha = 0.
        CHECK(node_score(tau, 1e-15) == doctest::Approx(node_score(tau, -1e-15)).epsilon(1e-12));
    }
}

TEST_CASE("aggregate folds the tree bottom-up") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    tree.node(kRootId).tau_prime = 0.5;
    tree.node("db0.s1").tau_prime = 0.8;
    tree.node("db0.a1").tau_prime = 0.2;
    AggregationReport rep = aggregate(tree);
    CHECK(rep.per_node.at("db0.s1").s == 0.8);  // leaves score at their strength
    CHECK(!rep.per_node.at("db0.s1").alpha.has_value());
    REQUIRE(rep.per_node.at(kRootId).alpha.has_value());
    CHECK(*rep.per_node.at(kRootId).alpha == doctest::Approx(-0.6));
    CHECK(rep.root_probability == doctest::Approx(0.8));
    CHECK(rep.verdict.label == true);
    CHECK(*tree.node(kRootId).s == doctest::Approx(0.8));  // written back into the tree
}

TEST_CASE("aggregate on a depth-2 chain matches the hand calculation") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    tree.depth = 2;
    for (Polarity pol : {Polarity::Support, Polarity::Attack}) {
        std::string id = child_id("db0.s1", pol, 1);
        ArgumentNode n;
        n.id = id;
        n.text = "argument " + id;
        n.polarity = pol;
        n.tau_prime = (pol == Polarity::Support) ? 0.9 : 0.1;
        tree.nodes[id] = std::move(n);
        tree.node("db0.s1").children.push_back(id);
    }
    tree.node(kRootId).tau_prime = 0.5;
    tree.node("db0.s1").tau_prime = 0.6;
    tree.node("db0.a1").tau_prime = 0.4;
    AggregationReport rep = aggregate(tree);
    // db0.s1: alpha = (1-0.9) - (1-0.1) = -0.8 -> 0.6 + 0.8*0.4 = 0.92
    CHECK(rep.per_node.at("db0.s1").s == doctest::Approx(0.92).epsilon(1e-12));
    // root: alpha = (1-0.92) - (1-0.4) = -0.52 -> 0.5 + 0.52*0.5 = 0.76
    CHECK(rep.root_probability == doctest::Approx(0.76).epsilon(1e-12));
    CHECK(rep.verdict.label == true);
}

TEST_CASE("a perfectly balanced tree lands on one half, which reads as FALSE") {
    ReasoningTree tree = testutil::tree11(0.5, 0.5, 0.5);
    for (auto& [id, node] : tree.nodes) node.tau_prime = node.tau;
    AggregationReport rep = aggregate(tree);
    CHECK(rep.root_probability == doctest::Approx(0.5));
    CHECK(rep.verdict.label == false);  // strictly-greater threshold
}

TEST_CASE("aggregate refuses a tree that skipped calibration") {
    ReasoningTree tree = testutil::tree11(0.5, 0.6, 0.4);
    CHECK_THROWS_AS(aggregate(tree), std::invalid_argument);
}
