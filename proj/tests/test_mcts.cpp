#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "circuitrl/mcts.hpp"

using namespace circuitrl;

namespace {

GameBoard small_board() {
    BoardConfig cfg;
    cfg.n_vars = 2;
    cfg.max_complexity = 3;
    static GameBoard board = GameBoard::build(cfg);
    return board;
}

EnvConfig small_env() {
    EnvConfig env;
    env.n_vars = 2;
    env.p = 5;
    env.max_steps = 5;
    return env;
}

Evaluator fresh_evaluator(const EnvConfig& env, std::uint64_t seed = 1) {
    return Evaluator(EvaluatorConfig::from_env(env, 32, seed));
}

}  // namespace

TEST_CASE("upper-confidence score formula") {
    // Total value 3 over 2 visits, 8 parent visits, exploration 1.0:
    // 1.5 + sqrt(ln 8 / 2).
    CHECK(ucb_score(3.0, 2, 8, 1.0) == doctest::Approx(2.519667).epsilon(1e-6));
}

TEST_CASE("temperature schedule") {
    MctsConfig cfg;
    cfg.tau_init = 1.0;
    cfg.tau_final = 0.1;
    cfg.t_decay = 100.0;
    CHECK(temperature(0, cfg) == doctest::Approx(1.0));
    CHECK(temperature(50, cfg) == doctest::Approx(0.55));
    CHECK(temperature(100, cfg) == doctest::Approx(0.1));
    CHECK(temperature(500, cfg) == doctest::Approx(0.1));
    cfg.t_decay = 0.0;
    CHECK(temperature(0, cfg) == doctest::Approx(0.1));
}

TEST_CASE("visit-count selection") {
    std::mt19937_64 rng(3);
    std::vector<int> visits{0, 10, 0, 5, 0};
    // Near-zero temperature is argmax.
    CHECK(select_with_temperature(visits, 0.005, rng) == 1);
    // Positive temperature only ever picks visited entries.
    for (int trial = 0; trial < 200; ++trial) {
        int a = select_with_temperature(visits, 1.0, rng);
        CHECK((a == 1 || a == 3));
    }
    std::vector<int> none(4, 0);
    CHECK_THROWS_AS(select_with_temperature(none, 1.0, rng), SamplingError);
}

TEST_CASE("action mixing is a bernoulli choice") {
    std::mt19937_64 rng(4);
    int took_mcts = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        took_mcts += mix_action(0, 1, 0.3, rng);
    }
    CHECK(took_mcts > 500);
    CHECK(took_mcts < 700);
    CHECK(mix_action(7, 9, 0.0, rng) == 7);
    CHECK(mix_action(7, 9, 1.0, rng) == 9);
}

TEST_CASE("search conserves visits and respects the mask") {
    GameBoard board = small_board();
    EnvConfig env = small_env();
    Evaluator ev = fresh_evaluator(env);
    std::mt19937_64 rng(5);
    EnvState root = env_reset(env, board, board.nodes_at_depth(2).front(), rng);
    auto mask = action_mask(env, root);
    SearchTree tree(env, root);
    MctsConfig cfg;
    cfg.simulations = 200;
    std::vector<int> visits = tree.search(ev, cfg);
    CHECK(std::accumulate(visits.begin(), visits.end(), 0) == 200);
    for (std::size_t a = 0; a < visits.size(); ++a) {
        if (!mask[a]) CHECK(visits[a] == 0);
    }
}

TEST_CASE("search is deterministic") {
    GameBoard board = small_board();
    EnvConfig env = small_env();
    Evaluator ev = fresh_evaluator(env);
    MctsConfig cfg;
    cfg.simulations = 64;
    std::mt19937_64 r1(9), r2(9);
    EnvState s1 = env_reset(env, board, board.nodes_at_depth(2).front(), r1);
    EnvState s2 = env_reset(env, board, board.nodes_at_depth(2).front(), r2);
    SearchTree t1(env, s1), t2(env, s2);
    CHECK(t1.search(ev, cfg) == t2.search(ev, cfg));
}

TEST_CASE("a single simulation visits exactly one root child") {
    GameBoard board = small_board();
    EnvConfig env = small_env();
    Evaluator ev = fresh_evaluator(env);
    std::mt19937_64 rng(11);
    EnvState root = env_reset(env, board, board.nodes_at_depth(1).front(), rng);
    SearchTree tree(env, root);
    MctsConfig cfg;
    cfg.simulations = 1;
    std::vector<int> visits = tree.search(ev, cfg);
    CHECK(std::accumulate(visits.begin(), visits.end(), 0) == 1);
}

TEST_CASE("terminal roots are rejected") {
    GameBoard board = small_board();
    EnvConfig env = small_env();
    Evaluator ev = fresh_evaluator(env);
    std::mt19937_64 rng(13);
    auto id = board.find("1*x0^1 + 1*x1^1");
    REQUIRE(id.has_value());
    EnvState state = env_reset(env, board, *id, rng);
    env_step(env, state, action_to_index(Action{OpKind::Add, 0, 1}, env.max_nodes()));
    REQUIRE(state.done);
    SearchTree tree(env, state);
    MctsConfig cfg;
    CHECK_THROWS_AS(tree.search(ev, cfg), SearchError);
}

TEST_CASE("tree reuse through advance keeps searching correctly") {
    GameBoard board = small_board();
    EnvConfig env = small_env();
    Evaluator ev = fresh_evaluator(env);
    std::mt19937_64 rng(17);
    EnvState state = env_reset(env, board, board.sample_interesting(2, rng, true), rng);
    SearchTree tree(env, state);
    MctsConfig cfg;
    cfg.simulations = 100;
    bool first = true;
    while (!tree.root_state().done) {
        std::vector<int> visits = tree.search(ev, cfg);
        int total = std::accumulate(visits.begin(), visits.end(), 0);
        // The retained subtree keeps its previous visits, so later searches
        // return at least the fresh simulation budget.
        if (first) {
            CHECK(total == 100);
        } else {
            CHECK(total >= 100);
        }
        first = false;
        int action = select_with_temperature(visits, 0.005, rng);
        tree.advance(action, env);
    }
}

TEST_CASE("search with uniform priors solves shallow targets") {
    GameBoard board = small_board();
    EnvConfig env = small_env();
    Evaluator ev = fresh_evaluator(env);  // zero-initialized policy head: uniform priors
    MctsConfig cfg;
    cfg.simulations = 512;
    std::mt19937_64 rng(21);
    int solved = 0, total = 0;
    for (int depth = 1; depth <= 2; ++depth) {
        auto ids = board.nodes_at_depth(depth);
        for (std::size_t k = 0; k < ids.size() && total < 30; k += 3) {
            ++total;
            EnvState state = env_reset(env, board, ids[k], rng);
            SearchTree tree(env, state);
            while (!tree.root_state().done) {
                std::vector<int> visits = tree.search(ev, cfg);
                tree.advance(select_with_temperature(visits, 0.005, rng), env);
            }
            solved += tree.root_state().success ? 1 : 0;
        }
    }
    CHECK(solved >= total * 95 / 100);
}

TEST_CASE("configuration validation") {
    MctsConfig cfg;
    cfg.simulations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = MctsConfig{};
    cfg.p_mix = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = MctsConfig{};
    cfg.tau_final = 2.0;  // above tau_init
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
