// Acceptance suite: one pass/fail line per criterion. Each check pins its
// tolerances here; the process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "circuitrl/harness.hpp"

using namespace circuitrl;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail,
            double seconds) {
    std::printf("criterion %2d: %s — %s (%s) [%.1fs]\n", index, ok ? "PASS" : "FAIL",
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void run(int index, const std::string& name,
         const std::function<bool(std::string&)>& body) {
    auto start = Clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report(index, name, ok, detail, seconds);
}

Polynomial random_poly(int n_vars, std::int64_t p, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_terms(0, 4);
    std::uniform_int_distribution<int> exp(0, 3);
    std::uniform_int_distribution<std::int64_t> coeff(0, p - 1);
    Polynomial out = Polynomial::zero(n_vars, p);
    for (int t = n_terms(rng); t > 0; --t) {
        Polynomial term = Polynomial::constant(coeff(rng), n_vars, p);
        for (int v = 0; v < n_vars; ++v) {
            for (int k = exp(rng); k > 0; --k) {
                term = poly_mul(term, Polynomial::variable(v, n_vars, p));
            }
        }
        out = poly_add(out, term);
    }
    return out;
}

std::vector<std::size_t> layer_counts(const GameBoard& board) {
    std::vector<std::size_t> out;
    for (const auto& [depth, count] : board.depth_histogram()) out.push_back(count);
    return out;
}

GameBoard& standard_board() {
    static GameBoard board = [] {
        BoardConfig cfg;
        cfg.n_vars = 2;
        cfg.max_complexity = 3;
        return GameBoard::build(cfg);
    }();
    return board;
}

EnvConfig standard_env() {
    EnvConfig env;
    env.n_vars = 2;
    env.p = 5;
    env.max_steps = 5;
    return env;
}

// --- criterion bodies -------------------------------------------------------

bool algebra_suite(std::string& detail) {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        Polynomial a = random_poly(2, 5, rng), b = random_poly(2, 5, rng),
                   c = random_poly(2, 5, rng);
        if (poly_add(a, b) != poly_add(b, a)) return false;
        if (poly_mul(a, b) != poly_mul(b, a)) return false;
        if (poly_add(poly_add(a, b), c) != poly_add(a, poly_add(b, c))) return false;
        if (poly_mul(poly_mul(a, b), c) != poly_mul(a, poly_mul(b, c))) return false;
        if (poly_mul(a, poly_add(b, c)) != poly_add(poly_mul(a, b), poly_mul(a, c))) return false;
    }
    // Operation results agree with pointwise field arithmetic on all of F_5^2
    // (and F_5^1) — the canonical form is exactly the ring structure.
    for (int n = 1; n <= 2; ++n) {
        for (int trial = 0; trial < 100; ++trial) {
            Polynomial a = random_poly(n, 5, rng), b = random_poly(n, 5, rng);
            Polynomial sum = poly_add(a, b), prod = poly_mul(a, b);
            std::vector<std::int64_t> pt(n, 0);
            int points = n == 1 ? 5 : 25;
            for (int k = 0; k < points; ++k) {
                pt[0] = k % 5;
                if (n == 2) pt[1] = k / 5;
                if (sum.eval(pt) != (a.eval(pt) + b.eval(pt)) % 5) return false;
                if (prod.eval(pt) != (a.eval(pt) * b.eval(pt)) % 5) return false;
            }
        }
    }
    for (int n = 2; n <= 5; ++n) {
        for (int k = 1; k <= n; ++k) {
            Polynomial lhs = elementary_symmetric(n, k, 5);
            Polynomial head = k <= n - 1
                                  ? Polynomial::parse(elementary_symmetric(n - 1, k, 5).to_string(),
                                                      n, 5)
                                  : Polynomial::zero(n, 5);
            Polynomial tail =
                poly_mul(Polynomial::variable(n - 1, n, 5),
                         Polynomial::parse(elementary_symmetric(n - 1, k - 1, 5).to_string(), n, 5));
            if (lhs != poly_add(head, tail)) return false;
        }
    }
    detail = "ring laws x1000, pointwise agreement, symmetric recurrence n<=5";
    return true;
}

bool board_reproduction(std::string& detail) {
    // Published univariate table: unreduced integer coefficients, no constant
    // seed, pair-combination layering.
    BoardConfig uni;
    uni.n_vars = 1;
    uni.max_complexity = 4;
    uni.layering = Layering::PairBfs;
    uni.coeff_mode = CoeffMode::Integer;
    uni.include_constant_one = false;
    uni.node_cap = 10000;
    std::vector<std::size_t> layers = layer_counts(GameBoard::build(uni));
    if (layers.size() < 4 ||
        !(layers[0] == 1 && layers[1] == 2 && layers[2] == 9 && layers[3] == 96)) {
        detail = "univariate layers mismatch";
        return false;
    }

    if (standard_board().nodes_at_depth(0).size() != 3) {
        detail = "bivariate depth-0 is not 3";
        return false;
    }

    BoardConfig ll;
    ll.n_vars = 2;
    ll.max_complexity = 2;
    ll.layering = Layering::PairBfs;
    ll.dedup = DedupPolicy::LayerLocal;
    GameBoard ll_board = GameBoard::build(ll);
    if (ll_board.nodes_at_depth(1).size() != 12) {
        detail = "layer-local bivariate depth-1 is not 12";
        return false;
    }

    // Full capped reproduction attempt under both policies: reported, not
    // gated — the published dedup/edge semantics are ambiguous.
    std::ostringstream attempt;
    for (DedupPolicy policy : {DedupPolicy::Global, DedupPolicy::LayerLocal}) {
        BoardConfig big;
        big.n_vars = 2;
        big.max_complexity = 4;
        big.layering = Layering::PairBfs;
        big.dedup = policy;
        big.node_cap = 20000;
        big.sequence_limit = 1;
        GameBoard board = GameBoard::build(big);
        BoardStats s = board.stats();
        attempt << " [" << to_string(policy) << ": nodes=" << s.node_count
                << " edges=" << s.edge_count << " multi-optimal=" << std::fixed
                << std::setprecision(2) << s.multi_optimal_pct << "%]";
    }
    detail = "1,2,9,96; depth0=3; layer-local depth1=12; capped attempt:" + attempt.str();
    return true;
}

bool oracle_agreement(std::string& detail) {
    const GameBoard& board = standard_board();
    for (int id = 0; id < static_cast<int>(board.size()); ++id) {
        const BoardNode& node = board.node(id);
        auto found = brute_force_min_complexity(node.poly, 2, 5, 3);
        if (!found || found->first != node.min_depth) {
            detail = "disagreement at node " + std::to_string(id);
            return false;
        }
    }
    Polynomial fig = Polynomial::parse("1*x0^2 + 2*x0^1*x1^1 + 1*x1^2", 2, 5);
    auto found = brute_force_min_complexity(fig, 2, 5, 3);
    if (!found || found->first != 2) {
        detail = "square-of-sum minimal complexity is not 2";
        return false;
    }
    detail = std::to_string(board.size()) + " nodes agree; worked example = 2";
    return true;
}

bool search_correctness(std::string& detail) {
    const GameBoard& board = standard_board();
    EnvConfig env = standard_env();
    Evaluator ev(EvaluatorConfig::from_env(env, 64, 77));  // uniform zero-init priors
    MctsConfig cfg;
    cfg.simulations = 512;

    std::mt19937_64 rng(4001);
    EnvState probe = env_reset(env, board, board.nodes_at_depth(2).front(), rng);
    auto mask = action_mask(env, probe);
    SearchTree t1(env, probe), t2(env, probe);
    std::vector<int> v1 = t1.search(ev, cfg);
    std::vector<int> v2 = t2.search(ev, cfg);
    if (v1 != v2) {
        detail = "search is not deterministic";
        return false;
    }
    if (std::accumulate(v1.begin(), v1.end(), 0) != cfg.simulations) {
        detail = "root visits do not sum to the simulation budget";
        return false;
    }
    for (std::size_t a = 0; a < v1.size(); ++a) {
        if (!mask[a] && v1[a] != 0) {
            detail = "masked action received visits";
            return false;
        }
    }

    int solved = 0, total = 0;
    for (int depth = 1; depth <= 2; ++depth) {
        for (int id : board.nodes_at_depth(depth)) {
            ++total;
            EnvState state = env_reset(env, board, id, rng);
            SearchTree tree(env, state);
            while (!tree.root_state().done) {
                std::vector<int> visits = tree.search(ev, cfg);
                tree.advance(select_with_temperature(visits, 0.005, rng), env);
            }
            solved += tree.root_state().success ? 1 : 0;
        }
    }
    detail = "solved " + std::to_string(solved) + "/" + std::to_string(total) +
             " targets of complexity <= 2";
    return solved * 100 >= total * 95;
}

bool formula_checks(std::string& detail) {
    std::mt19937_64 rng(5001);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> len_dist(1, 10);
        int len = len_dist(rng);
        std::vector<double> rewards(len), values(len);
        std::vector<std::uint8_t> dones(len, 0);
        dones[len - 1] = 1;
        for (int t = 0; t < len; ++t) {
            rewards[t] = unit(rng);
            values[t] = unit(rng);
        }
        GaeResult r = compute_gae(rewards, values, 0.0, dones, 0.97, 0.9);
        for (int t = 0; t < len; ++t) {
            double direct = 0.0;
            for (int l = 0; t + l < len; ++l) {
                double next_v = t + l + 1 < len ? values[t + l + 1] : 0.0;
                direct += std::pow(0.97 * 0.9, l) *
                          (rewards[t + l] + 0.97 * next_v - values[t + l]);
            }
            if (std::abs(r.advantages[t] - direct) > 1e-10) {
                detail = "advantage recursion diverges from the unrolled sum";
                return false;
            }
        }
    }

    GaeResult hand = compute_gae({0, 0, 1}, {0, 0, 0}, 0.0, {0, 0, 1}, 0.9, 0.95);
    if (std::abs(hand.advantages[0] - 0.731025) > 5e-7 ||
        std::abs(hand.advantages[1] - 0.855) > 5e-7 ||
        std::abs(hand.advantages[2] - 1.0) > 5e-7) {
        detail = "hand-derived advantages mismatch";
        return false;
    }

    // Exploration bonus for total value 3, 2 child visits, 8 parent visits,
    // c = 1: 3/2 + sqrt(ln 8 / 2) = 2.5196667. (The one-off "2.2212" sometimes
    // quoted for this example does not satisfy the formula it accompanies;
    // the check pins the value the formula actually produces.)
    double ucb = ucb_score(3.0, 2, 8, 1.0);
    if (std::abs(ucb - 2.5196672) > 5e-7) {
        detail = "exploration score mismatch: got " + std::to_string(ucb);
        return false;
    }

    double v = soft_value_target({0.5, 0.5}, {std::log(0.5), std::log(0.5)}, {1.0, 2.0},
                                 {9.0, 9.0}, {1, 1}, 0.1);
    if (std::abs(v - 1.5693147) > 5e-7) {
        detail = "soft value target mismatch";
        return false;
    }

    MctsConfig sched;
    sched.tau_init = 1.0;
    sched.tau_final = 0.1;
    sched.t_decay = 100.0;
    if (std::abs(temperature(50, sched) - 0.55) > 5e-7) {
        detail = "temperature schedule mismatch";
        return false;
    }
    detail = "GAE<=1e-10; A=(0.731025,0.855,1.0); UCB=2.519667; V=1.569315; tau(50)=0.55";
    return true;
}

// Central finite differences over a handful of coordinates in every tensor.
bool fd_check(Evaluator& ev, const std::function<double()>& loss,
              const Params& analytic, std::string& detail, const std::string& label) {
    const double h = 1e-5;
    std::mt19937_64 pick_rng(606);
    auto params = ev.params().all();
    auto grads = analytic.all();
    for (std::size_t t = 0; t < params.size(); ++t) {
        Tensor* w = params[t];
        if (w->v.empty()) continue;
        for (int probe = 0; probe < 4; ++probe) {
            std::uniform_int_distribution<std::size_t> pick(0, w->v.size() - 1);
            std::size_t i = pick(pick_rng);
            double saved = w->v[i];
            w->v[i] = saved + h;
            double up = loss();
            w->v[i] = saved - h;
            double down = loss();
            w->v[i] = saved;
            double numeric = (up - down) / (2 * h);
            double exact = grads[t]->v[i];
            double scale = std::max({std::abs(numeric), std::abs(exact), 1e-3});
            if (std::abs(numeric - exact) / scale > 1e-4) {
                detail = label + ": tensor " + std::to_string(t) + " rel err too large";
                return false;
            }
        }
    }
    return true;
}

bool gradient_checks(std::string& detail) {
    EvaluatorConfig cfg;
    cfg.input_dim = 9;
    cfg.hidden = 10;
    cfg.action_count = 5;
    cfg.seed = 321;
    Evaluator ev(cfg);
    std::mt19937_64 rng(6001);
    std::uniform_real_distribution<double> unit(-0.1, 0.1);
    for (Tensor* t : ev.params().all()) {
        for (double& v : t->v) v += unit(rng);
    }
    std::vector<double> input(9);
    for (double& x : input) x = unit(rng) * 10;
    std::vector<std::uint8_t> mask{1, 1, 0, 1, 1};
    const int action = 3;
    const int A = 5;

    auto analytic_for = [&](const std::function<HeadGrads(const EvaluatorOutput&)>& heads) {
        auto cache = ev.forward_cached(input, mask);
        Params grad = ev.params();
        grad.set_zero();
        ev.backward(cache, heads(cache.out), grad);
        return grad;
    };

    // Supervised: cross-entropy + value regression.
    {
        auto loss = [&] {
            auto o = ev.forward(input, mask);
            return -o.log_policy[action] + 0.5 * (o.value - 4.0) * (o.value - 4.0);
        };
        Params g = analytic_for([&](const EvaluatorOutput& o) {
            HeadGrads h;
            h.dlogits.assign(A, 0.0);
            for (int a = 0; a < A; ++a) {
                if (mask[a]) h.dlogits[a] = o.policy[a] - (a == action ? 1.0 : 0.0);
            }
            h.dvalue = 2.0 * 0.5 * (o.value - 4.0);
            return h;
        });
        if (!fd_check(ev, loss, g, detail, "supervised loss")) return false;
    }

    // Clipped-surrogate policy term plus entropy bonus and value loss.
    {
        const double adv = 0.8, logp_old = std::log(0.3), eps = 0.2, c_v = 0.5, c_e = 0.01,
                     ret = 1.5;
        auto loss = [&] {
            auto o = ev.forward(input, mask);
            double ratio = std::exp(o.log_policy[action] - logp_old);
            double surrogate = std::min(ratio * adv,
                                        std::clamp(ratio, 1 - eps, 1 + eps) * adv);
            return -surrogate + c_v * (o.value - ret) * (o.value - ret) - c_e * o.entropy();
        };
        Params g = analytic_for([&](const EvaluatorOutput& o) {
            double ratio = std::exp(o.log_policy[action] - logp_old);
            double clip_r = std::clamp(ratio, 1 - eps, 1 + eps);
            double dlogp = ratio * adv <= clip_r * adv ? -adv * ratio : 0.0;
            double entropy = o.entropy();
            HeadGrads h;
            h.dlogits.assign(A, 0.0);
            for (int a = 0; a < A; ++a) {
                if (!mask[a]) continue;
                h.dlogits[a] = dlogp * ((a == action ? 1.0 : 0.0) - o.policy[a]) +
                               c_e * o.policy[a] * (o.log_policy[a] + entropy);
            }
            h.dvalue = 2.0 * c_v * (o.value - ret);
            return h;
        });
        if (!fd_check(ev, loss, g, detail, "clipped surrogate")) return false;
    }

    // Soft actor-critic: Q regression toward a fixed target, policy loss with
    // detached Q, and the visit-distribution cross-entropy.
    {
        const double y = 0.7, alpha = 0.2, lambda_mcts = 0.5;
        auto base = ev.forward(input, mask);
        std::vector<double> frozen_min_q(A, 0.0);
        for (int a = 0; a < A; ++a) frozen_min_q[a] = std::min(base.q1[a], base.q2[a]);
        std::vector<double> visit_probs{0.1, 0.4, 0.0, 0.25, 0.25};
        auto loss = [&] {
            auto o = ev.forward(input, mask);
            double q_loss = (o.q1[action] - y) * (o.q1[action] - y) +
                            (o.q2[action] - y) * (o.q2[action] - y);
            double pi_loss = 0.0, ce = 0.0;
            for (int a = 0; a < A; ++a) {
                if (!mask[a]) continue;
                pi_loss += o.policy[a] * (alpha * o.log_policy[a] - frozen_min_q[a]);
                if (visit_probs[a] > 0) ce -= visit_probs[a] * o.log_policy[a];
            }
            return q_loss + pi_loss + lambda_mcts * ce;
        };
        Params g = analytic_for([&](const EvaluatorOutput& o) {
            HeadGrads h;
            h.dq1.assign(A, 0.0);
            h.dq2.assign(A, 0.0);
            h.dq1[action] = 2.0 * (o.q1[action] - y);
            h.dq2[action] = 2.0 * (o.q2[action] - y);
            h.dlogits.assign(A, 0.0);
            double expectation = 0.0;
            std::vector<double> f(A, 0.0);
            for (int a = 0; a < A; ++a) {
                if (!mask[a]) continue;
                f[a] = alpha * o.log_policy[a] - frozen_min_q[a];
                expectation += o.policy[a] * f[a];
            }
            for (int a = 0; a < A; ++a) {
                if (!mask[a]) continue;
                h.dlogits[a] = o.policy[a] * (f[a] - expectation) +
                               lambda_mcts * (o.policy[a] - visit_probs[a]);
            }
            return h;
        });
        if (!fd_check(ev, loss, g, detail, "soft actor-critic loss")) return false;
    }
    detail = "supervised, clipped-surrogate, and soft actor-critic losses within 1e-4";
    return true;
}

bool ratio_provenance(std::string& detail) {
    const GameBoard& board = standard_board();
    EnvConfig env = standard_env();
    Evaluator ev(EvaluatorConfig::from_env(env, 32, 88));
    CollectConfig cc;
    cc.episodes = 6;
    cc.use_mcts = true;
    cc.mcts.simulations = 32;
    cc.mcts.p_mix = 1.0;
    std::mt19937_64 rng(7001);
    auto episodes = collect_episodes(env, board, ev, cc, board.nodes_at_depth(2), rng);
    PpoBatch batch;
    for (const Episode& ep : episodes) {
        for (const EpisodeStep& s : ep.steps) {
            batch.steps.push_back(&s);
            batch.advantages.push_back(1.0);
            batch.returns.push_back(0.0);
        }
    }
    RatioProvenanceReport r = ppo_ratio_provenance_probe(ev, batch, PpoConfig{});
    detail = "max |ratio-1| = " + std::to_string(r.max_ratio_deviation) +
             ", policy grad norm = " + std::to_string(r.policy_grad_norm);
    return r.max_ratio_deviation == 0.0 && r.policy_grad_norm == 0.0;
}

bool sac_bandit(std::string& detail) {
    // One state, two actions, deterministic terminal rewards (1.0, 2.0).
    EvaluatorConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden = 16;
    cfg.action_count = 2;
    cfg.seed = 99;
    Evaluator ev(cfg);
    SacConfig scfg;
    scfg.alpha = 0.5;
    scfg.lambda_mcts = 0.0;
    SacTrainer trainer(ev, scfg, 3e-3, 10.0);
    std::vector<double> input{1.0, 0.5, -0.5};
    std::vector<std::uint8_t> mask{1, 1};
    std::vector<EpisodeStep> steps(2);
    for (int a = 0; a < 2; ++a) {
        steps[a].input = input;
        steps[a].mask = mask;
        steps[a].action = a;
        steps[a].reward = a == 0 ? 1.0 : 2.0;
        steps[a].done = true;
        steps[a].next_input = input;
        steps[a].next_mask = mask;
    }
    std::vector<const EpisodeStep*> batch{&steps[0], &steps[1], &steps[0], &steps[1]};
    for (int it = 0; it < 4000; ++it) trainer.update(batch);
    auto out = ev.forward(input, mask);
    // Closed-form maximum-entropy solution: softmax(Q / alpha).
    double z0 = std::exp(1.0 / scfg.alpha), z1 = std::exp(2.0 / scfg.alpha);
    double target0 = z0 / (z0 + z1);
    detail = "policy=(" + std::to_string(out.policy[0]) + "," + std::to_string(out.policy[1]) +
             ") target=(" + std::to_string(target0) + "," + std::to_string(1 - target0) + ")";
    return std::abs(out.policy[0] - target0) < 1e-2 &&
           std::abs(out.policy[1] - (1 - target0)) < 1e-2;
}

RunConfig learning_config(const std::string& algo, std::uint64_t seed) {
    RunConfig c;
    c.seed = seed;
    c.board.n_vars = 2;
    c.board.max_complexity = 3;
    c.env.max_steps = 5;
    c.evaluator.hidden = 64;
    c.mcts.simulations = 128;
    c.mcts.p_mix = 0.5;
    c.trainer.algo = algo;
    c.trainer.iterations = 200;
    c.trainer.pretrain_epochs = 800;
    c.trainer.use_mcts = true;
    c.trainer.curriculum.min_level = 1;
    c.trainer.curriculum.max_level = 3;
    c.trainer.sac_episodes_per_iter = 4;
    c.eval.episodes = 1000;
    c.eval.tau = 0.1;
    c.eval.complexity = 3;
    return c;
}

bool end_to_end(std::string& detail) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "circuitrl_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string board_path = (dir / "board.txt").string();
    std::ostringstream log;
    run_board_build(learning_config("ppo", 12345), board_path, log);

    std::ostringstream summary;
    bool ok = true;
    for (const std::string& algo : {std::string("ppo"), std::string("sac")}) {
        RunConfig c = learning_config(algo, 12345);
        TrainResult r = run_train(c, board_path, (dir / algo).string(), log);
        double gate = 3.0 * r.random_baseline_pct;
        bool passed = r.random_baseline_pct == 0.0 ? r.final_eval.success_pct > 0.0
                                                   : r.final_eval.success_pct >= gate;
        summary << " [" << algo << ": " << std::fixed << std::setprecision(1)
                << r.final_eval.success_pct << "% vs baseline " << r.random_baseline_pct
                << "%]";
        ok = ok && passed;
    }
    fs::remove_all(dir);
    detail = "200 iterations each, 1000 held-out episodes at C=3:" + summary.str();
    return ok;
}

bool determinism(std::string& detail) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "circuitrl_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    RunConfig c;
    c.seed = 31337;
    c.deterministic = true;
    c.board.n_vars = 2;
    c.board.max_complexity = 2;
    c.env.max_steps = 4;
    c.evaluator.hidden = 16;
    c.mcts.simulations = 8;
    c.trainer.iterations = 3;
    c.trainer.pretrain_epochs = 2;
    c.trainer.ppo_batch_transitions = 16;
    c.trainer.curriculum.max_level = 2;
    c.eval.episodes = 20;
    c.eval.complexity = 2;
    std::ostringstream log;
    run_board_build(c, (dir / "a.board").string(), log);
    run_board_build(c, (dir / "b.board").string(), log);
    bool boards_match = slurp(dir / "a.board") == slurp(dir / "b.board");
    run_train(c, (dir / "a.board").string(), (dir / "run1").string(), log);
    run_train(c, (dir / "a.board").string(), (dir / "run2").string(), log);
    bool metrics_match = slurp(dir / "run1" / "metrics.csv") == slurp(dir / "run2" / "metrics.csv");
    bool eval_match = slurp(dir / "run1" / "eval.csv") == slurp(dir / "run2" / "eval.csv");
    bool ckpt_match = slurp(dir / "run1" / "checkpoint_final.bin") ==
                      slurp(dir / "run2" / "checkpoint_final.bin");
    fs::remove_all(dir);
    detail = std::string("boards ") + (boards_match ? "identical" : "DIFFER") + ", metrics " +
             (metrics_match ? "identical" : "DIFFER") + ", checkpoints " +
             (ckpt_match ? "identical" : "DIFFER");
    return boards_match && metrics_match && eval_match && ckpt_match;
}

}  // namespace

int main() {
    run(1, "algebra suite", algebra_suite);
    run(2, "board reproduction", board_reproduction);
    run(3, "oracle agreement", oracle_agreement);
    run(4, "search correctness", search_correctness);
    run(5, "formula-level numeric checks", formula_checks);
    run(6, "gradient checks", gradient_checks);
    run(7, "ratio-provenance regression", ratio_provenance);
    run(8, "soft actor-critic bandit fixed point", sac_bandit);
    run(9, "end-to-end desk-scale learning", end_to_end);
    run(10, "determinism", determinism);
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
