#include "circuitrl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace circuitrl {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            }) == allowed.end()) {
            throw ConfigError("unknown key '" + item.key() + "' in config section '" + section +
                              "'");
        }
    }
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

DedupPolicy parse_dedup(const std::string& s) {
    if (s == "global") return DedupPolicy::Global;
    if (s == "layer-local") return DedupPolicy::LayerLocal;
    throw ConfigError("dedup must be 'global' or 'layer-local', got '" + s + "'");
}

Layering parse_layering(const std::string& s) {
    if (s == "gate-count") return Layering::GateCount;
    if (s == "pair-bfs") return Layering::PairBfs;
    throw ConfigError("layering must be 'gate-count' or 'pair-bfs', got '" + s + "'");
}

CoeffMode parse_coeff_mode(const std::string& s) {
    if (s == "modular") return CoeffMode::Modular;
    if (s == "integer") return CoeffMode::Integer;
    throw ConfigError("coeff_mode must be 'modular' or 'integer', got '" + s + "'");
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "<root>",
               {"seed", "out_dir", "deterministic", "board", "env", "evaluator", "mcts", "trainer",
                "eval"});
    RunConfig c;
    read_key(j, "seed", c.seed);
    read_key(j, "out_dir", c.out_dir);
    read_key(j, "deterministic", c.deterministic);

    if (j.contains("board")) {
        const json& b = j["board"];
        check_keys(b, "board",
                   {"n_vars", "p", "max_complexity", "node_cap", "dedup", "layering", "coeff_mode",
                    "include_constant_one", "sequence_limit"});
        read_key(b, "n_vars", c.board.n_vars);
        read_key(b, "p", c.board.p);
        read_key(b, "max_complexity", c.board.max_complexity);
        read_key(b, "node_cap", c.board.node_cap);
        if (b.contains("dedup")) c.board.dedup = parse_dedup(b["dedup"].get<std::string>());
        if (b.contains("layering")) c.board.layering = parse_layering(b["layering"].get<std::string>());
        if (b.contains("coeff_mode"))
            c.board.coeff_mode = parse_coeff_mode(b["coeff_mode"].get<std::string>());
        read_key(b, "include_constant_one", c.board.include_constant_one);
        read_key(b, "sequence_limit", c.board.sequence_limit);
    }
    if (j.contains("env")) {
        const json& e = j["env"];
        check_keys(e, "env",
                   {"max_steps", "horizon_slack", "strict_horizon", "success_bonus", "step_penalty",
                    "failure_penalty"});
        read_key(e, "max_steps", c.env.max_steps);
        read_key(e, "horizon_slack", c.env.horizon_slack);
        read_key(e, "strict_horizon", c.env.strict_horizon);
        read_key(e, "success_bonus", c.env.reward.success_bonus);
        read_key(e, "step_penalty", c.env.reward.step_penalty);
        read_key(e, "failure_penalty", c.env.reward.failure_penalty);
    }
    if (j.contains("evaluator")) {
        const json& e = j["evaluator"];
        check_keys(e, "evaluator", {"hidden", "lr", "clip_norm"});
        read_key(e, "hidden", c.evaluator.hidden);
        read_key(e, "lr", c.evaluator.lr);
        read_key(e, "clip_norm", c.evaluator.clip_norm);
    }
    if (j.contains("mcts")) {
        const json& m = j["mcts"];
        check_keys(m, "mcts",
                   {"simulations", "c", "puct", "gamma", "tau_init", "tau_final", "t_decay",
                    "p_mix"});
        read_key(m, "simulations", c.mcts.simulations);
        read_key(m, "c", c.mcts.c);
        read_key(m, "puct", c.mcts.puct);
        read_key(m, "gamma", c.mcts.gamma);
        read_key(m, "tau_init", c.mcts.tau_init);
        read_key(m, "tau_final", c.mcts.tau_final);
        read_key(m, "t_decay", c.mcts.t_decay);
        read_key(m, "p_mix", c.mcts.p_mix);
    }
    if (j.contains("trainer")) {
        const json& t = j["trainer"];
        check_keys(t, "trainer",
                   {"algo", "iterations", "pretrain", "pretrain_epochs", "pretrain_batch",
                    "use_mcts", "ppo_batch_transitions", "sac_episodes_per_iter",
                    "checkpoint_every", "replay_capacity", "ppo", "sac", "curriculum"});
        read_key(t, "algo", c.trainer.algo);
        read_key(t, "iterations", c.trainer.iterations);
        read_key(t, "pretrain", c.trainer.pretrain);
        read_key(t, "pretrain_epochs", c.trainer.pretrain_epochs);
        read_key(t, "pretrain_batch", c.trainer.pretrain_batch);
        read_key(t, "use_mcts", c.trainer.use_mcts);
        read_key(t, "ppo_batch_transitions", c.trainer.ppo_batch_transitions);
        read_key(t, "sac_episodes_per_iter", c.trainer.sac_episodes_per_iter);
        read_key(t, "checkpoint_every", c.trainer.checkpoint_every);
        read_key(t, "replay_capacity", c.trainer.replay_capacity);
        if (t.contains("ppo")) {
            const json& p = t["ppo"];
            check_keys(p, "trainer.ppo",
                       {"gamma", "lambda", "eps_clip", "c_v", "c_e", "epochs", "minibatch",
                        "normalize_advantages"});
            read_key(p, "gamma", c.trainer.ppo.gamma);
            read_key(p, "lambda", c.trainer.ppo.lambda);
            read_key(p, "eps_clip", c.trainer.ppo.eps_clip);
            read_key(p, "c_v", c.trainer.ppo.c_v);
            read_key(p, "c_e", c.trainer.ppo.c_e);
            read_key(p, "epochs", c.trainer.ppo.epochs);
            read_key(p, "minibatch", c.trainer.ppo.minibatch);
            read_key(p, "normalize_advantages", c.trainer.ppo.normalize_advantages);
        }
        if (t.contains("sac")) {
            const json& s = t["sac"];
            check_keys(s, "trainer.sac",
                       {"gamma", "alpha", "learnable_alpha", "entropy_target_scale", "alpha_lr",
                        "lambda_mcts", "tau_soft", "batch_size"});
            read_key(s, "gamma", c.trainer.sac.gamma);
            read_key(s, "alpha", c.trainer.sac.alpha);
            read_key(s, "learnable_alpha", c.trainer.sac.learnable_alpha);
            read_key(s, "entropy_target_scale", c.trainer.sac.entropy_target_scale);
            read_key(s, "alpha_lr", c.trainer.sac.alpha_lr);
            read_key(s, "lambda_mcts", c.trainer.sac.lambda_mcts);
            read_key(s, "tau_soft", c.trainer.sac.tau_soft);
            read_key(s, "batch_size", c.trainer.sac.batch_size);
        }
        if (t.contains("curriculum")) {
            const json& k = t["curriculum"];
            check_keys(k, "trainer.curriculum",
                       {"min_level", "max_level", "window", "promote", "demote"});
            read_key(k, "min_level", c.trainer.curriculum.min_level);
            read_key(k, "max_level", c.trainer.curriculum.max_level);
            read_key(k, "window", c.trainer.curriculum.window);
            read_key(k, "promote", c.trainer.curriculum.promote);
            read_key(k, "demote", c.trainer.curriculum.demote);
        }
    }
    if (j.contains("eval")) {
        const json& e = j["eval"];
        check_keys(e, "eval", {"episodes", "tau", "complexity"});
        read_key(e, "episodes", c.eval.episodes);
        read_key(e, "tau", c.eval.tau);
        read_key(e, "complexity", c.eval.complexity);
    }
    if (c.trainer.algo != "ppo" && c.trainer.algo != "sac") {
        throw ConfigError("trainer.algo must be 'ppo' or 'sac', got '" + c.trainer.algo + "'");
    }
    c.env.n_vars = c.board.n_vars;
    c.env.p = c.board.p;
    c.env.validate();
    c.mcts.validate();
    c.trainer.curriculum.max_level =
        std::min(c.trainer.curriculum.max_level, c.board.max_complexity);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    j["deterministic"] = c.deterministic;
    j["board"] = {{"n_vars", c.board.n_vars},
                  {"p", c.board.p},
                  {"max_complexity", c.board.max_complexity},
                  {"node_cap", c.board.node_cap},
                  {"dedup", to_string(c.board.dedup)},
                  {"layering", to_string(c.board.layering)},
                  {"coeff_mode", to_string(c.board.coeff_mode)},
                  {"include_constant_one", c.board.include_constant_one},
                  {"sequence_limit", c.board.sequence_limit}};
    j["env"] = {{"max_steps", c.env.max_steps},
                {"horizon_slack", c.env.horizon_slack},
                {"strict_horizon", c.env.strict_horizon},
                {"success_bonus", c.env.reward.success_bonus},
                {"step_penalty", c.env.reward.step_penalty},
                {"failure_penalty", c.env.reward.failure_penalty}};
    j["evaluator"] = {{"hidden", c.evaluator.hidden},
                      {"lr", c.evaluator.lr},
                      {"clip_norm", c.evaluator.clip_norm}};
    j["mcts"] = {{"simulations", c.mcts.simulations}, {"c", c.mcts.c},
                 {"puct", c.mcts.puct},               {"gamma", c.mcts.gamma},
                 {"tau_init", c.mcts.tau_init},       {"tau_final", c.mcts.tau_final},
                 {"t_decay", c.mcts.t_decay},         {"p_mix", c.mcts.p_mix}};
    j["trainer"] = {
        {"algo", c.trainer.algo},
        {"iterations", c.trainer.iterations},
        {"pretrain", c.trainer.pretrain},
        {"pretrain_epochs", c.trainer.pretrain_epochs},
        {"pretrain_batch", c.trainer.pretrain_batch},
        {"use_mcts", c.trainer.use_mcts},
        {"ppo_batch_transitions", c.trainer.ppo_batch_transitions},
        {"sac_episodes_per_iter", c.trainer.sac_episodes_per_iter},
        {"checkpoint_every", c.trainer.checkpoint_every},
        {"replay_capacity", c.trainer.replay_capacity},
        {"ppo",
         {{"gamma", c.trainer.ppo.gamma},
          {"lambda", c.trainer.ppo.lambda},
          {"eps_clip", c.trainer.ppo.eps_clip},
          {"c_v", c.trainer.ppo.c_v},
          {"c_e", c.trainer.ppo.c_e},
          {"epochs", c.trainer.ppo.epochs},
          {"minibatch", c.trainer.ppo.minibatch},
          {"normalize_advantages", c.trainer.ppo.normalize_advantages}}},
        {"sac",
         {{"gamma", c.trainer.sac.gamma},
          {"alpha", c.trainer.sac.alpha},
          {"learnable_alpha", c.trainer.sac.learnable_alpha},
          {"entropy_target_scale", c.trainer.sac.entropy_target_scale},
          {"alpha_lr", c.trainer.sac.alpha_lr},
          {"lambda_mcts", c.trainer.sac.lambda_mcts},
          {"tau_soft", c.trainer.sac.tau_soft},
          {"batch_size", c.trainer.sac.batch_size}}},
        {"curriculum",
         {{"min_level", c.trainer.curriculum.min_level},
          {"max_level", c.trainer.curriculum.max_level},
          {"window", c.trainer.curriculum.window},
          {"promote", c.trainer.curriculum.promote},
          {"demote", c.trainer.curriculum.demote}}}};
    j["eval"] = {{"episodes", c.eval.episodes}, {"tau", c.eval.tau},
                 {"complexity", c.eval.complexity}};
    return j.dump(2) + "\n";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool is_held_out(const std::string& canonical_key, std::uint64_t seed) {
    return fnv1a(canonical_key + "#" + std::to_string(seed)) % 5 == 0;
}

TargetSplit split_targets(const GameBoard& board, int complexity, std::uint64_t seed) {
    TargetSplit split;
    for (int id : board.nodes_at_depth(complexity)) {
        if (board.node(id).min_depth == 0) continue;
        if (is_held_out(board.node(id).poly.to_string(), seed)) {
            split.held_out.push_back(id);
        } else {
            split.train.push_back(id);
        }
    }
    return split;
}

namespace {

template <typename SelectFn>
EvalReport run_eval_episodes(const EnvConfig& env_config, const GameBoard& board,
                             const std::vector<int>& targets, int episodes,
                             std::mt19937_64& rng, SelectFn select) {
    if (targets.empty()) throw ConfigError("no targets to evaluate");
    if (episodes <= 0) throw ConfigError("episode count must be positive");
    EvalReport report;
    report.episodes = episodes;
    long entropy_samples = 0;
    for (int e = 0; e < episodes; ++e) {
        std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
        EnvState state = env_reset(env_config, board, targets[pick(rng)], rng);
        double total = 0.0;
        while (!state.done) {
            double entropy = 0.0;
            int action = select(state, rng, entropy);
            report.avg_entropy += entropy;
            ++entropy_samples;
            total += env_step(env_config, state, action);
        }
        report.avg_reward += total;
        if (state.success) report.success_pct += 1.0;
    }
    report.success_pct = 100.0 * report.success_pct / episodes;
    report.avg_reward /= episodes;
    if (entropy_samples > 0) report.avg_entropy /= entropy_samples;
    return report;
}

}  // namespace

EvalReport evaluate_checkpoint(const EnvConfig& env_config, const GameBoard& board,
                               const Evaluator& evaluator, const MctsConfig& mcts,
                               double tau, const std::vector<int>& targets, int episodes,
                               std::mt19937_64& rng) {
    std::optional<SearchTree> tree;
    return run_eval_episodes(
        env_config, board, targets, episodes, rng,
        [&](const EnvState& state, std::mt19937_64& r, double& entropy) {
            if (state.step_count == 0) tree.emplace(env_config, state);
            auto out = evaluator.forward(evaluator_input(env_config, state),
                                         action_mask(env_config, state));
            entropy = out.entropy();
            std::vector<int> visits = tree->search(evaluator, mcts);
            int action = select_with_temperature(visits, tau, r);
            tree->advance(action, env_config);
            return action;
        });
}

EvalReport evaluate_random_baseline(const EnvConfig& env_config, const GameBoard& board,
                                    const std::vector<int>& targets, int episodes,
                                    std::mt19937_64& rng) {
    return run_eval_episodes(
        env_config, board, targets, episodes, rng,
        [&](const EnvState& state, std::mt19937_64& r, double& entropy) {
            auto mask = action_mask(env_config, state);
            std::vector<int> valid;
            for (std::size_t a = 0; a < mask.size(); ++a) {
                if (mask[a]) valid.push_back(static_cast<int>(a));
            }
            if (valid.empty()) throw DataError("state with no valid actions");
            entropy = std::log(static_cast<double>(valid.size()));
            std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
            return valid[pick(r)];
        });
}

EvalReport evaluate_oracle_replay(const EnvConfig& env_config, const GameBoard& board,
                                  const std::vector<int>& targets, int episodes,
                                  std::mt19937_64& rng) {
    return run_eval_episodes(
        env_config, board, targets, episodes, rng,
        [&](const EnvState& state, std::mt19937_64&, double& entropy) {
            entropy = 0.0;
            if (state.step_count >= static_cast<int>(state.reference_actions.size())) {
                throw DataError("reference sequence exhausted before success");
            }
            return action_to_index(state.reference_actions[state.step_count],
                                   env_config.max_nodes());
        });
}

GameBoard load_board(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open board file: " + path);
    return GameBoard::load(in);
}

void save_board(const GameBoard& board, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write board file: " + path);
    board.save(out);
    if (!out) throw DataError("failed writing board file: " + path);
}

void print_board_stats(const GameBoard& board, std::ostream& os) {
    const BoardConfig& c = board.config();
    BoardStats s = board.stats();
    os << "board n_vars=" << c.n_vars << " p=" << c.p << " C=" << c.max_complexity
       << " dedup=" << to_string(c.dedup) << " layering=" << to_string(c.layering)
       << " coeff=" << to_string(c.coeff_mode) << "\n";
    os << "depth  nodes\n";
    for (const auto& [depth, count] : s.depth_histogram) {
        os << std::setw(5) << depth << "  " << count << "\n";
    }
    os << "nodes=" << s.node_count << " edges=" << s.edge_count
       << " multi_optimal=" << s.multi_optimal_count << " (" << fmt(s.multi_optimal_pct)
       << "%)\n";
    os << "max_optimal_circuits=" << s.max_optimal_count
       << " max_total_circuits=" << s.max_total_count
       << (s.max_total_count >= kCircuitCountCap ? " (saturated)" : "") << "\n";
}

void run_board_build(const RunConfig& config, const std::string& out_path, std::ostream& log) {
    GameBoard board = GameBoard::build(config.board);
    save_board(board, out_path);
    log << "wrote " << out_path << "\n";
    print_board_stats(board, log);
}

namespace {

std::vector<int> targets_with_fallback(const GameBoard& board, const TargetSplit& split,
                                       int level, std::ostream& log, bool& warned) {
    if (!split.train.empty()) return split.train;
    std::vector<int> all;
    for (int id : board.nodes_at_depth(level)) {
        if (board.node(id).min_depth > 0) all.push_back(id);
    }
    if (all.empty()) throw DataError("board has no targets at complexity " + std::to_string(level));
    if (!warned) {
        log << "warning: no training-split targets at complexity " << level
            << "; falling back to every node at that depth\n";
        warned = true;
    }
    return all;
}

}  // namespace

TrainResult run_train(const RunConfig& config, const std::string& board_path,
                      const std::string& out_dir, std::ostream& log) {
    GameBoard board = load_board(board_path);
    if (board.config().n_vars != config.board.n_vars || board.config().p != config.board.p) {
        throw ConfigError("board file does not match the configured variable count or modulus");
    }
    EnvConfig env = config.env;
    env.n_vars = board.config().n_vars;
    env.p = board.config().p;
    env.validate();

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream cfg(out_dir + "/config.json", std::ios::trunc);
        cfg << run_config_to_json(config);
    }

    std::mt19937_64 rng(config.seed);
    Evaluator evaluator(
        EvaluatorConfig::from_env(env, config.evaluator.hidden, config.seed ^ 0x5DEECE66DULL));
    Adam adam(config.evaluator.lr, config.evaluator.clip_norm);

    CurriculumConfig cur_cfg = config.trainer.curriculum;
    cur_cfg.max_level = std::min(cur_cfg.max_level, board.config().max_complexity);
    cur_cfg.allow_demotion = config.trainer.algo == "sac";
    Curriculum curriculum(cur_cfg, cur_cfg.min_level);

    std::vector<TargetSplit> splits(cur_cfg.max_level + 1);
    for (int level = cur_cfg.min_level; level <= cur_cfg.max_level; ++level) {
        splits[level] = split_targets(board, level, config.seed);
    }

    if (config.trainer.pretrain) {
        std::vector<int> pretrain_targets;
        for (int level = cur_cfg.min_level; level <= cur_cfg.max_level; ++level) {
            pretrain_targets.insert(pretrain_targets.end(), splits[level].train.begin(),
                                    splits[level].train.end());
        }
        if (!pretrain_targets.empty()) {
            auto dataset = build_pretrain_dataset(env, board, pretrain_targets, rng);
            PretrainConfig pc;
            pc.epochs = config.trainer.pretrain_epochs;
            pc.batch_size = config.trainer.pretrain_batch;
            pc.seed = config.seed ^ 0xA5A5A5A5ULL;
            auto metrics = pretrain_supervised(evaluator, adam, dataset, pc);
            log << "pretrain: " << dataset.size() << " examples, final loss "
                << fmt(metrics.epoch_loss.back()) << ", accuracy "
                << fmt(metrics.epoch_accuracy.back()) << "\n";
        }
    }

    const bool sac_mode = config.trainer.algo == "sac";
    ReplayBuffer buffer(config.trainer.replay_capacity);
    std::optional<SacTrainer> sac;
    if (sac_mode) {
        sac.emplace(evaluator, config.trainer.sac, config.evaluator.lr,
                    config.evaluator.clip_norm);
    }

    TrainResult result;
    result.metrics_path = out_dir + "/metrics.csv";
    std::ofstream csv(result.metrics_path, std::ios::trunc);
    if (sac_mode) {
        csv << "iteration,level,success_rate,avg_reward,entropy,q_loss,pi_loss,ce_loss\n";
    } else {
        csv << "iteration,level,success_rate,avg_reward,entropy,policy_loss,value_loss,"
               "clip_fraction\n";
    }

    bool fallback_warned = false;
    for (int iter = 1; iter <= config.trainer.iterations; ++iter) {
        int level = curriculum.level();
        std::vector<int> allowed =
            targets_with_fallback(board, splits[level], level, log, fallback_warned);

        CollectConfig cc;
        cc.mode = sac_mode ? CollectMode::Sac : CollectMode::Ppo;
        cc.use_mcts = config.trainer.use_mcts;
        cc.temperature_step = iter;
        cc.mcts = config.mcts;
        CollectStats stats;
        std::vector<Episode> episodes;
        if (sac_mode) {
            cc.episodes = config.trainer.sac_episodes_per_iter;
            episodes = collect_episodes(env, board, evaluator, cc, allowed, rng, &stats);
        } else {
            cc.episodes = 1;
            while (stats.total_steps < config.trainer.ppo_batch_transitions) {
                auto more = collect_episodes(env, board, evaluator, cc, allowed, rng, &stats);
                episodes.insert(episodes.end(), std::make_move_iterator(more.begin()),
                                std::make_move_iterator(more.end()));
            }
        }
        for (const Episode& ep : episodes) curriculum.record(ep.success);

        double success_rate = static_cast<double>(stats.successes) / episodes.size();
        double avg_reward = stats.total_reward / episodes.size();
        double entropy_sum = 0.0;
        long entropy_n = 0;

        if (sac_mode) {
            SacMetrics agg;
            int updates = 0;
            for (const Episode& ep : episodes) {
                for (const EpisodeStep& step : ep.steps) buffer.push(step);
            }
            for (int u = 0; u < stats.total_steps; ++u) {
                if (buffer.size() < static_cast<std::size_t>(config.trainer.sac.batch_size)) break;
                auto batch = buffer.sample(config.trainer.sac.batch_size, rng);
                SacMetrics m = sac->update(batch);
                agg.q_loss += m.q_loss;
                agg.pi_loss += m.pi_loss;
                agg.ce_loss += m.ce_loss;
                agg.alpha = m.alpha;
                ++updates;
            }
            if (updates > 0) {
                agg.q_loss /= updates;
                agg.pi_loss /= updates;
                agg.ce_loss /= updates;
            }
            for (const Episode& ep : episodes) {
                for (const EpisodeStep& step : ep.steps) {
                    auto out = evaluator.forward(step.input, step.mask);
                    entropy_sum += out.entropy();
                    ++entropy_n;
                }
            }
            csv << iter << "," << level << "," << fmt(success_rate) << "," << fmt(avg_reward)
                << "," << fmt(entropy_n ? entropy_sum / entropy_n : 0.0) << ","
                << fmt(agg.q_loss) << "," << fmt(agg.pi_loss) << "," << fmt(agg.ce_loss) << "\n";
        } else {
            PpoBatch batch;
            for (const Episode& ep : episodes) {
                std::vector<double> rewards, values;
                std::vector<std::uint8_t> dones;
                for (const EpisodeStep& step : ep.steps) {
                    rewards.push_back(step.reward);
                    values.push_back(step.value_old);
                    dones.push_back(step.done ? 1 : 0);
                }
                GaeResult gae =
                    compute_gae(rewards, values, 0.0, dones, config.trainer.ppo.gamma,
                                config.trainer.ppo.lambda);
                for (std::size_t t = 0; t < ep.steps.size(); ++t) {
                    batch.steps.push_back(&ep.steps[t]);
                    batch.advantages.push_back(gae.advantages[t]);
                    batch.returns.push_back(gae.returns[t]);
                }
            }
            PpoMetrics m = ppo_update(evaluator, adam, batch, config.trainer.ppo, rng);
            csv << iter << "," << level << "," << fmt(success_rate) << "," << fmt(avg_reward)
                << "," << fmt(m.entropy) << "," << fmt(m.policy_loss) << "," << fmt(m.value_loss)
                << "," << fmt(m.clip_fraction) << "\n";
        }

        if (config.trainer.checkpoint_every > 0 && iter % config.trainer.checkpoint_every == 0) {
            evaluator.save_params(out_dir + "/checkpoint_" + std::to_string(iter) + ".bin");
        }
    }
    csv.close();

    result.final_checkpoint = out_dir + "/checkpoint_final.bin";
    evaluator.save_params(result.final_checkpoint);

    const TargetSplit& eval_split = splits[std::min(config.eval.complexity, cur_cfg.max_level)];
    if (eval_split.held_out.empty()) {
        throw DataError("no held-out targets at complexity " +
                        std::to_string(config.eval.complexity));
    }
    MctsConfig eval_mcts = config.mcts;
    std::mt19937_64 eval_rng(config.seed ^ 0xEA71EA71ULL);
    result.final_eval = evaluate_checkpoint(env, board, evaluator, eval_mcts, config.eval.tau,
                                            eval_split.held_out, config.eval.episodes, eval_rng);
    std::mt19937_64 base_rng(config.seed ^ 0xBA5EBA5EULL);
    EvalReport baseline = evaluate_random_baseline(env, board, eval_split.held_out,
                                                   config.eval.episodes, base_rng);
    result.random_baseline_pct = baseline.success_pct;
    log << "final eval: success " << fmt(result.final_eval.success_pct) << "% avg_reward "
        << fmt(result.final_eval.avg_reward) << " entropy " << fmt(result.final_eval.avg_entropy)
        << " (random baseline " << fmt(baseline.success_pct) << "%)\n";
    {
        std::ofstream ev(out_dir + "/eval.csv", std::ios::trunc);
        ev << "complexity,success_pct,avg_reward,avg_entropy,random_success_pct\n";
        ev << config.eval.complexity << "," << fmt(result.final_eval.success_pct) << ","
           << fmt(result.final_eval.avg_reward) << "," << fmt(result.final_eval.avg_entropy)
           << "," << fmt(baseline.success_pct) << "\n";
    }
    return result;
}

EvalReport run_eval(const RunConfig& config, const std::string& checkpoint_path,
                    const std::string& board_path, int complexity, int episodes,
                    std::ostream& log) {
    GameBoard board = load_board(board_path);
    EnvConfig env = config.env;
    env.n_vars = board.config().n_vars;
    env.p = board.config().p;
    env.validate();
    Evaluator evaluator(EvaluatorConfig::from_env(env, config.evaluator.hidden, config.seed));
    evaluator.load_params(checkpoint_path);
    TargetSplit split = split_targets(board, complexity, config.seed);
    if (split.held_out.empty()) {
        throw DataError("no held-out targets at complexity " + std::to_string(complexity) +
                        " (board has " + std::to_string(split.train.size()) +
                        " training targets there)");
    }
    std::mt19937_64 rng(config.seed ^ 0xEA71EA71ULL);
    EvalReport report = evaluate_checkpoint(env, board, evaluator, config.mcts, config.eval.tau,
                                            split.held_out, episodes, rng);
    log << "complexity,success_pct,avg_reward,avg_entropy\n";
    log << complexity << "," << fmt(report.success_pct) << "," << fmt(report.avg_reward) << ","
        << fmt(report.avg_entropy) << "\n";
    return report;
}

void run_oracle(const std::string& target_poly, const RunConfig& config, std::ostream& log) {
    Polynomial target =
        Polynomial::parse(target_poly, config.board.n_vars, config.board.effective_modulus());
    auto found = brute_force_min_complexity(target, config.board.n_vars, config.board.p,
                                            config.board.max_complexity);
    if (!found) {
        log << "not found within " << config.board.max_complexity << " gates\n";
        return;
    }
    log << "minimal gate count: " << found->first << "\n";
    log << "witness:";
    for (const Action& a : found->second) {
        log << " (" << (a.op == OpKind::Add ? "add" : "mul") << "," << a.left << "," << a.right
            << ")";
    }
    log << "\n";
}

}  // namespace circuitrl
