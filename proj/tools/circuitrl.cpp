#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "circuitrl/harness.hpp"

namespace {

circuitrl::RunConfig resolve_config(const std::string& config_path, bool have_seed,
                                    std::uint64_t seed, bool deterministic) {
    circuitrl::RunConfig config =
        config_path.empty() ? circuitrl::RunConfig{} : circuitrl::load_run_config(config_path);
    if (have_seed) config.seed = seed;
    if (deterministic) config.deterministic = true;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimal arithmetic-circuit discovery: boards, training, evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool deterministic = false;
    app.add_option("--config", config_path, "JSON run configuration")->capture_default_str();
    app.add_option("--seed", seed, "Override the configured global seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--deterministic", deterministic,
                 "Single-worker, fixed-seed execution (reproducibility mode)");

    auto* board_cmd = app.add_subcommand("board-build", "Enumerate and save a game board");
    std::string board_out = "board.txt";
    board_cmd->add_option("--out", board_out, "Board output file")->capture_default_str();

    auto* train_cmd = app.add_subcommand("train", "Pretrain and fine-tune a policy");
    std::string train_board, train_out = "run", train_algo;
    train_cmd->add_option("--board", train_board, "Board file")->required();
    train_cmd->add_option("--out", train_out, "Output directory")->capture_default_str();
    train_cmd->add_option("--algo", train_algo, "Override trainer algorithm (ppo|sac)");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on held-out targets");
    std::string eval_board, eval_ckpt;
    int eval_complexity = -1, eval_episodes = -1;
    eval_cmd->add_option("--board", eval_board, "Board file")->required();
    eval_cmd->add_option("--checkpoint", eval_ckpt, "Parameter checkpoint")->required();
    eval_cmd->add_option("--complexity", eval_complexity, "Target complexity level");
    eval_cmd->add_option("--episodes", eval_episodes, "Episode count");

    auto* oracle_cmd =
        app.add_subcommand("oracle", "Minimal gate count for a canonical polynomial");
    std::string oracle_target;
    oracle_cmd->add_option("target", oracle_target, "Canonical polynomial string")->required();

    auto* stats_cmd = app.add_subcommand("stats", "Print layer counts for a saved board");
    std::string stats_board;
    stats_cmd->add_option("--board", stats_board, "Board file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        circuitrl::RunConfig config =
            resolve_config(config_path, seed_set, seed, deterministic);
        if (board_cmd->parsed()) {
            circuitrl::run_board_build(config, board_out, std::cout);
        } else if (train_cmd->parsed()) {
            if (!train_algo.empty()) {
                if (train_algo != "ppo" && train_algo != "sac") {
                    throw circuitrl::ConfigError("--algo must be ppo or sac");
                }
                config.trainer.algo = train_algo;
            }
            circuitrl::run_train(config, train_board, train_out, std::cout);
        } else if (eval_cmd->parsed()) {
            int complexity = eval_complexity > 0 ? eval_complexity : config.eval.complexity;
            int episodes = eval_episodes > 0 ? eval_episodes : config.eval.episodes;
            circuitrl::run_eval(config, eval_ckpt, eval_board, complexity, episodes, std::cout);
        } else if (oracle_cmd->parsed()) {
            circuitrl::run_oracle(oracle_target, config, std::cout);
        } else if (stats_cmd->parsed()) {
            circuitrl::print_board_stats(circuitrl::load_board(stats_board), std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
