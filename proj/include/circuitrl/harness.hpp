#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "circuitrl/trainer.hpp"

namespace circuitrl {

struct EvaluatorTrainConfig {
    int hidden = 256;
    double lr = 3e-4;
    double clip_norm = 1.0;
};

struct TrainerConfig {
    std::string algo = "ppo";          // "ppo" or "sac"
    int iterations = 200;
    bool pretrain = true;
    int pretrain_epochs = 10;
    int pretrain_batch = 256;
    bool use_mcts = true;
    int ppo_batch_transitions = 256;   // transitions collected per iteration
    int sac_episodes_per_iter = 4;     // one gradient step per collected step
    int checkpoint_every = 50;
    std::size_t replay_capacity = 100000;
    PpoConfig ppo;
    SacConfig sac;
    CurriculumConfig curriculum;
};

struct EvalProtocolConfig {
    int episodes = 1000;
    double tau = 0.1;
    int complexity = 3;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "run";
    bool deterministic = true;
    BoardConfig board;
    EnvConfig env;  // n_vars and p are always overridden by the board config
    EvaluatorTrainConfig evaluator;
    MctsConfig mcts;
    TrainerConfig trainer;
    EvalProtocolConfig eval;
};

// Structured-text configuration; every unknown key is rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

std::uint64_t fnv1a(const std::string& s);

// A target is held out of training when a seeded hash of its canonical
// polynomial string lands in the bottom fifth (80/20 split).
bool is_held_out(const std::string& canonical_key, std::uint64_t seed);

struct TargetSplit {
    std::vector<int> train;
    std::vector<int> held_out;
};
// Non-seed nodes at min_depth == complexity, partitioned by is_held_out.
TargetSplit split_targets(const GameBoard& board, int complexity, std::uint64_t seed);

struct EvalReport {
    int episodes = 0;
    double success_pct = 0.0;
    double avg_reward = 0.0;
    double avg_entropy = 0.0;
};

// Reporting protocol: near-greedy search (visit sampling at `tau`) with
// the checkpoint's priors; entropy is the network policy's at visited states.
EvalReport evaluate_checkpoint(const EnvConfig& env_config, const GameBoard& board,
                               const Evaluator& evaluator, const MctsConfig& mcts,
                               double tau, const std::vector<int>& targets, int episodes,
                               std::mt19937_64& rng);

// Same protocol with uniform-random valid actions (no network, no search).
EvalReport evaluate_random_baseline(const EnvConfig& env_config, const GameBoard& board,
                                    const std::vector<int>& targets, int episodes,
                                    std::mt19937_64& rng);

// Self-test policy that replays the episode's reference sequence verbatim.
EvalReport evaluate_oracle_replay(const EnvConfig& env_config, const GameBoard& board,
                                  const std::vector<int>& targets, int episodes,
                                  std::mt19937_64& rng);

GameBoard load_board(const std::string& path);
void save_board(const GameBoard& board, const std::string& path);

// Layer-count table plus summary counters, in the layout used for diffing
// against the published enumeration tables.
void print_board_stats(const GameBoard& board, std::ostream& os);

void run_board_build(const RunConfig& config, const std::string& out_path, std::ostream& log);

struct TrainResult {
    std::string metrics_path;
    std::string final_checkpoint;
    EvalReport final_eval;
    double random_baseline_pct = 0.0;
};
TrainResult run_train(const RunConfig& config, const std::string& board_path,
                      const std::string& out_dir, std::ostream& log);

EvalReport run_eval(const RunConfig& config, const std::string& checkpoint_path,
                    const std::string& board_path, int complexity, int episodes,
                    std::ostream& log);

// Minimal gate count plus one witness sequence for a canonical polynomial.
void run_oracle(const std::string& target_poly, const RunConfig& config, std::ostream& log);

}  // namespace circuitrl
