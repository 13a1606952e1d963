#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "circuitrl/board.hpp"
#include "circuitrl/circuit.hpp"

namespace circuitrl {

struct RewardConfig {
    double success_bonus = 10.0;
    double step_penalty = 0.1;
    double failure_penalty = 1.0;
};

struct EnvConfig {
    int n_vars = 2;
    std::int64_t p = 5;
    int max_steps = 5;  // encoding horizon; also the episode horizon cap
    int horizon_slack = 2;  // per-episode horizon = target complexity + slack
    bool strict_horizon = false;  // horizon = target complexity exactly
    RewardConfig reward;

    int max_nodes() const { return n_vars + 1 + max_steps; }
    int pair_count() const { return max_nodes() * (max_nodes() + 1) / 2; }
    int action_count() const { return 2 * pair_count(); }
    void validate() const;
};

// Flat action index: op * P + pair_rank(i, j) with i <= j < max_nodes and
// pair_rank(i, j) = j(j+1)/2 + i, P = max_nodes(max_nodes+1)/2.
int action_to_index(const Action& a, int max_nodes);
Action index_to_action(int index, int max_nodes);

struct EnvState {
    Circuit circuit;
    Polynomial target;
    std::vector<Action> reference_actions;  // one optimal construction of the target
    int step_count = 0;
    int horizon = 0;
    bool done = false;
    bool success = false;
};

struct StateEncoding {
    std::vector<double> node_features;           // max_nodes x 4, row-major, zero padded
    std::vector<std::array<int, 2>> edges;       // operand->result plus self-loops
    std::vector<std::uint8_t> present;           // max_nodes, 1 for real nodes
};

// Fresh circuit with the episode target and one reference sequence drawn
// uniformly from the board node's minimal constructions. Seed targets are
// rejected: they would succeed at step zero.
EnvState env_reset(const EnvConfig& config, const GameBoard& board, int target_node,
                   std::mt19937_64& rng);

// Applies one gate. The action must be unmasked; success is checked against
// every node of the circuit and ends the episode immediately.
double env_step(const EnvConfig& config, EnvState& state, int action_index);

std::vector<std::uint8_t> action_mask(const EnvConfig& config, const EnvState& state);

StateEncoding encode_state(const EnvConfig& config, const EnvState& state);

std::vector<double> encode_target(const EnvConfig& config, const EnvState& state);
int target_encoding_size(const EnvConfig& config);

}  // namespace circuitrl
