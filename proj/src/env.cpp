#include "circuitrl/env.hpp"

#include <algorithm>

namespace circuitrl {

void EnvConfig::validate() const {
    if (max_steps < 1) throw ConfigError("env max_steps must be >= 1");
    if (n_vars < 1) throw ConfigError("env needs at least one variable");
    if (!is_prime(p)) throw ConfigError("env field modulus must be prime");
    if (max_nodes() < n_vars + 1 + max_steps) throw ConfigError("env max_nodes too small");
}

int action_to_index(const Action& a, int max_nodes) {
    int i = std::min(a.left, a.right);
    int j = std::max(a.left, a.right);
    if (i < 0 || j >= max_nodes) throw DomainError("action operands out of range");
    int pair_rank = j * (j + 1) / 2 + i;
    return static_cast<int>(a.op) * (max_nodes * (max_nodes + 1) / 2) + pair_rank;
}

Action index_to_action(int index, int max_nodes) {
    const int pairs = max_nodes * (max_nodes + 1) / 2;
    if (index < 0 || index >= 2 * pairs) throw DomainError("action index out of range");
    OpKind op = index < pairs ? OpKind::Add : OpKind::Mul;
    int rank = index % pairs;
    int j = 0;
    while ((j + 1) * (j + 2) / 2 <= rank) ++j;
    int i = rank - j * (j + 1) / 2;
    return Action{op, i, j};
}

EnvState env_reset(const EnvConfig& config, const GameBoard& board, int target_node,
                   std::mt19937_64& rng) {
    config.validate();
    const BoardNode& node = board.node(target_node);
    if (board.config().n_vars != config.n_vars || board.config().p != config.p) {
        throw ConfigError("board and environment disagree on n_vars or p");
    }
    if (node.min_depth == 0) {
        throw ConfigError("target equals a seed polynomial; degenerate episode rejected");
    }
    auto sequences = board.extract_optimal_action_sequences(target_node, 1 << 20);
    if (sequences.empty()) throw DataError("board node carries no optimal sequence");
    std::uniform_int_distribution<std::size_t> pick(0, sequences.size() - 1);
    std::vector<Action> reference = sequences[pick(rng)];
    if (static_cast<int>(reference.size()) > config.max_steps) {
        throw CapacityError("reference sequence longer than the env horizon");
    }

    EnvState state{Circuit(config.n_vars, config.p),
                   node.poly,
                   std::move(reference),
                   0,
                   0,
                   false,
                   false};
    state.horizon = config.strict_horizon ? node.min_depth
                                          : std::min(config.max_steps, node.min_depth + config.horizon_slack);
    return state;
}

double env_step(const EnvConfig& config, EnvState& state, int action_index) {
    if (state.done) throw DomainError("step on a finished episode");
    Action a = index_to_action(action_index, config.max_nodes());
    if (a.left >= state.circuit.size() || a.right >= state.circuit.size()) {
        throw DomainError("masked action: operand node does not exist yet");
    }
    int id = state.circuit.append_gate(a.op, a.left, a.right);
    ++state.step_count;

    double reward = -config.reward.step_penalty;
    if (state.circuit.poly(id) == state.target) {
        state.success = true;
        state.done = true;
        reward += config.reward.success_bonus;
    } else if (state.step_count >= state.horizon) {
        state.done = true;
        reward -= config.reward.failure_penalty;
    }
    return reward;
}

std::vector<std::uint8_t> action_mask(const EnvConfig& config, const EnvState& state) {
    const int max_nodes = config.max_nodes();
    std::vector<std::uint8_t> mask(config.action_count(), 0);
    if (state.done) return mask;
    const int live = state.circuit.size();
    const int pairs = config.pair_count();
    for (int j = 0; j < live; ++j) {
        for (int i = 0; i <= j; ++i) {
            int rank = j * (j + 1) / 2 + i;
            mask[rank] = 1;
            mask[pairs + rank] = 1;
        }
    }
    (void)max_nodes;
    return mask;
}

StateEncoding encode_state(const EnvConfig& config, const EnvState& state) {
    const int max_nodes = config.max_nodes();
    StateEncoding enc;
    enc.node_features.assign(static_cast<std::size_t>(max_nodes) * 4, 0.0);
    enc.present.assign(max_nodes, 0);

    // Probe point (2, 3, ..., n+1) mod p; each node's scalar feature is its
    // polynomial evaluated there, scaled into [0, 1).
    std::vector<std::int64_t> probe(config.n_vars);
    for (int i = 0; i < config.n_vars; ++i) probe[i] = (i + 2) % config.p;

    const Circuit& c = state.circuit;
    for (int id = 0; id < c.size(); ++id) {
        enc.present[id] = 1;
        double* row = &enc.node_features[static_cast<std::size_t>(id) * 4];
        switch (c.gate(id).kind) {
            case Gate::Kind::Variable: row[0] = 1.0; break;
            case Gate::Kind::One: row[1] = 1.0; break;
            case Gate::Kind::Op: row[2] = 1.0; break;
        }
        row[3] = static_cast<double>(c.poly(id).eval(probe)) / static_cast<double>(config.p);
        enc.edges.push_back({id, id});  // self-loop
        if (c.gate(id).kind == Gate::Kind::Op) {
            enc.edges.push_back({c.gate(id).left, id});
            enc.edges.push_back({c.gate(id).right, id});
        }
    }
    return enc;
}

int target_encoding_size(const EnvConfig& config) {
    return config.max_steps * (2 + 2 * config.max_nodes() + 1);
}

std::vector<double> encode_target(const EnvConfig& config, const EnvState& state) {
    const int max_nodes = config.max_nodes();
    const int block = 2 + 2 * max_nodes + 1;
    if (static_cast<int>(state.reference_actions.size()) > config.max_steps) {
        throw CapacityError("reference sequence exceeds the encoding horizon");
    }
    std::vector<double> enc(static_cast<std::size_t>(config.max_steps) * block, 0.0);
    for (std::size_t t = 0; t < state.reference_actions.size(); ++t) {
        const Action& a = state.reference_actions[t];
        double* b = &enc[t * block];
        b[static_cast<int>(a.op)] = 1.0;
        b[2 + a.left] = 1.0;
        b[2 + max_nodes + a.right] = 1.0;
        if (t + 1 == state.reference_actions.size()) b[2 + 2 * max_nodes] = 1.0;
    }
    return enc;
}

}  // namespace circuitrl
