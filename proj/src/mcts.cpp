#include "circuitrl/mcts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circuitrl {

void MctsConfig::validate() const {
    if (simulations < 1) throw ConfigError("mcts simulations must be >= 1");
    if (c <= 0.0) throw ConfigError("mcts exploration constant must be positive");
    if (tau_final <= 0.0 || tau_final > tau_init) {
        throw ConfigError("mcts temperatures must satisfy 0 < tau_final <= tau_init");
    }
    if (p_mix < 0.0 || p_mix > 1.0) throw ConfigError("p_mix must lie in [0, 1]");
}

double ucb_score(double total_value, int child_visits, int parent_visits, double c) {
    return total_value / child_visits +
           c * std::sqrt(std::log(static_cast<double>(parent_visits)) / child_visits);
}

double temperature(int t, const MctsConfig& config) {
    if (config.t_decay <= 0.0) return config.tau_final;
    double frac = std::max(1.0 - static_cast<double>(t) / config.t_decay, 0.0);
    return config.tau_final + (config.tau_init - config.tau_final) * frac;
}

int select_with_temperature(const std::vector<int>& visits, double tau, std::mt19937_64& rng) {
    long total = 0;
    for (int v : visits) total += v;
    if (total <= 0) throw SamplingError("select_with_temperature on all-zero visits");
    if (tau <= 0.01) {
        return static_cast<int>(std::max_element(visits.begin(), visits.end()) - visits.begin());
    }
    int max_v = *std::max_element(visits.begin(), visits.end());
    std::vector<double> weights(visits.size(), 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < visits.size(); ++i) {
        if (visits[i] > 0) {
            weights[i] = std::pow(static_cast<double>(visits[i]) / max_v, 1.0 / tau);
            z += weights[i];
        }
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng) * z;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc && weights[i] > 0.0) return static_cast<int>(i);
    }
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return static_cast<int>(i);
    }
    throw SamplingError("select_with_temperature failed to sample");
}

int mix_action(int policy_action, int mcts_action, double p_mix, std::mt19937_64& rng) {
    if (p_mix < 0.0 || p_mix > 1.0) throw ConfigError("p_mix must lie in [0, 1]");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < p_mix ? mcts_action : policy_action;
}

struct SearchTree::Node {
    explicit Node(EnvState s) : state(std::move(s)) {}

    EnvState state;
    bool expanded = false;
    std::vector<int> valid_actions;
    std::vector<double> priors;
    struct Child {
        int n = 0;
        double w = 0.0;       // total backpropagated value
        double reward = 0.0;  // one-step reward on the edge into the child
        std::unique_ptr<Node> node;
    };
    std::vector<Child> children;
    int parent_visits = 1;  // N(s) = sum_a N(s,a) + 1

    // Evaluates the state and populates priors/children. Returns the leaf
    // value to backpropagate (0 at terminal states: the edge reward into a
    // terminal node already carries the full return).
    double expand(const EnvConfig& env_config, const Evaluator& evaluator);
};

double SearchTree::Node::expand(const EnvConfig& env_config, const Evaluator& evaluator) {
    if (state.done) return 0.0;
    auto mask = action_mask(env_config, state);
    auto out = evaluator.forward(evaluator_input(env_config, state), mask);
    for (std::size_t a = 0; a < mask.size(); ++a) {
        if (!mask[a]) continue;
        valid_actions.push_back(static_cast<int>(a));
        priors.push_back(out.policy[a]);
    }
    children.resize(valid_actions.size());
    expanded = true;
    return out.value;
}

SearchTree::SearchTree(const EnvConfig& env_config, EnvState root)
    : env_config_(env_config), root_(std::make_unique<Node>(std::move(root))) {}

SearchTree::SearchTree(SearchTree&&) noexcept = default;
SearchTree& SearchTree::operator=(SearchTree&&) noexcept = default;
SearchTree::~SearchTree() = default;

const EnvState& SearchTree::root_state() const { return root_->state; }

std::vector<int> SearchTree::search(const Evaluator& evaluator, const MctsConfig& config) {
    config.validate();
    if (root_->state.done) throw SearchError("search from a terminal state");
    if (!root_->expanded) root_->expand(env_config_, evaluator);

    for (int sim = 0; sim < config.simulations; ++sim) {
        Node* node = root_.get();
        std::vector<std::pair<Node*, std::size_t>> path;  // (parent, child slot)
        double leaf_value = 0.0;
        while (true) {
            if (node->state.done) {
                leaf_value = 0.0;
                break;
            }
            if (!node->expanded) {
                leaf_value = node->expand(env_config_, evaluator);
                break;
            }
            // Unvisited children first (infinite-UCB convention), ordered by
            // prior then action index; otherwise the best UCT/PUCT score.
            std::size_t best = node->children.size();
            double best_key = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < node->children.size(); ++k) {
                if (node->children[k].n == 0 && node->priors[k] > best_key) {
                    best_key = node->priors[k];
                    best = k;
                }
            }
            if (best == node->children.size()) {
                for (std::size_t k = 0; k < node->children.size(); ++k) {
                    const auto& ch = node->children[k];
                    double score =
                        config.puct
                            ? ch.w / ch.n + config.c * node->priors[k] *
                                                std::sqrt(static_cast<double>(node->parent_visits)) /
                                                (1.0 + ch.n)
                            : ucb_score(ch.w, ch.n, node->parent_visits, config.c);
                    if (score > best_key) {
                        best_key = score;
                        best = k;
                    }
                }
            }
            auto& child = node->children[best];
            path.push_back({node, best});
            if (!child.node) {
                child.node = std::make_unique<Node>(node->state);
                child.reward = env_step(env_config_, child.node->state,
                                        node->valid_actions[best]);
                node = child.node.get();
                leaf_value = node->expand(env_config_, evaluator);
                break;
            }
            node = child.node.get();
        }
        double g = leaf_value;
        for (std::size_t k = path.size(); k-- > 0;) {
            auto& [parent, slot] = path[k];
            auto& child = parent->children[slot];
            g = child.reward + config.gamma * g;
            child.n += 1;
            child.w += g;
            parent->parent_visits += 1;
        }
    }

    std::vector<int> visits(env_config_.action_count(), 0);
    for (std::size_t k = 0; k < root_->children.size(); ++k) {
        visits[root_->valid_actions[k]] = root_->children[k].n;
    }
    return visits;
}

void SearchTree::advance(int action, const EnvConfig& env_config) {
    if (root_->expanded) {
        for (std::size_t k = 0; k < root_->valid_actions.size(); ++k) {
            if (root_->valid_actions[k] == action && root_->children[k].node) {
                std::unique_ptr<Node> next = std::move(root_->children[k].node);
                root_ = std::move(next);
                return;
            }
        }
    }
    auto next = std::make_unique<Node>(root_->state);
    env_step(env_config, next->state, action);
    root_ = std::move(next);
}

}  // namespace circuitrl
