#pragma once

#include <memory>
#include <random>
#include <vector>

#include "circuitrl/evaluator.hpp"

namespace circuitrl {

struct MctsConfig {
    int simulations = 64;
    double c = 1.414;        // exploration constant
    bool puct = false;       // prior-weighted exploration instead of UCT
    double gamma = 0.99;     // discount for backpropagated returns-to-go
    double tau_init = 1.0;
    double tau_final = 0.1;
    double t_decay = 0.0;    // 0 behaves as tau_final for all t
    double p_mix = 0.5;

    void validate() const;
};

// UCT score with Q as the TOTAL value: Q/N + c * sqrt(ln N(s) / N(s, a)).
double ucb_score(double total_value, int child_visits, int parent_visits, double c);

// tau_final + (tau_init - tau_final) * max(1 - t / t_decay, 0)
double temperature(int t, const MctsConfig& config);

// Sample an action proportional to visits^(1/tau); tau <= 0.01 is argmax
// with lowest-index tie-break.
int select_with_temperature(const std::vector<int>& visits, double tau, std::mt19937_64& rng);

// MCTS action with probability p_mix, else the policy action.
int mix_action(int policy_action, int mcts_action, double p_mix, std::mt19937_64& rng);

// One search tree rooted at an environment state. The subtree of the action
// passed to advance() is retained across episode steps.
class SearchTree {
  public:
    SearchTree(const EnvConfig& env_config, EnvState root);
    SearchTree(SearchTree&&) noexcept;
    SearchTree& operator=(SearchTree&&) noexcept;
    ~SearchTree();

    const EnvState& root_state() const;

    // Runs config.simulations iterations and returns the root visit counts
    // over the full flat action space (zero on masked actions).
    std::vector<int> search(const Evaluator& evaluator, const MctsConfig& config);

    // Moves the root to the child reached by `action`, creating it if the
    // search never expanded it.
    void advance(int action, const EnvConfig& env_config);

  private:
    struct Node;
    EnvConfig env_config_;
    std::unique_ptr<Node> root_;
};

}  // namespace circuitrl
