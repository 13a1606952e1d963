#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "circuitrl/mcts.hpp"

namespace circuitrl {

// One transition as consumed by both trainers. mcts_visits is the normalized
// root visit distribution over the flat action space, present exactly when
// the step was search-guided (mcts_available).
struct EpisodeStep {
    std::vector<double> input;        // evaluator input at s_t
    std::vector<std::uint8_t> mask;   // valid actions at s_t
    int action = 0;
    double log_prob_old = 0.0;        // network's own policy at collection time
    double reward = 0.0;
    double value_old = 0.0;
    bool done = false;
    std::vector<double> mcts_visits;  // empty unless mcts_available
    bool mcts_available = false;
    std::vector<double> next_input;   // evaluator input at s_{t+1}
    std::vector<std::uint8_t> next_mask;
};

struct Episode {
    std::vector<EpisodeStep> steps;
    bool success = false;
    double total_reward = 0.0;
    int target_node = -1;
};

class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(EpisodeStep step);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    // Uniform without replacement within a batch.
    std::vector<const EpisodeStep*> sample(std::size_t batch, std::mt19937_64& rng) const;

  private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t next_ = 0;
    std::vector<EpisodeStep> ring_;
};

struct CurriculumConfig {
    int min_level = 1;
    int max_level = 3;
    int window = 100;
    double promote = 0.8;
    double demote = 0.3;
    bool allow_demotion = false;  // SAC mode only
};

class Curriculum {
  public:
    Curriculum(const CurriculumConfig& config, int start_level);

    int level() const { return level_; }
    double window_rate() const;
    // Push one episode outcome; transitions only fire on a full window and
    // clear it.
    void record(bool success);

  private:
    CurriculumConfig config_;
    int level_;
    std::deque<bool> window_;
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;  // R_t = A_t + V(s_t)
};

// Backward recursion delta_t = r_t + gamma*V(s_{t+1}) - V(s_t),
// A_t = delta_t + gamma*lambda*A_{t+1}. `value_bootstrap` stands in for
// V(s_T) after the last step; terminal steps use a zero bootstrap.
GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      double value_bootstrap, const std::vector<std::uint8_t>& dones,
                      double gamma, double lambda);

struct PretrainConfig {
    int epochs = 10;
    int batch_size = 256;
    double value_coef = 0.5;
    std::uint64_t seed = 0;
};

struct PretrainMetrics {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_accuracy;  // top-1 next-action accuracy
};

// Supervised example: an intermediate state along a board-optimal
// construction, labelled with the next reference action and the
// return-to-go under the environment reward.
struct PretrainExample {
    std::vector<double> input;
    std::vector<std::uint8_t> mask;
    int action = 0;
    double value_target = 0.0;
};

std::vector<PretrainExample> build_pretrain_dataset(const EnvConfig& env_config,
                                                    const GameBoard& board,
                                                    const std::vector<int>& target_nodes,
                                                    std::mt19937_64& rng);

PretrainMetrics pretrain_supervised(Evaluator& evaluator, Adam& adam,
                                    const std::vector<PretrainExample>& dataset,
                                    const PretrainConfig& config);

struct PpoConfig {
    double gamma = 0.99;
    double lambda = 0.95;
    double eps_clip = 0.2;
    double c_v = 0.5;
    double c_e = 0.01;
    int epochs = 4;
    int minibatch = 256;
    bool normalize_advantages = true;
};

struct PpoMetrics {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

// Batch entries carry precomputed advantages/returns aligned with steps.
struct PpoBatch {
    std::vector<const EpisodeStep*> steps;
    std::vector<double> advantages;
    std::vector<double> returns;
};

PpoMetrics ppo_update(Evaluator& evaluator, Adam& adam, const PpoBatch& batch,
                      const PpoConfig& config, std::mt19937_64& rng);

// Regression probe for the ratio-denominator provenance: evaluates one PPO
// epoch with log_prob_old REPLACED by the MCTS visit distribution's
// log-probability while the policy itself is also read from those visit
// probabilities (parameters unchanged). Returns max |ratio - 1| and the
// L2 norm of the resulting policy-term gradient.
struct RatioProvenanceReport {
    double max_ratio_deviation = 0.0;
    double policy_grad_norm = 0.0;
};
RatioProvenanceReport ppo_ratio_provenance_probe(const Evaluator& evaluator,
                                                 const PpoBatch& batch,
                                                 const PpoConfig& config);

struct SacConfig {
    double gamma = 0.99;
    double alpha = 0.2;
    bool learnable_alpha = false;
    double entropy_target_scale = 0.6;  // target entropy = scale * ln(valid count)
    double alpha_lr = 3e-4;
    double lambda_mcts = 0.5;
    double tau_soft = 0.005;
    int batch_size = 256;
};

struct SacMetrics {
    double q_loss = 0.0;
    double pi_loss = 0.0;
    double ce_loss = 0.0;
    double alpha = 0.0;
};

// Soft value target over valid successor actions:
// V(s') = sum_a pi(a|s') * (min_i targetQ_i(s',a) - alpha * log pi(a|s')).
double soft_value_target(const std::vector<double>& policy, const std::vector<double>& log_policy,
                         const std::vector<double>& q1, const std::vector<double>& q2,
                         const std::vector<std::uint8_t>& mask, double alpha);

class SacTrainer {
  public:
    SacTrainer(Evaluator& evaluator, const SacConfig& config, double lr, double clip_norm);

    SacMetrics update(const std::vector<const EpisodeStep*>& batch);
    const Params& target_params() const { return target_.params(); }
    double alpha() const { return alpha_; }

  private:
    Evaluator& evaluator_;
    SacConfig config_;
    Adam adam_;
    Evaluator target_;  // full target copy, trunk included
    double alpha_;
    double log_alpha_;
};

enum class CollectMode { Ppo, Sac };

struct CollectConfig {
    CollectMode mode = CollectMode::Ppo;
    int episodes = 8;
    bool use_mcts = true;
    int temperature_step = 0;  // index fed into the temperature schedule
    MctsConfig mcts;
};

struct CollectStats {
    int successes = 0;
    double total_reward = 0.0;
    int total_steps = 0;
};

// Samples one action from a masked policy distribution.
int sample_categorical(const std::vector<double>& probs, std::mt19937_64& rng);

// Runs episodes against targets drawn uniformly from `allowed_targets`,
// recording log_prob_old from the NETWORK policy for the executed action
// even when the action came from search.
std::vector<Episode> collect_episodes(const EnvConfig& env_config, const GameBoard& board,
                                      const Evaluator& evaluator, const CollectConfig& config,
                                      const std::vector<int>& allowed_targets,
                                      std::mt19937_64& rng, CollectStats* stats = nullptr);

}  // namespace circuitrl
