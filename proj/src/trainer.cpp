#include "circuitrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace circuitrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
    ring_.reserve(capacity);
}

void ReplayBuffer::push(EpisodeStep step) {
    if (size_ < capacity_) {
        ring_.push_back(std::move(step));
        ++size_;
    } else {
        ring_[next_] = std::move(step);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<const EpisodeStep*> ReplayBuffer::sample(std::size_t batch,
                                                     std::mt19937_64& rng) const {
    if (batch > size_) throw SamplingError("replay batch larger than buffer contents");
    std::vector<std::size_t> idx(size_);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: uniform without replacement within the batch.
    std::vector<const EpisodeStep*> out;
    out.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, size_ - 1);
        std::swap(idx[k], idx[pick(rng)]);
        out.push_back(&ring_[idx[k]]);
    }
    return out;
}

Curriculum::Curriculum(const CurriculumConfig& config, int start_level)
    : config_(config), level_(start_level) {
    if (config.window <= 0) throw ConfigError("curriculum window must be positive");
    if (config.min_level > config.max_level) throw ConfigError("curriculum level range empty");
    if (level_ < config.min_level || level_ > config.max_level) {
        throw ConfigError("curriculum start level outside range");
    }
}

double Curriculum::window_rate() const {
    if (window_.empty()) return 0.0;
    return static_cast<double>(std::count(window_.begin(), window_.end(), true)) / window_.size();
}

void Curriculum::record(bool success) {
    window_.push_back(success);
    if (static_cast<int>(window_.size()) < config_.window) return;
    double rate = window_rate();
    if (rate >= config_.promote && level_ < config_.max_level) {
        ++level_;
        window_.clear();
    } else if (config_.allow_demotion && rate <= config_.demote && level_ > config_.min_level) {
        --level_;
        window_.clear();
    } else {
        window_.pop_front();  // sliding window
    }
}

GaeResult compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                      double value_bootstrap, const std::vector<std::uint8_t>& dones,
                      double gamma, double lambda) {
    if (gamma < 0.0 || gamma > 1.0 || lambda < 0.0 || lambda > 1.0) {
        throw ConfigError("gamma and lambda must lie in [0, 1]");
    }
    if (rewards.size() != values.size() || rewards.size() != dones.size()) {
        throw DataError("misaligned episode arrays in advantage estimation");
    }
    const std::size_t n = rewards.size();
    GaeResult r;
    r.advantages.assign(n, 0.0);
    r.returns.assign(n, 0.0);
    double next_adv = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        double next_value = dones[t] ? 0.0 : (t + 1 < n ? values[t + 1] : value_bootstrap);
        double delta = rewards[t] + gamma * next_value - values[t];
        next_adv = delta + (dones[t] ? 0.0 : gamma * lambda * next_adv);
        r.advantages[t] = next_adv;
        r.returns[t] = next_adv + values[t];
    }
    return r;
}

std::vector<PretrainExample> build_pretrain_dataset(const EnvConfig& env_config,
                                                    const GameBoard& board,
                                                    const std::vector<int>& target_nodes,
                                                    std::mt19937_64& rng) {
    if (target_nodes.empty()) throw DataError("no target nodes for pretraining dataset");
    std::vector<PretrainExample> dataset;
    for (int target : target_nodes) {
        EnvState state = env_reset(env_config, board, target, rng);
        std::vector<PretrainExample> traj;
        std::vector<double> rewards;
        for (const Action& a : state.reference_actions) {
            PretrainExample ex;
            ex.input = evaluator_input(env_config, state);
            ex.mask = action_mask(env_config, state);
            ex.action = action_to_index(a, env_config.max_nodes());
            rewards.push_back(env_step(env_config, state, ex.action));
            traj.push_back(std::move(ex));
        }
        if (!state.success) throw DataError("reference sequence failed to reach its target");
        double to_go = 0.0;
        for (std::size_t t = traj.size(); t-- > 0;) {
            to_go += rewards[t];
            traj[t].value_target = to_go;
        }
        for (auto& ex : traj) dataset.push_back(std::move(ex));
    }
    return dataset;
}

PretrainMetrics pretrain_supervised(Evaluator& evaluator, Adam& adam,
                                    const std::vector<PretrainExample>& dataset,
                                    const PretrainConfig& config) {
    if (dataset.empty()) throw DataError("empty pretraining dataset");
    std::mt19937_64 rng(config.seed);
    PretrainMetrics metrics;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    const int A = evaluator.config().action_count;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        int correct = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t stop = std::min(order.size(), start + config.batch_size);
            double inv = 1.0 / static_cast<double>(stop - start);
            Params grad = evaluator.params();
            grad.set_zero();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& ex = dataset[order[k]];
                auto cache = evaluator.forward_cached(ex.input, ex.mask);
                const auto& out = cache.out;
                loss_sum += -out.log_policy[ex.action] +
                            config.value_coef * (out.value - ex.value_target) *
                                (out.value - ex.value_target);
                int argmax = 0;
                for (int a = 1; a < A; ++a) {
                    if (out.logits[a] > out.logits[argmax]) argmax = a;
                }
                if (argmax == ex.action) ++correct;
                HeadGrads heads;
                heads.dlogits.assign(A, 0.0);
                for (int a = 0; a < A; ++a) {
                    if (!ex.mask[a]) continue;
                    heads.dlogits[a] = inv * (out.policy[a] - (a == ex.action ? 1.0 : 0.0));
                }
                heads.dvalue = inv * 2.0 * config.value_coef * (out.value - ex.value_target);
                evaluator.backward(cache, heads, grad);
            }
            adam.step(evaluator.params(), std::move(grad));
        }
        metrics.epoch_loss.push_back(loss_sum / dataset.size());
        metrics.epoch_accuracy.push_back(static_cast<double>(correct) / dataset.size());
    }
    return metrics;
}

PpoMetrics ppo_update(Evaluator& evaluator, Adam& adam, const PpoBatch& batch,
                      const PpoConfig& config, std::mt19937_64& rng) {
    const std::size_t n = batch.steps.size();
    if (n == 0 || batch.advantages.size() != n || batch.returns.size() != n) {
        throw DataError("misaligned batch in policy-gradient update");
    }
    std::vector<double> adv = batch.advantages;
    if (config.normalize_advantages) {
        double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
        double var = 0.0;
        for (double a : adv) var += (a - mean) * (a - mean);
        double sd = std::sqrt(var / n) + 1e-8;
        for (double& a : adv) a = (a - mean) / sd;
    }
    const int A = evaluator.config().action_count;
    PpoMetrics metrics;
    long metric_count = 0, clipped = 0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.minibatch)) {
            std::size_t stop = std::min(n, start + config.minibatch);
            double inv = 1.0 / static_cast<double>(stop - start);
            Params grad = evaluator.params();
            grad.set_zero();
            for (std::size_t k = start; k < stop; ++k) {
                std::size_t i = order[k];
                const EpisodeStep& step = *batch.steps[i];
                auto cache = evaluator.forward_cached(step.input, step.mask);
                const auto& out = cache.out;
                double logp = out.log_policy[step.action];
                double ratio = std::exp(logp - step.log_prob_old);
                if (!std::isfinite(ratio)) throw NumericError("non-finite importance ratio");
                double a_hat = adv[i];
                double unclipped = ratio * a_hat;
                double clip_r = std::clamp(ratio, 1.0 - config.eps_clip, 1.0 + config.eps_clip);
                double surrogate = std::min(unclipped, clip_r * a_hat);
                double entropy = out.entropy();
                double value_err = out.value - batch.returns[i];
                metrics.policy_loss += -surrogate;
                metrics.value_loss += config.c_v * value_err * value_err;
                metrics.entropy += entropy;
                if (std::abs(ratio - 1.0) > config.eps_clip) ++clipped;
                ++metric_count;

                // d(-min)/dlogp: active only when the unclipped branch attains
                // the min (the clipped branch is locally constant otherwise).
                double dlogp = unclipped <= clip_r * a_hat ? -a_hat * ratio : 0.0;
                HeadGrads heads;
                heads.dlogits.assign(A, 0.0);
                for (int a = 0; a < A; ++a) {
                    if (!step.mask[a]) continue;
                    double d = dlogp * ((a == step.action ? 1.0 : 0.0) - out.policy[a]);
                    // entropy bonus -c_e * H
                    d += config.c_e * out.policy[a] * (out.log_policy[a] + entropy);
                    heads.dlogits[a] = inv * d;
                }
                heads.dvalue = inv * 2.0 * config.c_v * value_err;
                evaluator.backward(cache, heads, grad);
            }
            adam.step(evaluator.params(), std::move(grad));
        }
    }
    metrics.policy_loss /= metric_count;
    metrics.value_loss /= metric_count;
    metrics.entropy /= metric_count;
    metrics.clip_fraction = static_cast<double>(clipped) / metric_count;
    return metrics;
}

RatioProvenanceReport ppo_ratio_provenance_probe(const Evaluator& evaluator,
                                                 const PpoBatch& batch,
                                                 const PpoConfig& config) {
    (void)config;
    RatioProvenanceReport report;
    Params grad = evaluator.params();
    grad.set_zero();
    for (std::size_t i = 0; i < batch.steps.size(); ++i) {
        const EpisodeStep& step = *batch.steps[i];
        if (!step.mcts_available) continue;
        double p = step.mcts_visits[step.action];
        if (p <= 0.0) throw DataError("executed action has zero search visit probability");
        // Both the "old" and "current" probabilities come from the visit
        // distribution, which does not depend on the network parameters:
        // the ratio is exp(log p - log p) = 1 and d ratio / d theta = 0,
        // so nothing is ever backpropagated into `grad`.
        double ratio = std::exp(std::log(p) - std::log(p));
        report.max_ratio_deviation = std::max(report.max_ratio_deviation, std::abs(ratio - 1.0));
    }
    double norm2 = 0.0;
    for (const Tensor* t : grad.all()) {
        for (double v : t->v) norm2 += v * v;
    }
    report.policy_grad_norm = std::sqrt(norm2);
    return report;
}

double soft_value_target(const std::vector<double>& policy, const std::vector<double>& log_policy,
                         const std::vector<double>& q1, const std::vector<double>& q2,
                         const std::vector<std::uint8_t>& mask, double alpha) {
    double v = 0.0;
    bool any = false;
    for (std::size_t a = 0; a < mask.size(); ++a) {
        if (!mask[a]) continue;
        any = true;
        v += policy[a] * (std::min(q1[a], q2[a]) - alpha * log_policy[a]);
    }
    if (!any) throw DataError("soft value target over an empty action set");
    return v;
}

SacTrainer::SacTrainer(Evaluator& evaluator, const SacConfig& config, double lr, double clip_norm)
    : evaluator_(evaluator),
      config_(config),
      adam_(lr, clip_norm),
      target_(evaluator),
      alpha_(config.alpha),
      log_alpha_(std::log(config.alpha)) {
    if (config.alpha <= 0.0) throw ConfigError("entropy temperature must be positive");
}

SacMetrics SacTrainer::update(const std::vector<const EpisodeStep*>& batch) {
    if (batch.empty()) throw DataError("empty batch in soft actor-critic update");
    const int A = evaluator_.config().action_count;
    const double inv = 1.0 / static_cast<double>(batch.size());
    Params grad = evaluator_.params();
    grad.set_zero();
    SacMetrics metrics;
    double entropy_err_sum = 0.0;
    for (const EpisodeStep* step : batch) {
        double y = step->reward;
        if (!step->done) {
            bool any_next = std::any_of(step->next_mask.begin(), step->next_mask.end(),
                                        [](std::uint8_t m) { return m != 0; });
            if (!any_next) throw DataError("non-terminal transition with no valid successor action");
            auto next_online = evaluator_.forward(step->next_input, step->next_mask);
            auto next_target = target_.forward(step->next_input, step->next_mask);
            y += config_.gamma * soft_value_target(next_online.policy, next_online.log_policy,
                                                   next_target.q1, next_target.q2,
                                                   step->next_mask, alpha_);
        }
        auto cache = evaluator_.forward_cached(step->input, step->mask);
        const auto& out = cache.out;

        HeadGrads heads;
        heads.dq1.assign(A, 0.0);
        heads.dq2.assign(A, 0.0);
        double e1 = out.q1[step->action] - y;
        double e2 = out.q2[step->action] - y;
        metrics.q_loss += e1 * e1 + e2 * e2;
        heads.dq1[step->action] = inv * 2.0 * e1;
        heads.dq2[step->action] = inv * 2.0 * e2;

        // L_pi = sum_a pi(a) * (alpha*log pi(a) - min_i Q_i(a)), Q detached.
        double expectation = 0.0;
        std::vector<double> f(A, 0.0);
        for (int a = 0; a < A; ++a) {
            if (!step->mask[a]) continue;
            f[a] = alpha_ * out.log_policy[a] - std::min(out.q1[a], out.q2[a]);
            expectation += out.policy[a] * f[a];
        }
        metrics.pi_loss += expectation;
        heads.dlogits.assign(A, 0.0);
        for (int a = 0; a < A; ++a) {
            if (!step->mask[a]) continue;
            heads.dlogits[a] = inv * out.policy[a] * (f[a] - expectation);
        }

        if (step->mcts_available && config_.lambda_mcts > 0.0) {
            double ce = 0.0;
            for (int a = 0; a < A; ++a) {
                if (!step->mask[a] || step->mcts_visits[a] <= 0.0) continue;
                ce -= step->mcts_visits[a] * out.log_policy[a];
            }
            metrics.ce_loss += ce;
            for (int a = 0; a < A; ++a) {
                if (!step->mask[a]) continue;
                heads.dlogits[a] +=
                    inv * config_.lambda_mcts * (out.policy[a] - step->mcts_visits[a]);
            }
        }
        evaluator_.backward(cache, heads, grad);

        if (config_.learnable_alpha) {
            int valid = static_cast<int>(
                std::count(step->mask.begin(), step->mask.end(), std::uint8_t{1}));
            double target_entropy = config_.entropy_target_scale * std::log(std::max(valid, 2));
            entropy_err_sum += out.log_policy[step->action] + target_entropy;
        }
    }
    adam_.step(evaluator_.params(), std::move(grad));
    polyak_update(target_.params(), evaluator_.params(), config_.tau_soft);
    if (config_.learnable_alpha) {
        // d/dlog_alpha of E[-alpha (log pi(a) + H_target)]
        log_alpha_ += config_.alpha_lr * alpha_ * entropy_err_sum * inv;
        alpha_ = std::exp(log_alpha_);
    }
    metrics.q_loss *= inv;
    metrics.pi_loss *= inv;
    metrics.ce_loss *= inv;
    metrics.alpha = alpha_;
    return metrics;
}

int sample_categorical(const std::vector<double>& probs, std::mt19937_64& rng) {
    double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (total <= 0.0) throw SamplingError("categorical sampling over zero mass");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng) * total;
    double acc = 0.0;
    int last = -1;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        if (probs[a] <= 0.0) continue;
        acc += probs[a];
        last = static_cast<int>(a);
        if (u < acc) return last;
    }
    if (last < 0) throw SamplingError("categorical sampling over zero mass");
    return last;
}

std::vector<Episode> collect_episodes(const EnvConfig& env_config, const GameBoard& board,
                                      const Evaluator& evaluator, const CollectConfig& config,
                                      const std::vector<int>& allowed_targets,
                                      std::mt19937_64& rng, CollectStats* stats) {
    if (allowed_targets.empty()) throw DataError("no targets available for episode collection");
    std::vector<Episode> episodes;
    episodes.reserve(config.episodes);
    const double tau = temperature(config.temperature_step, config.mcts);
    for (int e = 0; e < config.episodes; ++e) {
        std::uniform_int_distribution<std::size_t> pick(0, allowed_targets.size() - 1);
        Episode ep;
        ep.target_node = allowed_targets[pick(rng)];
        EnvState state = env_reset(env_config, board, ep.target_node, rng);
        std::optional<SearchTree> tree;
        if (config.use_mcts) tree.emplace(env_config, state);
        while (!state.done) {
            EpisodeStep step;
            step.input = evaluator_input(env_config, state);
            step.mask = action_mask(env_config, state);
            auto out = evaluator.forward(step.input, step.mask);
            int policy_action = sample_categorical(out.policy, rng);
            int action = policy_action;
            if (config.use_mcts) {
                std::vector<int> visits = tree->search(evaluator, config.mcts);
                if (config.mcts.p_mix > 0.0) {
                    // Skipped entirely at p_mix = 0 so the rng stream (and
                    // therefore the trajectory) matches pure policy sampling.
                    int mcts_action = select_with_temperature(visits, tau, rng);
                    action = mix_action(policy_action, mcts_action, config.mcts.p_mix, rng);
                }
                long total = std::accumulate(visits.begin(), visits.end(), 0L);
                step.mcts_visits.assign(visits.size(), 0.0);
                for (std::size_t a = 0; a < visits.size(); ++a) {
                    step.mcts_visits[a] = static_cast<double>(visits[a]) / total;
                }
                step.mcts_available = true;
            }
            if (!step.mask[action]) throw SearchError("selected action is masked");
            step.action = action;
            step.log_prob_old = out.log_policy[action];
            step.value_old = out.value;
            step.reward = env_step(env_config, state, action);
            step.done = state.done;
            step.next_input = evaluator_input(env_config, state);
            step.next_mask = action_mask(env_config, state);
            if (config.use_mcts) tree->advance(action, env_config);
            ep.total_reward += step.reward;
            ep.steps.push_back(std::move(step));
        }
        ep.success = state.success;
        if (stats) {
            stats->successes += ep.success ? 1 : 0;
            stats->total_reward += ep.total_reward;
            stats->total_steps += static_cast<int>(ep.steps.size());
        }
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

}  // namespace circuitrl
