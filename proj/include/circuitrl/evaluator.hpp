#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "circuitrl/env.hpp"

namespace circuitrl {

struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

// Trunk (two hidden layers) plus policy, value, and twin Q heads.
struct Params {
    Tensor w0, b0, w1, b1, wp, bp, wv, bv, wq1, bq1, wq2, bq2;

    std::array<Tensor*, 12> all() { return {&w0, &b0, &w1, &b1, &wp, &bp, &wv, &bv, &wq1, &bq1, &wq2, &bq2}; }
    std::array<const Tensor*, 12> all() const {
        return {&w0, &b0, &w1, &b1, &wp, &bp, &wv, &bv, &wq1, &bq1, &wq2, &bq2};
    }
    void set_zero();
    bool finite() const;
};

struct EvaluatorConfig {
    int input_dim = 0;
    int hidden = 256;
    int action_count = 0;
    std::uint64_t seed = 0;

    static EvaluatorConfig from_env(const EnvConfig& env, int hidden, std::uint64_t seed);
};

constexpr double kMaskedLogit = -1e9;

struct EvaluatorOutput {
    std::vector<double> logits;      // masked entries pinned to kMaskedLogit
    std::vector<double> policy;      // exactly 0 on masked entries
    std::vector<double> log_policy;  // kMaskedLogit on masked entries
    double value = 0.0;
    std::vector<double> q1, q2;

    double entropy() const;
};

// Per-loss gradients flowing into each head; empty vectors mean zero.
struct HeadGrads {
    std::vector<double> dlogits;
    double dvalue = 0.0;
    std::vector<double> dq1, dq2;
};

class Evaluator {
  public:
    explicit Evaluator(const EvaluatorConfig& config);

    const EvaluatorConfig& config() const { return config_; }
    Params& params() { return params_; }
    const Params& params() const { return params_; }

    struct Cache {
        std::vector<double> input, h0, h1;
        std::vector<std::uint8_t> mask;
        EvaluatorOutput out;
    };

    EvaluatorOutput forward(const std::vector<double>& input,
                            const std::vector<std::uint8_t>& mask) const;
    Cache forward_cached(const std::vector<double>& input,
                         const std::vector<std::uint8_t>& mask) const;
    static EvaluatorOutput head_outputs(const Params& params, const Cache& trunk_cache);

    // Accumulates the exact gradient of a scalar loss into grad, given the
    // loss gradient with respect to each head output.
    void backward(const Cache& cache, const HeadGrads& heads, Params& grad) const;

    void save_params(const std::string& path) const;
    void load_params(const std::string& path);

  private:
    EvaluatorConfig config_;
    Params params_;
};

// Flattened evaluator input: node features, per-node operand summary
// (in-degree and normalized operand indices), target encoding.
std::vector<double> evaluator_input(const EnvConfig& config, const EnvState& state);
int evaluator_input_dim(const EnvConfig& config);

void polyak_update(Params& target, const Params& online, double tau_soft);

// Adaptive-moment gradient descent with global-norm clipping.
class Adam {
  public:
    Adam(double lr, double clip_norm) : lr_(lr), clip_norm_(clip_norm) {}
    void step(Params& params, Params grad);

  private:
    double lr_;
    double clip_norm_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    Params m_, v_;
    bool initialized_ = false;
};

}  // namespace circuitrl
