#include "circuitrl/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

namespace circuitrl {

void Params::set_zero() {
    for (Tensor* t : all()) std::fill(t->v.begin(), t->v.end(), 0.0);
}

bool Params::finite() const {
    for (const Tensor* t : all()) {
        for (double x : t->v) {
            if (!std::isfinite(x)) return false;
        }
    }
    return true;
}

double EvaluatorOutput::entropy() const {
    double h = 0.0;
    for (std::size_t i = 0; i < policy.size(); ++i) {
        if (policy[i] > 0.0) h -= policy[i] * log_policy[i];
    }
    return h;
}

EvaluatorConfig EvaluatorConfig::from_env(const EnvConfig& env, int hidden, std::uint64_t seed) {
    EvaluatorConfig c;
    c.input_dim = evaluator_input_dim(env);
    c.hidden = hidden;
    c.action_count = env.action_count();
    c.seed = seed;
    return c;
}

int evaluator_input_dim(const EnvConfig& config) {
    return config.max_nodes() * 4 + config.max_nodes() * 3 + target_encoding_size(config);
}

std::vector<double> evaluator_input(const EnvConfig& config, const EnvState& state) {
    const int max_nodes = config.max_nodes();
    StateEncoding enc = encode_state(config, state);
    std::vector<double> target = encode_target(config, state);

    std::vector<double> input;
    input.reserve(evaluator_input_dim(config));
    input.insert(input.end(), enc.node_features.begin(), enc.node_features.end());

    std::vector<double> summary(static_cast<std::size_t>(max_nodes) * 3, 0.0);
    std::vector<int> indeg(max_nodes, 0);
    for (const auto& [u, v] : enc.edges) {
        if (u == v) continue;  // self-loop
        double* row = &summary[static_cast<std::size_t>(v) * 3];
        if (indeg[v] == 0) {
            row[1] = static_cast<double>(u + 1) / max_nodes;
        } else {
            row[2] = static_cast<double>(u + 1) / max_nodes;
        }
        ++indeg[v];
    }
    for (int i = 0; i < max_nodes; ++i) summary[static_cast<std::size_t>(i) * 3] = indeg[i] / 2.0;
    input.insert(input.end(), summary.begin(), summary.end());
    input.insert(input.end(), target.begin(), target.end());
    return input;
}

namespace {

void init_uniform(Tensor& t, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (double& x : t.v) x = dist(rng);
}

// y = W x + b
void affine(const Tensor& w, const Tensor& b, const std::vector<double>& x, std::vector<double>& y) {
    y.assign(w.rows, 0.0);
    for (int r = 0; r < w.rows; ++r) {
        const double* wr = &w.v[static_cast<std::size_t>(r) * w.cols];
        double acc = b.v[r];
        for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

// grad_w += outer(dy, x); grad_b += dy; dx += W^T dy
void backprop_affine(const Tensor& w, const std::vector<double>& x, const std::vector<double>& dy,
                     Tensor& grad_w, Tensor& grad_b, std::vector<double>* dx) {
    for (int r = 0; r < w.rows; ++r) {
        const double g = dy[r];
        if (g == 0.0) continue;
        double* gw = &grad_w.v[static_cast<std::size_t>(r) * w.cols];
        const double* wr = &w.v[static_cast<std::size_t>(r) * w.cols];
        grad_b.v[r] += g;
        for (int c = 0; c < w.cols; ++c) {
            gw[c] += g * x[c];
            if (dx) (*dx)[c] += g * wr[c];
        }
    }
}

}  // namespace

Evaluator::Evaluator(const EvaluatorConfig& config) : config_(config) {
    if (config.input_dim < 1 || config.hidden < 1 || config.action_count < 1) {
        throw ConfigError("evaluator dimensions must be positive");
    }
    const int d = config.input_dim, h = config.hidden, a = config.action_count;
    params_.w0 = Tensor(h, d);
    params_.b0 = Tensor(h, 1);
    params_.w1 = Tensor(h, h);
    params_.b1 = Tensor(h, 1);
    params_.wp = Tensor(a, h);  // zero: uniform initial policy over valid actions
    params_.bp = Tensor(a, 1);
    params_.wv = Tensor(1, h);  // zero
    params_.bv = Tensor(1, 1);
    params_.wq1 = Tensor(a, h);
    params_.bq1 = Tensor(a, 1);
    params_.wq2 = Tensor(a, h);
    params_.bq2 = Tensor(a, 1);

    std::mt19937_64 rng(config.seed);
    init_uniform(params_.w0, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    init_uniform(params_.w1, 1.0 / std::sqrt(static_cast<double>(h)), rng);
    // Twin heads draw from independent streams so they break symmetry.
    std::mt19937_64 rng_q1(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::mt19937_64 rng_q2(config.seed ^ 0xc2b2ae3d27d4eb4fULL);
    init_uniform(params_.wq1, 1.0 / std::sqrt(static_cast<double>(h)), rng_q1);
    init_uniform(params_.wq2, 1.0 / std::sqrt(static_cast<double>(h)), rng_q2);
}

EvaluatorOutput Evaluator::head_outputs(const Params& params, const Cache& cache) {
    EvaluatorOutput out;
    std::vector<double> raw;
    affine(params.wp, params.bp, cache.h1, raw);
    const std::vector<std::uint8_t>& mask = cache.mask;
    const int a = static_cast<int>(raw.size());
    out.logits.assign(a, kMaskedLogit);
    out.policy.assign(a, 0.0);
    out.log_policy.assign(a, kMaskedLogit);

    double max_logit = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < a; ++i) {
        if (!mask[i]) continue;
        if (!std::isfinite(raw[i])) throw NumericError("non-finite policy logit");
        out.logits[i] = raw[i];
        max_logit = std::max(max_logit, raw[i]);
    }
    double z = 0.0;
    for (int i = 0; i < a; ++i) {
        if (mask[i]) z += std::exp(raw[i] - max_logit);
    }
    const double log_z = std::log(z) + max_logit;
    for (int i = 0; i < a; ++i) {
        if (!mask[i]) continue;
        out.log_policy[i] = raw[i] - log_z;
        out.policy[i] = std::exp(out.log_policy[i]);
    }

    std::vector<double> v;
    affine(params.wv, params.bv, cache.h1, v);
    out.value = v[0];
    affine(params.wq1, params.bq1, cache.h1, out.q1);
    affine(params.wq2, params.bq2, cache.h1, out.q2);
    return out;
}

Evaluator::Cache Evaluator::forward_cached(const std::vector<double>& input,
                                           const std::vector<std::uint8_t>& mask) const {
    if (static_cast<int>(input.size()) != config_.input_dim) {
        throw ConfigError("evaluator input dimension mismatch");
    }
    if (static_cast<int>(mask.size()) != config_.action_count) {
        throw ConfigError("evaluator mask dimension mismatch");
    }
    for (double x : input) {
        if (!std::isfinite(x)) throw NumericError("non-finite evaluator input");
    }
    Cache cache;
    cache.input = input;
    cache.mask = mask;
    affine(params_.w0, params_.b0, input, cache.h0);
    for (double& x : cache.h0) x = std::max(x, 0.0);
    affine(params_.w1, params_.b1, cache.h0, cache.h1);
    for (double& x : cache.h1) x = std::max(x, 0.0);
    bool any_valid = std::any_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
    if (!any_valid) throw DomainError("evaluator forward with an all-masked action set");
    cache.out = head_outputs(params_, cache);
    return cache;
}

EvaluatorOutput Evaluator::forward(const std::vector<double>& input,
                                   const std::vector<std::uint8_t>& mask) const {
    return forward_cached(input, mask).out;
}

void Evaluator::backward(const Cache& cache, const HeadGrads& heads, Params& grad) const {
    const int h = config_.hidden;
    std::vector<double> dh1(h, 0.0);
    if (!heads.dlogits.empty()) {
        backprop_affine(params_.wp, cache.h1, heads.dlogits, grad.wp, grad.bp, &dh1);
    }
    if (heads.dvalue != 0.0) {
        backprop_affine(params_.wv, cache.h1, {heads.dvalue}, grad.wv, grad.bv, &dh1);
    }
    if (!heads.dq1.empty()) {
        backprop_affine(params_.wq1, cache.h1, heads.dq1, grad.wq1, grad.bq1, &dh1);
    }
    if (!heads.dq2.empty()) {
        backprop_affine(params_.wq2, cache.h1, heads.dq2, grad.wq2, grad.bq2, &dh1);
    }
    for (int i = 0; i < h; ++i) {
        if (cache.h1[i] <= 0.0) dh1[i] = 0.0;
    }
    std::vector<double> dh0(h, 0.0);
    backprop_affine(params_.w1, cache.h0, dh1, grad.w1, grad.b1, &dh0);
    for (int i = 0; i < h; ++i) {
        if (cache.h0[i] <= 0.0) dh0[i] = 0.0;
    }
    backprop_affine(params_.w0, cache.input, dh0, grad.w0, grad.b0, nullptr);
}

void polyak_update(Params& target, const Params& online, double tau_soft) {
    if (tau_soft <= 0.0 || tau_soft > 1.0) throw ConfigError("tau_soft must be in (0, 1]");
    auto t = target.all();
    auto o = online.all();
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k]->rows != o[k]->rows || t[k]->cols != o[k]->cols) {
            throw ConfigError("polyak update on mismatched parameter shapes");
        }
        for (std::size_t i = 0; i < t[k]->v.size(); ++i) {
            t[k]->v[i] = (1.0 - tau_soft) * t[k]->v[i] + tau_soft * o[k]->v[i];
        }
    }
}

void Adam::step(Params& params, Params grad) {
    if (!initialized_) {
        m_ = grad;
        v_ = grad;
        m_.set_zero();
        v_.set_zero();
        initialized_ = true;
    }
    double norm_sq = 0.0;
    for (const Tensor* t : grad.all()) {
        for (double g : t->v) norm_sq += g * g;
    }
    if (!std::isfinite(norm_sq)) throw NumericError("non-finite gradient");
    const double norm = std::sqrt(norm_sq);
    const double scale = (clip_norm_ > 0.0 && norm > clip_norm_) ? clip_norm_ / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto p = params.all();
    auto g = grad.all();
    auto m = m_.all();
    auto v = v_.all();
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t i = 0; i < p[k]->v.size(); ++i) {
            const double gi = g[k]->v[i] * scale;
            m[k]->v[i] = beta1_ * m[k]->v[i] + (1.0 - beta1_) * gi;
            v[k]->v[i] = beta2_ * v[k]->v[i] + (1.0 - beta2_) * gi * gi;
            p[k]->v[i] -= lr_ * (m[k]->v[i] / bc1) / (std::sqrt(v[k]->v[i] / bc2) + eps_);
        }
    }
    if (!params.finite()) throw NumericError("non-finite parameter after update");
}

namespace {
constexpr char kMagic[8] = {'C', 'R', 'L', 'C', 'K', 'P', 'T', '1'};
}

void Evaluator::save_params(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    std::int32_t dims[3] = {config_.input_dim, config_.hidden, config_.action_count};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    os.write(reinterpret_cast<const char*>(&config_.seed), sizeof(config_.seed));
    for (const Tensor* t : params_.all()) {
        std::int32_t shape[2] = {t->rows, t->cols};
        os.write(reinterpret_cast<const char*>(shape), sizeof(shape));
        os.write(reinterpret_cast<const char*>(t->v.data()),
                 static_cast<std::streamsize>(t->v.size() * sizeof(double)));
    }
    if (!os) throw CheckpointError("short write to checkpoint: " + path);
}

void Evaluator::load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw CheckpointError("bad checkpoint header: " + path);
    }
    std::int32_t dims[3];
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!is || dims[0] != config_.input_dim || dims[1] != config_.hidden ||
        dims[2] != config_.action_count) {
        throw CheckpointError("checkpoint dimensions incompatible with this configuration");
    }
    std::uint64_t seed = 0;
    is.read(reinterpret_cast<char*>(&seed), sizeof(seed));
    Params loaded = params_;
    for (Tensor* t : loaded.all()) {
        std::int32_t shape[2];
        is.read(reinterpret_cast<char*>(shape), sizeof(shape));
        if (!is || shape[0] != t->rows || shape[1] != t->cols) {
            throw CheckpointError("checkpoint tensor shape mismatch");
        }
        is.read(reinterpret_cast<char*>(t->v.data()),
                static_cast<std::streamsize>(t->v.size() * sizeof(double)));
        if (!is) throw CheckpointError("truncated checkpoint: " + path);
    }
    config_.seed = seed;
    params_ = std::move(loaded);  // no partial load on failure
}

}  // namespace circuitrl
