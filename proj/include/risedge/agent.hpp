#pragma once

// PPO agent choosing compression levels and RIS phases: tanh MLP policy and
// value networks with hand-written backprop, a sigmoid-squashed diagonal
// Gaussian action distribution, GAE, and clipped-surrogate Adam updates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "risedge/accuracy.hpp"
#include "risedge/channel.hpp"
#include "risedge/numerics.hpp"

namespace risedge {

// ---------------------------------------------------------------------------
// Multilayer perceptron over a flat parameter vector

/// Layer sizes plus where the layer block starts inside a flat parameter
/// vector. Layer l stores an (out x in) row-major weight matrix then `out`
/// biases. Hidden layers use tanh, the last layer is linear.
struct MlpShape {
    std::vector<int> sizes;
    std::size_t offset = 0;

    std::size_t num_layers() const { return sizes.size() - 1; }
    int input_dim() const { return sizes.front(); }
    int output_dim() const { return sizes.back(); }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
            n += static_cast<std::size_t>(sizes[l]) * sizes[l + 1] + sizes[l + 1];
        return n;
    }
};

struct MlpCache {
    std::vector<std::vector<double>> acts;  // acts[0] is the input, acts.back() the output
};

inline void mlp_forward(const MlpShape& shape, std::span<const double> theta, std::span<const double> x,
                        MlpCache& cache) {
    const std::size_t layers = shape.num_layers();
    cache.acts.resize(layers + 1);
    cache.acts[0].assign(x.begin(), x.end());
    std::size_t off = shape.offset;
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = shape.sizes[l];
        const int out = shape.sizes[l + 1];
        const double* w = theta.data() + off;
        const double* b = w + static_cast<std::size_t>(in) * out;
        const auto& a = cache.acts[l];
        auto& z = cache.acts[l + 1];
        z.resize(out);
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* row = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += row[i] * a[i];
            z[o] = (l + 1 < layers) ? std::tanh(s) : s;
        }
        off += static_cast<std::size_t>(in) * out + out;
    }
}

/// Accumulates d(loss)/d(theta) into grad given d(loss)/d(output).
inline void mlp_backward(const MlpShape& shape, std::span<const double> theta, const MlpCache& cache,
                         std::span<const double> dout, std::span<double> grad) {
    const std::size_t layers = shape.num_layers();
    std::vector<std::size_t> offs(layers);
    std::size_t off = shape.offset;
    for (std::size_t l = 0; l < layers; ++l) {
        offs[l] = off;
        off += static_cast<std::size_t>(shape.sizes[l]) * shape.sizes[l + 1] + shape.sizes[l + 1];
    }
    std::vector<double> delta(dout.begin(), dout.end());
    std::vector<double> prev;
    for (std::size_t l = layers; l-- > 0;) {
        const int in = shape.sizes[l];
        const int out = shape.sizes[l + 1];
        const double* w = theta.data() + offs[l];
        double* gw = grad.data() + offs[l];
        double* gb = gw + static_cast<std::size_t>(in) * out;
        const auto& a = cache.acts[l];
        if (l + 1 < layers) {
            const auto& z = cache.acts[l + 1];
            for (int o = 0; o < out; ++o) delta[o] *= 1.0 - z[o] * z[o];
        }
        for (int o = 0; o < out; ++o) {
            gb[o] += delta[o];
            double* grow = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) grow[i] += delta[o] * a[i];
        }
        if (l > 0) {
            prev.assign(in, 0.0);
            for (int o = 0; o < out; ++o) {
                const double* row = w + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) prev[i] += row[i] * delta[o];
            }
            delta.swap(prev);
        }
    }
}

inline void mlp_init(const MlpShape& shape, std::span<double> theta, double output_gain, Rng& rng) {
    std::size_t off = shape.offset;
    const std::size_t layers = shape.num_layers();
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = shape.sizes[l];
        const int out = shape.sizes[l + 1];
        const double gain = (l + 1 < layers) ? std::sqrt(2.0) : output_gain;
        std::normal_distribution<double> d(0.0, gain / std::sqrt(static_cast<double>(in)));
        for (std::size_t i = 0; i < static_cast<std::size_t>(in) * out; ++i) theta[off + i] = d(rng);
        off += static_cast<std::size_t>(in) * out;
        for (int o = 0; o < out; ++o) theta[off + o] = 0.0;
        off += out;
    }
}

// ---------------------------------------------------------------------------
// Agent parameters and optimizer state

struct PpoConfig {
    int hidden_layers = 5;
    int hidden_units = 32;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip_ratio = 0.2;
    double learning_rate = 3e-4;
    int epochs = 10;
    int minibatch = 64;
    double entropy_coef = 1e-3;
    double value_coef = 0.5;
    int horizon = 2048;
    double max_grad_norm = 0.5;
    double init_log_std = 0.0;
    bool normalize_advantages = true;
    bool normalize_rewards = true;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (hidden_layers < 1 || hidden_units < 1) throw std::invalid_argument("ppo: network shape must be positive");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo.gamma must lie in (0,1]");
        if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("ppo.gae_lambda must lie in (0,1]");
        if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) throw std::invalid_argument("ppo.clip_ratio must lie in (0,1)");
        if (!(learning_rate >= 0.0)) throw std::invalid_argument("ppo.learning_rate must be nonnegative");
        if (epochs < 1 || minibatch < 1 || horizon < 1)
            throw std::invalid_argument("ppo: epochs, minibatch and horizon must be positive");
        if (!(max_grad_norm > 0.0)) throw std::invalid_argument("ppo.max_grad_norm must be positive");
    }
};

/// Running mean / variance (Chan et al. parallel update).
struct RunningStat {
    double mean = 0.0;
    double var = 1.0;
    double count = 1e-4;

    void update(double x) {
        const double delta = x - mean;
        const double total = count + 1.0;
        mean += delta / total;
        const double m2 = var * count + delta * delta * count / total;
        var = m2 / total;
        count = total;
    }
};

struct AgentParams {
    PpoConfig cfg;
    MlpShape policy;
    MlpShape value;
    std::size_t log_std_offset = 0;
    std::vector<double> theta;
    // Adam moments over theta.
    std::vector<double> adam_m;
    std::vector<double> adam_v;
    std::int64_t adam_step = 0;
    // Scale of discounted returns, used to normalize rewards seen by PPO.
    RunningStat return_stat;
    double running_return = 0.0;
    std::int64_t grad_clip_events = 0;

    int obs_dim() const { return policy.input_dim(); }
    int act_dim() const { return policy.output_dim(); }

    std::span<const double> log_std() const {
        return std::span<const double>(theta).subspan(log_std_offset, static_cast<std::size_t>(act_dim()));
    }

    double reward_scale() const { return cfg.normalize_rewards ? std::sqrt(return_stat.var + 1e-8) : 1.0; }

    /// Tracks the discounted return of the reward stream; call once per step.
    void observe_reward(double r, bool episode_end) {
        if (!cfg.normalize_rewards) return;
        running_return = running_return * cfg.gamma + r;
        return_stat.update(running_return);
        if (episode_end) running_return = 0.0;
    }
};

inline AgentParams make_agent(int obs_dim, int act_dim, const PpoConfig& cfg, Rng& rng) {
    cfg.validate();
    AgentParams p;
    p.cfg = cfg;
    std::vector<int> sizes{obs_dim};
    for (int l = 0; l < cfg.hidden_layers; ++l) sizes.push_back(cfg.hidden_units);
    p.policy.sizes = sizes;
    p.policy.sizes.push_back(act_dim);
    p.policy.offset = 0;
    p.log_std_offset = p.policy.param_count();
    p.value.sizes = sizes;
    p.value.sizes.push_back(1);
    p.value.offset = p.log_std_offset + static_cast<std::size_t>(act_dim);
    p.theta.assign(p.value.offset + p.value.param_count(), 0.0);
    mlp_init(p.policy, p.theta, 0.01, rng);
    for (int j = 0; j < act_dim; ++j) p.theta[p.log_std_offset + j] = cfg.init_log_std;
    mlp_init(p.value, p.theta, 1.0, rng);
    p.adam_m.assign(p.theta.size(), 0.0);
    p.adam_v.assign(p.theta.size(), 0.0);
    return p;
}

// ---------------------------------------------------------------------------
// Observation and action mapping

/// Feature scaling applied before the network.
struct ObservationScales {
    double queue = 100.0;      // patterns
    double virtual_queue = 100.0;
    double f_max = 3.6e9;
    double gain_direct = 1.0;  // channels are divided by sqrt(gain)
    double gain_dev_ris = 1.0;
    double gain_ris_ap = 1.0;
};

/// Previous-slot quantities the agent observes besides the current channels.
struct PreviousSlot {
    std::vector<double> accuracy;  // G(c_k(t-1))
    std::vector<double> cpu_hz;    // f_k(t-1)
};

inline std::size_t observation_dim(int k, int n_a, int n_u, int m) {
    return static_cast<std::size_t>(5 * k + 2 * k * n_a * n_u + 2 * k * m * n_u + 2 * n_a * m);
}

/// Field order: Q^l, Q^r, Z, G, f (per device), then re/im of every H_{k,d},
/// H_{r,a} once, then every H_{k,r}.
inline std::vector<double> build_observation(const std::vector<std::int64_t>& q_local,
                                             const std::vector<std::int64_t>& q_remote,
                                             const std::vector<double>& z, const PreviousSlot& prev,
                                             const ChannelSet& ch, const ObservationScales& sc) {
    const std::size_t k = q_local.size();
    std::vector<double> obs;
    obs.reserve(5 * k + 64);
    for (std::size_t i = 0; i < k; ++i) obs.push_back(static_cast<double>(q_local[i]) / sc.queue);
    for (std::size_t i = 0; i < k; ++i) obs.push_back(static_cast<double>(q_remote[i]) / sc.queue);
    for (std::size_t i = 0; i < k; ++i) obs.push_back(z[i] / sc.virtual_queue);
    for (std::size_t i = 0; i < k; ++i) obs.push_back(prev.accuracy[i]);
    for (std::size_t i = 0; i < k; ++i) obs.push_back(prev.cpu_hz[i] / sc.f_max);
    auto append = [&](const ComplexMatrix& h, double gain) {
        const double s = gain > 0.0 ? 1.0 / std::sqrt(gain) : 1.0;
        for (const auto& e : h.entries()) {
            obs.push_back(e.real() * s);
            obs.push_back(e.imag() * s);
        }
    };
    for (std::size_t i = 0; i < k; ++i) append(ch.direct[i], sc.gain_direct);
    append(ch.ris_ap, sc.gain_ris_ap);
    for (std::size_t i = 0; i < k; ++i) append(ch.dev_ris[i], sc.gain_dev_ris);
    return obs;
}

struct MappedAction {
    std::vector<int> levels;
    RisProfile ris;
};

/// First K entries pick a compression level by index floor(u |C|) (clamped),
/// the remaining M become phases 2 pi u.
inline MappedAction map_action(std::span<const double> u, const CompressionModel& model, int devices,
                               int ris_elements) {
    if (u.size() != static_cast<std::size_t>(devices + ris_elements))
        throw std::invalid_argument("map_action: action must have K + M entries");
    MappedAction out;
    const auto n_levels = static_cast<double>(model.size());
    for (int k = 0; k < devices; ++k) {
        const double uk = std::clamp(u[k], 0.0, 1.0);
        const auto idx = std::min<std::size_t>(model.size() - 1, static_cast<std::size_t>(std::floor(uk * n_levels)));
        out.levels.push_back(model.levels()[idx]);
    }
    std::vector<double> phases;
    for (int m = 0; m < ris_elements; ++m) phases.push_back(2.0 * std::numbers::pi * std::clamp(u[devices + m], 0.0, 1.0));
    out.ris = RisProfile(std::move(phases));
    return out;
}

// ---------------------------------------------------------------------------
// Squashed Gaussian policy

namespace detail {

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double u) { return std::log(u) - std::log1p(-u); }

constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// log N(x; mu, e^{log_std}) summed over dimensions.
inline double gaussian_log_density(std::span<const double> x, std::span<const double> mu,
                                   std::span<const double> log_std) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double zj = (x[j] - mu[j]) * std::exp(-log_std[j]);
        s += -0.5 * zj * zj - log_std[j] - kHalfLog2Pi;
    }
    return s;
}

/// -log |du/dx| for u = sigmoid(x), summed.
inline double squash_correction(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += softplus(v) + softplus(-v);
    return s;
}

inline void require_finite(std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i]))
            throw std::runtime_error(std::string(what) + ": non-finite network output at index " + std::to_string(i));
}

}  // namespace detail

struct PolicySample {
    std::vector<double> u;           // action in [0,1]^{K+M}
    std::vector<double> pre_squash;  // Gaussian sample x, u = sigmoid(x)
    double log_prob = 0.0;           // density of u
    double value = 0.0;              // value head, in normalized-reward units
};

inline double value_estimate(const AgentParams& p, std::span<const double> obs) {
    MlpCache cache;
    mlp_forward(p.value, p.theta, obs, cache);
    detail::require_finite(cache.acts.back(), "value network");
    return cache.acts.back()[0];
}

inline std::vector<double> policy_mean(const AgentParams& p, std::span<const double> obs) {
    if (obs.size() != static_cast<std::size_t>(p.obs_dim()))
        throw std::invalid_argument("policy: observation has " + std::to_string(obs.size()) + " entries, network expects " +
                                    std::to_string(p.obs_dim()));
    MlpCache cache;
    mlp_forward(p.policy, p.theta, obs, cache);
    detail::require_finite(cache.acts.back(), "policy network");
    return cache.acts.back();
}

/// Log-density of an action u in (0,1)^n under the current policy.
inline double action_log_prob(const AgentParams& p, std::span<const double> obs, std::span<const double> u) {
    const auto mu = policy_mean(p, obs);
    std::vector<double> x(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) x[j] = detail::logit(u[j]);
    return detail::gaussian_log_density(x, mu, p.log_std()) + detail::squash_correction(x);
}

/// Samples an action. With `deterministic` the Gaussian mean is used.
inline PolicySample policy_step(const AgentParams& p, std::span<const double> obs, Rng& rng,
                                bool deterministic = false) {
    const auto mu = policy_mean(p, obs);
    const auto ls = p.log_std();
    PolicySample s;
    s.pre_squash.resize(mu.size());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < mu.size(); ++j)
        s.pre_squash[j] = deterministic ? mu[j] : mu[j] + std::exp(ls[j]) * normal(rng);
    s.u.resize(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) s.u[j] = std::clamp(detail::sigmoid(s.pre_squash[j]), 0.0, 1.0);
    s.log_prob = detail::gaussian_log_density(s.pre_squash, mu, ls) + detail::squash_correction(s.pre_squash);
    s.value = value_estimate(p, obs);
    return s;
}

// ---------------------------------------------------------------------------
// Advantage estimation

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// GAE over a rollout that may span several episodes. next_values[t] is the
/// value of the state following step t (the bootstrap at a truncation);
/// episode_end[t] stops the recursion from leaking across episodes.
inline GaeResult compute_gae_segmented(std::span<const double> rewards, std::span<const double> values,
                                       std::span<const double> next_values, std::span<const bool> episode_end,
                                       double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n || next_values.size() != n || episode_end.size() != n)
        throw std::invalid_argument("compute_gae: sequences must have equal length");
    GaeResult r{std::vector<double>(n), std::vector<double>(n)};
    double acc = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        if (episode_end[t]) acc = 0.0;
        const double delta = rewards[t] + gamma * next_values[t] - values[t];
        acc = delta + gamma * lambda * acc;
        r.advantages[t] = acc;
        r.returns[t] = acc + values[t];
    }
    return r;
}

inline GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values, double bootstrap,
                             double gamma, double lambda) {
    const std::size_t n = rewards.size();
    if (values.size() != n) throw std::invalid_argument("compute_gae: sequences must have equal length");
    std::vector<double> next(n);
    for (std::size_t t = 0; t < n; ++t) next[t] = t + 1 < n ? values[t + 1] : bootstrap;
    const std::unique_ptr<bool[]> ends(new bool[n]());
    return compute_gae_segmented(rewards, values, next, std::span<const bool>(ends.get(), n), gamma, lambda);
}

// ---------------------------------------------------------------------------
// PPO update

struct Transition {
    std::vector<double> obs;
    std::vector<double> u;
    std::vector<double> pre_squash;  // optional; recovered from u when empty
    double log_prob = 0.0;
    double advantage = 0.0;
    double ret = 0.0;
};

struct PpoLoss {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
};

/// Clipped-surrogate loss on the given samples (loss = -surrogate + c_v *
/// value error - c_e * entropy). Adds d(loss)/d(theta) into grad when it is
/// non-empty.
inline PpoLoss ppo_loss(const AgentParams& p, std::span<const double> theta, std::span<const Transition> batch,
                        std::span<const std::size_t> indices, std::span<double> grad) {
    PpoLoss loss;
    const auto act = static_cast<std::size_t>(p.act_dim());
    const std::span<const double> log_std = theta.subspan(p.log_std_offset, act);
    const double inv_b = 1.0 / static_cast<double>(indices.size());
    const double eps = p.cfg.clip_ratio;
    const bool want_grad = !grad.empty();
    MlpCache pc, vc;
    std::vector<double> x(act), dmu(act), dv(1);

    for (std::size_t idx : indices) {
        const Transition& tr = batch[idx];
        if (tr.pre_squash.empty())
            for (std::size_t j = 0; j < act; ++j) x[j] = detail::logit(tr.u[j]);
        else
            std::copy(tr.pre_squash.begin(), tr.pre_squash.end(), x.begin());

        mlp_forward(p.policy, theta, tr.obs, pc);
        const auto& mu = pc.acts.back();
        const double logp = detail::gaussian_log_density(x, mu, log_std) + detail::squash_correction(x);
        const double ratio = std::exp(logp - tr.log_prob);
        const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
        const double s1 = ratio * tr.advantage;
        const double s2 = clipped * tr.advantage;
        const bool unclipped_branch = s1 <= s2;
        loss.policy -= std::min(s1, s2) * inv_b;

        mlp_forward(p.value, theta, tr.obs, vc);
        const double v = vc.acts.back()[0];
        const double err = v - tr.ret;
        loss.value += p.cfg.value_coef * err * err * inv_b;

        if (want_grad) {
            const double dlogp = unclipped_branch ? -tr.advantage * ratio * inv_b : 0.0;
            if (dlogp != 0.0) {
                for (std::size_t j = 0; j < act; ++j) {
                    const double inv_var = std::exp(-2.0 * log_std[j]);
                    const double diff = x[j] - mu[j];
                    dmu[j] = dlogp * diff * inv_var;
                    grad[p.log_std_offset + j] += dlogp * (diff * diff * inv_var - 1.0);
                }
                mlp_backward(p.policy, theta, pc, dmu, grad);
            }
            dv[0] = 2.0 * p.cfg.value_coef * err * inv_b;
            mlp_backward(p.value, theta, vc, dv, grad);
        }
    }

    for (std::size_t j = 0; j < act; ++j) loss.entropy += log_std[j] + 0.5 + detail::kHalfLog2Pi;
    if (want_grad)
        for (std::size_t j = 0; j < act; ++j) grad[p.log_std_offset + j] -= p.cfg.entropy_coef;
    loss.total = loss.policy + loss.value - p.cfg.entropy_coef * loss.entropy;
    return loss;
}

inline void adam_step(AgentParams& p, std::span<const double> grad) {
    const auto& c = p.cfg;
    ++p.adam_step;
    const double b1t = 1.0 - std::pow(c.adam_beta1, static_cast<double>(p.adam_step));
    const double b2t = 1.0 - std::pow(c.adam_beta2, static_cast<double>(p.adam_step));
    for (std::size_t i = 0; i < p.theta.size(); ++i) {
        p.adam_m[i] = c.adam_beta1 * p.adam_m[i] + (1.0 - c.adam_beta1) * grad[i];
        p.adam_v[i] = c.adam_beta2 * p.adam_v[i] + (1.0 - c.adam_beta2) * grad[i] * grad[i];
        const double mhat = p.adam_m[i] / b1t;
        const double vhat = p.adam_v[i] / b2t;
        p.theta[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.adam_eps);
    }
}

struct UpdateStats {
    double last_loss = 0.0;
    std::int64_t clipped_gradients = 0;
    int minibatches = 0;
};

/// Epochs of shuffled minibatch Adam steps on the clipped surrogate.
/// Advantages are normalized over the batch when it has at least two samples.
inline UpdateStats ppo_update(AgentParams& p, std::vector<Transition> batch, Rng& rng) {
    UpdateStats stats;
    if (batch.empty()) return stats;
    if (p.cfg.normalize_advantages && batch.size() > 1) {
        double mean = 0.0;
        for (const auto& t : batch) mean += t.advantage;
        mean /= static_cast<double>(batch.size());
        double var = 0.0;
        for (const auto& t : batch) var += (t.advantage - mean) * (t.advantage - mean);
        const double sd = std::sqrt(var / static_cast<double>(batch.size()));
        for (auto& t : batch) t.advantage = (t.advantage - mean) / (sd + 1e-8);
    }
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(p.theta.size());
    const auto mb = static_cast<std::size_t>(p.cfg.minibatch);
    for (int epoch = 0; epoch < p.cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += mb) {
            const std::size_t end = std::min(order.size(), start + mb);
            std::fill(grad.begin(), grad.end(), 0.0);
            const auto loss = ppo_loss(p, p.theta, batch,
                                       std::span<const std::size_t>(order).subspan(start, end - start), grad);
            if (!std::isfinite(loss.total)) throw std::runtime_error("ppo_update: non-finite loss");
            double norm2 = 0.0;
            for (double g : grad) norm2 += g * g;
            const double norm = std::sqrt(norm2);
            if (!std::isfinite(norm)) throw std::runtime_error("ppo_update: non-finite gradient");
            if (norm > p.cfg.max_grad_norm) {
                const double s = p.cfg.max_grad_norm / norm;
                for (double& g : grad) g *= s;
                ++stats.clipped_gradients;
            }
            adam_step(p, grad);
            stats.last_loss = loss.total;
            ++stats.minibatches;
        }
    }
    p.grad_clip_events += stats.clipped_gradients;
    return stats;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout (all integers and doubles little-endian):
//   magic "RISEDGE1" | u64 config hash | u32 array count |
//   per array: u32 name length, name bytes, u32 rank, u64 dims[rank],
//              f64 values[prod(dims)]

namespace detail {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n, bool swap) {
    const auto* b = static_cast<const unsigned char*>(p);
    if (!swap) {
        os.write(reinterpret_cast<const char*>(b), static_cast<std::streamsize>(n));
        return;
    }
    for (std::size_t i = n; i-- > 0;) os.put(static_cast<char>(b[i]));
}

inline bool host_is_big_endian() {
    const std::uint16_t probe = 1;
    unsigned char first;
    std::memcpy(&first, &probe, 1);
    return first == 0;
}

template <class T>
void put_le(std::ostream& os, T v) {
    put_bytes(os, &v, sizeof(T), host_is_big_endian());
}

template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    if (host_is_big_endian()) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace detail

struct CheckpointArray {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> values;
};

inline void write_checkpoint(const std::string& path, std::uint64_t config_hash, const std::vector<CheckpointArray>& arrays) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint " + path);
    os.write("RISEDGE1", 8);
    detail::put_le<std::uint64_t>(os, config_hash);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.name.size()));
        os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.dims.size()));
        for (auto d : a.dims) detail::put_le<std::uint64_t>(os, d);
        for (double v : a.values) detail::put_le<double>(os, v);
    }
}

inline std::vector<CheckpointArray> read_checkpoint(const std::string& path, std::uint64_t& config_hash) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "RISEDGE1") throw std::runtime_error(path + ": not a checkpoint file");
    config_hash = detail::get_le<std::uint64_t>(is);
    const auto n = detail::get_le<std::uint32_t>(is);
    std::vector<CheckpointArray> out(n);
    for (auto& a : out) {
        const auto len = detail::get_le<std::uint32_t>(is);
        a.name.resize(len);
        is.read(a.name.data(), len);
        const auto rank = detail::get_le<std::uint32_t>(is);
        std::uint64_t count = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            a.dims.push_back(detail::get_le<std::uint64_t>(is));
            count *= a.dims.back();
        }
        a.values.resize(count);
        for (auto& v : a.values) v = detail::get_le<double>(is);
    }
    return out;
}

inline void save_agent(const std::string& path, const AgentParams& p, std::uint64_t config_hash) {
    auto shape_array = [](const std::string& name, const MlpShape& s) {
        CheckpointArray a{name, {s.sizes.size()}, {}};
        for (int v : s.sizes) a.values.push_back(v);
        return a;
    };
    std::vector<CheckpointArray> arrays;
    arrays.push_back(shape_array("policy_layers", p.policy));
    arrays.push_back(shape_array("value_layers", p.value));
    arrays.push_back({"theta", {p.theta.size()}, p.theta});
    arrays.push_back({"adam_m", {p.adam_m.size()}, p.adam_m});
    arrays.push_back({"adam_v", {p.adam_v.size()}, p.adam_v});
    arrays.push_back({"state",
                      {6},
                      {static_cast<double>(p.adam_step), p.return_stat.mean, p.return_stat.var, p.return_stat.count,
                       p.running_return, static_cast<double>(p.grad_clip_events)}});
    write_checkpoint(path, config_hash, arrays);
}

/// Restores parameters and optimizer state saved by save_agent into an agent
/// built with the same shapes.
inline void load_agent(const std::string& path, AgentParams& p, std::uint64_t expected_hash) {
    std::uint64_t hash = 0;
    const auto arrays = read_checkpoint(path, hash);
    if (expected_hash != 0 && hash != expected_hash)
        throw std::runtime_error(path + ": checkpoint was written for a different configuration");
    auto find = [&](const std::string& name) -> const CheckpointArray& {
        for (const auto& a : arrays)
            if (a.name == name) return a;
        throw std::runtime_error(path + ": missing array '" + name + "'");
    };
    auto check_shape = [&](const std::string& name, const MlpShape& s) {
        const auto& a = find(name);
        if (a.values.size() != s.sizes.size()) throw std::runtime_error(path + ": layer count mismatch in " + name);
        for (std::size_t i = 0; i < s.sizes.size(); ++i)
            if (static_cast<int>(a.values[i]) != s.sizes[i])
                throw std::runtime_error(path + ": layer size mismatch in " + name);
    };
    check_shape("policy_layers", p.policy);
    check_shape("value_layers", p.value);
    const auto& theta = find("theta");
    if (theta.values.size() != p.theta.size()) throw std::runtime_error(path + ": parameter count mismatch");
    p.theta = theta.values;
    p.adam_m = find("adam_m").values;
    p.adam_v = find("adam_v").values;
    const auto& st = find("state").values;
    if (st.size() != 6 || p.adam_m.size() != p.theta.size() || p.adam_v.size() != p.theta.size())
        throw std::runtime_error(path + ": malformed optimizer state");
    p.adam_step = static_cast<std::int64_t>(st[0]);
    p.return_stat = {st[1], st[2], st[3]};
    p.running_return = st[4];
    p.grad_clip_events = static_cast<std::int64_t>(st[5]);
}

}  // namespace risedge
