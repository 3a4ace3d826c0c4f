#pragma once

// Slot-level simulator. Per slot: the current channels are observed, the
// agent (or a baseline) picks compression levels and RIS phases, covariances
// are water-filled per device, rates and J are evaluated, the MEH CPU is
// scheduled, and the physical and virtual queues advance.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "risedge/accuracy.hpp"
#include "risedge/agent.hpp"
#include "risedge/allocators.hpp"
#include "risedge/channel.hpp"
#include "risedge/config.hpp"
#include "risedge/dpp.hpp"
#include "risedge/numerics.hpp"
#include "risedge/queueing.hpp"

namespace risedge {

/// splitmix64 of (seed, tag): independent generator streams per purpose.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (h | 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

struct SlotDecision {
    std::vector<int> levels;
    RisProfile ris;
    std::vector<ComplexMatrix> covariances;
    CpuAllocation cpu;
    std::vector<double> rates;
    std::vector<SlotTransfer> transfers;
};

struct SlotMetrics {
    std::int64_t slot = 0;
    double objective = 0.0;
    double reward = 0.0;
    std::vector<double> trace_f;
    std::vector<double> rate;
    std::vector<Count> q_local;   // after the update
    std::vector<Count> q_remote;  // after the update
    std::vector<double> z;        // after the update
    std::vector<double> accuracy;
    std::vector<int> level;
    std::vector<double> cpu_hz;
    std::vector<Count> arrivals;
    std::vector<Count> departures;
    std::vector<Count> served;
};

struct SlotOutcome {
    SlotDecision decision;
    QueueState next;
    double objective = 0.0;
    double reward = 0.0;
};

/// One slot of the controller from a given state, channels, action and
/// arrival counts. Pure.
inline SlotOutcome step_slot(const ExperimentConfig& cfg, const QueueState& state, const ChannelSet& channels,
                             std::span<const double> action, std::span<const Count> arrivals) {
    const int k_count = cfg.devices();
    if (arrivals.size() != static_cast<std::size_t>(k_count))
        throw std::invalid_argument("step_slot: one arrival count per device required");
    const double tau = cfg.system.slot_s;
    const double noise = cfg.channel.noise_power_w();
    const double bw = cfg.channel.bandwidth_hz;

    SlotOutcome out;
    auto& d = out.decision;
    auto mapped = map_action(action, cfg.model, k_count, cfg.channel.ris_elements);
    d.levels = std::move(mapped.levels);
    d.ris = std::move(mapped.ris);

    for (int k = 0; k < k_count; ++k) {
        const ComplexMatrix h = composite_channel(channels, d.ris, static_cast<std::size_t>(k));
        const double bits = cfg.model.bits_per_pattern(d.levels[k]);
        const PowerWeights w{power_weight(state.local[k], state.remote[k], tau, bw, bits), cfg.system.max_power_w,
                             cfg.tradeoff.v};
        auto sol = optimal_covariance(h, w, noise);
        d.rates.push_back(achievable_rate(h, sol.covariance, noise, bw));
        d.covariances.push_back(std::move(sol.covariance));
    }

    out.objective = slot_objective(state, d.rates, d.levels, d.covariances, cfg.model, cfg.tradeoff, tau);
    out.reward = lyapunov_reward(out.objective, state.z, cfg.tradeoff.thresholds);

    const std::vector<double> loads(static_cast<std::size_t>(k_count), cfg.system.load_cycles);
    d.cpu = schedule_cpu(state.remote, loads, cfg.system.cpu_max_hz, tau);

    out.next = state;
    for (int k = 0; k < k_count; ++k) {
        const double bits = cfg.model.bits_per_pattern(d.levels[k]);
        const auto tr = realized_transfer(state.local[k], state.remote[k], transmit_capacity(d.rates[k], bits, tau),
                                          compute_capacity(d.cpu.freq_hz[k], cfg.system.load_cycles, tau));
        d.transfers.push_back(tr);
        out.next.local[k] = state.local[k] - tr.departures + arrivals[k];
        out.next.remote[k] = state.remote[k] - tr.served + tr.departures;
        out.next.z[k] = update_virtual(state.z[k], cfg.model.accuracy_of(d.levels[k]), cfg.tradeoff.thresholds[k],
                                       cfg.tradeoff.epsilon);
    }
    return out;
}

/// Simulated system for one run. Copyable: a copy is a full snapshot
/// (queues, channels, generator state, delay trackers).
class Environment {
public:
    /// `geometry_seed` fixes the line-of-sight anchors; `stream_seed` drives
    /// fading, arrivals and per-episode displacements.
    Environment(const ExperimentConfig& cfg, std::uint64_t geometry_seed, std::uint64_t stream_seed)
        : cfg_(std::make_shared<const ExperimentConfig>(cfg)), rng_(stream_seed) {
        cfg_->validate();
        Rng geo(geometry_seed);
        los_ = draw_los_anchors(cfg_->channel, geo);
        const auto nominal = nominal_gains(cfg_->channel);
        scales_.queue = cfg_->queue_scale;
        scales_.virtual_queue = cfg_->virtual_queue_scale;
        scales_.f_max = cfg_->system.cpu_max_hz;
        scales_.gain_direct = nominal.direct.empty() ? 1.0 : nominal.direct[0];
        scales_.gain_dev_ris = nominal.dev_ris.empty() ? 1.0 : nominal.dev_ris[0];
        scales_.gain_ris_ap = nominal.ris_ap;
        reset();
    }

    /// New episode: fresh displacement, empty physical and virtual queues.
    void reset() {
        const auto k = static_cast<std::size_t>(cfg_->devices());
        state_ = QueueState(k);
        prev_.accuracy.assign(k, cfg_->model.accuracy_of(cfg_->model.max_level()));
        prev_.cpu_hz.assign(k, 0.0);
        gains_ = cfg_->episode.randomize_position ? episode_gains(cfg_->channel, rng_) : nominal_gains(cfg_->channel);
        channels_ = draw_channels(cfg_->channel, los_, gains_, rng_);
        fifo_.assign(k, FifoDelayTracker{});
        episode_slot_ = 0;
    }

    std::vector<double> observe() const {
        return build_observation(state_.local, state_.remote, state_.z, prev_, channels_, scales_);
    }

    std::size_t observation_size() const {
        const auto& c = cfg_->channel;
        return observation_dim(c.num_devices, c.antennas_ap, c.antennas_device, c.ris_elements);
    }
    int action_size() const { return cfg_->devices() + cfg_->channel.ris_elements; }

    struct StepResult {
        SlotOutcome outcome;
        SlotMetrics metrics;
    };

    StepResult step(std::span<const double> action) {
        const int k_count = cfg_->devices();
        std::vector<Count> arrivals(static_cast<std::size_t>(k_count));
        for (auto& a : arrivals) a = sample_arrivals(cfg_->arrivals, rng_);

        StepResult r;
        r.outcome = step_slot(*cfg_, state_, channels_, action, arrivals);
        const auto& d = r.outcome.decision;

        auto& m = r.metrics;
        m.slot = episode_slot_;
        m.objective = r.outcome.objective;
        m.reward = r.outcome.reward;
        for (int k = 0; k < k_count; ++k) {
            const auto& tr = d.transfers[k];
            fifo_[k].serve(episode_slot_, tr.served);
            fifo_[k].transfer(tr.departures);
            fifo_[k].arrive(episode_slot_, arrivals[k]);
            m.trace_f.push_back(d.covariances[k].trace().real());
            m.rate.push_back(d.rates[k]);
            m.q_local.push_back(r.outcome.next.local[k]);
            m.q_remote.push_back(r.outcome.next.remote[k]);
            m.z.push_back(r.outcome.next.z[k]);
            m.accuracy.push_back(cfg_->model.accuracy_of(d.levels[k]));
            m.level.push_back(d.levels[k]);
            m.cpu_hz.push_back(d.cpu.freq_hz[k]);
            m.arrivals.push_back(arrivals[k]);
            m.departures.push_back(tr.departures);
            m.served.push_back(tr.served);
        }

        state_ = r.outcome.next;
        prev_.accuracy = m.accuracy;
        prev_.cpu_hz = m.cpu_hz;
        ++episode_slot_;
        channels_ = draw_channels(cfg_->channel, los_, gains_, rng_);
        return r;
    }

    const ExperimentConfig& config() const { return *cfg_; }
    const QueueState& state() const { return state_; }
    const ChannelSet& channels() const { return channels_; }
    const std::vector<FifoDelayTracker>& delay_trackers() const { return fifo_; }
    std::int64_t episode_slot() const { return episode_slot_; }

private:
    std::shared_ptr<const ExperimentConfig> cfg_;
    Rng rng_;
    LosAnchors los_;
    LinkGains gains_;
    ObservationScales scales_;
    ChannelSet channels_;
    QueueState state_;
    PreviousSlot prev_;
    std::vector<FifoDelayTracker> fifo_;
    std::int64_t episode_slot_ = 0;
};

// ---------------------------------------------------------------------------
// Run summaries

struct RunSummary {
    std::int64_t slots = 0;
    double avg_power_w = 0.0;        // mean over slots of sum_k Tr(F_k)
    double avg_delay_s = 0.0;        // Little's law, averaged over devices
    double fifo_delay_s = 0.0;       // per-pattern timestamps, averaged over devices
    double avg_accuracy = 0.0;       // mean over slots and devices
    double mean_reward = 0.0;
    double mean_objective = 0.0;
    double accuracy_bound = 0.0;     // min_k G_th - Z_k(T) / (eps T)
    std::vector<double> device_delay_s;
    std::vector<double> device_accuracy;
    std::vector<double> final_z;
};

/// Run-level aggregates recomputed from the slot trace.
inline RunSummary summarize(const std::vector<SlotMetrics>& trace, const ExperimentConfig& cfg,
                            const std::vector<FifoDelayTracker>* trackers = nullptr) {
    RunSummary s;
    s.slots = static_cast<std::int64_t>(trace.size());
    if (trace.empty()) return s;
    const auto k_count = static_cast<std::size_t>(cfg.devices());
    const auto n = static_cast<double>(trace.size());
    std::vector<double> ql(k_count, 0.0), qr(k_count, 0.0), arr(k_count, 0.0), acc(k_count, 0.0);
    for (const auto& m : trace) {
        s.mean_reward += m.reward;
        s.mean_objective += m.objective;
        for (std::size_t k = 0; k < k_count; ++k) {
            s.avg_power_w += m.trace_f[k];
            ql[k] += static_cast<double>(m.q_local[k]);
            qr[k] += static_cast<double>(m.q_remote[k]);
            arr[k] += static_cast<double>(m.arrivals[k]);
            acc[k] += m.accuracy[k];
        }
    }
    s.mean_reward /= n;
    s.mean_objective /= n;
    s.avg_power_w /= n;
    s.accuracy_bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_count; ++k) {
        const double mean_arr = arr[k] / n;
        const double delay = mean_arr > 0.0 ? average_e2e_delay(ql[k] / n, qr[k] / n, mean_arr, cfg.system.slot_s) : 0.0;
        s.device_delay_s.push_back(delay);
        s.device_accuracy.push_back(acc[k] / n);
        s.final_z.push_back(trace.back().z[k]);
        s.avg_delay_s += delay / static_cast<double>(k_count);
        s.avg_accuracy += acc[k] / n / static_cast<double>(k_count);
        s.accuracy_bound = std::min(s.accuracy_bound, cfg.tradeoff.thresholds[k] - trace.back().z[k] / (cfg.tradeoff.epsilon * n));
        if (trackers)
            s.fifo_delay_s += (*trackers)[k].mean_delay_slots() * cfg.system.slot_s / static_cast<double>(k_count);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Policies

/// Maps an observation to an action in [0,1]^{K+M}.
using Policy = std::function<std::vector<double>(const std::vector<double>& obs)>;

enum class Baseline { max_compression, no_compression, random_compression };

inline Baseline parse_baseline(const std::string& s) {
    if (s == "max_compression") return Baseline::max_compression;
    if (s == "no_compression") return Baseline::no_compression;
    if (s == "random_compression") return Baseline::random_compression;
    throw std::invalid_argument("unknown baseline policy '" + s + "'");
}

inline const char* to_string(Baseline b) {
    switch (b) {
        case Baseline::max_compression: return "max_compression";
        case Baseline::no_compression: return "no_compression";
        case Baseline::random_compression: return "random_compression";
    }
    return "?";
}

/// Fixed or uniformly random compression, uniformly random RIS phases.
inline Policy make_baseline_policy(Baseline b, int devices, int ris_elements, std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [=](const std::vector<double>&) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> u(static_cast<std::size_t>(devices + ris_elements));
        for (int k = 0; k < devices; ++k) {
            switch (b) {
                case Baseline::max_compression: u[k] = 0.0; break;
                case Baseline::no_compression: u[k] = 1.0; break;
                case Baseline::random_compression: u[k] = unit(*rng); break;
            }
        }
        for (int m = 0; m < ris_elements; ++m) u[devices + m] = unit(*rng);
        return u;
    };
}

inline Policy make_agent_policy(const AgentParams& params, bool deterministic, std::uint64_t seed) {
    auto p = std::make_shared<const AgentParams>(params);
    auto rng = std::make_shared<Rng>(seed);
    return [=](const std::vector<double>& obs) { return policy_step(*p, obs, *rng, deterministic).u; };
}

struct EpisodeResult {
    std::vector<SlotMetrics> trace;
    RunSummary summary;
};

/// Resets the environment and runs `length` slots under `policy`.
inline EpisodeResult run_episode(Environment& env, const Policy& policy, std::int64_t length) {
    env.reset();
    EpisodeResult r;
    r.trace.reserve(static_cast<std::size_t>(length));
    for (std::int64_t t = 0; t < length; ++t) r.trace.push_back(env.step(policy(env.observe())).metrics);
    r.summary = summarize(r.trace, env.config(), &env.delay_trackers());
    return r;
}

/// Environment used for evaluation and baselines of a run seeded with `seed`.
inline Environment evaluation_environment(const ExperimentConfig& cfg, std::uint64_t seed) {
    return Environment(cfg, derive_seed(seed, "geometry"), derive_seed(seed, "eval"));
}

inline EpisodeResult run_baseline(const ExperimentConfig& cfg, Baseline b, std::uint64_t seed,
                                  std::int64_t length = -1) {
    auto env = evaluation_environment(cfg, seed);
    const auto policy = make_baseline_policy(b, cfg.devices(), cfg.channel.ris_elements, derive_seed(seed, "baseline"));
    return run_episode(env, policy, length > 0 ? length : cfg.episode.length);
}

inline EpisodeResult evaluate_agent(const ExperimentConfig& cfg, const AgentParams& agent, std::uint64_t seed,
                                    std::int64_t length = -1) {
    auto env = evaluation_environment(cfg, seed);
    const auto policy = make_agent_policy(agent, /*deterministic=*/true, derive_seed(seed, "eval-policy"));
    return run_episode(env, policy, length > 0 ? length : cfg.episode.length);
}

// ---------------------------------------------------------------------------
// Training

struct TrainingResult {
    AgentParams agent;
    std::vector<double> episode_rewards;  // mean raw reward of each completed episode
    std::vector<double> step_rewards;     // raw reward of every training slot
    std::int64_t steps = 0;
    std::int64_t updates = 0;
};

inline AgentParams initial_agent(const ExperimentConfig& cfg, std::uint64_t seed) {
    Rng init(derive_seed(seed, "agent-init"));
    const auto& c = cfg.channel;
    return make_agent(static_cast<int>(observation_dim(c.num_devices, c.antennas_ap, c.antennas_device, c.ris_elements)),
                      c.num_devices + c.ris_elements, cfg.ppo, init);
}

/// Alternates horizon-long rollouts with PPO updates for total_steps slots.
/// Episodes last cfg.episode.length slots and end by truncation (the value of
/// the last observation is bootstrapped).
inline TrainingResult run_training(const ExperimentConfig& cfg, std::int64_t total_steps, std::uint64_t seed,
                                   const std::function<void(const TrainingResult&)>& on_update = {}) {
    Environment env(cfg, derive_seed(seed, "geometry"), derive_seed(seed, "train"));
    TrainingResult res;
    res.agent = initial_agent(cfg, seed);
    Rng rng(derive_seed(seed, "agent"));
    AgentParams& agent = res.agent;
    res.step_rewards.reserve(static_cast<std::size_t>(std::max<std::int64_t>(total_steps, 0)));

    std::vector<double> obs = env.observe();
    double episode_sum = 0.0;
    const auto horizon = static_cast<std::int64_t>(cfg.ppo.horizon);

    std::vector<Transition> batch;
    std::vector<double> rewards, values, next_values;
    std::vector<char> ends;
    while (res.steps < total_steps) {
        batch.clear();
        rewards.clear();
        values.clear();
        next_values.clear();
        ends.clear();
        const std::int64_t n = std::min(horizon, total_steps - res.steps);
        for (std::int64_t t = 0; t < n; ++t) {
            auto sample = policy_step(agent, obs, rng);
            auto step = env.step(sample.u);
            const double r = step.outcome.reward;
            const bool end = env.episode_slot() >= cfg.episode.length;
            agent.observe_reward(r, end);
            rewards.push_back(r / agent.reward_scale());
            values.push_back(sample.value);
            batch.push_back({std::move(obs), std::move(sample.u), std::move(sample.pre_squash), sample.log_prob, 0.0, 0.0});
            res.step_rewards.push_back(r);
            episode_sum += r;
            ++res.steps;

            obs = env.observe();
            if (end) {
                next_values.push_back(value_estimate(agent, obs));
                ends.push_back(1);
                res.episode_rewards.push_back(episode_sum / static_cast<double>(cfg.episode.length));
                episode_sum = 0.0;
                env.reset();
                obs = env.observe();
            } else {
                next_values.push_back(0.0);  // filled below
                ends.push_back(0);
            }
        }
        for (std::size_t t = 0; t < values.size(); ++t)
            if (!ends[t]) next_values[t] = t + 1 < values.size() ? values[t + 1] : value_estimate(agent, obs);
        const std::unique_ptr<bool[]> end_flags(new bool[ends.size()]);
        for (std::size_t t = 0; t < ends.size(); ++t) end_flags[t] = ends[t] != 0;
        const auto gae = compute_gae_segmented(rewards, values, next_values,
                                               std::span<const bool>(end_flags.get(), ends.size()), cfg.ppo.gamma,
                                               cfg.ppo.gae_lambda);
        for (std::size_t t = 0; t < batch.size(); ++t) {
            batch[t].advantage = gae.advantages[t];
            batch[t].ret = gae.returns[t];
        }
        ppo_update(agent, std::move(batch), rng);
        batch = {};
        ++res.updates;
        if (on_update) on_update(res);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Trade-off sweep

struct SweepRow {
    double v = 0.0;
    RunSummary summary;
    std::uint64_t config_hash = 0;
};

/// Independent training plus one deterministic evaluation episode per V.
inline std::vector<SweepRow> sweep_v(const ExperimentConfig& cfg, const std::vector<double>& v_values,
                                     std::uint64_t seed, std::int64_t total_steps) {
    if (v_values.empty()) throw std::invalid_argument("sweep_v: empty V list");
    std::vector<SweepRow> rows;
    for (double v : v_values) {
        ExperimentConfig c = cfg;
        c.tradeoff.v = v;
        c.validate();
        const auto trained = run_training(c, total_steps, seed);
        rows.push_back({v, evaluate_agent(c, trained.agent, seed).summary, config_hash(c)});
    }
    return rows;
}

}  // namespace risedge
