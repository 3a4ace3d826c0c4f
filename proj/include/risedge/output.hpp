#pragma once

// Run artifacts. Every file starts with (or contains) the config hash and the
// seed so that a (config, seed) pair identifies its outputs.
//
// Slot trace CSV: one comment line "# config_hash=<hex> seed=<n> policy=<tag>"
// then a header and one row per slot. Columns, in order:
//   slot, objective, reward, then for each device k:
//   trace_f_k, rate_bps_k, q_local_k, q_remote_k, z_k, accuracy_k, level_k,
//   cpu_hz_k, arrivals_k, departures_k, served_k
// Queue columns hold the state after the slot's update.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "risedge/config.hpp"
#include "risedge/sim.hpp"

namespace risedge {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// "<prefix>_<policy>_seed<seed>_V<v>" with V in compact scientific form.
inline std::string run_stem(const std::string& prefix, const std::string& policy, std::uint64_t seed, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return prefix + "_" + policy + "_seed" + std::to_string(seed) + "_V" + buf;
}

inline void write_trace_csv(const std::string& path, const std::vector<SlotMetrics>& trace, int devices,
                            std::uint64_t hash, std::uint64_t seed, const std::string& policy) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# config_hash=" << hash_hex(hash) << " seed=" << seed << " policy=" << policy << "\n";
    os << "slot,objective,reward";
    for (int k = 0; k < devices; ++k) {
        for (const char* col : {"trace_f", "rate_bps", "q_local", "q_remote", "z", "accuracy", "level", "cpu_hz",
                                "arrivals", "departures", "served"})
            os << ',' << col << '_' << k;
    }
    os << '\n';
    for (const auto& m : trace) {
        os << m.slot << ',' << format_double(m.objective) << ',' << format_double(m.reward);
        for (int k = 0; k < devices; ++k) {
            os << ',' << format_double(m.trace_f[k]) << ',' << format_double(m.rate[k]) << ',' << m.q_local[k] << ','
               << m.q_remote[k] << ',' << format_double(m.z[k]) << ',' << format_double(m.accuracy[k]) << ','
               << m.level[k] << ',' << format_double(m.cpu_hz[k]) << ',' << m.arrivals[k] << ',' << m.departures[k]
               << ',' << m.served[k];
        }
        os << '\n';
    }
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
    return {{"slots", s.slots},
            {"avg_power_w", s.avg_power_w},
            {"avg_delay_s", s.avg_delay_s},
            {"fifo_delay_s", s.fifo_delay_s},
            {"avg_accuracy", s.avg_accuracy},
            {"mean_reward", s.mean_reward},
            {"mean_objective", s.mean_objective},
            {"accuracy_bound", s.accuracy_bound},
            {"device_delay_s", s.device_delay_s},
            {"device_accuracy", s.device_accuracy},
            {"final_z", s.final_z}};
}

inline void write_summary_json(const std::string& path, const RunSummary& s, const ExperimentConfig& cfg,
                               std::uint64_t seed, const std::string& policy, const nlohmann::json& extra = {}) {
    nlohmann::json j;
    j["config_hash"] = hash_hex(config_hash(cfg));
    j["seed"] = seed;
    j["policy"] = policy;
    j["v"] = cfg.tradeoff.v;
    j["summary"] = summary_to_json(s);
    j["config"] = config_to_json(cfg);
    if (!extra.is_null())
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << '\n';
}

inline void write_training_curve(const std::string& path, const std::vector<double>& episode_rewards,
                                 std::uint64_t hash, std::uint64_t seed) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# config_hash=" << hash_hex(hash) << " seed=" << seed << "\n";
    os << "episode,mean_reward\n";
    for (std::size_t i = 0; i < episode_rewards.size(); ++i) os << i << ',' << format_double(episode_rewards[i]) << '\n';
}

inline void write_frontier_csv(const std::string& path, const std::vector<SweepRow>& rows, std::uint64_t seed) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# seed=" << seed << "\n";
    os << "v,config_hash,avg_power_w,avg_delay_s,fifo_delay_s,avg_accuracy,mean_reward\n";
    for (const auto& r : rows) {
        os << format_double(r.v) << ',' << hash_hex(r.config_hash) << ',' << format_double(r.summary.avg_power_w) << ','
           << format_double(r.summary.avg_delay_s) << ',' << format_double(r.summary.fifo_delay_s) << ','
           << format_double(r.summary.avg_accuracy) << ',' << format_double(r.summary.mean_reward) << '\n';
    }
}

}  // namespace risedge
