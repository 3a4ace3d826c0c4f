#pragma once

// Lyapunov function, the per-slot drift-plus-penalty surrogate J of the
// communication sub-problem, and the agent reward -J.
//
// The additive constant of the drift bound does not depend on any decision
// and is never evaluated.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "risedge/accuracy.hpp"
#include "risedge/numerics.hpp"
#include "risedge/queueing.hpp"

namespace risedge {

struct TradeoffConfig {
    double v = 1e5;
    double epsilon = 1.0;
    std::vector<double> thresholds;  // G_{k,th}

    void validate(std::size_t devices) const {
        if (!(v >= 0.0)) throw std::invalid_argument("tradeoff.v must be nonnegative");
        if (!(epsilon > 0.0)) throw std::invalid_argument("tradeoff.epsilon must be positive");
        if (thresholds.size() != devices)
            throw std::invalid_argument("tradeoff.accuracy_threshold needs one value per device");
        for (double g : thresholds)
            if (!(g > 0.0 && g < 1.0))
                throw std::invalid_argument("tradeoff.accuracy_threshold must lie in (0,1), got " +
                                            std::to_string(g));
    }
};

inline double lyapunov_value(const QueueState& s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.num_devices(); ++k) {
        const auto ql = static_cast<double>(s.local[k]);
        const auto qr = static_cast<double>(s.remote[k]);
        acc += ql * ql + qr * qr + s.z[k] * s.z[k];
    }
    return 0.5 * acc;
}

/// One device's share of J.
inline double device_objective(Count q_local, Count q_remote, double z, double rate_bps, double bits,
                               double trace_f, double accuracy, double v, double slot_s) {
    const double backlog_diff = static_cast<double>(q_remote) - static_cast<double>(q_local);
    return backlog_diff * slot_s * rate_bps / bits + v * trace_f - z * accuracy;
}

/// J = sum_k (Q^r - Q^l) tau R_k / n_b(c_k) + V Tr(F_k) - Z_k G(c_k), with the
/// continuous (un-floored) rate term.
inline double slot_objective(const QueueState& s, std::span<const double> rates, std::span<const int> levels,
                             std::span<const ComplexMatrix> covariances, const CompressionModel& model,
                             const TradeoffConfig& cfg, double slot_s) {
    const std::size_t k_count = s.num_devices();
    if (rates.size() != k_count || levels.size() != k_count || covariances.size() != k_count)
        throw std::invalid_argument("slot_objective: per-device inputs must match the device count");
    double j = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
        j += device_objective(s.local[k], s.remote[k], s.z[k], rates[k], model.bits_per_pattern(levels[k]),
                              covariances[k].trace().real(), model.accuracy_of(levels[k]), cfg.v, slot_s);
    }
    return j;
}

inline double reward(double j) { return -j; }

/// Reward used for training and in slot traces: -(J + sum_k Z_k G_{k,th}),
/// i.e. the virtual-queue term taken as -Z (G - G_th) as in the drift bound.
/// Within a slot it differs from -J by a decision-independent constant, but
/// summed over time the accuracy part telescopes to -Z(T)^2 / (2 eps) plus a
/// bounded term, so a policy cannot earn return by inflating Z.
inline double lyapunov_reward(double j, std::span<const double> z, std::span<const double> thresholds) {
    if (z.size() != thresholds.size()) throw std::invalid_argument("lyapunov_reward: one threshold per device required");
    double shift = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) shift += z[k] * thresholds[k];
    return -(j + shift);
}

}  // namespace risedge
