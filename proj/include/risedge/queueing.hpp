#pragma once

// Per-device communication / computation / virtual queues and their one-slot
// dynamics. Physical buffers count whole patterns.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "risedge/numerics.hpp"

namespace risedge {

using Count = std::int64_t;

struct QueueState {
    std::vector<Count> local;   // Q^l
    std::vector<Count> remote;  // Q^r
    std::vector<double> z;      // virtual accuracy queue

    QueueState() = default;
    explicit QueueState(std::size_t devices) : local(devices, 0), remote(devices, 0), z(devices, 0.0) {}

    std::size_t num_devices() const noexcept { return local.size(); }

    bool valid() const {
        if (remote.size() != local.size() || z.size() != local.size()) return false;
        for (std::size_t k = 0; k < local.size(); ++k)
            if (local[k] < 0 || remote[k] < 0 || !(z[k] >= 0.0)) return false;
        return true;
    }

    friend bool operator==(const QueueState&, const QueueState&) = default;
};

enum class ArrivalLaw { poisson, deterministic, bernoulli_batch };

inline ArrivalLaw parse_arrival_law(const std::string& s) {
    if (s == "poisson") return ArrivalLaw::poisson;
    if (s == "deterministic") return ArrivalLaw::deterministic;
    if (s == "bernoulli_batch") return ArrivalLaw::bernoulli_batch;
    throw std::invalid_argument("unknown arrival law '" + s + "'");
}

inline const char* to_string(ArrivalLaw law) {
    switch (law) {
        case ArrivalLaw::poisson: return "poisson";
        case ArrivalLaw::deterministic: return "deterministic";
        case ArrivalLaw::bernoulli_batch: return "bernoulli_batch";
    }
    return "?";
}

struct ArrivalProcess {
    double mean_per_slot = 4.0;
    ArrivalLaw law = ArrivalLaw::poisson;

    void validate() const {
        if (!(mean_per_slot > 0.0)) throw std::invalid_argument("arrivals.mean_per_slot must be positive");
        if (law == ArrivalLaw::deterministic && mean_per_slot != std::floor(mean_per_slot))
            throw std::invalid_argument("arrivals.mean_per_slot must be an integer for the deterministic law");
    }

    /// Batch size used by the Bernoulli-batch law; the batch arrives with
    /// probability mean / batch.
    Count batch_size() const { return 2 * static_cast<Count>(std::ceil(mean_per_slot)); }
};

inline Count sample_arrivals(const ArrivalProcess& proc, Rng& rng) {
    switch (proc.law) {
        case ArrivalLaw::poisson: {
            std::poisson_distribution<Count> d(proc.mean_per_slot);
            return d(rng);
        }
        case ArrivalLaw::deterministic:
            return static_cast<Count>(proc.mean_per_slot);
        case ArrivalLaw::bernoulli_batch: {
            const Count b = proc.batch_size();
            std::bernoulli_distribution d(proc.mean_per_slot / static_cast<double>(b));
            return d(rng) ? b : 0;
        }
    }
    return 0;
}

/// floor() for a nonnegative pattern budget. The 1e-9 guard absorbs the
/// rounding of tau*R/n_b and tau*f/w when the product is an exact integer in
/// real arithmetic (e.g. a CPU grant sized to empty a queue).
inline Count whole_patterns(double x) {
    if (!(x > 0.0)) return 0;
    constexpr double kCap = 1e15;
    return static_cast<Count>(std::floor(std::min(x, kCap) + 1e-9));
}

/// floor(tau R / n_b): patterns the link can carry in one slot.
inline Count transmit_capacity(double rate_bps, double bits_per_pattern, double slot_s) {
    if (!(bits_per_pattern > 0.0)) throw std::invalid_argument("bits_per_pattern must be positive");
    return whole_patterns(slot_s * rate_bps / bits_per_pattern);
}

/// floor(tau f / w): patterns the MEH can process for one device in one slot.
inline Count compute_capacity(double cpu_hz, double load_cycles, double slot_s) {
    if (!(load_cycles > 0.0)) throw std::invalid_argument("load_cycles must be positive");
    return whole_patterns(slot_s * cpu_hz / load_cycles);
}

inline Count update_local(Count q_local, double rate_bps, double bits_per_pattern, double slot_s,
                          Count arrivals) {
    return std::max<Count>(0, q_local - transmit_capacity(rate_bps, bits_per_pattern, slot_s)) + arrivals;
}

inline Count update_remote(Count q_remote, Count q_local, double rate_bps, double bits_per_pattern,
                           double cpu_hz, double load_cycles, double slot_s) {
    const Count served = compute_capacity(cpu_hz, load_cycles, slot_s);
    const Count inflow = std::min(q_local, transmit_capacity(rate_bps, bits_per_pattern, slot_s));
    return std::max<Count>(0, q_remote - served) + inflow;
}

inline double update_virtual(double z, double accuracy, double threshold, double step) {
    return std::max(0.0, z - step * (accuracy - threshold));
}

/// Patterns actually moved in one slot; both queue updates consume the same
/// numbers so local departures always equal remote admissions.
struct SlotTransfer {
    Count departures = 0;  // local -> remote
    Count served = 0;      // leave the remote queue
};

inline SlotTransfer realized_transfer(Count q_local, Count q_remote, Count tx_capacity, Count cpu_capacity) {
    return {std::min(q_local, tx_capacity), std::min(q_remote, cpu_capacity)};
}

/// Little's law: tau (mean Q^l + mean Q^r) / mean arrivals.
inline double average_e2e_delay(double mean_local, double mean_remote, double mean_arrivals, double slot_s) {
    if (!(mean_arrivals > 0.0))
        throw std::domain_error("average_e2e_delay: mean arrivals must be positive");
    return slot_s * (mean_local + mean_remote) / mean_arrivals;
}

/// Ground-truth per-pattern delay: every pattern carries the slot it arrived
/// in, both buffers are FIFO. A pattern arriving in slot t and processed in
/// slot s spends s - t slots in the system.
class FifoDelayTracker {
public:
    void arrive(Count slot, Count n) { push(local_, slot, n); }

    void transfer(Count n) {
        while (n > 0) {
            if (local_.empty()) throw std::logic_error("FifoDelayTracker: transfer exceeds local backlog");
            auto& front = local_.front();
            const Count take = std::min(n, front.count);
            push(remote_, front.slot, take);
            front.count -= take;
            n -= take;
            if (front.count == 0) local_.pop_front();
        }
    }

    void serve(Count slot, Count n) {
        while (n > 0) {
            if (remote_.empty()) throw std::logic_error("FifoDelayTracker: service exceeds remote backlog");
            auto& front = remote_.front();
            const Count take = std::min(n, front.count);
            delay_sum_slots_ += static_cast<double>(take) * static_cast<double>(slot - front.slot);
            completed_ += take;
            front.count -= take;
            n -= take;
            if (front.count == 0) remote_.pop_front();
        }
    }

    Count completed() const noexcept { return completed_; }
    double mean_delay_slots() const {
        return completed_ > 0 ? delay_sum_slots_ / static_cast<double>(completed_) : 0.0;
    }

    Count local_backlog() const { return total(local_); }
    Count remote_backlog() const { return total(remote_); }

    friend bool operator==(const FifoDelayTracker&, const FifoDelayTracker&) = default;

private:
    struct Run {
        Count slot;
        Count count;
        friend bool operator==(const Run&, const Run&) = default;
    };

    static void push(std::deque<Run>& q, Count slot, Count n) {
        if (n <= 0) return;
        if (!q.empty() && q.back().slot == slot)
            q.back().count += n;
        else
            q.push_back({slot, n});
    }
    static Count total(const std::deque<Run>& q) {
        Count s = 0;
        for (const auto& r : q) s += r.count;
        return s;
    }

    std::deque<Run> local_;
    std::deque<Run> remote_;
    double delay_sum_slots_ = 0.0;
    Count completed_ = 0;
};

}  // namespace risedge
