#pragma once

// Model-based per-slot solvers: greedy MEH CPU scheduling and transmit
// covariance water-filling for fixed RIS phases and compression levels.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "risedge/numerics.hpp"
#include "risedge/queueing.hpp"

namespace risedge {

struct CpuAllocation {
    std::vector<double> freq_hz;
    double f_max = 0.0;

    double total() const { return std::accumulate(freq_hz.begin(), freq_hz.end(), 0.0); }
};

/// Hand CPU cycles to the devices with the largest remote backlog first, each
/// getting just enough to empty its queue this slot. Ties go to the lower index.
inline CpuAllocation schedule_cpu(std::span<const Count> q_remote, std::span<const double> load_cycles,
                                  double f_max, double slot_s) {
    if (q_remote.size() != load_cycles.size())
        throw std::invalid_argument("schedule_cpu: one load per device required");
    if (!(f_max > 0.0)) throw std::invalid_argument("schedule_cpu: f_max must be positive");
    const std::size_t n = q_remote.size();
    CpuAllocation out{std::vector<double>(n, 0.0), f_max};
    std::vector<bool> done(n, false);
    double remaining = f_max;
    while (remaining > 0.0) {
        std::size_t best = n;
        for (std::size_t k = 0; k < n; ++k) {
            if (done[k] || q_remote[k] <= 0) continue;
            if (best == n || q_remote[k] > q_remote[best]) best = k;
        }
        if (best == n) break;
        if (!(load_cycles[best] > 0.0)) throw std::invalid_argument("schedule_cpu: loads must be positive");
        const double need = static_cast<double>(q_remote[best]) * load_cycles[best] / slot_s;
        const double grant = std::min(remaining, need);
        out.freq_hz[best] = grant;
        remaining -= grant;
        done[best] = true;
    }
    return out;
}

struct PowerWeights {
    double a = 0.0;          // (Q^l - Q^r) tau W / (n_b ln 2)
    double max_power = 0.1;  // P_k
    double v = 0.0;
};

inline double power_weight(Count q_local, Count q_remote, double slot_s, double bandwidth_hz,
                           double bits_per_pattern) {
    return (static_cast<double>(q_local) - static_cast<double>(q_remote)) * slot_s * bandwidth_hz /
           (bits_per_pattern * std::numbers::ln2);
}

struct CovarianceSolution {
    ComplexMatrix covariance;
    std::vector<double> mode_gains;   // eigenvalues of H^H H, descending
    std::vector<double> mode_powers;  // p_i
    double nu = 0.0;                  // multiplier of the power budget
    double water_level = 0.0;         // a / (V + nu)
};

namespace detail {

inline double modal_sum(std::span<const double> floors, double level) {
    double s = 0.0;
    for (double fl : floors) s += std::max(0.0, level - fl);
    return s;
}

}  // namespace detail

/// Minimizes V Tr(F) - a ln|I + H F H^H / sigma^2| over F >= 0, Tr(F) <= P.
inline CovarianceSolution optimal_covariance(const ComplexMatrix& h, const PowerWeights& w, double noise_power) {
    const std::size_t nu_dim = h.cols();
    CovarianceSolution sol;
    sol.covariance = ComplexMatrix(nu_dim, nu_dim);
    sol.mode_powers.assign(nu_dim, 0.0);
    if (!(w.max_power > 0.0)) throw std::invalid_argument("optimal_covariance: max power must be positive");
    if (!(w.v >= 0.0)) throw std::invalid_argument("optimal_covariance: V must be nonnegative");
    if (!(noise_power > 0.0)) throw std::invalid_argument("optimal_covariance: noise power must be positive");
    if (w.a <= 0.0) return sol;

    const ComplexMatrix gram = h.adjoint() * h;
    const auto eig = hermitian_eigh(gram);
    sol.mode_gains = eig.values;
    const double lam_max = eig.values.empty() ? 0.0 : eig.values.front();
    if (!(lam_max > 0.0)) return sol;

    // Floors sigma^2 / lambda_i; modes below 1e-12 * lambda_max never get power.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> floors(nu_dim, kInf);
    for (std::size_t i = 0; i < nu_dim; ++i)
        if (eig.values[i] > 1e-12 * lam_max) floors[i] = noise_power / eig.values[i];

    const double budget = w.max_power;
    double nu = 0.0;
    double level = w.v > 0.0 ? w.a / w.v : kInf;
    if (!(detail::modal_sum(floors, level) <= budget)) {
        double lo = 0.0;
        double hi = w.a * lam_max / noise_power;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (detail::modal_sum(floors, w.a / (w.v + mid)) > budget)
                lo = mid;
            else
                hi = mid;
            if (std::abs(detail::modal_sum(floors, w.a / (w.v + hi)) - budget) <= 1e-9 * budget) break;
        }
        // Bisection fixes the active set; the level then follows exactly from
        // sum_{active} (level - floor_i) = P.
        const double approx = w.a / (w.v + hi);
        std::vector<bool> active(nu_dim);
        for (std::size_t i = 0; i < nu_dim; ++i) active[i] = floors[i] < approx;
        for (;;) {
            double sum_floor = 0.0;
            int n_active = 0;
            for (std::size_t i = 0; i < nu_dim; ++i)
                if (active[i]) {
                    sum_floor += floors[i];
                    ++n_active;
                }
            if (n_active == 0) {
                level = approx;
                break;
            }
            level = (budget + sum_floor) / n_active;
            bool changed = false;
            for (std::size_t i = 0; i < nu_dim; ++i)
                if (active[i] && floors[i] >= level) {
                    active[i] = false;
                    changed = true;
                }
            if (!changed) break;
        }
        nu = std::max(0.0, w.a / level - w.v);
    }

    sol.nu = nu;
    sol.water_level = level;
    bool any = false;
    for (std::size_t i = 0; i < nu_dim; ++i) {
        sol.mode_powers[i] = std::max(0.0, level - floors[i]);
        any = any || sol.mode_powers[i] > 0.0;
    }
    if (any) {
        sol.covariance = reconstruct(eig.vectors, sol.mode_powers);
        // Exact Hermitian symmetry for downstream checks.
        for (std::size_t r = 0; r < nu_dim; ++r) {
            sol.covariance(r, r) = sol.covariance(r, r).real();
            for (std::size_t c = r + 1; c < nu_dim; ++c) sol.covariance(c, r) = std::conj(sol.covariance(r, c));
        }
    }
    return sol;
}

/// V Tr(F) - a ln|I + H F H^H / sigma^2|: the per-device part of J that
/// depends on F.
inline double covariance_objective(const ComplexMatrix& h, const ComplexMatrix& f, const PowerWeights& w,
                                   double noise_power) {
    ComplexMatrix g = h * f * h.adjoint();
    g *= cplx{1.0 / noise_power, 0.0};
    g += ComplexMatrix::identity(h.rows());
    return w.v * f.trace().real() - w.a * logdet_psd(g);
}

}  // namespace risedge
