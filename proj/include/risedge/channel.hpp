#pragma once

// RIS-aided uplink channel: block-i.i.d. Rician links (device->AP direct,
// device->RIS, RIS->AP), the composite channel through a diagonal phase
// profile, and the log-det achievable rate.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "risedge/numerics.hpp"

namespace risedge {

struct LinkParams {
    double attenuation_db = 0.0;  // positive loss
    double rice_factor_db = 25.0;
};

struct ChannelConfig {
    int num_devices = 1;
    int antennas_device = 1;  // N_u
    int antennas_ap = 4;      // N_a
    int ris_elements = 8;     // M
    double bandwidth_hz = 100e6;
    double noise_power_dbm = -120.0;  // total over the band
    double carrier_hz = 5e9;
    LinkParams device_ris{62.60, 25.0};
    LinkParams ris_ap{66.34, 25.0};
    LinkParams direct{90.0, 25.0};
    std::vector<bool> direct_link_present;  // per device; empty means "none present"
    double max_displacement_m = 5.0;
    double pathloss_exponent = 2.0;

    /// sigma^2 in watts.
    double noise_power_w() const { return std::pow(10.0, (noise_power_dbm - 30.0) / 10.0); }

    bool has_direct_link(int device) const {
        return device < static_cast<int>(direct_link_present.size()) && direct_link_present[device];
    }

    void validate() const {
        if (num_devices < 1) throw std::invalid_argument("channel.num_devices must be >= 1");
        if (antennas_device < 1) throw std::invalid_argument("channel.antennas_device must be >= 1");
        if (antennas_ap < 1) throw std::invalid_argument("channel.antennas_ap must be >= 1");
        if (ris_elements < 1) throw std::invalid_argument("channel.ris_elements must be >= 1");
        if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("channel.bandwidth_hz must be positive");
        if (!(carrier_hz > 0.0)) throw std::invalid_argument("channel.carrier_hz must be positive");
        if (!(device_ris.attenuation_db > 0.0) || !(ris_ap.attenuation_db > 0.0) ||
            !(direct.attenuation_db > 0.0))
            throw std::invalid_argument("channel attenuations must be positive dB losses");
        if (max_displacement_m < 0.0)
            throw std::invalid_argument("channel.max_displacement_m must be nonnegative");
        if (!(pathloss_exponent > 0.0))
            throw std::invalid_argument("channel.pathloss_exponent must be positive");
        if (direct_link_present.size() > static_cast<std::size_t>(num_devices))
            throw std::invalid_argument("channel.direct_link_present has more entries than devices");
    }
};

/// Deterministic line-of-sight components, one per link, drawn once per run.
struct LosAnchors {
    std::vector<ComplexMatrix> direct;    // per device, N_a x N_u
    std::vector<ComplexMatrix> dev_ris;   // per device, M x N_u
    ComplexMatrix ris_ap;                 // N_a x M
};

/// Linear power gains for one episode (after the user displacement).
struct LinkGains {
    std::vector<double> direct;
    std::vector<double> dev_ris;
    double ris_ap = 0.0;
};

struct ChannelSet {
    std::vector<ComplexMatrix> direct;   // H_{k,d}
    std::vector<ComplexMatrix> dev_ris;  // H_{k,r}
    ComplexMatrix ris_ap;                // H_{r,a}, shared

    std::size_t num_devices() const { return direct.size(); }
};

class RisProfile {
public:
    RisProfile() = default;
    explicit RisProfile(std::vector<double> phases) : phases_(std::move(phases)) {
        for (double p : phases_) {
            if (!(p >= 0.0 && p <= 2.0 * std::numbers::pi))
                throw std::invalid_argument("RisProfile: phase " + std::to_string(p) +
                                            " outside [0, 2pi]");
        }
    }

    std::size_t size() const noexcept { return phases_.size(); }
    const std::vector<double>& phases() const noexcept { return phases_; }
    cplx reflection(std::size_t i) const { return std::polar(1.0, phases_[i]); }

private:
    std::vector<double> phases_;
};

namespace detail {

inline ComplexMatrix unit_modulus_rank_one(std::size_t rows, std::size_t cols, Rng& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<cplx> a(rows), b(cols);
    for (auto& x : a) x = std::polar(1.0, angle(rng));
    for (auto& x : b) x = std::polar(1.0, angle(rng));
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = a[r] * b[c];
    return m;
}

inline ComplexMatrix rician(const ComplexMatrix& los, double gain, double rice_db, Rng& rng) {
    const double kappa = db_to_linear(rice_db);
    const double los_w = std::sqrt(kappa / (1.0 + kappa));
    const double nlos_w = std::sqrt(1.0 / (1.0 + kappa));
    ComplexMatrix h = complex_gaussian(los.rows(), los.cols(), 1.0, rng);
    h *= nlos_w;
    h += los * cplx{los_w, 0.0};
    h *= std::sqrt(gain);
    return h;
}

/// Free-space loss at 1 m for the given carrier, in dB.
inline double free_space_loss_1m_db(double carrier_hz) {
    constexpr double c = 299792458.0;
    return 20.0 * std::log10(4.0 * std::numbers::pi * carrier_hz / c);
}

}  // namespace detail

inline LosAnchors draw_los_anchors(const ChannelConfig& cfg, Rng& rng) {
    LosAnchors out;
    const auto nu = static_cast<std::size_t>(cfg.antennas_device);
    const auto na = static_cast<std::size_t>(cfg.antennas_ap);
    const auto m = static_cast<std::size_t>(cfg.ris_elements);
    for (int k = 0; k < cfg.num_devices; ++k) {
        out.direct.push_back(detail::unit_modulus_rank_one(na, nu, rng));
        out.dev_ris.push_back(detail::unit_modulus_rank_one(m, nu, rng));
    }
    out.ris_ap = detail::unit_modulus_rank_one(na, m, rng);
    return out;
}

/// Nominal gains: every device sits at the configured attenuation.
inline LinkGains nominal_gains(const ChannelConfig& cfg) {
    LinkGains g;
    for (int k = 0; k < cfg.num_devices; ++k) {
        g.direct.push_back(db_to_linear(-cfg.direct.attenuation_db));
        g.dev_ris.push_back(db_to_linear(-cfg.device_ris.attenuation_db));
    }
    g.ris_ap = db_to_linear(-cfg.ris_ap.attenuation_db);
    return g;
}

/// Per-episode gains: each device is displaced uniformly within a disc of
/// radius max_displacement_m around its nominal position; device links are
/// rescaled with a log-distance law. The nominal distance is the one that
/// reproduces the configured attenuation under free-space loss.
inline LinkGains episode_gains(const ChannelConfig& cfg, Rng& rng) {
    LinkGains g = nominal_gains(cfg);
    if (cfg.max_displacement_m <= 0.0) return g;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double fspl1 = detail::free_space_loss_1m_db(cfg.carrier_hz);
    auto displaced_loss = [&](double loss_db, double dx, double dy) {
        const double d0 = std::max(1.0, std::pow(10.0, (loss_db - fspl1) / 20.0));
        const double d = std::max(1.0, std::hypot(d0 + dx, dy));
        return loss_db + 10.0 * cfg.pathloss_exponent * std::log10(d / d0);
    };
    for (int k = 0; k < cfg.num_devices; ++k) {
        const double r = cfg.max_displacement_m * std::sqrt(unit(rng));
        const double a = 2.0 * std::numbers::pi * unit(rng);
        const double dx = r * std::cos(a);
        const double dy = r * std::sin(a);
        g.dev_ris[k] = db_to_linear(-displaced_loss(cfg.device_ris.attenuation_db, dx, dy));
        g.direct[k] = db_to_linear(-displaced_loss(cfg.direct.attenuation_db, dx, dy));
    }
    return g;
}

/// One slot of fading. NLoS parts are fresh draws; devices without a direct
/// link get an all-zero H_{k,d}.
inline ChannelSet draw_channels(const ChannelConfig& cfg, const LosAnchors& los, const LinkGains& gains,
                                Rng& rng) {
    ChannelSet cs;
    const auto nu = static_cast<std::size_t>(cfg.antennas_device);
    const auto na = static_cast<std::size_t>(cfg.antennas_ap);
    for (int k = 0; k < cfg.num_devices; ++k) {
        if (cfg.has_direct_link(k))
            cs.direct.push_back(detail::rician(los.direct[k], gains.direct[k], cfg.direct.rice_factor_db, rng));
        else
            cs.direct.emplace_back(na, nu);
        cs.dev_ris.push_back(
            detail::rician(los.dev_ris[k], gains.dev_ris[k], cfg.device_ris.rice_factor_db, rng));
    }
    cs.ris_ap = detail::rician(los.ris_ap, gains.ris_ap, cfg.ris_ap.rice_factor_db, rng);
    return cs;
}

/// H_k = H_{k,d} + H_{r,a} diag(e^{j phi}) H_{k,r}.
inline ComplexMatrix composite_channel(const ChannelSet& cs, const RisProfile& ris, std::size_t device) {
    if (device >= cs.num_devices()) throw std::out_of_range("composite_channel: device index out of range");
    const auto& hd = cs.direct[device];
    const auto& hr = cs.dev_ris[device];
    const auto& hra = cs.ris_ap;
    if (hra.cols() != ris.size() || hr.rows() != ris.size() || hra.rows() != hd.rows() ||
        hr.cols() != hd.cols()) {
        throw std::invalid_argument("composite_channel: inconsistent channel / RIS shapes");
    }
    ComplexMatrix reflected = hra;
    for (std::size_t r = 0; r < reflected.rows(); ++r)
        for (std::size_t i = 0; i < reflected.cols(); ++i) reflected(r, i) *= ris.reflection(i);
    return hd + reflected * hr;
}

/// W log2 |I + H F H^H / sigma^2| in bits per second.
inline double achievable_rate(const ComplexMatrix& h, const ComplexMatrix& f, double noise_power,
                              double bandwidth) {
    if (!f.is_square() || f.rows() != h.cols())
        throw std::invalid_argument("achievable_rate: covariance must be N_u x N_u matching H");
    const double scale = std::max(1e-300, f.max_abs());
    if (f.hermitian_defect() >= kHermitianTolerance * std::max(1.0, scale))
        throw std::invalid_argument("achievable_rate: covariance is not Hermitian");
    if (f.max_abs() == 0.0) return 0.0;
    const auto fe = hermitian_eigh(f);
    if (fe.values.back() < -kHermitianTolerance * scale)
        throw std::domain_error("achievable_rate: covariance is indefinite");

    ComplexMatrix g = h * f * h.adjoint();
    g *= cplx{1.0 / noise_power, 0.0};
    g += ComplexMatrix::identity(h.rows());
    const double rate = bandwidth * logdet_psd(g) / std::numbers::ln2;
    return std::max(0.0, rate);
}

}  // namespace risedge
