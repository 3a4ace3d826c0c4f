#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "risedge/channel.hpp"

using namespace risedge;

namespace {

ChannelConfig small_config() {
    ChannelConfig c;
    c.num_devices = 2;
    c.antennas_device = 2;
    c.antennas_ap = 3;
    c.ris_elements = 4;
    c.direct_link_present = {true, false};
    return c;
}

ChannelSet scalar_set(cplx hd, cplx hra, cplx hka) {
    ChannelSet cs;
    cs.direct.push_back(ComplexMatrix(1, 1, {hd}));
    cs.dev_ris.push_back(ComplexMatrix(1, 1, {hka}));
    cs.ris_ap = ComplexMatrix(1, 1, {hra});
    return cs;
}

}  // namespace

TEST(DrawChannels, ShapesAndMissingDirectLink) {
    const auto cfg = small_config();
    Rng rng(3);
    const auto los = draw_los_anchors(cfg, rng);
    const auto cs = draw_channels(cfg, los, nominal_gains(cfg), rng);
    ASSERT_EQ(cs.num_devices(), 2u);
    EXPECT_EQ(cs.direct[0].rows(), 3u);
    EXPECT_EQ(cs.direct[0].cols(), 2u);
    EXPECT_EQ(cs.dev_ris[1].rows(), 4u);
    EXPECT_EQ(cs.dev_ris[1].cols(), 2u);
    EXPECT_EQ(cs.ris_ap.rows(), 3u);
    EXPECT_EQ(cs.ris_ap.cols(), 4u);
    EXPECT_GT(cs.direct[0].max_abs(), 0.0);
    EXPECT_EQ(cs.direct[1].max_abs(), 0.0);
}

TEST(DrawChannels, HugeRiceFactorGivesScaledLos) {
    auto cfg = small_config();
    cfg.device_ris.rice_factor_db = 200.0;
    cfg.ris_ap.rice_factor_db = 200.0;
    cfg.direct.rice_factor_db = 200.0;
    Rng rng(4);
    const auto los = draw_los_anchors(cfg, rng);
    const auto gains = nominal_gains(cfg);
    const auto cs = draw_channels(cfg, los, gains, rng);
    const auto expect = los.ris_ap * cplx{std::sqrt(gains.ris_ap), 0.0};
    EXPECT_LT((cs.ris_ap - expect).max_abs() / std::sqrt(gains.ris_ap), 1e-6);
    const auto expect_d = los.direct[0] * cplx{std::sqrt(gains.direct[0]), 0.0};
    EXPECT_LT((cs.direct[0] - expect_d).max_abs() / std::sqrt(gains.direct[0]), 1e-6);
}

TEST(DrawChannels, AveragePowerEqualsAttenuation) {
    ChannelConfig cfg;
    cfg.antennas_device = 1;
    cfg.antennas_ap = 1;
    cfg.ris_elements = 1;
    cfg.device_ris.rice_factor_db = 25.0;
    Rng rng(8);
    const auto los = draw_los_anchors(cfg, rng);
    const auto gains = nominal_gains(cfg);
    double p_ris_ap = 0.0, p_dev_ris = 0.0;
    constexpr int kSlots = 100000;
    for (int t = 0; t < kSlots; ++t) {
        const auto cs = draw_channels(cfg, los, gains, rng);
        p_ris_ap += std::norm(cs.ris_ap(0, 0));
        p_dev_ris += std::norm(cs.dev_ris[0](0, 0));
    }
    EXPECT_NEAR(p_ris_ap / kSlots / gains.ris_ap, 1.0, 0.02);
    EXPECT_NEAR(p_dev_ris / kSlots / gains.dev_ris[0], 1.0, 0.02);
}

TEST(EpisodeGains, DisplacementStaysWithinDisc) {
    ChannelConfig cfg;
    Rng rng(12);
    const double fspl1 = detail::free_space_loss_1m_db(cfg.carrier_hz);
    const double d0 = std::pow(10.0, (cfg.device_ris.attenuation_db - fspl1) / 20.0);
    // 62.60 dB at 5 GHz is free-space loss over roughly 6.4 m.
    EXPECT_NEAR(d0, 6.42, 0.05);
    for (int i = 0; i < 1000; ++i) {
        const auto g = episode_gains(cfg, rng);
        const double loss = -10.0 * std::log10(g.dev_ris[0]);
        EXPECT_GE(loss, cfg.device_ris.attenuation_db + 20.0 * std::log10(std::max(1.0, d0 - 5.0) / d0) - 1e-9);
        EXPECT_LE(loss, cfg.device_ris.attenuation_db + 20.0 * std::log10((d0 + 5.0) / d0) + 1e-9);
        EXPECT_DOUBLE_EQ(g.ris_ap, db_to_linear(-cfg.ris_ap.attenuation_db));
    }
    cfg.max_displacement_m = 0.0;
    EXPECT_DOUBLE_EQ(episode_gains(cfg, rng).dev_ris[0], nominal_gains(cfg).dev_ris[0]);
}

TEST(CompositeChannel, ZeroPhasesGiveIdentityReflection) {
    const auto cfg = small_config();
    Rng rng(1);
    const auto los = draw_los_anchors(cfg, rng);
    const auto cs = draw_channels(cfg, los, nominal_gains(cfg), rng);
    const RisProfile ris(std::vector<double>(4, 0.0));
    for (std::size_t k = 0; k < 2; ++k) {
        const auto expect = cs.direct[k] + cs.ris_ap * cs.dev_ris[k];
        EXPECT_LT((composite_channel(cs, ris, k) - expect).max_abs(), 1e-18);
    }
}

TEST(CompositeChannel, ScalarPiFlipsReflectedPath) {
    const cplx hd{0.3, -0.2}, hra{0.5, 0.1}, hka{-0.4, 0.7};
    const auto cs = scalar_set(hd, hra, hka);
    const auto h = composite_channel(cs, RisProfile({std::numbers::pi}), 0)(0, 0);
    EXPECT_NEAR(std::abs(h - (hd - hra * hka)), 0.0, 1e-15);
}

TEST(CompositeChannel, AlignedPhaseMaximizesGainOnGrid) {
    const cplx hd{0.3, -0.2}, hra{0.5, 0.1}, hka{-0.4, 0.7};
    const auto cs = scalar_set(hd, hra, hka);
    double phi_star = std::arg(hd) - std::arg(hra * hka);
    phi_star = std::fmod(phi_star + 4.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    const double best = std::abs(composite_channel(cs, RisProfile({phi_star}), 0)(0, 0));
    double grid_best = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double phi = 2.0 * std::numbers::pi * i / 10000.0;
        grid_best = std::max(grid_best, std::abs(composite_channel(cs, RisProfile({phi}), 0)(0, 0)));
    }
    EXPECT_GE(best, grid_best - 1e-12);
    EXPECT_NEAR(best, std::abs(hd) + std::abs(hra * hka), 1e-12);
}

TEST(CompositeChannel, LinearInReflectionCoefficients) {
    const auto cfg = small_config();
    Rng rng(21);
    const auto los = draw_los_anchors(cfg, rng);
    const auto cs = draw_channels(cfg, los, nominal_gains(cfg), rng);
    // H(phi) - H_d is a sum over elements of e^{j phi_i} h_ra[:,i] h_ka[i,:].
    const RisProfile ris({0.1, 1.2, 2.3, 5.9});
    ComplexMatrix sum(3, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<double> single(4, 0.0);
        ComplexMatrix col(3, 1), row(1, 2);
        for (std::size_t r = 0; r < 3; ++r) col(r, 0) = cs.ris_ap(r, i);
        for (std::size_t c = 0; c < 2; ++c) row(0, c) = cs.dev_ris[0](i, c);
        sum += (col * row) * ris.reflection(i);
    }
    EXPECT_LT((composite_channel(cs, ris, 0) - cs.direct[0] - sum).max_abs(), 1e-15);
}

TEST(RisProfile, UnitModulusAndRangeCheck) {
    const RisProfile ris({0.0, 1.0, 2.0 * std::numbers::pi});
    for (std::size_t i = 0; i < ris.size(); ++i) EXPECT_NEAR(std::abs(ris.reflection(i)), 1.0, 1e-15);
    EXPECT_THROW(RisProfile({-0.1}), std::invalid_argument);
    EXPECT_THROW(RisProfile({7.0}), std::invalid_argument);
}

TEST(AchievableRate, ZeroChannelAndScalarCapacity) {
    const double w = 1e6;
    EXPECT_EQ(achievable_rate(ComplexMatrix(2, 2), ComplexMatrix::identity(2), 1.0, w), 0.0);
    const ComplexMatrix h(1, 1, {cplx{1.0, 0.0}});
    const ComplexMatrix f(1, 1, {cplx{3.0, 0.0}});
    EXPECT_NEAR(achievable_rate(h, f, 1.0, w), 2.0 * w, 1e-6);
}

TEST(AchievableRate, EigenmodeIdentity) {
    Rng rng(31);
    const double noise = 0.7;
    for (int trial = 0; trial < 10; ++trial) {
        const auto h = complex_gaussian(4, 3, 1.0, rng);
        const auto e = hermitian_eigh(h.adjoint() * h);
        const std::vector<double> p{0.9, 0.4, 0.1};
        const auto f = reconstruct(e.vectors, p);
        double expect = 0.0;
        for (std::size_t i = 0; i < 3; ++i) expect += std::log2(1.0 + e.values[i] * p[i] / noise);
        EXPECT_NEAR(achievable_rate(h, f, noise, 1.0), expect, 1e-9 * expect);
    }
}

TEST(AchievableRate, MonotoneInPowerScale) {
    Rng rng(32);
    const auto h = complex_gaussian(3, 2, 1.0, rng);
    const auto a = complex_gaussian(2, 2, 1.0, rng);
    const auto f = a * a.adjoint();
    double prev = -1.0;
    for (double c : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double r = achievable_rate(h, f * cplx{c, 0.0}, 1.0, 1.0);
        EXPECT_GE(r, prev);
        prev = r;
    }
}

TEST(AchievableRate, RejectsIndefiniteCovariance) {
    const ComplexMatrix h = ComplexMatrix::identity(2);
    const std::vector<double> d{1.0, -1.0};
    EXPECT_THROW(achievable_rate(h, ComplexMatrix::diagonal(d), 1.0, 1.0), std::domain_error);
    EXPECT_THROW(achievable_rate(h, ComplexMatrix(3, 3), 1.0, 1.0), std::invalid_argument);
}
