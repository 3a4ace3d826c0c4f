#include <gtest/gtest.h>

#include <set>

#include "risedge/sim.hpp"

using namespace risedge;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.channel.antennas_ap = 2;
    c.channel.ris_elements = 4;
    c.tradeoff.epsilon = 100.0;
    c.episode.length = 400;
    c.ppo.horizon = 256;
    c.ppo.hidden_layers = 2;
    c.ppo.hidden_units = 16;
    return c;
}

std::vector<double> constant_action(const ExperimentConfig& c, double level_u, double phase_u) {
    std::vector<double> a(static_cast<std::size_t>(c.devices()), level_u);
    a.resize(a.size() + static_cast<std::size_t>(c.channel.ris_elements), phase_u);
    return a;
}

}  // namespace

TEST(DeriveSeed, DistinctPerTagAndStable) {
    std::set<std::uint64_t> seen;
    for (const char* tag : {"geometry", "train", "eval", "baseline", "agent", "agent-init", "eval-policy"})
        EXPECT_TRUE(seen.insert(derive_seed(1, tag)).second) << tag;
    EXPECT_EQ(derive_seed(5, "train"), derive_seed(5, "train"));
    EXPECT_NE(derive_seed(5, "train"), derive_seed(6, "train"));
}

TEST(Environment, SnapshotReplaysIdentically) {
    const auto cfg = small_config();
    Environment env(cfg, 1, 2);
    for (int t = 0; t < 50; ++t) env.step(constant_action(cfg, 0.3, 0.7));
    Environment copy = env;
    const auto policy = make_baseline_policy(Baseline::random_compression, 1, cfg.channel.ris_elements, 9);
    const auto policy2 = make_baseline_policy(Baseline::random_compression, 1, cfg.channel.ris_elements, 9);
    for (int t = 0; t < 100; ++t) {
        const auto a = env.step(policy(env.observe())).metrics;
        const auto b = copy.step(policy2(copy.observe())).metrics;
        ASSERT_EQ(a.reward, b.reward);
        ASSERT_EQ(a.q_local, b.q_local);
        ASSERT_EQ(a.trace_f, b.trace_f);
    }
    EXPECT_EQ(env.delay_trackers(), copy.delay_trackers());
}

TEST(Environment, ObservationSizeMatchesDimension) {
    const auto cfg = small_config();
    Environment env(cfg, 1, 2);
    EXPECT_EQ(env.observe().size(), env.observation_size());
    EXPECT_EQ(env.observation_size(), observation_dim(1, 2, 1, 4));
    EXPECT_EQ(env.action_size(), 5);
}

TEST(StepSlot, NoPowerWhenLocalNotAboveRemote) {
    const auto cfg = small_config();
    Environment env(cfg, 3, 4);
    QueueState s(1);
    s.local = {5};
    s.remote = {5};
    const std::vector<Count> arrivals{2};
    const auto out = step_slot(cfg, s, env.channels(), constant_action(cfg, 0.5, 0.5), arrivals);
    EXPECT_EQ(out.decision.covariances[0].trace().real(), 0.0);
    EXPECT_EQ(out.decision.rates[0], 0.0);
    EXPECT_EQ(out.next.local[0], 7);

    s.local = {30};
    s.remote = {0};
    const auto busy = step_slot(cfg, s, env.channels(), constant_action(cfg, 0.5, 0.5), arrivals);
    EXPECT_GT(busy.decision.covariances[0].trace().real(), 0.0);
}

TEST(Trace, ConstraintAudit) {
    const auto cfg = small_config();
    const auto r = run_baseline(cfg, Baseline::random_compression, 5, 3000);
    ASSERT_EQ(r.trace.size(), 3000u);
    Count ql = 0, qr = 0;
    double z = 0.0;
    for (const auto& m : r.trace) {
        const double prev_z = z;
        ASSERT_LE(m.trace_f[0], cfg.system.max_power_w * (1 + 1e-9));
        ASSERT_GE(m.trace_f[0], 0.0);
        ASSERT_LE(m.cpu_hz[0], cfg.system.cpu_max_hz * (1 + 1e-12));
        ASSERT_LE(m.departures[0], ql);
        ASSERT_LE(m.served[0], qr);
        if (ql <= qr) {
            ASSERT_EQ(m.trace_f[0], 0.0);
        }
        ASSERT_EQ(m.q_local[0], ql - m.departures[0] + m.arrivals[0]);
        ASSERT_EQ(m.q_remote[0], qr - m.served[0] + m.departures[0]);
        ASSERT_DOUBLE_EQ(m.accuracy[0], cfg.model.accuracy_of(m.level[0]));
        ASSERT_EQ(m.z[0], update_virtual(prev_z, m.accuracy[0], cfg.tradeoff.thresholds[0], cfg.tradeoff.epsilon));
        ql = m.q_local[0];
        qr = m.q_remote[0];
        z = m.z[0];
    }
}

TEST(Summary, SelfConsistent) {
    const auto cfg = small_config();
    const auto r = run_baseline(cfg, Baseline::random_compression, 6, 2000);
    double p = 0.0, acc = 0.0, q = 0.0, arr = 0.0;
    for (const auto& m : r.trace) {
        p += m.trace_f[0];
        acc += m.accuracy[0];
        q += static_cast<double>(m.q_local[0] + m.q_remote[0]);
        arr += static_cast<double>(m.arrivals[0]);
    }
    const double n = static_cast<double>(r.trace.size());
    EXPECT_NEAR(r.summary.avg_power_w, p / n, 1e-15);
    EXPECT_NEAR(r.summary.avg_accuracy, acc / n, 1e-12);
    EXPECT_NEAR(r.summary.avg_delay_s, cfg.system.slot_s * q / arr, 1e-12);
    EXPECT_DOUBLE_EQ(r.summary.final_z[0], r.trace.back().z[0]);
    // Telescoping the virtual queue: average accuracy >= G_th - Z(T) / (eps T).
    EXPECT_GE(r.summary.avg_accuracy, r.summary.accuracy_bound - 1e-12);
    EXPECT_NEAR(r.summary.accuracy_bound, 0.85 - r.trace.back().z[0] / (cfg.tradeoff.epsilon * n), 1e-12);
}

TEST(Baselines, FixedLevels) {
    const auto cfg = small_config();
    for (const auto& m : run_baseline(cfg, Baseline::max_compression, 1, 200).trace) ASSERT_EQ(m.level[0], 1);
    for (const auto& m : run_baseline(cfg, Baseline::no_compression, 1, 200).trace) ASSERT_EQ(m.level[0], 100);
    EXPECT_EQ(parse_baseline("random_compression"), Baseline::random_compression);
    EXPECT_THROW(parse_baseline("best"), std::invalid_argument);
}

TEST(Baselines, SameSeedSameTrace) {
    const auto cfg = small_config();
    const auto a = run_baseline(cfg, Baseline::random_compression, 3, 300);
    const auto b = run_baseline(cfg, Baseline::random_compression, 3, 300);
    for (std::size_t t = 0; t < a.trace.size(); ++t) {
        ASSERT_EQ(a.trace[t].reward, b.trace[t].reward);
        ASSERT_EQ(a.trace[t].level, b.trace[t].level);
    }
}

TEST(Training, DeterministicAndCountsUpdates) {
    const auto cfg = small_config();
    const auto a = run_training(cfg, 1000, 2);
    const auto b = run_training(cfg, 1000, 2);
    EXPECT_EQ(a.steps, 1000);
    EXPECT_EQ(a.updates, 4);  // 256 + 256 + 256 + 232
    EXPECT_EQ(a.episode_rewards.size(), 2u);
    EXPECT_EQ(a.agent.theta, b.agent.theta);
    EXPECT_EQ(a.step_rewards, b.step_rewards);
    const auto c = run_training(cfg, 1000, 3);
    EXPECT_NE(a.agent.theta, c.agent.theta);
}
