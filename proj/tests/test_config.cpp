#include <gtest/gtest.h>

#include "risedge/config.hpp"

using namespace risedge;
using nlohmann::json;

namespace {

std::string config_path(const char* name) { return std::string(RISEDGE_SOURCE_DIR) + "/configs/" + name; }

std::string error_of(const json& j) {
    try {
        config_from_json(j);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
    const auto cfg = config_from_json(json::object());
    EXPECT_DOUBLE_EQ(cfg.system.slot_s, 0.01);
    EXPECT_DOUBLE_EQ(cfg.system.max_power_w, 0.1);
    EXPECT_DOUBLE_EQ(cfg.system.cpu_max_hz, 3.6e9);
    EXPECT_EQ(cfg.channel.antennas_ap, 4);
    EXPECT_EQ(cfg.channel.ris_elements, 8);
    EXPECT_DOUBLE_EQ(cfg.channel.bandwidth_hz, 1e8);
    EXPECT_DOUBLE_EQ(cfg.channel.device_ris.attenuation_db, 62.60);
    EXPECT_DOUBLE_EQ(cfg.channel.ris_ap.attenuation_db, 66.34);
    EXPECT_DOUBLE_EQ(cfg.arrivals.mean_per_slot, 4.0);
    EXPECT_DOUBLE_EQ(cfg.tradeoff.v, 1e5);
    EXPECT_EQ(cfg.tradeoff.thresholds, std::vector<double>{0.85});
    EXPECT_EQ(cfg.episode.length, 1500);
    EXPECT_EQ(cfg.ppo.hidden_layers, 5);
    EXPECT_EQ(cfg.ppo.hidden_units, 32);
    EXPECT_EQ(cfg.ppo.horizon, 2048);
    EXPECT_EQ(cfg.model.size(), 100u);
}

TEST(Config, DefaultsFileMatchesBuiltIns) {
    const auto file = load_config(config_path("defaults.json"));
    EXPECT_EQ(config_hash(file), config_hash(ExperimentConfig{}));
    EXPECT_NO_THROW(load_config(config_path("toy.json")));
}

TEST(Config, UnknownKeysReportTheirPath) {
    EXPECT_NE(error_of({{"tradeof", json::object()}}).find("tradeof: unknown key"), std::string::npos);
    EXPECT_NE(error_of({{"channel", {{"ris_elemnts", 4}}}}).find("channel.ris_elemnts"), std::string::npos);
    EXPECT_NE(error_of({{"channel", {{"ris_ap", {{"gain", 1}}}}}}).find("channel.ris_ap.gain"), std::string::npos);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_NE(error_of({{"channel", {{"bandwidth_hz", -1e6}}}}).find("bandwidth"), std::string::npos);
    EXPECT_FALSE(error_of({{"tradeoff", {{"accuracy_threshold", 1.5}}}}).empty());
    EXPECT_FALSE(error_of({{"tradeoff", {{"epsilon", 0}}}}).empty());
    EXPECT_FALSE(error_of({{"arrivals", {{"law", "uniform"}}}}).empty());
    EXPECT_FALSE(error_of({{"channel", {{"num_devices", "two"}}}}).empty());
    EXPECT_FALSE(error_of({{"compression", {{"level_max", 50}}}}).empty());
    EXPECT_FALSE(error_of({{"episode", {{"length", 0}}}}).empty());
    EXPECT_THROW(load_config(config_path("does_not_exist.json")), std::invalid_argument);
}

TEST(Config, ScalarThresholdIsBroadcast) {
    const auto cfg = config_from_json({{"channel", {{"num_devices", 3}}}, {"tradeoff", {{"accuracy_threshold", 0.8}}}});
    EXPECT_EQ(cfg.tradeoff.thresholds, (std::vector<double>{0.8, 0.8, 0.8}));
    EXPECT_FALSE(error_of({{"channel", {{"num_devices", 3}}}, {"tradeoff", {{"accuracy_threshold", {0.8, 0.9}}}}}).empty());
}

TEST(Config, HashIgnoresSeedAndOutputOnly) {
    const auto a = config_from_json({{"seed", 1}, {"output_dir", "x"}});
    const auto b = config_from_json({{"seed", 2}, {"output_dir", "y"}});
    const auto c = config_from_json({{"tradeoff", {{"v", 3e6}}}});
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
    EXPECT_EQ(hash_hex(0x1f).size(), 16u);
}

TEST(Config, RoundTripsThroughJson) {
    const auto cfg = config_from_json({{"channel", {{"antennas_ap", 2}, {"direct_link_present", {true}}}},
                                       {"ppo", {{"learning_rate", 1e-3}}}});
    const auto again = config_from_json(config_to_json(cfg));
    EXPECT_EQ(config_hash(cfg), config_hash(again));
}
