#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "risedge/accuracy.hpp"

using namespace risedge;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path.string();
}

}  // namespace

TEST(DefaultTables, EndpointsAndMean) {
    const auto m = CompressionModel::defaults();
    ASSERT_EQ(m.size(), 100u);
    EXPECT_EQ(m.min_level(), 1);
    EXPECT_EQ(m.max_level(), 100);
    EXPECT_DOUBLE_EQ(m.accuracy_of(1), 0.20);
    EXPECT_DOUBLE_EQ(m.accuracy_of(100), 0.92);
    EXPECT_DOUBLE_EQ(m.bits_per_pattern(1), 800.0);
    EXPECT_DOUBLE_EQ(m.bits_per_pattern(100), 24576.0);
    const auto& acc = m.accuracy_table();
    EXPECT_NEAR(std::accumulate(acc.begin(), acc.end(), 0.0) / 100.0, 0.69, 1e-9);
    for (std::size_t i = 1; i < acc.size(); ++i) {
        EXPECT_GT(acc[i], acc[i - 1]);
        EXPECT_GT(m.bits_table()[i], m.bits_table()[i - 1]);
    }
}

TEST(DefaultTables, ThresholdIsReachable) {
    // 0.85 must sit strictly inside the table so the constraint can be met.
    const auto m = CompressionModel::defaults();
    int first = -1;
    for (int c = 1; c <= 100; ++c)
        if (m.accuracy_of(c) >= 0.85) {
            first = c;
            break;
        }
    EXPECT_GT(first, 1);
    EXPECT_LT(first, 100);
}

TEST(CompressionModel, LookupAndValidation) {
    const CompressionModel m({2, 5, 9}, {100, 200, 300}, {0.1, 0.5, 0.9});
    EXPECT_EQ(m.index_of(5), 1u);
    EXPECT_DOUBLE_EQ(m.accuracy_of(9), 0.9);
    EXPECT_THROW(m.index_of(3), std::out_of_range);
    EXPECT_THROW(CompressionModel({1, 1}, {1, 2}, {0.1, 0.2}), std::invalid_argument);
    EXPECT_THROW(CompressionModel({1, 2}, {2, 1}, {0.1, 0.2}), std::invalid_argument);
    EXPECT_THROW(CompressionModel({1, 2}, {1, 2}, {0.3, 0.2}), std::invalid_argument);
    EXPECT_THROW(CompressionModel({1, 2}, {1, 2}, {0.3, 1.2}), std::invalid_argument);
    EXPECT_THROW(CompressionModel({1}, {0}, {0.3}), std::invalid_argument);
    EXPECT_THROW(CompressionModel({}, {}, {}), std::invalid_argument);
}

TEST(CompressionModel, FromCsv) {
    const auto bits = write_temp("risedge_bits.csv", "level,bits\n1,1000\n2,2000\n3,3000\n");
    const auto acc = write_temp("risedge_acc.csv", "level,accuracy\n1,0.3\n2,0.6\n3,0.8\n");
    const auto m = CompressionModel::from_csv(bits, acc, {1, 2, 3});
    EXPECT_DOUBLE_EQ(m.bits_per_pattern(2), 2000.0);
    EXPECT_DOUBLE_EQ(m.accuracy_of(3), 0.8);
    EXPECT_THROW(CompressionModel::from_csv(bits, acc, {1, 2, 3, 4}), std::invalid_argument);
    EXPECT_THROW(CompressionModel::from_csv("/nonexistent.csv", acc, {1}), std::invalid_argument);
}

TEST(SampledAccuracy, ConvergesToTable) {
    const auto m = CompressionModel::defaults();
    Rng rng(3);
    double s = 0.0;
    for (int i = 0; i < 200; ++i) s += sampled_accuracy(m, 50, 1000, rng);
    EXPECT_NEAR(s / 200.0, m.accuracy_of(50), 0.005);
    EXPECT_DOUBLE_EQ(sampled_accuracy(m, 50, 0, rng), m.accuracy_of(50));
}
