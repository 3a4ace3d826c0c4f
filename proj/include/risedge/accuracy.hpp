#pragma once

// Compression level -> (bits per pattern, inference accuracy) lookup tables.
// The defaults stand in for a JPEG codec feeding a CIFAR-10 classifier: 100
// quality levels, 24576 bits for an uncompressed 32x32x3 image, accuracy
// 0.20 at the coarsest level and 0.92 uncompressed.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risedge/numerics.hpp"

namespace risedge {

class CompressionModel {
public:
    CompressionModel() = default;

    CompressionModel(std::vector<int> levels, std::vector<double> bits, std::vector<double> accuracy)
        : levels_(std::move(levels)), bits_(std::move(bits)), accuracy_(std::move(accuracy)) {
        validate();
    }

    /// Levels 1..100, affine bits from 800 to 24576 and a saturating logistic
    /// accuracy curve with the endpoints above whose uniform average is 0.69.
    static CompressionModel defaults() {
        constexpr int kLevels = 100;
        std::vector<int> levels(kLevels);
        std::vector<double> bits(kLevels);
        for (int i = 0; i < kLevels; ++i) {
            levels[i] = i + 1;
            bits[i] = std::round(800.0 + (24576.0 - 800.0) * i / (kLevels - 1));
        }
        return {levels, bits, calibrated_logistic(kLevels, 0.20, 0.92, 0.69, 0.1)};
    }

    /// Accuracy table lo + (hi - lo) * s(c) where s is a logistic in the level
    /// rescaled to s(1) = 0, s(n) = 1; the midpoint is solved by bisection so
    /// that the mean over all levels equals target_mean.
    static std::vector<double> calibrated_logistic(int n, double lo, double hi, double target_mean,
                                                   double slope) {
        auto table = [&](double mid) {
            auto sig = [&](double c) { return 1.0 / (1.0 + std::exp(-slope * (c - mid))); };
            const double s0 = sig(1.0);
            const double s1 = sig(static_cast<double>(n));
            std::vector<double> t(n);
            for (int i = 0; i < n; ++i) t[i] = lo + (hi - lo) * (sig(i + 1.0) - s0) / (s1 - s0);
            t.front() = lo;
            t.back() = hi;
            return t;
        };
        auto mean_of = [](const std::vector<double>& t) {
            double s = 0.0;
            for (double v : t) s += v;
            return s / static_cast<double>(t.size());
        };
        double a = -10.0 * n, b = 10.0 * n;  // mean decreases in the midpoint
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (mean_of(table(mid)) > target_mean)
                a = mid;
            else
                b = mid;
        }
        return table(0.5 * (a + b));
    }

    static CompressionModel from_csv(const std::string& bits_path, const std::string& accuracy_path,
                                     std::vector<int> levels) {
        auto bits_map = read_table(bits_path);
        auto acc_map = read_table(accuracy_path);
        std::vector<double> bits, acc;
        for (int level : levels) {
            auto b = bits_map.find(level);
            auto a = acc_map.find(level);
            if (b == bits_map.end())
                throw std::invalid_argument(bits_path + ": missing level " + std::to_string(level));
            if (a == acc_map.end())
                throw std::invalid_argument(accuracy_path + ": missing level " + std::to_string(level));
            bits.push_back(b->second);
            acc.push_back(a->second);
        }
        return {std::move(levels), std::move(bits), std::move(acc)};
    }

    const std::vector<int>& levels() const noexcept { return levels_; }
    std::size_t size() const noexcept { return levels_.size(); }

    std::size_t index_of(int level) const {
        auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
        if (it == levels_.end() || *it != level)
            throw std::out_of_range("compression level " + std::to_string(level) + " is not in the level set");
        return static_cast<std::size_t>(it - levels_.begin());
    }

    bool contains(int level) const { return std::binary_search(levels_.begin(), levels_.end(), level); }

    double bits_per_pattern(int level) const { return bits_[index_of(level)]; }
    double accuracy_of(int level) const { return accuracy_[index_of(level)]; }

    int min_level() const { return levels_.front(); }
    int max_level() const { return levels_.back(); }

    const std::vector<double>& bits_table() const noexcept { return bits_; }
    const std::vector<double>& accuracy_table() const noexcept { return accuracy_; }

private:
    void validate() const {
        if (levels_.empty()) throw std::invalid_argument("CompressionModel: empty level set");
        if (bits_.size() != levels_.size() || accuracy_.size() != levels_.size())
            throw std::invalid_argument("CompressionModel: tables must cover every level");
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (i > 0 && levels_[i] <= levels_[i - 1])
                throw std::invalid_argument("CompressionModel: levels must be strictly increasing");
            if (!(bits_[i] > 0.0)) throw std::invalid_argument("CompressionModel: bits must be positive");
            if (!(accuracy_[i] >= 0.0 && accuracy_[i] <= 1.0))
                throw std::invalid_argument("CompressionModel: accuracy must lie in [0,1]");
            if (i > 0 && bits_[i] < bits_[i - 1])
                throw std::invalid_argument("CompressionModel: bits table must be non-decreasing");
            if (i > 0 && accuracy_[i] < accuracy_[i - 1])
                throw std::invalid_argument("CompressionModel: accuracy table must be non-decreasing");
        }
    }

    static std::map<int, double> read_table(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open table " + path);
        std::map<int, double> out;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ss(line);
            int level;
            double value;
            if (!(ss >> level >> value)) {
                if (lineno == 1) continue;  // header
                throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'level,value'");
            }
            out[level] = value;
        }
        return out;
    }

    std::vector<int> levels_;
    std::vector<double> bits_;
    std::vector<double> accuracy_;
};

/// Fraction of `patterns` classified correctly when each one succeeds
/// independently with probability G(level).
inline double sampled_accuracy(const CompressionModel& model, int level, int patterns, Rng& rng) {
    if (patterns <= 0) return model.accuracy_of(level);
    std::binomial_distribution<int> d(patterns, model.accuracy_of(level));
    return static_cast<double>(d(rng)) / patterns;
}

}  // namespace risedge
