#pragma once

// Experiment configuration: one JSON document, every field optional with the
// defaults below, unknown keys rejected. Units are SI with the unit in the
// key name; dB quantities carry a _db / _dbm suffix.

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "risedge/accuracy.hpp"
#include "risedge/agent.hpp"
#include "risedge/channel.hpp"
#include "risedge/dpp.hpp"
#include "risedge/queueing.hpp"

namespace risedge {

struct SystemParams {
    double slot_s = 0.01;
    double max_power_w = 0.1;  // P_k, same for every device
    double cpu_max_hz = 3.6e9;
    double load_cycles = 5.6e6;  // w_k, CPU cycles per inference

    void validate() const {
        if (!(slot_s > 0.0)) throw std::invalid_argument("system.slot_s must be positive");
        if (!(max_power_w > 0.0)) throw std::invalid_argument("system.max_power_w must be positive");
        if (!(cpu_max_hz > 0.0)) throw std::invalid_argument("system.cpu_max_hz must be positive");
        if (!(load_cycles > 0.0)) throw std::invalid_argument("system.load_cycles must be positive");
    }
};

struct CompressionSpec {
    int level_min = 1;
    int level_max = 100;
    std::string bits_table_csv;      // empty: built-in table
    std::string accuracy_table_csv;  // empty: built-in table
};

struct EpisodeConfig {
    int length = 1500;
    bool randomize_position = true;
};

struct TrainingConfig {
    std::int64_t total_steps = 1'000'000;
};

struct ExperimentConfig {
    SystemParams system;
    ChannelConfig channel;
    ArrivalProcess arrivals;
    CompressionSpec compression;
    CompressionModel model = CompressionModel::defaults();
    TradeoffConfig tradeoff{1e5, 1.0, {0.85}};
    EpisodeConfig episode;
    TrainingConfig training;
    PpoConfig ppo;
    double queue_scale = 100.0;
    double virtual_queue_scale = 100.0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    int devices() const { return channel.num_devices; }

    void validate() const {
        system.validate();
        channel.validate();
        arrivals.validate();
        tradeoff.validate(static_cast<std::size_t>(channel.num_devices));
        ppo.validate();
        if (episode.length < 1) throw std::invalid_argument("episode.length must be >= 1");
        if (training.total_steps < 0) throw std::invalid_argument("training.total_steps must be nonnegative");
        if (!(queue_scale > 0.0) || !(virtual_queue_scale > 0.0))
            throw std::invalid_argument("observation scales must be positive");
    }

    /// Rebuilds the compression tables from `compression`.
    void resolve_model() {
        if (compression.level_min > compression.level_max)
            throw std::invalid_argument("compression.level_min exceeds compression.level_max");
        std::vector<int> levels;
        for (int c = compression.level_min; c <= compression.level_max; ++c) levels.push_back(c);
        if (compression.bits_table_csv.empty() && compression.accuracy_table_csv.empty()) {
            if (compression.level_min != 1 || compression.level_max != 100)
                throw std::invalid_argument("compression: the built-in tables cover levels 1..100 only");
            model = CompressionModel::defaults();
            return;
        }
        if (compression.bits_table_csv.empty() || compression.accuracy_table_csv.empty())
            throw std::invalid_argument("compression: provide both bits_table_csv and accuracy_table_csv");
        model = CompressionModel::from_csv(compression.bits_table_csv, compression.accuracy_table_csv, levels);
    }
};

namespace detail {

/// Walks one JSON object, remembering which keys were read so leftovers can
/// be reported with their full path.
class JsonSection {
public:
    JsonSection(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw std::invalid_argument(where() + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        used_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(field(key) + ": " + e.what());
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    JsonSection child(const char* key) {
        used_.insert(key);
        static const nlohmann::json empty = nlohmann::json::object();
        auto it = j_.find(key);
        return JsonSection(it == j_.end() || it->is_null() ? empty : *it, field(key));
    }

    const nlohmann::json* raw(const char* key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw std::invalid_argument(field(it.key().c_str()) + ": unknown key");
    }

    std::string field(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? std::string("<root>") : path_; }

    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline void read_link(JsonSection s, LinkParams& l) {
    s.get("attenuation_db", l.attenuation_db);
    s.get("rice_factor_db", l.rice_factor_db);
    s.finish();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    detail::JsonSection root(j, "");
    root.get("seed", cfg.seed);
    root.get("output_dir", cfg.output_dir);
    {
        auto s = root.child("system");
        s.get("slot_s", cfg.system.slot_s);
        s.get("max_power_w", cfg.system.max_power_w);
        s.get("cpu_max_hz", cfg.system.cpu_max_hz);
        s.get("load_cycles", cfg.system.load_cycles);
        s.finish();
    }
    {
        auto s = root.child("channel");
        auto& c = cfg.channel;
        s.get("num_devices", c.num_devices);
        s.get("antennas_device", c.antennas_device);
        s.get("antennas_ap", c.antennas_ap);
        s.get("ris_elements", c.ris_elements);
        s.get("bandwidth_hz", c.bandwidth_hz);
        s.get("noise_power_dbm", c.noise_power_dbm);
        s.get("carrier_hz", c.carrier_hz);
        detail::read_link(s.child("device_ris"), c.device_ris);
        detail::read_link(s.child("ris_ap"), c.ris_ap);
        detail::read_link(s.child("direct"), c.direct);
        s.get("direct_link_present", c.direct_link_present);
        s.get("max_displacement_m", c.max_displacement_m);
        s.get("pathloss_exponent", c.pathloss_exponent);
        s.finish();
    }
    {
        auto s = root.child("arrivals");
        s.get("mean_per_slot", cfg.arrivals.mean_per_slot);
        std::string law = to_string(cfg.arrivals.law);
        s.get("law", law);
        try {
            cfg.arrivals.law = parse_arrival_law(law);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(s.field("law") + ": " + e.what());
        }
        s.finish();
    }
    {
        auto s = root.child("compression");
        s.get("level_min", cfg.compression.level_min);
        s.get("level_max", cfg.compression.level_max);
        s.get("bits_table_csv", cfg.compression.bits_table_csv);
        s.get("accuracy_table_csv", cfg.compression.accuracy_table_csv);
        s.finish();
    }
    {
        auto s = root.child("tradeoff");
        s.get("v", cfg.tradeoff.v);
        s.get("epsilon", cfg.tradeoff.epsilon);
        if (const auto* th = s.raw("accuracy_threshold"); th && !th->is_null()) {
            if (th->is_number()) {
                cfg.tradeoff.thresholds = {th->get<double>()};
            } else if (th->is_array()) {
                cfg.tradeoff.thresholds = th->get<std::vector<double>>();
            } else {
                throw std::invalid_argument(s.field("accuracy_threshold") + ": expected a number or an array");
            }
        }
        s.finish();
    }
    {
        auto s = root.child("episode");
        s.get("length", cfg.episode.length);
        s.get("randomize_position", cfg.episode.randomize_position);
        s.finish();
    }
    {
        auto s = root.child("training");
        s.get("total_steps", cfg.training.total_steps);
        s.finish();
    }
    {
        auto s = root.child("ppo");
        auto& p = cfg.ppo;
        s.get("hidden_layers", p.hidden_layers);
        s.get("hidden_units", p.hidden_units);
        s.get("gamma", p.gamma);
        s.get("gae_lambda", p.gae_lambda);
        s.get("clip_ratio", p.clip_ratio);
        s.get("learning_rate", p.learning_rate);
        s.get("epochs", p.epochs);
        s.get("minibatch", p.minibatch);
        s.get("entropy_coef", p.entropy_coef);
        s.get("value_coef", p.value_coef);
        s.get("horizon", p.horizon);
        s.get("max_grad_norm", p.max_grad_norm);
        s.get("init_log_std", p.init_log_std);
        s.get("normalize_advantages", p.normalize_advantages);
        s.get("normalize_rewards", p.normalize_rewards);
        s.finish();
    }
    {
        auto s = root.child("observation");
        s.get("queue_scale", cfg.queue_scale);
        s.get("virtual_queue_scale", cfg.virtual_queue_scale);
        s.finish();
    }
    root.finish();

    // A single threshold applies to every device.
    if (cfg.tradeoff.thresholds.size() == 1 && cfg.channel.num_devices > 1)
        cfg.tradeoff.thresholds.assign(static_cast<std::size_t>(cfg.channel.num_devices), cfg.tradeoff.thresholds[0]);

    cfg.resolve_model();
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

/// The fully resolved configuration (seed and output directory excluded).
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    auto link = [](const LinkParams& l) { return json{{"attenuation_db", l.attenuation_db}, {"rice_factor_db", l.rice_factor_db}}; };
    const auto& c = cfg.channel;
    const auto& p = cfg.ppo;
    json j;
    j["system"] = {{"slot_s", cfg.system.slot_s},
                   {"max_power_w", cfg.system.max_power_w},
                   {"cpu_max_hz", cfg.system.cpu_max_hz},
                   {"load_cycles", cfg.system.load_cycles}};
    j["channel"] = {{"num_devices", c.num_devices},
                    {"antennas_device", c.antennas_device},
                    {"antennas_ap", c.antennas_ap},
                    {"ris_elements", c.ris_elements},
                    {"bandwidth_hz", c.bandwidth_hz},
                    {"noise_power_dbm", c.noise_power_dbm},
                    {"carrier_hz", c.carrier_hz},
                    {"device_ris", link(c.device_ris)},
                    {"ris_ap", link(c.ris_ap)},
                    {"direct", link(c.direct)},
                    {"direct_link_present", c.direct_link_present},
                    {"max_displacement_m", c.max_displacement_m},
                    {"pathloss_exponent", c.pathloss_exponent}};
    j["arrivals"] = {{"mean_per_slot", cfg.arrivals.mean_per_slot}, {"law", to_string(cfg.arrivals.law)}};
    j["compression"] = {{"level_min", cfg.compression.level_min},
                        {"level_max", cfg.compression.level_max},
                        {"bits_table_csv", cfg.compression.bits_table_csv},
                        {"accuracy_table_csv", cfg.compression.accuracy_table_csv}};
    j["tradeoff"] = {{"v", cfg.tradeoff.v}, {"epsilon", cfg.tradeoff.epsilon}, {"accuracy_threshold", cfg.tradeoff.thresholds}};
    j["episode"] = {{"length", cfg.episode.length}, {"randomize_position", cfg.episode.randomize_position}};
    j["training"] = {{"total_steps", cfg.training.total_steps}};
    j["ppo"] = {{"hidden_layers", p.hidden_layers},
                {"hidden_units", p.hidden_units},
                {"gamma", p.gamma},
                {"gae_lambda", p.gae_lambda},
                {"clip_ratio", p.clip_ratio},
                {"learning_rate", p.learning_rate},
                {"epochs", p.epochs},
                {"minibatch", p.minibatch},
                {"entropy_coef", p.entropy_coef},
                {"value_coef", p.value_coef},
                {"horizon", p.horizon},
                {"max_grad_norm", p.max_grad_norm},
                {"init_log_std", p.init_log_std},
                {"normalize_advantages", p.normalize_advantages},
                {"normalize_rewards", p.normalize_rewards}};
    j["observation"] = {{"queue_scale", cfg.queue_scale}, {"virtual_queue_scale", cfg.virtual_queue_scale}};
    return j;
}

/// FNV-1a over the canonical dump of the resolved configuration.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace risedge
