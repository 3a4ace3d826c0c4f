// risedge: train / evaluate / baseline / sweep entry points.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "risedge/risedge.hpp"

namespace fs = std::filesystem;
using namespace risedge;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::int64_t> steps;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "Experiment config (JSON); defaults apply when omitted")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "Run seed (overrides the config)");
    app->add_option("--out", f.out, "Output directory (overrides the config)");
}

ExperimentConfig resolve(const CommonFlags& f, std::uint64_t& seed, fs::path& out) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = load_config(f.config);
    } else {
        cfg.resolve_model();
        cfg.validate();
    }
    seed = f.seed.value_or(cfg.seed);
    out = f.out.empty() ? fs::path(cfg.output_dir) : fs::path(f.out);
    fs::create_directories(out);
    return cfg;
}

std::vector<double> parse_v_list(const std::string& s) {
    std::vector<double> vs;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw CLI::ValidationError("--v", "empty entry in V list");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--v", "'" + item + "' is not a number");
        }
        if (used != item.size() || !(v >= 0.0)) throw CLI::ValidationError("--v", "'" + item + "' is not a valid V");
        vs.push_back(v);
    }
    if (vs.empty()) throw CLI::ValidationError("--v", "no V values given");
    return vs;
}

void report(const std::string& tag, const RunSummary& s) {
    std::cout << tag << ": power " << s.avg_power_w << " W, delay " << s.avg_delay_s * 1e3 << " ms, accuracy "
              << s.avg_accuracy << ", mean reward " << s.mean_reward << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov/PPO controller for RIS-aided edge inference"};
    app.require_subcommand(1);

    CommonFlags train_f, eval_f, base_f, sweep_f;
    std::string eval_ckpt, base_policy, sweep_v_list;

    auto* train = app.add_subcommand("train", "Train a PPO agent and evaluate it on one episode");
    add_common(train, train_f);
    train->add_option("--steps", train_f.steps, "Training steps (overrides training.total_steps)")
        ->check(CLI::NonNegativeNumber);

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a saved checkpoint on one episode");
    add_common(evaluate, eval_f);
    evaluate->add_option("--checkpoint", eval_ckpt, "Checkpoint written by 'train'")
        ->required()
        ->check(CLI::ExistingFile);

    auto* baseline = app.add_subcommand("baseline", "Run a fixed compression baseline");
    add_common(baseline, base_f);
    baseline->add_option("--policy", base_policy, "max_compression | no_compression | random_compression")
        ->required()
        ->check(CLI::IsMember({"max_compression", "no_compression", "random_compression"}));

    auto* sweep = app.add_subcommand("sweep", "Train and evaluate one agent per V");
    add_common(sweep, sweep_f);
    sweep->add_option("--v", sweep_v_list, "Comma-separated V values, e.g. 1e5,3e6")->required();
    sweep->add_option("--steps", sweep_f.steps, "Training steps per V")->check(CLI::NonNegativeNumber);

    std::vector<double> v_values;
    try {
        app.parse(argc, argv);
        if (sweep->parsed()) v_values = parse_v_list(sweep_v_list);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        std::uint64_t seed = 0;
        fs::path out;
        if (train->parsed()) {
            auto cfg = resolve(train_f, seed, out);
            const auto steps = train_f.steps.value_or(cfg.training.total_steps);
            const auto hash = config_hash(cfg);
            const auto t0 = std::chrono::steady_clock::now();
            const auto trained = run_training(cfg, steps, seed);
            const auto eval = evaluate_agent(cfg, trained.agent, seed);
            const auto stem = run_stem("train", "ppo", seed, cfg.tradeoff.v);
            write_trace_csv((out / (stem + "_trace.csv")).string(), eval.trace, cfg.devices(), hash, seed, "ppo");
            write_training_curve((out / (stem + "_curve.csv")).string(), trained.episode_rewards, hash, seed);
            save_agent((out / (stem + ".ckpt")).string(), trained.agent, hash);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            write_summary_json((out / (stem + "_summary.json")).string(), eval.summary, cfg, seed, "ppo",
                               {{"training_steps", steps},
                                {"updates", trained.updates},
                                {"gradient_clip_events", trained.agent.grad_clip_events}});
            report("ppo (evaluation episode)", eval.summary);
            std::cerr << "trained " << steps << " steps in " << secs << " s\n";
        } else if (evaluate->parsed()) {
            auto cfg = resolve(eval_f, seed, out);
            const auto hash = config_hash(cfg);
            auto agent = initial_agent(cfg, seed);
            load_agent(eval_ckpt, agent, hash);
            const auto eval = evaluate_agent(cfg, agent, seed);
            const auto stem = run_stem("evaluate", "ppo", seed, cfg.tradeoff.v);
            write_trace_csv((out / (stem + "_trace.csv")).string(), eval.trace, cfg.devices(), hash, seed, "ppo");
            write_summary_json((out / (stem + "_summary.json")).string(), eval.summary, cfg, seed, "ppo",
                               {{"checkpoint", eval_ckpt}});
            report("ppo (evaluation episode)", eval.summary);
        } else if (baseline->parsed()) {
            auto cfg = resolve(base_f, seed, out);
            const auto hash = config_hash(cfg);
            const auto b = parse_baseline(base_policy);
            const auto run = run_baseline(cfg, b, seed);
            const auto stem = run_stem("baseline", base_policy, seed, cfg.tradeoff.v);
            write_trace_csv((out / (stem + "_trace.csv")).string(), run.trace, cfg.devices(), hash, seed, base_policy);
            write_summary_json((out / (stem + "_summary.json")).string(), run.summary, cfg, seed, base_policy);
            report(base_policy, run.summary);
        } else if (sweep->parsed()) {
            auto cfg = resolve(sweep_f, seed, out);
            const auto steps = sweep_f.steps.value_or(cfg.training.total_steps);
            const auto rows = sweep_v(cfg, v_values, seed, steps);
            for (const auto& r : rows) {
                ExperimentConfig c = cfg;
                c.tradeoff.v = r.v;
                write_summary_json((out / (run_stem("sweep", "ppo", seed, r.v) + "_summary.json")).string(), r.summary, c,
                                   seed, "ppo", {{"training_steps", steps}});
                std::ostringstream tag;
                tag << "V=" << r.v;
                report(tag.str(), r.summary);
            }
            write_frontier_csv((out / ("sweep_frontier_seed" + std::to_string(seed) + ".csv")).string(), rows, seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_FAILURE;
    }
    return EXIT_SUCCESS;
}
