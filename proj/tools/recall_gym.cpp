#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recall/experiments.hpp"
#include "recall/serialization.hpp"

namespace fs = std::filesystem;

namespace {

recall::ExperimentConfig load_config(const std::string& config_path,
                                     const std::string& preset,
                                     std::uint64_t seed, bool seed_set,
                                     const std::string& out) {
    recall::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = recall::ExperimentConfig::from_file(config_path);
    if (!preset.empty()) cfg.preset = preset;
    if (cfg.preset.empty() && !cfg.inline_world) cfg.preset = "nq_like";
    if (seed_set) cfg.seeds = {seed};
    if (!out.empty()) cfg.out_dir = out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recall-gym: synthetic factual-recall RL testbed"};
    app.require_subcommand(1);

    std::string config_path, preset, suite, out;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (.toml or .json)");
        cmd->add_option("--preset", preset, "world preset name");
        cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--out", out, "output directory");
    };

    CLI::App* generate = app.add_subcommand("generate", "generate a world and splits");
    add_common(generate);

    CLI::App* train = app.add_subcommand("train", "train a policy");
    add_common(train);
    std::string trainer;
    train->add_option("--trainer", trainer, "grpo|ppo|sft|rft|dpo");

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints in a run dir");
    add_common(eval_cmd);

    CLI::App* run = app.add_subcommand("run", "full pipeline: generate, train, eval");
    add_common(run);

    CLI::App* repro = app.add_subcommand("reproduce", "run a result suite");
    add_common(repro);
    repro->add_option("--suite", suite, "suite name")->required();

    CLI::App* validate = app.add_subcommand("validate", "check run artifacts");
    add_common(validate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            recall::ExperimentConfig cfg =
                load_config(config_path, preset, seed, seed_set, out);
            const recall::Preset p = recall::resolve_preset(
                cfg.preset.empty() ? "nq_like" : cfg.preset, cfg.presets_dir);
            const recall::WorldBundle bundle =
                recall::make_world(p, cfg.seeds.front());
            fs::create_directories(cfg.out_dir);
            recall::write_text_file(
                (fs::path(cfg.out_dir) / "universe.json").string(),
                recall::universe_to_json(*bundle.universe));
            recall::write_text_file(
                (fs::path(cfg.out_dir) / "splits.json").string(),
                recall::splits_to_json(bundle.splits));
            std::cout << "wrote " << cfg.out_dir << " (hash "
                      << bundle.universe->content_hash() << ")\n";
        } else if (train->parsed() || run->parsed()) {
            recall::ExperimentConfig cfg =
                load_config(config_path, preset, seed, seed_set, out);
            if (!trainer.empty()) cfg.trainer = trainer;
            if (run->parsed())
                cfg.eval_plan = {"greedy", "passk", "voting", "repair"};
            const recall::RunSummary summary = recall::run_experiment(cfg);
            std::cout << "test accuracy: " << summary.mean_pre_accuracy << " -> "
                      << summary.mean_post_accuracy << "\n";
        } else if (eval_cmd->parsed()) {
            recall::ExperimentConfig cfg =
                load_config(config_path, preset, seed, seed_set, out);
            cfg.trainer = "none";
            cfg.eval_plan = {"greedy", "passk", "voting", "repair"};
            const recall::RunSummary summary = recall::run_experiment(cfg);
            std::cout << "base test accuracy: " << summary.mean_pre_accuracy
                      << "\n";
        } else if (repro->parsed()) {
            recall::reproduce(suite, out.empty() ? "runs/reproduce" : out);
            std::cout << "suite " << suite << " done\n";
        } else if (validate->parsed()) {
            if (out.empty()) throw recall::ConfigError("validate needs --out DIR");
            for (const auto& entry : fs::directory_iterator(out)) {
                if (entry.is_directory() &&
                    entry.path().filename().string().rfind("seed_", 0) == 0)
                    recall::validate_run_dir(entry.path().string());
            }
            std::cout << "artifacts ok: " << out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
