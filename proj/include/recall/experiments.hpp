#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recall/eval.hpp"
#include "recall/presets.hpp"
#include "recall/trainers.hpp"

namespace recall {

struct SplitSizes {
    int train = 0;
    int validation = 0;
    int test = 0;
};

struct ExperimentConfig {
    std::string preset;                      // named preset, or
    std::optional<WorldConfig> inline_world; // inline world definition
    std::optional<SplitSizes> splits;        // defaults from the preset
    std::string trainer = "grpo";            // grpo|ppo|sft|rft|dpo|none
    TrainConfig train;
    std::string verifier_mode = "semantic";
    std::vector<std::string> eval_plan = {"greedy"};  // +passk, voting, repair
    std::vector<std::uint64_t> seeds = {0};
    std::string out_dir = "runs/experiment";
    std::string presets_dir;

    static ExperimentConfig from_file(const std::string& path);  // .toml/.json
    static ExperimentConfig from_toml(const std::string& text);
    static ExperimentConfig from_json(const std::string& text);
    std::string to_toml() const;  // reproducible snapshot
    void validate() const;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    double pre_accuracy = 0.0;
    double post_accuracy = 0.0;
    EvalReport report;
};

struct RunSummary {
    std::vector<SeedOutcome> per_seed;
    double mean_pre_accuracy = 0.0;
    double mean_post_accuracy = 0.0;
};

// generate -> split -> dedup -> (profile) -> train -> eval, per seed;
// writes config snapshot, checkpoints, dynamics CSV, and report JSON.
RunSummary run_experiment(const ExperimentConfig& config);

// Asserts the artifact contract for one seed directory.
void validate_run_dir(const std::string& dir);

std::vector<std::string> suite_names();
void reproduce(const std::string& suite, const std::string& out_dir,
               const std::vector<std::uint64_t>& seeds = {0, 1, 2, 3, 4},
               const std::string& presets_dir = "");

// ---- building blocks shared by suites and the acceptance harness ----

struct WorldBundle {
    std::shared_ptr<const FactUniverse> universe;
    DatasetSplits splits;  // test already deduplicated against train
};

WorldBundle make_world(const Preset& preset, std::uint64_t seed);

DynamicsLog dispatch_trainer(const std::string& name, RecallPolicy& policy,
                             const std::vector<int>& train_queries,
                             const std::vector<int>& validation_queries,
                             const Verifier& verifier, const TrainConfig& cfg,
                             const EvalSets& evals);

}  // namespace recall
