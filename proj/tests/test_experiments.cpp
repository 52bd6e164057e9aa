#include <doctest.h>

#include <filesystem>
#include <set>

#include "recall/experiments.hpp"
#include "recall/serialization.hpp"
#include "test_util.hpp"

using namespace recall;
namespace fs = std::filesystem;

namespace {

// Tiny end-to-end config: small inline world, short training.
ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.inline_world = recall::testing::small_world_config();
    cfg.splits = SplitSizes{100, 20, 60};
    cfg.trainer = "grpo";
    cfg.train.epochs = 1;
    cfg.seeds = {0, 1};
    cfg.eval_plan = {"greedy", "repair"};
    cfg.out_dir = out_dir;
    return cfg;
}

}  // namespace

TEST_CASE("experiment config round-trips through toml") {
    ExperimentConfig cfg;
    cfg.preset = "nq_like";
    cfg.trainer = "rft";
    cfg.verifier_mode = "exact";
    cfg.seeds = {3, 7};
    cfg.eval_plan = {"greedy", "passk"};
    cfg.train.epochs = 2;
    cfg.train.kl_beta = 0.01;
    const ExperimentConfig back = ExperimentConfig::from_toml(cfg.to_toml());
    CHECK(back.preset == "nq_like");
    CHECK(back.trainer == "rft");
    CHECK(back.verifier_mode == "exact");
    CHECK(back.seeds == std::vector<std::uint64_t>{3, 7});
    CHECK(back.eval_plan == std::vector<std::string>{"greedy", "passk"});
    CHECK(back.train.epochs == 2);
    CHECK(back.train.kl_beta == doctest::Approx(0.01));
}

TEST_CASE("experiment config accepts the json alternative") {
    const ExperimentConfig cfg = ExperimentConfig::from_json(R"({
        "experiment": {"preset": "trivia_like", "trainer": "sft",
                       "seeds": [1], "eval": ["greedy"]},
        "train": {"epochs": 3}
    })");
    CHECK(cfg.preset == "trivia_like");
    CHECK(cfg.trainer == "sft");
    CHECK(cfg.train.epochs == 3);
}

TEST_CASE("experiment config validation rejects bad fields") {
    ExperimentConfig cfg;
    cfg.preset = "nq_like";
    cfg.trainer = "alchemy";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.trainer = "grpo";
    cfg.seeds.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.seeds = {0};
    cfg.preset = "unknown_world";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.preset.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no preset, no inline world
}

TEST_CASE("make_world returns deduplicated splits") {
    const WorldBundle b = make_world(get_preset("trivia_like"), 2);
    std::set<std::pair<int, int>> train_keys;
    for (int q : b.splits.train)
        train_keys.insert({b.universe->facts[q].subject,
                           b.universe->facts[q].relation});
    for (int q : b.splits.test)
        CHECK(!train_keys.count({b.universe->facts[q].subject,
                                 b.universe->facts[q].relation}));
}

TEST_CASE("dispatch_trainer rejects unknown trainers") {
    auto u = recall::testing::micro_universe();
    RecallPolicy policy(u, {});
    const Verifier sem(u, VerifierMode::semantic);
    TrainConfig cfg;
    CHECK_THROWS_AS(
        dispatch_trainer("bogus", policy, {0}, {1}, sem, cfg, {{}, {}}),
        ConfigError);
}

TEST_CASE("run_experiment writes the full artifact contract per seed") {
    const fs::path out = fs::temp_directory_path() / "recall_run_test";
    fs::remove_all(out);
    const ExperimentConfig cfg = tiny_config(out.string());
    const RunSummary summary = run_experiment(cfg);
    REQUIRE(summary.per_seed.size() == 2);
    CHECK(fs::exists(out / "config.toml"));
    CHECK(fs::exists(out / "summary.json"));
    for (const std::uint64_t seed : {0ull, 1ull}) {
        const fs::path dir = out / ("seed_" + std::to_string(seed));
        CHECK_NOTHROW(validate_run_dir(dir.string()));
        CHECK(fs::exists(dir / "repair.csv"));
    }
    // the config snapshot reproduces the run exactly
    const ExperimentConfig snapshot = ExperimentConfig::from_file(
        (out / "config.toml").string());
    const std::string summary_bytes =
        read_text_file((out / "summary.json").string());
    fs::remove_all(out);
    const RunSummary again = run_experiment(snapshot);
    CHECK(read_text_file((out / "summary.json").string()) == summary_bytes);
    CHECK(again.mean_post_accuracy == summary.mean_post_accuracy);
    fs::remove_all(out);
}

TEST_CASE("validate_run_dir flags missing artifacts") {
    const fs::path dir = fs::temp_directory_path() / "recall_incomplete_run";
    fs::remove_all(dir);
    fs::create_directories(dir / "seed_0");
    CHECK_THROWS(validate_run_dir((dir / "seed_0").string()));
    fs::remove_all(dir);
}

TEST_CASE("suite names cover the documented exhibits") {
    const auto names = suite_names();
    for (const char* want :
         {"main_table", "dynamics", "voting", "rl_algo", "transfer", "repair",
          "passk", "attribution", "reward_dynamics", "reward_ablation"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    CHECK_THROWS(reproduce("not_a_suite", "/tmp/recall_nowhere"));
}
