#include "recall/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "recall/serialization.hpp"
#include "recall/toml.hpp"

namespace fs = std::filesystem;

namespace recall {

namespace {

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adaptive-moments" || name == "adam")
        return OptimizerKind::adaptive_moments;
    throw ConfigError("unknown optimizer: " + name);
}

std::string optimizer_to_string(OptimizerKind kind) {
    return kind == OptimizerKind::sgd ? "sgd" : "adaptive-moments";
}

}  // namespace

void ExperimentConfig::validate() const {
    if (preset.empty() && !inline_world)
        throw ConfigError("experiment config: preset or inline world required");
    if (!preset.empty()) resolve_preset(preset, presets_dir);  // throws if unknown
    if (seeds.empty()) throw ConfigError("experiment config: seeds must be nonempty");
    static const char* trainers[] = {"grpo", "ppo", "sft", "rft", "dpo", "none"};
    if (std::find(std::begin(trainers), std::end(trainers), trainer) ==
        std::end(trainers))
        throw ConfigError("experiment config: unknown trainer " + trainer);
    verifier_mode_from_string(verifier_mode);
    train.validate();
}

ExperimentConfig ExperimentConfig::from_toml(const std::string& text) {
    const toml::Document doc = toml::parse(text);
    ExperimentConfig cfg;
    if (const auto exp_it = doc.find("experiment"); exp_it != doc.end()) {
        const toml::Table& exp = exp_it->second;
        auto get_str = [&](const char* key, std::string& out) {
            if (const auto it = exp.find(key); it != exp.end())
                out = it->second.as_string();
        };
        get_str("preset", cfg.preset);
        get_str("trainer", cfg.trainer);
        get_str("verifier", cfg.verifier_mode);
        get_str("out_dir", cfg.out_dir);
        get_str("presets_dir", cfg.presets_dir);
        if (const auto it = exp.find("seeds"); it != exp.end()) {
            cfg.seeds.clear();
            for (const auto& v : it->second.as_array())
                cfg.seeds.push_back(static_cast<std::uint64_t>(v.as_int()));
        }
        if (const auto it = exp.find("eval"); it != exp.end()) {
            cfg.eval_plan.clear();
            for (const auto& v : it->second.as_array())
                cfg.eval_plan.push_back(v.as_string());
        }
    }
    if (doc.find("world") != doc.end())
        cfg.inline_world = world_config_from_toml_doc(doc);
    if (const auto it = doc.find("splits"); it != doc.end()) {
        SplitSizes sizes;
        sizes.train = static_cast<int>(it->second.at("train").as_int());
        sizes.validation = static_cast<int>(it->second.at("validation").as_int());
        sizes.test = static_cast<int>(it->second.at("test").as_int());
        cfg.splits = sizes;
    }
    if (const auto it = doc.find("train"); it != doc.end()) {
        const toml::Table& t = it->second;
        auto num = [&](const char* key, double& out) {
            if (const auto f = t.find(key); f != t.end()) out = f->second.as_double();
        };
        auto integer = [&](const char* key, int& out) {
            if (const auto f = t.find(key); f != t.end())
                out = static_cast<int>(f->second.as_int());
        };
        num("learning_rate", cfg.train.learning_rate);
        integer("batch_size", cfg.train.batch_size);
        integer("epochs", cfg.train.epochs);
        integer("group_size", cfg.train.group_size);
        num("kl_beta", cfg.train.kl_beta);
        num("clip_eps", cfg.train.clip_eps);
        num("rollout_temperature", cfg.train.rollout_temperature);
        num("delta_lr_scale", cfg.train.delta_lr_scale);
        integer("eval_every", cfg.train.eval_every);
        num("dpo_beta", cfg.train.dpo_beta);
        integer("dpo_candidates", cfg.train.dpo_candidates);
        integer("rft_max_iterations", cfg.train.rft_max_iterations);
        integer("rft_patience", cfg.train.rft_patience);
        if (const auto f = t.find("optimizer"); f != t.end())
            cfg.train.optimizer = optimizer_from_string(f->second.as_string());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    const auto& exp = doc.at("experiment");
    cfg.preset = exp.value("preset", std::string());
    cfg.trainer = exp.value("trainer", cfg.trainer);
    cfg.verifier_mode = exp.value("verifier", cfg.verifier_mode);
    cfg.out_dir = exp.value("out_dir", cfg.out_dir);
    cfg.presets_dir = exp.value("presets_dir", std::string());
    if (exp.contains("seeds"))
        cfg.seeds = exp["seeds"].get<std::vector<std::uint64_t>>();
    if (exp.contains("eval"))
        cfg.eval_plan = exp["eval"].get<std::vector<std::string>>();
    if (doc.contains("splits")) {
        SplitSizes sizes;
        sizes.train = doc["splits"].at("train").get<int>();
        sizes.validation = doc["splits"].at("validation").get<int>();
        sizes.test = doc["splits"].at("test").get<int>();
        cfg.splits = sizes;
    }
    if (doc.contains("train")) {
        const auto& t = doc["train"];
        cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.group_size = t.value("group_size", cfg.train.group_size);
        cfg.train.kl_beta = t.value("kl_beta", cfg.train.kl_beta);
        cfg.train.clip_eps = t.value("clip_eps", cfg.train.clip_eps);
        cfg.train.rollout_temperature =
            t.value("rollout_temperature", cfg.train.rollout_temperature);
        cfg.train.delta_lr_scale =
            t.value("delta_lr_scale", cfg.train.delta_lr_scale);
        cfg.train.eval_every = t.value("eval_every", cfg.train.eval_every);
        cfg.train.dpo_beta = t.value("dpo_beta", cfg.train.dpo_beta);
        cfg.train.dpo_candidates = t.value("dpo_candidates", cfg.train.dpo_candidates);
        cfg.train.rft_max_iterations =
            t.value("rft_max_iterations", cfg.train.rft_max_iterations);
        cfg.train.rft_patience = t.value("rft_patience", cfg.train.rft_patience);
        if (t.contains("optimizer"))
            cfg.train.optimizer =
                optimizer_from_string(t["optimizer"].get<std::string>());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    const std::string text = read_text_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return from_json(text);
    return from_toml(text);
}

std::string ExperimentConfig::to_toml() const {
    std::ostringstream out;
    out.precision(12);
    out << "[experiment]\n";
    if (!preset.empty()) out << "preset = \"" << preset << "\"\n";
    out << "trainer = \"" << trainer << "\"\n";
    out << "verifier = \"" << verifier_mode << "\"\n";
    out << "out_dir = \"" << out_dir << "\"\n";
    if (!presets_dir.empty()) out << "presets_dir = \"" << presets_dir << "\"\n";
    out << "seeds = [";
    for (std::size_t i = 0; i < seeds.size(); ++i)
        out << (i ? ", " : "") << seeds[i];
    out << "]\n";
    out << "eval = [";
    for (std::size_t i = 0; i < eval_plan.size(); ++i)
        out << (i ? ", " : "") << '"' << eval_plan[i] << '"';
    out << "]\n\n";
    if (inline_world) out << world_config_to_toml(*inline_world) << "\n";
    if (splits) {
        out << "[splits]\n";
        out << "train = " << splits->train << "\n";
        out << "validation = " << splits->validation << "\n";
        out << "test = " << splits->test << "\n\n";
    }
    out << "[train]\n";
    out << "learning_rate = " << train.learning_rate << "\n";
    out << "batch_size = " << train.batch_size << "\n";
    out << "epochs = " << train.epochs << "\n";
    out << "group_size = " << train.group_size << "\n";
    out << "kl_beta = " << train.kl_beta << "\n";
    out << "clip_eps = " << train.clip_eps << "\n";
    out << "rollout_temperature = " << train.rollout_temperature << "\n";
    out << "delta_lr_scale = " << train.delta_lr_scale << "\n";
    out << "eval_every = " << train.eval_every << "\n";
    out << "optimizer = \"" << optimizer_to_string(train.optimizer) << "\"\n";
    out << "dpo_beta = " << train.dpo_beta << "\n";
    out << "dpo_candidates = " << train.dpo_candidates << "\n";
    out << "rft_max_iterations = " << train.rft_max_iterations << "\n";
    out << "rft_patience = " << train.rft_patience << "\n";
    return out.str();
}

WorldBundle make_world(const Preset& preset, std::uint64_t seed) {
    WorldBundle bundle;
    bundle.universe = std::make_shared<FactUniverse>(
        generate_universe(preset.world, derive_seed(seed, 0x301)));
    bundle.splits = split_dataset(*bundle.universe, preset.train,
                                  preset.validation, preset.test,
                                  derive_seed(seed, 0x302));
    bundle.splits.test =
        deduplicate(bundle.splits.train, bundle.splits.test, *bundle.universe);
    return bundle;
}

DynamicsLog dispatch_trainer(const std::string& name, RecallPolicy& policy,
                             const std::vector<int>& train_queries,
                             const std::vector<int>& validation_queries,
                             const Verifier& verifier, const TrainConfig& cfg,
                             const EvalSets& evals) {
    if (name == "grpo")
        return train_grpo(policy, train_queries, verifier, cfg, evals);
    if (name == "ppo")
        return train_ppo(policy, train_queries, verifier, cfg, evals);
    if (name == "sft")
        return train_sft(policy, train_queries, verifier, cfg, evals);
    if (name == "rft")
        return train_rft(policy, train_queries, validation_queries, verifier,
                         cfg, evals);
    if (name == "dpo") {
        const auto pairs =
            build_dpo_pairs(policy, train_queries, verifier, cfg.dpo_candidates,
                            derive_seed(cfg.seed, 0xD11));
        return train_dpo(policy, pairs, cfg, evals, verifier);
    }
    if (name == "none") return {};
    throw ConfigError("unknown trainer: " + name);
}

namespace {

bool plan_has(const ExperimentConfig& cfg, const std::string& item) {
    return std::find(cfg.eval_plan.begin(), cfg.eval_plan.end(), item) !=
           cfg.eval_plan.end();
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    Preset preset;
    if (!config.preset.empty()) {
        preset = resolve_preset(config.preset, config.presets_dir);
    } else {
        preset.name = "inline";
        preset.world = *config.inline_world;
    }
    if (config.splits) {
        preset.train = config.splits->train;
        preset.validation = config.splits->validation;
        preset.test = config.splits->test;
    }

    fs::create_directories(config.out_dir);
    write_text_file((fs::path(config.out_dir) / "config.toml").string(),
                    config.to_toml());

    RunSummary summary;
    for (std::uint64_t seed : config.seeds) {
        const WorldBundle bundle = make_world(preset, seed);
        const Verifier verifier(bundle.universe,
                                verifier_mode_from_string(config.verifier_mode));
        const Verifier semantic(bundle.universe, VerifierMode::semantic);

        RecallPolicy policy = base_policy(bundle.universe, bundle.splits.train);
        const RecallPolicy pre = policy;

        const fs::path seed_dir =
            fs::path(config.out_dir) / ("seed_" + std::to_string(seed));
        fs::create_directories(seed_dir);
        save_checkpoint(pre, (seed_dir / "checkpoint_pre.json").string());

        TrainConfig train_cfg = config.train;
        train_cfg.seed = derive_seed(seed, 0x304);
        EvalSets evals{bundle.splits.train, bundle.splits.test};
        DynamicsLog log;
        if (config.trainer != "none")
            log = dispatch_trainer(config.trainer, policy, bundle.splits.train,
                                   bundle.splits.validation, verifier, train_cfg,
                                   evals);
        log.write_csv((seed_dir / "dynamics.csv").string());
        save_checkpoint(policy, (seed_dir / "checkpoint_post.json").string());

        SeedOutcome outcome;
        outcome.seed = seed;
        outcome.pre_accuracy = greedy_accuracy(pre, bundle.splits.test, semantic);
        outcome.post_accuracy =
            greedy_accuracy(policy, bundle.splits.test, semantic);
        outcome.report.greedy_acc = outcome.post_accuracy;
        outcome.report.seed = seed;
        outcome.report.universe_hash = bundle.universe->content_hash();
        if (plan_has(config, "passk")) {
            const auto ks = default_pass_at_k_budgets(256);
            outcome.report.pass_at_k_pre =
                pass_at_k_curve(pre, bundle.splits.test, semantic, 256, ks,
                                derive_seed(seed, 0x305));
            outcome.report.pass_at_k_post =
                pass_at_k_curve(policy, bundle.splits.test, semantic, 256, ks,
                                derive_seed(seed, 0x306));
            write_text_file((seed_dir / "passk.csv").string(),
                            outcome.report.passk_csv());
        }
        if (plan_has(config, "voting")) {
            outcome.report.voting_acc =
                voting_accuracy(pre, bundle.splits.test, semantic, 32,
                                derive_seed(seed, 0x307));
        }
        if (plan_has(config, "repair")) {
            const AccessibilityProfile profile =
                measure_accessibility(pre, bundle.splits.test, 128, 1.0,
                                      derive_seed(seed, 0x308));
            outcome.report.repair = repair_rate(pre, policy, bundle.splits.test,
                                                semantic, profile);
            write_text_file((seed_dir / "repair.csv").string(),
                            outcome.report.repair_csv());
        }
        write_text_file((seed_dir / "report.json").string(),
                        outcome.report.to_json());
        validate_run_dir(seed_dir.string());
        summary.per_seed.push_back(std::move(outcome));
    }

    for (const auto& outcome : summary.per_seed) {
        summary.mean_pre_accuracy += outcome.pre_accuracy;
        summary.mean_post_accuracy += outcome.post_accuracy;
    }
    summary.mean_pre_accuracy /= static_cast<double>(summary.per_seed.size());
    summary.mean_post_accuracy /= static_cast<double>(summary.per_seed.size());

    nlohmann::json doc;
    doc["mean_pre_accuracy"] = summary.mean_pre_accuracy;
    doc["mean_post_accuracy"] = summary.mean_post_accuracy;
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& outcome : summary.per_seed)
        seeds.push_back({{"seed", outcome.seed},
                         {"pre_accuracy", outcome.pre_accuracy},
                         {"post_accuracy", outcome.post_accuracy}});
    doc["per_seed"] = std::move(seeds);
    write_text_file((fs::path(config.out_dir) / "summary.json").string(),
                    doc.dump(2));
    return summary;
}

void validate_run_dir(const std::string& dir) {
    for (const char* name : {"checkpoint_pre.json", "checkpoint_post.json",
                             "dynamics.csv", "report.json"}) {
        if (!fs::exists(fs::path(dir) / name))
            throw std::runtime_error("run artifact missing: " +
                                     (fs::path(dir) / name).string());
    }
    if (!fs::exists(fs::path(dir).parent_path() / "config.toml"))
        throw std::runtime_error("run artifact missing: config.toml");
}

// ------------------------------ suites ------------------------------

namespace {

struct TrainedRun {
    WorldBundle bundle;
    RecallPolicy pre;
    RecallPolicy post;
    DynamicsLog log;

    TrainedRun(WorldBundle b, RecallPolicy pre_policy, RecallPolicy post_policy,
               DynamicsLog l)
        : bundle(std::move(b)),
          pre(std::move(pre_policy)),
          post(std::move(post_policy)),
          log(std::move(l)) {}
};

TrainedRun run_trainer_on_world(const Preset& preset, std::uint64_t seed,
                                const std::string& trainer,
                                VerifierMode reward_mode,
                                const TrainConfig& base_cfg,
                                std::optional<std::vector<int>> train_override =
                                    std::nullopt,
                                std::optional<WorldBundle> bundle_override =
                                    std::nullopt) {
    WorldBundle bundle =
        bundle_override ? std::move(*bundle_override) : make_world(preset, seed);
    const std::vector<int>& train_ids =
        train_override ? *train_override : bundle.splits.train;
    const Verifier verifier(bundle.universe, reward_mode);
    RecallPolicy policy = base_policy(bundle.universe, bundle.splits.train);
    RecallPolicy pre = policy;
    TrainConfig cfg = base_cfg;
    cfg.seed = derive_seed(seed, 0x304);
    EvalSets evals{train_ids, bundle.splits.test};
    DynamicsLog log;
    if (trainer != "none")
        log = dispatch_trainer(trainer, policy, train_ids,
                               bundle.splits.validation, verifier, cfg, evals);
    return TrainedRun(std::move(bundle), std::move(pre), std::move(policy),
                      std::move(log));
}

double mean(const std::vector<double>& xs) {
    double total = 0.0;
    for (double x : xs) total += x;
    return xs.empty() ? 0.0 : total / static_cast<double>(xs.size());
}

void write_markdown(const fs::path& dir, const std::string& text) {
    fs::create_directories(dir);
    write_text_file((dir / "summary.md").string(), text);
}

void suite_main_table(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                      const std::string& presets_dir) {
    const std::vector<std::string> methods = {"none", "sft", "rft", "dpo", "grpo"};
    std::ostringstream md;
    md << "# Main results\n\n| Method |";
    for (const auto& name : preset_names()) md << ' ' << name << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < preset_names().size(); ++i) md << "---|";
    md << '\n';
    for (const auto& method : methods) {
        md << "| " << (method == "none" ? "base" : method) << " |";
        for (const auto& preset_name : preset_names()) {
            const Preset preset = resolve_preset(preset_name, presets_dir);
            std::vector<double> accs;
            for (std::uint64_t seed : seeds) {
                TrainedRun run = run_trainer_on_world(
                    preset, seed, method, VerifierMode::semantic, TrainConfig{});
                const Verifier semantic(run.bundle.universe, VerifierMode::semantic);
                accs.push_back(greedy_accuracy(run.post, run.bundle.splits.test,
                                               semantic));
            }
            md << ' ' << mean(accs) << " |";
        }
        md << '\n';
    }
    write_markdown(out, md.str());
}

void suite_dynamics(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                    const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    fs::create_directories(out);
    std::ostringstream md;
    md << "# Training dynamics (nq_like)\n\n| Method | final train acc | final test acc |\n|---|---|---|\n";
    for (const std::string method : {"sft", "rft", "dpo", "grpo"}) {
        std::vector<double> train_accs, test_accs;
        for (std::uint64_t seed : seeds) {
            TrainedRun run = run_trainer_on_world(preset, seed, method,
                                                  VerifierMode::semantic,
                                                  TrainConfig{});
            run.log.write_csv((out / ("dynamics_" + method + "_seed" +
                                      std::to_string(seed) + ".csv"))
                                  .string());
            const Verifier semantic(run.bundle.universe, VerifierMode::semantic);
            train_accs.push_back(
                greedy_accuracy(run.post, run.bundle.splits.train, semantic));
            test_accs.push_back(
                greedy_accuracy(run.post, run.bundle.splits.test, semantic));
        }
        md << "| " << method << " | " << mean(train_accs) << " | "
           << mean(test_accs) << " |\n";
    }
    write_markdown(out, md.str());
}

void suite_voting(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                  const std::string& presets_dir) {
    std::ostringstream md;
    md << "# Test-time scaling vs RL\n\n| Preset | base greedy | voting@32 | grpo |\n|---|---|---|---|\n";
    for (const auto& preset_name : preset_names()) {
        const Preset preset = resolve_preset(preset_name, presets_dir);
        std::vector<double> base_accs, vote_accs, rl_accs;
        for (std::uint64_t seed : seeds) {
            TrainedRun run = run_trainer_on_world(preset, seed, "grpo",
                                                  VerifierMode::semantic,
                                                  TrainConfig{});
            const Verifier semantic(run.bundle.universe, VerifierMode::semantic);
            base_accs.push_back(
                greedy_accuracy(run.pre, run.bundle.splits.test, semantic));
            vote_accs.push_back(voting_accuracy(run.pre, run.bundle.splits.test,
                                                semantic, 32,
                                                derive_seed(seed, 0x321)));
            rl_accs.push_back(
                greedy_accuracy(run.post, run.bundle.splits.test, semantic));
        }
        md << "| " << preset_name << " | " << mean(base_accs) << " | "
           << mean(vote_accs) << " | " << mean(rl_accs) << " |\n";
    }
    write_markdown(out, md.str());
}

void suite_rl_algo(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                   const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    std::vector<double> pre_accs, grpo_accs, ppo_accs;
    for (std::uint64_t seed : seeds) {
        TrainedRun grpo = run_trainer_on_world(preset, seed, "grpo",
                                               VerifierMode::semantic,
                                               TrainConfig{});
        TrainedRun ppo = run_trainer_on_world(preset, seed, "ppo",
                                              VerifierMode::semantic,
                                              TrainConfig{});
        const Verifier semantic(grpo.bundle.universe, VerifierMode::semantic);
        pre_accs.push_back(
            greedy_accuracy(grpo.pre, grpo.bundle.splits.test, semantic));
        grpo_accs.push_back(
            greedy_accuracy(grpo.post, grpo.bundle.splits.test, semantic));
        const Verifier semantic_b(ppo.bundle.universe, VerifierMode::semantic);
        ppo_accs.push_back(
            greedy_accuracy(ppo.post, ppo.bundle.splits.test, semantic_b));
    }
    std::ostringstream md;
    md << "# RL algorithms (nq_like)\n\n| Method | test acc |\n|---|---|\n"
       << "| pre-RL | " << mean(pre_accs) << " |\n"
       << "| GRPO | " << mean(grpo_accs) << " |\n"
       << "| PPO | " << mean(ppo_accs) << " |\n";
    write_markdown(out, md.str());
}

void suite_transfer(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                    const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    const std::vector<std::uint64_t> world_tags = {11, 22, 33};
    std::ostringstream md;
    md << "# Cross-world transfer gain (train row, eval column)\n\n|  |";
    for (std::uint64_t t : world_tags) md << " world" << t << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < world_tags.size(); ++i) md << "---|";
    md << '\n';
    for (std::uint64_t src : world_tags) {
        md << "| world" << src << " |";
        for (std::uint64_t dst : world_tags) {
            std::vector<double> gains;
            for (std::uint64_t seed : seeds) {
                TrainedRun run = run_trainer_on_world(
                    preset, derive_seed(src, seed), "grpo",
                    VerifierMode::semantic, TrainConfig{});
                WorldBundle target =
                    src == dst ? std::move(run.bundle)
                               : make_world(preset, derive_seed(dst, seed));
                if (src != dst)
                    target.splits.test = deduplicate(
                        run.bundle.splits.train, target.splits.test,
                        *run.bundle.universe, *target.universe);
                // carry the learned shared transform to the target world
                RecallPolicy pre_target = base_policy(target.universe, {});
                RecallPolicy post_target = pre_target;
                post_target.weights() = run.post.weights();
                const Verifier semantic(target.universe, VerifierMode::semantic);
                gains.push_back(
                    greedy_accuracy(post_target, target.splits.test, semantic) -
                    greedy_accuracy(pre_target, target.splits.test, semantic));
            }
            md << ' ' << mean(gains) << " |";
        }
        md << '\n';
    }
    write_markdown(out, md.str());
}

void suite_repair(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                  const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    std::map<int, std::vector<double>> rates;
    std::map<int, int> counts;
    fs::create_directories(out);
    for (std::uint64_t seed : seeds) {
        TrainedRun run = run_trainer_on_world(preset, seed, "grpo",
                                              VerifierMode::semantic,
                                              TrainConfig{});
        const Verifier semantic(run.bundle.universe, VerifierMode::semantic);
        const AccessibilityProfile profile = measure_accessibility(
            run.pre, run.bundle.splits.test, 128, 1.0, derive_seed(seed, 0x331));
        const auto bins = repair_rate(run.pre, run.post, run.bundle.splits.test,
                                      semantic, profile);
        for (const auto& [bin, stats] : bins) {
            rates[bin].push_back(stats.rate);
            counts[bin] += stats.n_queries;
        }
    }
    std::ostringstream csv;
    csv << "bin,n_queries,rate\n";
    std::ostringstream md;
    md << "# Repair rates by pre-RL accessibility (nq_like)\n\n| Bin | queries | repair rate |\n|---|---|---|\n";
    for (const auto& [bin, values] : rates) {
        csv << bin_label(bin) << ',' << counts[bin] << ',' << mean(values) << '\n';
        md << "| " << bin_label(bin) << " | " << counts[bin] << " | "
           << mean(values) << " |\n";
    }
    write_text_file((out / "repair.csv").string(), csv.str());
    write_markdown(out, md.str());
}

void suite_passk(const fs::path& out, const std::vector<std::uint64_t>& seeds,
                 const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    const std::vector<int> ks = default_pass_at_k_budgets(256);
    std::vector<double> pre_sum(ks.size(), 0.0), post_sum(ks.size(), 0.0);
    fs::create_directories(out);
    for (std::uint64_t seed : seeds) {
        TrainedRun run = run_trainer_on_world(preset, seed, "grpo",
                                              VerifierMode::semantic,
                                              TrainConfig{});
        const Verifier semantic(run.bundle.universe, VerifierMode::semantic);
        const auto pre = pass_at_k_curve(run.pre, run.bundle.splits.test,
                                         semantic, 256, ks,
                                         derive_seed(seed, 0x341));
        const auto post = pass_at_k_curve(run.post, run.bundle.splits.test,
                                          semantic, 256, ks,
                                          derive_seed(seed, 0x342));
        for (std::size_t i = 0; i < ks.size(); ++i) {
            pre_sum[i] += pre.values[i];
            post_sum[i] += post.values[i];
        }
    }
    std::ostringstream csv;
    csv << "k,pre,post\n";
    std::ostringstream md;
    md << "# Pass@k scaling (nq_like)\n\n| k | pre | post |\n|---|---|---|\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double pre = pre_sum[i] / seeds.size();
        const double post = post_sum[i] / seeds.size();
        csv << ks[i] << ',' << pre << ',' << post << '\n';
        md << "| " << ks[i] << " | " << pre << " | " << post << " |\n";
    }
    write_text_file((out / "passk.csv").string(), csv.str());
    write_markdown(out, md.str());
}

void suite_attribution(const fs::path& out,
                       const std::vector<std::uint64_t>& seeds,
                       const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    std::map<std::string, std::vector<double>> recovery;
    fs::create_directories(out);
    for (std::uint64_t seed : seeds) {
        const WorldBundle bundle = make_world(preset, seed);
        const Verifier semantic(bundle.universe, VerifierMode::semantic);
        RecallPolicy pre = base_policy(bundle.universe, bundle.splits.train);
        const double base_acc =
            greedy_accuracy(pre, bundle.splits.test, semantic);

        const AccessibilityProfile profile = measure_accessibility(
            pre, bundle.splits.train, 128, 1.0, derive_seed(seed, 0x351));
        const AccessibilityPartition part =
            partition_by_accessibility(profile, bundle.splits.train);

        auto train_on = [&](const std::vector<int>& subset) {
            TrainedRun run = run_trainer_on_world(
                preset, seed, "grpo", VerifierMode::semantic, TrainConfig{},
                subset, WorldBundle{bundle.universe, bundle.splits});
            return greedy_accuracy(run.post, run.bundle.splits.test, semantic);
        };

        const double full_acc = train_on(bundle.splits.train);
        const auto primary = downsample_balanced(
            {part.inaccessible, part.partially_accessible,
             part.highly_accessible},
            derive_seed(seed, 0x352));
        std::map<std::string, std::vector<int>> subsets;
        subsets["IA"] = primary[0];
        subsets["PA"] = primary[1];
        subsets["HA"] = primary[2];
        auto join = [](std::vector<int> a, const std::vector<int>& b) {
            a.insert(a.end(), b.begin(), b.end());
            return a;
        };
        const auto unions = downsample_balanced(
            {join(part.inaccessible, part.partially_accessible),
             join(part.inaccessible, part.highly_accessible),
             join(part.partially_accessible, part.highly_accessible)},
            derive_seed(seed, 0x353));
        subsets["IA+PA"] = unions[0];
        subsets["IA+HA"] = unions[1];
        subsets["PA+HA"] = unions[2];
        for (const auto& [name, subset] : subsets) {
            const double acc = train_on(subset);
            recovery[name].push_back(recovery_fraction(acc, base_acc, full_acc));
        }
    }
    std::ostringstream csv;
    csv << "subset,acc,recovery_fraction\n";
    std::ostringstream md;
    md << "# Attribution: recovery of full-data gain\n\n| Subset | recovery fraction |\n|---|---|\n";
    for (const auto& [name, values] : recovery) {
        csv << name << ",," << mean(values) << '\n';
        md << "| " << name << " | " << mean(values) << " |\n";
    }
    write_text_file((out / "attribution.csv").string(), csv.str());
    write_markdown(out, md.str());
}

void suite_reward_dynamics(const fs::path& out,
                           const std::vector<std::uint64_t>& seeds,
                           const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    fs::create_directories(out);
    std::vector<double> first_decile, last_decile;
    for (std::uint64_t seed : seeds) {
        const WorldBundle bundle = make_world(preset, seed);
        RecallPolicy pre = base_policy(bundle.universe, bundle.splits.train);
        const AccessibilityProfile profile = measure_accessibility(
            pre, bundle.splits.train, 128, 1.0, derive_seed(seed, 0x361));
        const AccessibilityPartition part =
            partition_by_accessibility(profile, bundle.splits.train);
        TrainedRun run = run_trainer_on_world(
            preset, seed, "grpo", VerifierMode::semantic, TrainConfig{},
            part.inaccessible, WorldBundle{bundle.universe, bundle.splits});
        run.log.write_csv(
            (out / ("reward_dynamics_seed" + std::to_string(seed) + ".csv"))
                .string());
        std::vector<double> rewards;
        for (const auto& e : run.log.entries)
            if (e.mean_reward >= 0.0) rewards.push_back(e.mean_reward);
        const std::size_t decile = std::max<std::size_t>(1, rewards.size() / 10);
        first_decile.push_back(mean({rewards.begin(), rewards.begin() + decile}));
        last_decile.push_back(mean({rewards.end() - decile, rewards.end()}));
    }
    std::ostringstream md;
    md << "# Reward dynamics on the inaccessible@128 subset\n\n"
       << "| first-decile mean reward | last-decile mean reward |\n|---|---|\n"
       << "| " << mean(first_decile) << " | " << mean(last_decile) << " |\n";
    write_markdown(out, md.str());
}

void suite_reward_ablation(const fs::path& out,
                           const std::vector<std::uint64_t>& seeds,
                           const std::string& presets_dir) {
    const Preset preset = resolve_preset("nq_like", presets_dir);
    std::vector<double> semantic_gain, exact_gain;
    for (std::uint64_t seed : seeds) {
        TrainedRun sem = run_trainer_on_world(preset, seed, "grpo",
                                              VerifierMode::semantic,
                                              TrainConfig{});
        TrainedRun em = run_trainer_on_world(preset, seed, "grpo",
                                             VerifierMode::exact, TrainConfig{});
        const Verifier judge_a(sem.bundle.universe, VerifierMode::semantic);
        const Verifier judge_b(em.bundle.universe, VerifierMode::semantic);
        semantic_gain.push_back(
            greedy_accuracy(sem.post, sem.bundle.splits.test, judge_a) -
            greedy_accuracy(sem.pre, sem.bundle.splits.test, judge_a));
        exact_gain.push_back(
            greedy_accuracy(em.post, em.bundle.splits.test, judge_b) -
            greedy_accuracy(em.pre, em.bundle.splits.test, judge_b));
    }
    std::ostringstream md;
    md << "# Training reward ablation (semantic evaluation)\n\n"
       << "| Reward | accuracy gain |\n|---|---|\n"
       << "| semantic | " << mean(semantic_gain) << " |\n"
       << "| exact match | " << mean(exact_gain) << " |\n";
    write_markdown(out, md.str());
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"main_table", "dynamics",  "voting",          "rl_algo",
            "transfer",   "repair",    "passk",           "attribution",
            "reward_dynamics", "reward_ablation"};
}

void reproduce(const std::string& suite, const std::string& out_dir,
               const std::vector<std::uint64_t>& seeds,
               const std::string& presets_dir) {
    const fs::path out = fs::path(out_dir) / suite;
    if (suite == "main_table") return suite_main_table(out, seeds, presets_dir);
    if (suite == "dynamics") return suite_dynamics(out, seeds, presets_dir);
    if (suite == "voting") return suite_voting(out, seeds, presets_dir);
    if (suite == "rl_algo") return suite_rl_algo(out, seeds, presets_dir);
    if (suite == "transfer") return suite_transfer(out, seeds, presets_dir);
    if (suite == "repair") return suite_repair(out, seeds, presets_dir);
    if (suite == "passk") return suite_passk(out, seeds, presets_dir);
    if (suite == "attribution") return suite_attribution(out, seeds, presets_dir);
    if (suite == "reward_dynamics")
        return suite_reward_dynamics(out, seeds, presets_dir);
    if (suite == "reward_ablation")
        return suite_reward_ablation(out, seeds, presets_dir);
    throw ConfigError("unknown suite: " + suite);
}

}  // namespace recall
