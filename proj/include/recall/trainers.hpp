#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recall/policy.hpp"
#include "recall/reward.hpp"

namespace recall {

struct TrainingAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OptimizerKind { sgd, adaptive_moments };

struct TrainConfig {
    double learning_rate = 1e-2;   // paper uses 1e-6 for LLM-scale nets
    int batch_size = 128;
    int epochs = 8;
    int group_size = 5;
    double kl_beta = 0.001;
    double clip_eps = 0.2;
    double rollout_temperature = 1.0;
    // Per-query delta rows take larger steps than the 7-dim shared transform:
    // their gradients are averaged per row (over the samples touching that
    // row) and scaled, the usual separate-learning-rate treatment for
    // tabular/embedding parameters.
    double delta_lr_scale = 300.0;
    std::uint64_t seed = 0;
    int eval_every = 8;            // steps between dynamics probes
    OptimizerKind optimizer = OptimizerKind::sgd;

    double dpo_beta = 0.1;
    int dpo_candidates = 16;
    int rft_max_iterations = 15;
    int rft_patience = 5;

    void validate() const;
};

// One query's rollout group: n samples sharing one reward standardization.
struct RolloutGroup {
    int query_id = 0;
    std::vector<int> forms;
    std::vector<double> old_log_probs;
    std::vector<int> rewards;
    std::vector<double> advantages;
};

struct DynamicsEntry {
    int step = 0;
    std::string phase;
    double mean_reward = 0.0;
    double train_acc = -1.0;  // negative = not probed at this step
    double test_acc = -1.0;
    double mean_kl = -1.0;
    double clip_frac = -1.0;
};

struct DynamicsLog {
    std::vector<DynamicsEntry> entries;
    void append(DynamicsEntry entry);
    void write_csv(const std::string& path) const;
    std::string to_csv() const;
};

// Queries probed for the periodic train/test accuracy rows of the log.
struct EvalSets {
    std::vector<int> train_probe;
    std::vector<int> test_probe;
};

struct StepStats {
    double mean_reward = 0.0;
    double mean_kl = 0.0;
    double clip_frac = 0.0;
};

// A_i = (r_i - mean) / max(std_pop, 1e-8); all-equal rewards -> exact zeros.
std::vector<double> grpo_advantages(const std::vector<int>& rewards);

// Accumulated ascent gradient over (w, delta rows).
struct ParamGrad {
    Weights w{};
    std::unordered_map<int, std::vector<double>> rows;

    std::vector<double>& row(int query, int vocab_n) {
        auto [it, inserted] = rows.try_emplace(query);
        if (inserted) it->second.assign(vocab_n, 0.0);
        return it->second;
    }
};

// Shared by all trainers. Gradients are ascent directions; minimizing
// trainers negate their loss gradient before applying.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate,
              double delta_lr_scale = 1.0);
    void ascend(RecallPolicy& policy, const ParamGrad& grad);

private:
    OptimizerKind kind_;
    double lr_;
    double delta_scale_;
    long long t_ = 0;
    Weights m_w_{};
    Weights v_w_{};
    std::unordered_map<int, std::vector<double>> m_rows_;
    std::unordered_map<int, std::vector<double>> v_rows_;
};

// One clipped-surrogate update over a batch of rollout groups:
// ascend mean_i[min(rho A, clip(rho, 1-eps, 1+eps) A)] - beta KL(pi || ref).
StepStats grpo_step(RecallPolicy& policy, const ReferencePolicy& ref,
                    const std::vector<RolloutGroup>& batch,
                    const TrainConfig& cfg, Optimizer& opt);

DynamicsLog train_grpo(RecallPolicy& policy, const std::vector<int>& train_queries,
                       const Verifier& verifier, const TrainConfig& cfg,
                       const EvalSets& evals);

// Same surrogate, but A_i = r_i - V(q) with V a per-query reward EMA
// (decay 0.9, init 0). No critic network: the task is a one-step bandit.
DynamicsLog train_ppo(RecallPolicy& policy, const std::vector<int>& train_queries,
                      const Verifier& verifier, const TrainConfig& cfg,
                      const EvalSets& evals);

DynamicsLog train_sft(RecallPolicy& policy, const std::vector<int>& train_queries,
                      const Verifier& verifier, const TrainConfig& cfg,
                      const EvalSets& evals);

DynamicsLog train_rft(RecallPolicy& policy, const std::vector<int>& train_queries,
                      const std::vector<int>& validation_queries,
                      const Verifier& verifier, const TrainConfig& cfg,
                      const EvalSets& evals);

struct DpoPair {
    int query_id = 0;
    int chosen_form = 0;
    int rejected_form = 0;
};

// chosen = gold canonical form; rejected = modal incorrect sample out of
// n_candidates draws (ties -> lowest form id). Queries with zero incorrect
// samples are dropped.
std::vector<DpoPair> build_dpo_pairs(const RecallPolicy& policy,
                                     const std::vector<int>& train_queries,
                                     const Verifier& verifier, int n_candidates,
                                     std::uint64_t seed);

DynamicsLog train_dpo(RecallPolicy& policy, const std::vector<DpoPair>& pairs,
                      const TrainConfig& cfg, const EvalSets& evals,
                      const Verifier& verifier);

}  // namespace recall
