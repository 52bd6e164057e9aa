#include "recall/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "recall/eval.hpp"
#include "recall/rng.hpp"

namespace recall {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

std::vector<double> log_softmax(const std::vector<double>& z) {
    double zmax = -std::numeric_limits<double>::infinity();
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
    return out;
}

void check_finite(const ParamGrad& grad) {
    for (double g : grad.w)
        if (!std::isfinite(g))
            throw TrainingAbort("non-finite gradient in access transform");
    for (const auto& [q, row] : grad.rows)
        for (double g : row)
            if (!std::isfinite(g))
                throw TrainingAbort("non-finite gradient in delta row " +
                                    std::to_string(q));
}

// Number of probe queries used for the mean-KL dynamics column.
constexpr int kKlProbeCap = 128;

double mean_kl_probe(const RecallPolicy& policy, const ReferencePolicy& ref,
                     const std::vector<int>& queries) {
    if (queries.empty()) return 0.0;
    const int n = std::min<int>(kKlProbeCap, static_cast<int>(queries.size()));
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += policy.kl_to_reference(ref.get(), queries[i]);
    return total / n;
}

struct ProbeContext {
    const ReferencePolicy* ref;
    const EvalSets* evals;
    const Verifier* verifier;
};

void log_step(DynamicsLog& log, int step, const std::string& phase,
              double mean_reward, double clip_frac, const RecallPolicy& policy,
              const ProbeContext& ctx, bool probe) {
    DynamicsEntry entry;
    entry.step = step;
    entry.phase = phase;
    entry.mean_reward = mean_reward;
    entry.clip_frac = clip_frac;
    if (probe) {
        if (!ctx.evals->train_probe.empty())
            entry.train_acc =
                greedy_accuracy(policy, ctx.evals->train_probe, *ctx.verifier);
        if (!ctx.evals->test_probe.empty())
            entry.test_acc =
                greedy_accuracy(policy, ctx.evals->test_probe, *ctx.verifier);
        entry.mean_kl = mean_kl_probe(policy, *ctx.ref, ctx.evals->train_probe);
    }
    log.append(std::move(entry));
}

RolloutGroup make_rollout_group(const RecallPolicy& policy, int query,
                                const Verifier& verifier, int group_size,
                                double temperature, Rng& rng) {
    RolloutGroup group;
    group.query_id = query;
    const std::vector<double> z = policy.logits(query);
    std::vector<double> sampling = z;
    if (temperature != 1.0)
        for (double& v : sampling) v /= temperature;
    const std::vector<double> lsm_sampling = log_softmax(sampling);
    const std::vector<double> lsm = log_softmax(z);
    std::vector<double> probs(lsm_sampling.size());
    for (std::size_t v = 0; v < probs.size(); ++v)
        probs[v] = std::exp(lsm_sampling[v]);
    for (int i = 0; i < group_size; ++i) {
        const int form = rng.categorical(probs);
        group.forms.push_back(form);
        group.old_log_probs.push_back(lsm[form]);
    }
    group.rewards = verifier.reward_group(group.forms,
                                          policy.universe().facts[query]);
    return group;
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate < 0.0) throw ConfigError("train config: negative learning rate");
    if (batch_size <= 0) throw ConfigError("train config: batch_size must be > 0");
    if (epochs < 0) throw ConfigError("train config: negative epochs");
    if (group_size < 2) throw ConfigError("train config: group_size must be >= 2");
    if (clip_eps <= 0.0 || clip_eps >= 1.0)
        throw ConfigError("train config: clip_eps must be in (0,1)");
    if (kl_beta < 0.0) throw ConfigError("train config: kl_beta must be >= 0");
    if (rollout_temperature <= 0.0)
        throw ConfigError("train config: rollout_temperature must be > 0");
    if (eval_every <= 0) throw ConfigError("train config: eval_every must be > 0");
    if (delta_lr_scale < 0.0)
        throw ConfigError("train config: delta_lr_scale must be >= 0");
}

void DynamicsLog::append(DynamicsEntry entry) {
    if (!entries.empty() && entry.step <= entries.back().step)
        entry.step = entries.back().step + 1;
    entries.push_back(std::move(entry));
}

std::string DynamicsLog::to_csv() const {
    std::ostringstream out;
    out << "step,phase,mean_reward,train_acc,test_acc,mean_kl,clip_frac\n";
    auto field = [&](double v) {
        if (v < 0.0) return std::string();
        std::ostringstream s;
        s.precision(10);
        s << v;
        return s.str();
    };
    for (const auto& e : entries) {
        out << e.step << ',' << e.phase << ',' << field(e.mean_reward) << ','
            << field(e.train_acc) << ',' << field(e.test_acc) << ','
            << field(e.mean_kl) << ',' << field(e.clip_frac) << '\n';
    }
    return out.str();
}

void DynamicsLog::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("DynamicsLog: cannot open " + path);
    out << to_csv();
}

std::vector<double> grpo_advantages(const std::vector<int>& rewards) {
    if (rewards.size() < 2)
        throw std::invalid_argument("grpo_advantages: need at least 2 rewards");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (int r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (int r : rewards) var += (r - mean) * (r - mean);
    var /= n;
    const double sd = std::sqrt(var);
    std::vector<double> adv(rewards.size(), 0.0);
    if (sd == 0.0) return adv;  // constant rewards: exact zeros
    const double denom = std::max(sd, 1e-8);
    for (std::size_t i = 0; i < rewards.size(); ++i)
        adv[i] = (rewards[i] - mean) / denom;
    return adv;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate,
                     double delta_lr_scale)
    : kind_(kind), lr_(learning_rate), delta_scale_(delta_lr_scale) {}

void Optimizer::ascend(RecallPolicy& policy, const ParamGrad& grad) {
    check_finite(grad);
    const double delta_lr = lr_ * delta_scale_;
    if (kind_ == OptimizerKind::sgd) {
        for (int j = 0; j < kNumFeatures; ++j)
            policy.weights()[j] += lr_ * grad.w[j];
        for (const auto& [q, g] : grad.rows) {
            std::vector<double>& row = policy.delta_row(q);
            for (std::size_t v = 0; v < g.size(); ++v) row[v] += delta_lr * g[v];
        }
        return;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    for (int j = 0; j < kNumFeatures; ++j) {
        m_w_[j] = kAdamBeta1 * m_w_[j] + (1.0 - kAdamBeta1) * grad.w[j];
        v_w_[j] = kAdamBeta2 * v_w_[j] + (1.0 - kAdamBeta2) * grad.w[j] * grad.w[j];
        policy.weights()[j] +=
            lr_ * (m_w_[j] / bc1) / (std::sqrt(v_w_[j] / bc2) + kAdamEps);
    }
    for (const auto& [q, g] : grad.rows) {
        auto [mit, m_new] = m_rows_.try_emplace(q);
        if (m_new) mit->second.assign(g.size(), 0.0);
        auto [vit, v_new] = v_rows_.try_emplace(q);
        if (v_new) vit->second.assign(g.size(), 0.0);
        std::vector<double>& row = policy.delta_row(q);
        for (std::size_t v = 0; v < g.size(); ++v) {
            mit->second[v] = kAdamBeta1 * mit->second[v] + (1.0 - kAdamBeta1) * g[v];
            vit->second[v] =
                kAdamBeta2 * vit->second[v] + (1.0 - kAdamBeta2) * g[v] * g[v];
            row[v] += delta_lr * (mit->second[v] / bc1) /
                      (std::sqrt(vit->second[v] / bc2) + kAdamEps);
        }
    }
}

StepStats grpo_step(RecallPolicy& policy, const ReferencePolicy& ref,
                    const std::vector<RolloutGroup>& batch,
                    const TrainConfig& cfg, Optimizer& opt) {
    const FactUniverse& u = policy.universe();
    const int vocab_n = u.vocab_count();
    std::size_t total_samples = 0;
    for (const auto& g : batch) total_samples += g.forms.size();
    if (total_samples == 0) return {};

    ParamGrad grad;
    StepStats stats;
    int clipped = 0;
    double reward_sum = 0.0;
    const double inv_n = 1.0 / static_cast<double>(total_samples);

    for (const auto& group : batch) {
        const int q = group.query_id;
        const std::vector<double> z = policy.logits(q);
        const std::vector<double> lsm = log_softmax(z);
        const std::vector<double> zr = ref.get().logits(q);
        const std::vector<double> lsm_ref = log_softmax(zr);

        std::vector<double> probs(vocab_n);
        double kl = 0.0;
        for (int v = 0; v < vocab_n; ++v) {
            probs[v] = std::exp(lsm[v]);
            kl += probs[v] * (lsm[v] - lsm_ref[v]);
        }
        stats.mean_kl += kl;

        const bool has_delta = policy.delta_enabled() && policy.is_train_query(q);
        std::vector<double>* drow =
            has_delta ? &grad.row(q, vocab_n) : nullptr;

        // clipped surrogate, per sample; w takes the global sample mean,
        // delta rows take the per-group mean (each row is touched by one
        // group only)
        const double inv_group = 1.0 / static_cast<double>(group.forms.size());
        double coeff_sum = 0.0;      // Σ per-sample coefficients, global mean
        double coeff_sum_row = 0.0;  // same, per-group mean
        for (std::size_t i = 0; i < group.forms.size(); ++i) {
            const int form = group.forms[i];
            const double advantage = group.advantages[i];
            reward_sum += group.rewards[i];
            const double ratio = std::exp(lsm[form] - group.old_log_probs[i]);
            const double clipped_ratio =
                std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
            const bool clip_active = clipped_ratio * advantage < ratio * advantage;
            if (clip_active) {
                ++clipped;
                continue;  // constant branch of min: zero gradient
            }
            coeff_sum += ratio * advantage * inv_n;
            coeff_sum_row += ratio * advantage * inv_group;
            if (drow) (*drow)[form] += ratio * advantage * inv_group;
        }

        // d/dtheta of [sum_i coeff_i * log pi(form_i)] shares -coeff_sum * E[phi];
        // KL term: dKL/dz_v = p_v (log p_v - log ref_v - KL), weighted by the
        // group's share of the sample mean.
        const double kl_weight =
            cfg.kl_beta * static_cast<double>(group.forms.size()) * inv_n;
        const double* krow =
            u.knowledge.data() + static_cast<std::size_t>(q) * vocab_n;
        for (int v = 0; v < vocab_n; ++v) {
            const double dkl_dz = probs[v] * (lsm[v] - lsm_ref[v] - kl);
            const double logit_grad = -coeff_sum * probs[v] - kl_weight * dkl_dz;
            const Weights phi = feature_map(krow[v], u.popularity[v], u.knots);
            for (int j = 0; j < kNumFeatures; ++j)
                grad.w[j] += logit_grad * phi[j];
            if (drow)
                (*drow)[v] +=
                    -coeff_sum_row * probs[v] - cfg.kl_beta * dkl_dz;
        }
        for (std::size_t i = 0; i < group.forms.size(); ++i) {
            const int form = group.forms[i];
            const double advantage = group.advantages[i];
            const double ratio = std::exp(lsm[form] - group.old_log_probs[i]);
            const double clipped_ratio =
                std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
            if (clipped_ratio * advantage < ratio * advantage) continue;
            const double coeff = ratio * advantage * inv_n;
            const Weights phi =
                feature_map(krow[form], u.popularity[form], u.knots);
            for (int j = 0; j < kNumFeatures; ++j) grad.w[j] += coeff * phi[j];
        }
    }

    opt.ascend(policy, grad);
    stats.mean_reward = reward_sum / static_cast<double>(total_samples);
    stats.mean_kl /= static_cast<double>(batch.size());
    stats.clip_frac = static_cast<double>(clipped) / total_samples;
    return stats;
}

namespace {

// Shared rollout-train loop for GRPO and the tabular-value PPO variant.
DynamicsLog train_rollout_rl(RecallPolicy& policy,
                             const std::vector<int>& train_queries,
                             const Verifier& verifier, const TrainConfig& cfg,
                             const EvalSets& evals, bool group_relative,
                             const std::string& phase) {
    cfg.validate();
    if (train_queries.empty())
        throw std::invalid_argument("rollout training: empty train set");

    const ReferencePolicy ref = clone_as_reference(policy);
    Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.delta_lr_scale);
    Rng rng(derive_seed(cfg.seed, 0xA11CE));
    std::map<int, double> value;  // PPO: per-query reward EMA, init 0

    DynamicsLog log;
    ProbeContext ctx{&ref, &evals, &verifier};
    log_step(log, 0, phase, -1.0, -1.0, policy, ctx, true);

    int step = 0;
    std::vector<int> order = train_queries;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size();
             begin += cfg.batch_size) {
            const std::size_t end =
                std::min(order.size(), begin + cfg.batch_size);
            std::vector<RolloutGroup> batch;
            batch.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                RolloutGroup group = make_rollout_group(
                    policy, order[i], verifier, cfg.group_size,
                    cfg.rollout_temperature, rng);
                if (group_relative) {
                    group.advantages = grpo_advantages(group.rewards);
                } else {
                    double& v = value[group.query_id];
                    group.advantages.resize(group.rewards.size());
                    for (std::size_t s = 0; s < group.rewards.size(); ++s)
                        group.advantages[s] = group.rewards[s] - v;
                    for (int r : group.rewards) v = 0.9 * v + 0.1 * r;
                }
                batch.push_back(std::move(group));
            }
            const StepStats stats = grpo_step(policy, ref, batch, cfg, opt);
            ++step;
            const bool probe =
                step % cfg.eval_every == 0 ||
                (epoch == cfg.epochs - 1 && end == order.size());
            log_step(log, step, phase, stats.mean_reward, stats.clip_frac,
                     policy, ctx, probe);
        }
    }
    return log;
}

// One pass of negative-log-likelihood descent over (query, target) pairs.
// Returns the fraction of batch queries whose greedy output is verified.
double nll_epoch(RecallPolicy& policy,
                 const std::vector<std::pair<int, int>>& targets,
                 const Verifier& verifier, const TrainConfig& cfg,
                 Optimizer& opt, Rng& rng) {
    const FactUniverse& u = policy.universe();
    const int vocab_n = u.vocab_count();
    std::vector<std::size_t> order(targets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    double greedy_hits = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
        const double inv_n = 1.0 / static_cast<double>(end - begin);
        ParamGrad grad;
        for (std::size_t i = begin; i < end; ++i) {
            const auto [q, target] = targets[order[i]];
            const std::vector<double> z = policy.logits(q);
            const std::vector<double> lsm = log_softmax(z);
            const double* krow =
                u.knowledge.data() + static_cast<std::size_t>(q) * vocab_n;
            const bool has_delta =
                policy.delta_enabled() && policy.is_train_query(q);
            std::vector<double>* drow =
                has_delta ? &grad.row(q, vocab_n) : nullptr;
            int argmax = 0;
            for (int v = 0; v < vocab_n; ++v) {
                if (z[v] > z[argmax]) argmax = v;
                const double p = std::exp(lsm[v]);
                const double logit_grad = (v == target ? 1.0 : 0.0) - p;
                const Weights phi =
                    feature_map(krow[v], u.popularity[v], u.knots);
                for (int j = 0; j < kNumFeatures; ++j)
                    grad.w[j] += logit_grad * phi[j] * inv_n;
                if (drow) (*drow)[v] += logit_grad;  // per-row mean: one visit
            }
            greedy_hits += verifier.verify(argmax, u.facts[q]);
        }
        opt.ascend(policy, grad);
    }
    return targets.empty() ? 0.0 : greedy_hits / targets.size();
}

}  // namespace

DynamicsLog train_grpo(RecallPolicy& policy, const std::vector<int>& train_queries,
                       const Verifier& verifier, const TrainConfig& cfg,
                       const EvalSets& evals) {
    return train_rollout_rl(policy, train_queries, verifier, cfg, evals, true,
                            "grpo");
}

DynamicsLog train_ppo(RecallPolicy& policy, const std::vector<int>& train_queries,
                      const Verifier& verifier, const TrainConfig& cfg,
                      const EvalSets& evals) {
    return train_rollout_rl(policy, train_queries, verifier, cfg, evals, false,
                            "ppo");
}

DynamicsLog train_sft(RecallPolicy& policy, const std::vector<int>& train_queries,
                      const Verifier& verifier, const TrainConfig& cfg,
                      const EvalSets& evals) {
    cfg.validate();
    if (train_queries.empty())
        throw std::invalid_argument("train_sft: empty train set");
    const FactUniverse& u = policy.universe();
    const ReferencePolicy ref = clone_as_reference(policy);
    Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.delta_lr_scale);
    Rng rng(derive_seed(cfg.seed, 0x5F7));

    std::vector<std::pair<int, int>> targets;
    targets.reserve(train_queries.size());
    for (int q : train_queries)
        targets.emplace_back(q, u.canonical_of(u.facts[q].answer));

    DynamicsLog log;
    ProbeContext ctx{&ref, &evals, &verifier};
    log_step(log, 0, "sft", -1.0, -1.0, policy, ctx, true);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double batch_acc = nll_epoch(policy, targets, verifier, cfg, opt, rng);
        log_step(log, epoch + 1, "sft", batch_acc, -1.0, policy, ctx, true);
    }
    return log;
}

DynamicsLog train_rft(RecallPolicy& policy, const std::vector<int>& train_queries,
                      const std::vector<int>& validation_queries,
                      const Verifier& verifier, const TrainConfig& cfg,
                      const EvalSets& evals) {
    cfg.validate();
    if (train_queries.empty())
        throw std::invalid_argument("train_rft: empty train set");
    const FactUniverse& u = policy.universe();
    const ReferencePolicy ref = clone_as_reference(policy);
    Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.delta_lr_scale);
    Rng rng(derive_seed(cfg.seed, 0x4F7));

    DynamicsLog log;
    ProbeContext ctx{&ref, &evals, &verifier};
    log_step(log, 0, "rft", -1.0, -1.0, policy, ctx, true);

    double best_validation = -1.0;
    int stale = 0;
    bool any_epoch_ran = false;
    for (int iter = 0; iter < cfg.rft_max_iterations; ++iter) {
        std::vector<std::pair<int, int>> targets;
        double correct_fraction = 0.0;
        std::size_t sampled = 0;
        for (int q : train_queries) {
            const RolloutGroup group = make_rollout_group(
                policy, q, verifier, cfg.group_size, cfg.rollout_temperature,
                rng);
            std::vector<int> correct_forms;
            for (std::size_t i = 0; i < group.forms.size(); ++i) {
                correct_fraction += group.rewards[i];
                if (group.rewards[i]) correct_forms.push_back(group.forms[i]);
            }
            sampled += group.forms.size();
            if (!correct_forms.empty()) {
                const int pick =
                    rng.uniform_int(0, static_cast<int>(correct_forms.size()) - 1);
                targets.emplace_back(q, correct_forms[pick]);
            }
        }
        correct_fraction /= static_cast<double>(sampled);

        if (targets.empty()) {
            std::cerr << "train_rft: iteration " << iter
                      << " skipped, no correct samples\n";
            log_step(log, iter + 1, "rft", correct_fraction, -1.0, policy, ctx,
                     true);
            continue;
        }
        any_epoch_ran = true;
        nll_epoch(policy, targets, verifier, cfg, opt, rng);
        log_step(log, iter + 1, "rft", correct_fraction, -1.0, policy, ctx, true);

        if (!validation_queries.empty()) {
            const double val_acc =
                greedy_accuracy(policy, validation_queries, verifier);
            if (val_acc > best_validation) {
                best_validation = val_acc;
                stale = 0;
            } else if (++stale >= cfg.rft_patience) {
                break;
            }
        }
    }
    if (!any_epoch_ran)
        std::cerr << "train_rft: all iterations skipped, policy unchanged\n";
    return log;
}

std::vector<DpoPair> build_dpo_pairs(const RecallPolicy& policy,
                                     const std::vector<int>& train_queries,
                                     const Verifier& verifier, int n_candidates,
                                     std::uint64_t seed) {
    const FactUniverse& u = policy.universe();
    std::vector<DpoPair> pairs;
    pairs.reserve(train_queries.size());
    for (int q : train_queries) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(q) + 0xD90));
        const std::vector<double> probs = policy.probs(q);
        std::map<int, int> incorrect_counts;  // form -> count, ordered by id
        for (int i = 0; i < n_candidates; ++i) {
            const int form = rng.categorical(probs);
            if (!verifier.verify(form, u.facts[q])) ++incorrect_counts[form];
        }
        if (incorrect_counts.empty()) continue;  // all correct: dropped
        int rejected = -1;
        int best_count = 0;
        for (const auto& [form, count] : incorrect_counts) {
            if (count > best_count) {  // ties keep the lowest form id
                best_count = count;
                rejected = form;
            }
        }
        pairs.push_back({q, u.canonical_of(u.facts[q].answer), rejected});
    }
    return pairs;
}

DynamicsLog train_dpo(RecallPolicy& policy, const std::vector<DpoPair>& pairs,
                      const TrainConfig& cfg, const EvalSets& evals,
                      const Verifier& verifier) {
    cfg.validate();
    if (pairs.empty()) throw std::invalid_argument("train_dpo: no pairs");
    const FactUniverse& u = policy.universe();
    const int vocab_n = u.vocab_count();
    const ReferencePolicy ref = clone_as_reference(policy);
    Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.delta_lr_scale);
    Rng rng(derive_seed(cfg.seed, 0xD70));

    DynamicsLog log;
    ProbeContext ctx{&ref, &evals, &verifier};
    log_step(log, 0, "dpo", -1.0, -1.0, policy, ctx, true);

    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    int step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size();
             begin += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            const double inv_n = 1.0 / static_cast<double>(end - begin);
            ParamGrad grad;
            double greedy_hits = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const DpoPair& pair = pairs[order[i]];
                const int q = pair.query_id;
                const std::vector<double> z = policy.logits(q);
                const std::vector<double> lsm = log_softmax(z);
                const std::vector<double> zr = ref.get().logits(q);
                const std::vector<double> lsm_ref = log_softmax(zr);
                const double margin =
                    (lsm[pair.chosen_form] - lsm_ref[pair.chosen_form]) -
                    (lsm[pair.rejected_form] - lsm_ref[pair.rejected_form]);
                // loss = -ln sigma(beta * margin); ascend the negative
                const double coeff_row =
                    cfg.dpo_beta / (1.0 + std::exp(cfg.dpo_beta * margin));
                const double coeff = coeff_row * inv_n;

                const double* krow =
                    u.knowledge.data() + static_cast<std::size_t>(q) * vocab_n;
                const bool has_delta =
                    policy.delta_enabled() && policy.is_train_query(q);
                std::vector<double>* drow =
                    has_delta ? &grad.row(q, vocab_n) : nullptr;
                // grad margin = grad log pi(chosen) - grad log pi(rejected);
                // the E[phi] terms cancel, leaving the two one-hot rows.
                int argmax = 0;
                for (int v = 1; v < vocab_n; ++v)
                    if (z[v] > z[argmax]) argmax = v;
                greedy_hits += verifier.verify(argmax, u.facts[q]);
                const Weights phi_ch = feature_map(
                    krow[pair.chosen_form], u.popularity[pair.chosen_form], u.knots);
                const Weights phi_rj = feature_map(
                    krow[pair.rejected_form], u.popularity[pair.rejected_form],
                    u.knots);
                for (int j = 0; j < kNumFeatures; ++j)
                    grad.w[j] += coeff * (phi_ch[j] - phi_rj[j]);
                if (drow) {
                    (*drow)[pair.chosen_form] += coeff_row;
                    (*drow)[pair.rejected_form] -= coeff_row;
                }
            }
            opt.ascend(policy, grad);
            ++step;
            const bool probe = step % cfg.eval_every == 0 ||
                               (epoch == cfg.epochs - 1 && end == order.size());
            log_step(log, step, "dpo", greedy_hits * inv_n, -1.0, policy, ctx,
                     probe);
        }
    }
    return log;
}

}  // namespace recall
