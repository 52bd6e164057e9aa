#pragma once

#include <array>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "recall/rng.hpp"
#include "recall/world.hpp"

namespace recall {

inline constexpr int kNumFeatures = 7;
using Weights = std::array<double, kNumFeatures>;

// phi(k, p) = [k, p, k*p, hinge(k-t1), hinge(k-t2), hinge(k-t3), 1]
inline Weights feature_map(double k, double p, const std::array<double, 3>& knots) {
    auto hinge = [](double x) { return x > 0.0 ? x : 0.0; };
    return {k, p, k * p, hinge(k - knots[0]), hinge(k - knots[1]),
            hinge(k - knots[2]), 1.0};
}

struct PolicyGradient {
    Weights w{};                 // d log pi / d w
    std::vector<double> delta;   // d log pi / d delta[q, v], dense over vocab
};

// Categorical answer distribution per query: frozen knowledge/popularity
// scores through a small shared trainable transform, plus optional per-query
// memorization deltas for train queries. The universe never changes; only
// w and delta do.
class RecallPolicy {
public:
    RecallPolicy(std::shared_ptr<const FactUniverse> universe,
                 std::vector<int> train_queries, bool delta_enabled = true);

    const FactUniverse& universe() const { return *universe_; }
    std::shared_ptr<const FactUniverse> universe_ptr() const { return universe_; }

    const Weights& weights() const { return w_; }
    Weights& weights() { return w_; }

    bool delta_enabled() const { return delta_enabled_; }
    bool is_train_query(int query) const { return is_train_[query]; }
    double delta_at(int query, int form) const;

    // Dense delta row for a train query, allocated on first write.
    std::vector<double>& delta_row(int query);
    const std::unordered_map<int, std::vector<double>>& delta_rows() const {
        return delta_;
    }
    void set_delta_rows(std::unordered_map<int, std::vector<double>> rows);

    std::vector<double> logits(int query) const;
    std::vector<double> probs(int query, double temperature = 1.0) const;

    int sample(int query, double temperature, Rng& rng) const;
    int greedy(int query) const;  // argmax; ties -> lowest form id
    double log_prob(int query, int form) const;
    PolicyGradient grad_log_prob(int query, int form) const;

    double kl_to_reference(const RecallPolicy& ref, int query) const;

    // Base access transform: logits = K[q,v] + lambda0 * p[v].
    static Weights initial_weights(double suppression_strength);

private:
    std::shared_ptr<const FactUniverse> universe_;
    Weights w_{};
    bool delta_enabled_ = true;
    std::vector<char> is_train_;
    std::unordered_map<int, std::vector<double>> delta_;
};

// Deep immutable snapshot of a policy; the KL anchor for RL and DPO.
class ReferencePolicy {
public:
    explicit ReferencePolicy(const RecallPolicy& policy) : policy_(policy) {}
    const RecallPolicy& get() const { return policy_; }

private:
    RecallPolicy policy_;
};

inline ReferencePolicy clone_as_reference(const RecallPolicy& policy) {
    return ReferencePolicy(policy);
}

RecallPolicy base_policy(std::shared_ptr<const FactUniverse> universe,
                         std::vector<int> train_queries,
                         bool delta_enabled = true);

// Checkpoints: JSON with w, sparse delta triplets, and the universe hash.
// Loading refuses a mismatched universe.
std::string checkpoint_to_json(const RecallPolicy& policy);
RecallPolicy checkpoint_from_json(const std::string& json_text,
                                  std::shared_ptr<const FactUniverse> universe);
void save_checkpoint(const RecallPolicy& policy, const std::string& path);
RecallPolicy load_checkpoint(const std::string& path,
                             std::shared_ptr<const FactUniverse> universe);

}  // namespace recall
