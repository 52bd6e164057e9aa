#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "recall/policy.hpp"
#include "recall/reward.hpp"
#include "recall/world.hpp"

namespace recall {

double greedy_accuracy(const RecallPolicy& policy, const std::vector<int>& queries,
                       const Verifier& verifier);

// Unbiased estimator 1 - C(n-c, k)/C(n, k), evaluated in product form.
double pass_at_k(int c, int n, int k);

struct PassAtKCurve {
    std::vector<int> ks;
    std::vector<double> values;
};

enum class PassAtKEstimator { unbiased, prefix };

PassAtKCurve pass_at_k_curve(const RecallPolicy& policy,
                             const std::vector<int>& queries,
                             const Verifier& verifier, int n_samples,
                             const std::vector<int>& ks, std::uint64_t seed,
                             double temperature = 1.0,
                             PassAtKEstimator estimator = PassAtKEstimator::unbiased);

std::vector<int> default_pass_at_k_budgets(int max_k = 256);  // powers of 2

// Samples m responses, normalizes each to its entity, verifies the modal
// entity. Ties -> earliest first occurrence among the samples.
int majority_vote(const RecallPolicy& policy, int query, const Verifier& verifier,
                  int m, std::uint64_t seed, double temperature = 1.0);

double voting_accuracy(const RecallPolicy& policy, const std::vector<int>& queries,
                       const Verifier& verifier, int m, std::uint64_t seed,
                       double temperature = 1.0);

struct RepairBin {
    int n_queries = 0;
    double rate = 0.0;
};

// Per accessibility bin, over test queries the pre policy fails under greedy
// decoding: fraction the post policy answers correctly. Empty bins absent.
std::map<int, RepairBin> repair_rate(const RecallPolicy& pre_policy,
                                     const RecallPolicy& post_policy,
                                     const std::vector<int>& test_queries,
                                     const Verifier& verifier,
                                     const AccessibilityProfile& profile);

// (acc_subset - acc_base) / (acc_full - acc_base)
double recovery_fraction(double acc_subset, double acc_base, double acc_full);

struct EvalReport {
    double greedy_acc = 0.0;
    PassAtKCurve pass_at_k_pre;
    PassAtKCurve pass_at_k_post;
    std::map<int, RepairBin> repair;
    double voting_acc = -1.0;
    std::map<std::string, double> recovery;
    std::uint64_t seed = 0;
    std::uint64_t universe_hash = 0;

    std::string to_json() const;
    std::string passk_csv() const;   // k, pre, post
    std::string repair_csv() const;  // bin, n_queries, rate
};

}  // namespace recall
