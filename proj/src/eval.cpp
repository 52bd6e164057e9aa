#include "recall/eval.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "recall/parallel.hpp"
#include "recall/rng.hpp"

namespace recall {

double greedy_accuracy(const RecallPolicy& policy, const std::vector<int>& queries,
                       const Verifier& verifier) {
    if (queries.empty())
        throw std::invalid_argument("greedy_accuracy: empty query set");
    const FactUniverse& u = policy.universe();
    std::vector<int> hits(queries.size(), 0);
    parallel_for(static_cast<int>(queries.size()), [&](int i) {
        const int q = queries[i];
        hits[i] = verifier.verify(policy.greedy(q), u.facts[q]);
    });
    double total = 0.0;
    for (int h : hits) total += h;
    return total / static_cast<double>(queries.size());
}

double pass_at_k(int c, int n, int k) {
    if (n <= 0 || c < 0 || c > n)
        throw std::invalid_argument("pass_at_k: need 0 <= c <= n, n > 0");
    if (k < 1 || k > n)
        throw std::invalid_argument("pass_at_k: need 1 <= k <= n");
    if (c == 0) return 0.0;
    // 1 - C(n-c, k)/C(n, k) as a telescoping product, no factorials
    double miss = 1.0;
    for (int i = 0; i < k; ++i)
        miss *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    if (n - c < k) miss = 0.0;
    return 1.0 - miss;
}

std::vector<int> default_pass_at_k_budgets(int max_k) {
    std::vector<int> ks;
    for (int k = 1; k <= max_k; k *= 2) ks.push_back(k);
    return ks;
}

PassAtKCurve pass_at_k_curve(const RecallPolicy& policy,
                             const std::vector<int>& queries,
                             const Verifier& verifier, int n_samples,
                             const std::vector<int>& ks, std::uint64_t seed,
                             double temperature, PassAtKEstimator estimator) {
    if (queries.empty())
        throw std::invalid_argument("pass_at_k_curve: empty query set");
    for (int k : ks)
        if (k < 1 || k > n_samples)
            throw std::invalid_argument("pass_at_k_curve: budget exceeds n_samples");

    const FactUniverse& u = policy.universe();
    std::vector<std::vector<double>> per_query(queries.size());
    parallel_for(static_cast<int>(queries.size()), [&](int i) {
        const int q = queries[i];
        const std::vector<double> probs = policy.probs(q, temperature);
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(q) + 0x9a55));
        std::vector<int> correct(n_samples);
        int c = 0;
        for (int s = 0; s < n_samples; ++s) {
            correct[s] = verifier.verify(rng.categorical(probs), u.facts[q]);
            c += correct[s];
        }
        per_query[i].resize(ks.size());
        for (std::size_t j = 0; j < ks.size(); ++j) {
            if (estimator == PassAtKEstimator::unbiased) {
                per_query[i][j] = pass_at_k(c, n_samples, ks[j]);
            } else {
                int hit = 0;
                for (int s = 0; s < ks[j] && !hit; ++s) hit = correct[s];
                per_query[i][j] = hit;
            }
        }
    });

    PassAtKCurve curve;
    curve.ks = ks;
    curve.values.assign(ks.size(), 0.0);
    for (const auto& row : per_query)
        for (std::size_t j = 0; j < ks.size(); ++j) curve.values[j] += row[j];
    for (double& v : curve.values) v /= static_cast<double>(queries.size());
    return curve;
}

int majority_vote(const RecallPolicy& policy, int query, const Verifier& verifier,
                  int m, std::uint64_t seed, double temperature) {
    if (m < 1) throw std::invalid_argument("majority_vote: m must be >= 1");
    const FactUniverse& u = policy.universe();
    const std::vector<double> probs = policy.probs(query, temperature);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(query) + 0x707e));

    std::vector<int> counts;                      // per entity
    counts.assign(u.n_entities, 0);
    std::vector<int> first_seen(u.n_entities, -1);
    int modal_entity = -1;
    for (int s = 0; s < m; ++s) {
        const int entity = u.vocab[rng.categorical(probs)].entity;
        if (first_seen[entity] < 0) first_seen[entity] = s;
        ++counts[entity];
        if (modal_entity < 0 || counts[entity] > counts[modal_entity] ||
            (counts[entity] == counts[modal_entity] &&
             first_seen[entity] < first_seen[modal_entity]))
            modal_entity = entity;
    }
    return verifier.verify(u.canonical_of(modal_entity), u.facts[query]);
}

double voting_accuracy(const RecallPolicy& policy, const std::vector<int>& queries,
                       const Verifier& verifier, int m, std::uint64_t seed,
                       double temperature) {
    if (queries.empty())
        throw std::invalid_argument("voting_accuracy: empty query set");
    std::vector<int> hits(queries.size(), 0);
    parallel_for(static_cast<int>(queries.size()), [&](int i) {
        hits[i] = majority_vote(policy, queries[i], verifier, m, seed, temperature);
    });
    double total = 0.0;
    for (int h : hits) total += h;
    return total / static_cast<double>(queries.size());
}

std::map<int, RepairBin> repair_rate(const RecallPolicy& pre_policy,
                                     const RecallPolicy& post_policy,
                                     const std::vector<int>& test_queries,
                                     const Verifier& verifier,
                                     const AccessibilityProfile& profile) {
    const FactUniverse& u = pre_policy.universe();
    std::map<int, RepairBin> bins;
    std::map<int, int> repaired;
    for (int q : test_queries) {
        const int idx = profile.index_of(q);
        if (idx < 0)
            throw std::invalid_argument("repair_rate: query missing from profile");
        if (profile.greedy_correct[idx]) continue;  // only initially-failed
        const int bin = profile.bins[idx];
        ++bins[bin].n_queries;
        repaired[bin] += verifier.verify(post_policy.greedy(q), u.facts[q]);
    }
    for (auto& [bin, stats] : bins)
        stats.rate = static_cast<double>(repaired[bin]) / stats.n_queries;
    return bins;
}

double recovery_fraction(double acc_subset, double acc_base, double acc_full) {
    if (acc_full == acc_base)
        throw std::invalid_argument(
            "recovery_fraction: undefined, full-data gain is zero");
    return (acc_subset - acc_base) / (acc_full - acc_base);
}

std::string EvalReport::to_json() const {
    nlohmann::json doc;
    doc["greedy_accuracy"] = greedy_acc;
    doc["seed"] = seed;
    doc["universe_hash"] = universe_hash;
    auto curve_json = [](const PassAtKCurve& c) {
        nlohmann::json j = nlohmann::json::object();
        for (std::size_t i = 0; i < c.ks.size(); ++i)
            j[std::to_string(c.ks[i])] = c.values[i];
        return j;
    };
    if (!pass_at_k_pre.ks.empty()) doc["pass_at_k_pre"] = curve_json(pass_at_k_pre);
    if (!pass_at_k_post.ks.empty())
        doc["pass_at_k_post"] = curve_json(pass_at_k_post);
    if (!repair.empty()) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [bin, stats] : repair) {
            j[bin_label(bin)] = {{"n_queries", stats.n_queries},
                                 {"rate", stats.rate}};
        }
        doc["repair_rates"] = std::move(j);
    }
    if (voting_acc >= 0.0) doc["voting_accuracy"] = voting_acc;
    if (!recovery.empty()) doc["recovery_fractions"] = recovery;
    return doc.dump(2);
}

std::string EvalReport::passk_csv() const {
    std::ostringstream out;
    out << "k,pre,post\n";
    for (std::size_t i = 0; i < pass_at_k_pre.ks.size(); ++i) {
        out << pass_at_k_pre.ks[i] << ',' << pass_at_k_pre.values[i] << ',';
        if (i < pass_at_k_post.values.size()) out << pass_at_k_post.values[i];
        out << '\n';
    }
    return out.str();
}

std::string EvalReport::repair_csv() const {
    std::ostringstream out;
    out << "bin,n_queries,rate\n";
    for (const auto& [bin, stats] : repair)
        out << bin_label(bin) << ',' << stats.n_queries << ',' << stats.rate
            << '\n';
    return out.str();
}

}  // namespace recall
