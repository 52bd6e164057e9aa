#include "recall/world.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_set>

#include "recall/parallel.hpp"
#include "recall/policy.hpp"
#include "recall/rng.hpp"

namespace recall {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

void fnv_mix(std::uint64_t& h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= kFnvPrime;
    }
}

void fnv_mix(std::uint64_t& h, double value) {
    fnv_mix(h, std::bit_cast<std::uint64_t>(value));
}

double percentile(std::vector<double>& values, double q) {
    const auto idx = static_cast<std::size_t>(q * (values.size() - 1));
    std::nth_element(values.begin(), values.begin() + idx, values.end());
    return values[idx];
}

}  // namespace

void WorldConfig::validate() const {
    if (n_entities <= 0 || n_relations <= 0 || n_facts <= 0)
        throw ConfigError("world config: counts must be positive");
    if (noise_floor_fraction < 0.0 || noise_floor_fraction > 1.0)
        throw ConfigError("world config: noise_floor_fraction must be in [0,1]");
    if (aliases_min < 0 || aliases_max < aliases_min)
        throw ConfigError("world config: invalid aliases_per_entity range");
    if (suppression_strength < 0.0)
        throw ConfigError("world config: suppression_strength must be >= 0");
    if (static_cast<long long>(n_entities) * n_relations < n_facts)
        throw ConfigError("world config: n_facts exceeds entity-relation capacity");
    if (vocab_size != 0) {
        const long long lo = static_cast<long long>(n_entities) * (1 + aliases_min);
        const long long hi = static_cast<long long>(n_entities) * (1 + aliases_max);
        if (vocab_size < lo || vocab_size > hi)
            throw ConfigError("world config: vocab_size incompatible with alias range");
    }
}

std::uint64_t FactUniverse::content_hash() const {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, seed);
    fnv_mix(h, static_cast<std::uint64_t>(n_entities));
    fnv_mix(h, static_cast<std::uint64_t>(n_relations));
    for (const auto& fact : facts) {
        fnv_mix(h, static_cast<std::uint64_t>(fact.subject));
        fnv_mix(h, static_cast<std::uint64_t>(fact.relation));
        fnv_mix(h, static_cast<std::uint64_t>(fact.answer));
        fnv_mix(h, static_cast<std::uint64_t>(fact.noise_floor ? 1 : 0));
    }
    for (const auto& form : vocab) {
        fnv_mix(h, static_cast<std::uint64_t>(form.entity));
        fnv_mix(h, static_cast<std::uint64_t>(form.is_canonical ? 1 : 0));
    }
    for (double v : knowledge) fnv_mix(h, v);
    for (double v : popularity) fnv_mix(h, v);
    for (double v : knots) fnv_mix(h, v);
    return h;
}

int AccessibilityProfile::index_of(int query_id) const {
    for (std::size_t i = 0; i < query_ids.size(); ++i)
        if (query_ids[i] == query_id) return static_cast<int>(i);
    return -1;
}

FactUniverse generate_universe(const WorldConfig& config, std::uint64_t seed) {
    config.validate();

    FactUniverse u;
    u.config = config;
    u.seed = seed;
    u.n_entities = config.n_entities;
    u.n_relations = config.n_relations;

    // --- vocabulary: one canonical form per entity plus aliases ---
    Rng vocab_rng(derive_seed(seed, 1));
    std::vector<int> alias_counts(config.n_entities);
    if (config.vocab_size == 0) {
        for (auto& n : alias_counts)
            n = vocab_rng.uniform_int(config.aliases_min, config.aliases_max);
    } else {
        std::fill(alias_counts.begin(), alias_counts.end(), config.aliases_min);
        long long remaining = config.vocab_size -
            static_cast<long long>(config.n_entities) * (1 + config.aliases_min);
        while (remaining > 0) {
            const int e = vocab_rng.uniform_int(0, config.n_entities - 1);
            if (alias_counts[e] < config.aliases_max) {
                ++alias_counts[e];
                --remaining;
            }
        }
    }
    u.canonical_form.resize(config.n_entities);
    u.entity_forms.resize(config.n_entities);
    for (int e = 0; e < config.n_entities; ++e) {
        const int canon_id = static_cast<int>(u.vocab.size());
        u.vocab.push_back({canon_id, e, true});
        u.canonical_form[e] = canon_id;
        u.entity_forms[e].push_back(canon_id);
        for (int a = 0; a < alias_counts[e]; ++a) {
            const int id = static_cast<int>(u.vocab.size());
            u.vocab.push_back({id, e, false});
            u.entity_forms[e].push_back(id);
        }
    }
    const int vocab_n = u.vocab_count();

    // --- popularity: Zipf-like over a random rank permutation ---
    Rng pop_rng(derive_seed(seed, 2));
    std::vector<int> rank_of(vocab_n);
    for (int v = 0; v < vocab_n; ++v) rank_of[v] = v;
    pop_rng.shuffle(rank_of);
    u.popularity.resize(vocab_n);
    std::vector<int> form_by_rank(vocab_n);
    for (int v = 0; v < vocab_n; ++v) {
        u.popularity[v] =
            std::pow(static_cast<double>(rank_of[v]) + 1.0,
                     -config.popularity_zipf_exponent);
        form_by_rank[rank_of[v]] = v;
    }

    // --- facts: unique (subject, relation), uniformly random answers ---
    Rng fact_rng(derive_seed(seed, 3));
    std::unordered_set<long long> used_keys;
    used_keys.reserve(static_cast<std::size_t>(config.n_facts) * 2);
    u.facts.reserve(config.n_facts);
    while (static_cast<int>(u.facts.size()) < config.n_facts) {
        const int s = fact_rng.uniform_int(0, config.n_entities - 1);
        const int r = fact_rng.uniform_int(0, config.n_relations - 1);
        const long long key = static_cast<long long>(s) * config.n_relations + r;
        if (!used_keys.insert(key).second) continue;
        Fact fact;
        fact.subject = s;
        fact.relation = r;
        fact.answer = fact_rng.uniform_int(0, config.n_entities - 1);
        fact.query_id = static_cast<int>(u.facts.size());
        u.facts.push_back(fact);
    }

    // --- knowledge scores ---
    Rng score_rng(derive_seed(seed, 4));
    const auto& mix = config.accessibility_mixture;
    const auto& noise = config.distractor_noise;
    u.knowledge.resize(static_cast<std::size_t>(config.n_facts) * vocab_n);
    for (double& k : u.knowledge) k = score_rng.normal(noise.mean, noise.sd);

    const int pool = std::min(noise.suppressor_pool, vocab_n);
    for (auto& fact : u.facts) {
        const std::size_t row = static_cast<std::size_t>(fact.query_id) * vocab_n;
        const int canon = u.canonical_form[fact.answer];

        fact.noise_floor = score_rng.uniform() < config.noise_floor_fraction;
        if (!fact.noise_floor) {
            u.knowledge[row + canon] =
                score_rng.uniform() < mix.reachable_weight
                    ? score_rng.normal(mix.reachable_mean, mix.reachable_sd)
                    : score_rng.normal(mix.tail_mean, mix.tail_sd);
        }
        for (int form : u.entity_forms[fact.answer]) {
            if (form == canon) continue;
            u.knowledge[row + form] =
                u.knowledge[row + canon] -
                score_rng.uniform(mix.alias_gap_min, mix.alias_gap_max);
        }

        // designated high-popularity distractor
        int slot = score_rng.uniform_int(0, pool - 1);
        int supp = form_by_rank[slot];
        while (u.vocab[supp].entity == fact.answer) {
            slot = (slot + 1) % vocab_n;
            supp = form_by_rank[slot];
        }
        const double drawn =
            score_rng.normal(noise.suppressor_mean, noise.suppressor_sd);
        u.knowledge[row + supp] = std::max(u.knowledge[row + supp], drawn);
    }

    // --- hinge knots: 50th/80th/95th percentiles of the K distribution ---
    std::vector<double> sorted = u.knowledge;
    u.knots[0] = percentile(sorted, 0.50);
    u.knots[1] = percentile(sorted, 0.80);
    u.knots[2] = percentile(sorted, 0.95);
    for (int i = 1; i < 3; ++i) {
        if (u.knots[i] <= u.knots[i - 1])
            u.knots[i] = u.knots[i - 1] + 1e-9;
    }
    return u;
}

DatasetSplits split_dataset(const FactUniverse& universe, int n_train,
                            int n_validation, int n_test, std::uint64_t seed) {
    if (n_train < 0 || n_validation < 0 || n_test < 0)
        throw std::invalid_argument("split_dataset: negative split size");
    const long long total =
        static_cast<long long>(n_train) + n_validation + n_test;
    if (total > universe.num_queries())
        throw std::invalid_argument("split_dataset: sizes exceed universe");

    std::vector<int> ids(universe.num_queries());
    for (int i = 0; i < universe.num_queries(); ++i) ids[i] = i;
    Rng rng(derive_seed(seed, 10));
    rng.shuffle(ids);

    DatasetSplits splits;
    splits.train.assign(ids.begin(), ids.begin() + n_train);
    splits.validation.assign(ids.begin() + n_train,
                             ids.begin() + n_train + n_validation);
    splits.test.assign(ids.begin() + n_train + n_validation,
                       ids.begin() + static_cast<std::size_t>(total));
    return splits;
}

std::vector<int> deduplicate(const std::vector<int>& train,
                             const std::vector<int>& test,
                             const FactUniverse& train_universe,
                             const FactUniverse& test_universe) {
    std::unordered_set<long long> train_keys;
    train_keys.reserve(train.size() * 2);
    for (int q : train) {
        const Fact& fact = train_universe.facts[q];
        train_keys.insert(static_cast<long long>(fact.subject) * 1000003 +
                          fact.relation);
    }
    std::vector<int> kept;
    kept.reserve(test.size());
    for (int q : test) {
        const Fact& fact = test_universe.facts[q];
        const long long key =
            static_cast<long long>(fact.subject) * 1000003 + fact.relation;
        if (!train_keys.count(key)) kept.push_back(q);
    }
    return kept;
}

AccessibilityProfile measure_accessibility(const RecallPolicy& policy,
                                           const std::vector<int>& queries,
                                           int n_samples, double temperature,
                                           std::uint64_t seed) {
    if (n_samples <= 0)
        throw std::invalid_argument("measure_accessibility: n_samples must be > 0");
    if (temperature <= 0.0)
        throw std::invalid_argument("measure_accessibility: temperature must be > 0");

    const FactUniverse& u = policy.universe();
    AccessibilityProfile profile;
    profile.n_samples = n_samples;
    profile.query_ids = queries;
    profile.correct_counts.resize(queries.size());
    profile.bins.resize(queries.size());
    profile.greedy_correct.resize(queries.size());

    parallel_for(static_cast<int>(queries.size()), [&](int i) {
        const int q = queries[i];
        const Fact& fact = u.facts[q];
        const std::vector<double> probs = policy.probs(q, temperature);
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(q) + 0x5151));
        int c = 0;
        for (int s = 0; s < n_samples; ++s) {
            const int form = rng.categorical(probs);
            if (u.vocab[form].entity == fact.answer) ++c;
        }
        profile.correct_counts[i] = c;
        profile.bins[i] = assign_bins(c);
        profile.greedy_correct[i] =
            u.vocab[policy.greedy(q)].entity == fact.answer;
    });
    return profile;
}

int assign_bins(int c) {
    if (c < 0 || c > 128)
        throw std::invalid_argument("assign_bins: c out of [0,128]");
    if (c <= 2) return c;        // bins {0}, {1}, {2}
    if (c <= 4) return 3;        // [3,4]
    if (c <= 8) return 4;        // [5,8]
    if (c <= 16) return 5;       // [9,16]
    if (c <= 32) return 6;       // [17,32]
    if (c <= 64) return 7;       // [33,64]
    return 8;                    // >= 65
}

std::string bin_label(int bin) {
    static const char* labels[kNumAccessibilityBins] = {
        "0", "1", "2", "[3,4]", "[5,8]", "[9,16]", "[17,32]", "[33,64]", ">=65"};
    if (bin < 0 || bin >= kNumAccessibilityBins)
        throw std::invalid_argument("bin_label: bad bin id");
    return labels[bin];
}

AccessibilityPartition partition_by_accessibility(
    const AccessibilityProfile& profile, const std::vector<int>& train_queries) {
    AccessibilityPartition part;
    for (int q : train_queries) {
        const int idx = profile.index_of(q);
        if (idx < 0)
            throw std::invalid_argument(
                "partition_by_accessibility: query missing from profile");
        const int c = profile.correct_counts[idx];
        if (c == 0)
            part.inaccessible.push_back(q);
        else if (c <= 2)
            part.near_inaccessible.push_back(q);
        else if (c <= 64)
            part.partially_accessible.push_back(q);
        else
            part.highly_accessible.push_back(q);
    }
    return part;
}

std::vector<std::vector<int>> downsample_balanced(
    const std::vector<std::vector<int>>& subsets, std::uint64_t seed) {
    if (subsets.empty())
        throw std::invalid_argument("downsample_balanced: no subsets");
    std::size_t target = subsets.front().size();
    for (const auto& s : subsets) {
        if (s.empty())
            throw std::invalid_argument("downsample_balanced: empty subset");
        target = std::min(target, s.size());
    }
    std::vector<std::vector<int>> out;
    out.reserve(subsets.size());
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        std::vector<int> pick = subsets[i];
        Rng rng(derive_seed(seed, 0x900d + i));
        rng.shuffle(pick);
        pick.resize(target);
        out.push_back(std::move(pick));
    }
    return out;
}

}  // namespace recall
