#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace recall {

class RecallPolicy;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SurfaceForm {
    int id = 0;
    int entity = 0;
    bool is_canonical = false;
};

// One-hop, single-answer fact. (subject, relation) is unique per universe.
struct Fact {
    int subject = 0;
    int relation = 0;
    int answer = 0;
    int query_id = 0;
    bool noise_floor = false;  // correct score left at the distractor level
};

// Two-component law for the correct canonical score: a diffuse reachable
// component plus mass near the distractor ceiling.
struct AccessibilityMixture {
    double reachable_weight = 0.5;
    double reachable_mean = 8.0;
    double reachable_sd = 2.2;
    double tail_mean = 3.5;
    double tail_sd = 1.5;
    // aliases sit this far (uniform) below the canonical score
    double alias_gap_min = 0.3;
    double alias_gap_max = 1.5;
};

struct DistractorNoise {
    double mean = 0.0;
    double sd = 1.0;
    // per-query designated high-popularity distractor
    double suppressor_mean = 3.0;
    double suppressor_sd = 0.8;
    int suppressor_pool = 10;  // drawn from the top-N popular forms
};

struct WorldConfig {
    int n_entities = 0;
    int n_relations = 0;
    int n_facts = 0;
    int vocab_size = 0;  // 0 = derived from alias draws
    AccessibilityMixture accessibility_mixture;
    DistractorNoise distractor_noise;
    double popularity_zipf_exponent = 0.5;
    double suppression_strength = 5.0;  // lambda0
    int aliases_min = 1;
    int aliases_max = 3;
    double noise_floor_fraction = 0.05;

    void validate() const;
};

// Frozen synthetic world. Immutable after generation; safe for concurrent
// reads.
struct FactUniverse {
    WorldConfig config;
    std::uint64_t seed = 0;
    int n_entities = 0;
    int n_relations = 0;
    std::vector<Fact> facts;
    std::vector<SurfaceForm> vocab;
    std::vector<double> knowledge;   // row-major [n_facts x vocab.size()]
    std::vector<double> popularity;  // per surface form
    std::array<double, 3> knots{};   // t1 < t2 < t3, percentiles of K

    // derived lookups
    std::vector<int> canonical_form;            // entity -> form id
    std::vector<std::vector<int>> entity_forms; // entity -> all form ids

    int num_queries() const { return static_cast<int>(facts.size()); }
    int vocab_count() const { return static_cast<int>(vocab.size()); }

    double k(int query, int form) const {
        return knowledge[static_cast<std::size_t>(query) * vocab.size() + form];
    }

    int canonical_of(int entity) const { return canonical_form[entity]; }

    // FNV-1a over the frozen content; used to pin checkpoints to a world
    // and to assert that training never touches K, p, or knots.
    std::uint64_t content_hash() const;
};

struct DatasetSplits {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
};

struct AccessibilityProfile {
    int n_samples = 128;
    std::vector<int> query_ids;
    std::vector<int> correct_counts;      // c per query
    std::vector<int> bins;                // assign_bins(c)
    std::vector<char> greedy_correct;     // under the measured policy

    int index_of(int query_id) const;     // -1 if absent
};

FactUniverse generate_universe(const WorldConfig& config, std::uint64_t seed);

DatasetSplits split_dataset(const FactUniverse& universe, int n_train,
                            int n_validation, int n_test, std::uint64_t seed);

// Drops test queries whose (subject, relation) key appears in train.
// Same-answer-different-subject queries are retained. The train set may
// come from a different universe (cross-world transfer).
std::vector<int> deduplicate(const std::vector<int>& train,
                             const std::vector<int>& test,
                             const FactUniverse& train_universe,
                             const FactUniverse& test_universe);

inline std::vector<int> deduplicate(const std::vector<int>& train,
                                    const std::vector<int>& test,
                                    const FactUniverse& universe) {
    return deduplicate(train, test, universe, universe);
}

AccessibilityProfile measure_accessibility(const RecallPolicy& policy,
                                           const std::vector<int>& queries,
                                           int n_samples, double temperature,
                                           std::uint64_t seed);

// Bins {0},{1},{2},[3,4],[5,8],[9,16],[17,32],[33,64],[65,128].
inline constexpr int kNumAccessibilityBins = 9;
int assign_bins(int c);
std::string bin_label(int bin);

struct AccessibilityPartition {
    std::vector<int> inaccessible;        // c = 0
    std::vector<int> near_inaccessible;   // 1 <= c <= 2
    std::vector<int> partially_accessible;// 3 <= c <= 64
    std::vector<int> highly_accessible;   // c >= 65
};

AccessibilityPartition partition_by_accessibility(
    const AccessibilityProfile& profile, const std::vector<int>& train_queries);

std::vector<std::vector<int>> downsample_balanced(
    const std::vector<std::vector<int>>& subsets, std::uint64_t seed);

}  // namespace recall
