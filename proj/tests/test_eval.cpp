#include <doctest.h>

#include <cmath>

#include "recall/eval.hpp"
#include "recall/rng.hpp"
#include "test_util.hpp"

using namespace recall;
using recall::testing::micro_universe;

TEST_CASE("pass_at_k combinatorial oracles") {
    CHECK(pass_at_k(2, 4, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    for (int k = 1; k <= 8; ++k) {
        CHECK(pass_at_k(0, 8, k) == 0.0);
        CHECK(pass_at_k(8, 8, k) == 1.0);
    }
    // single sample: pass@1 = c / n
    CHECK(pass_at_k(3, 10, 1) == doctest::Approx(0.3));
    CHECK_THROWS(pass_at_k(2, 4, 5));   // k > n
    CHECK_THROWS(pass_at_k(5, 4, 2));   // c > n
    CHECK_THROWS(pass_at_k(-1, 4, 2));
}

TEST_CASE("pass_at_k is monotone in k and in c") {
    for (int c = 0; c <= 16; ++c)
        for (int k = 2; k <= 16; ++k) {
            CHECK(pass_at_k(c, 16, k) >= pass_at_k(c, 16, k - 1));
            if (c > 0) CHECK(pass_at_k(c, 16, k) >= pass_at_k(c - 1, 16, k));
        }
}

TEST_CASE("pass_at_k matches a Monte Carlo prefix oracle") {
    Rng rng(31);
    for (const auto& [c, n, k] : std::vector<std::array<int, 3>>{
             {3, 12, 4}, {1, 20, 8}, {7, 9, 2}}) {
        const int trials = 100000;
        int hits = 0;
        for (int t = 0; t < trials; ++t) {
            // draw k of n samples without replacement; success if any of the
            // c correct ones is included
            std::vector<int> idx(n);
            for (int i = 0; i < n; ++i) idx[i] = i;
            rng.shuffle(idx);
            bool hit = false;
            for (int i = 0; i < k; ++i) hit |= idx[i] < c;
            hits += hit;
        }
        const double p = pass_at_k(c, n, k);
        const double sigma = std::sqrt(p * (1 - p) / trials);
        CHECK(std::abs(hits / double(trials) - p) < 4.0 * sigma);
    }
}

TEST_CASE("default pass@k budgets are the powers of two up to the cap") {
    CHECK(default_pass_at_k_budgets(256) ==
          std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128, 256});
    CHECK(default_pass_at_k_budgets(8) == std::vector<int>{1, 2, 4, 8});
}

TEST_CASE("greedy_accuracy hits the trivial extremes") {
    auto u = micro_universe({{60.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 60.0, 0.0}});
    RecallPolicy perfect(u, {});
    perfect.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    CHECK(greedy_accuracy(perfect, {0, 1}, sem) == 1.0);

    auto v = micro_universe({{0.0, 0.0, 60.0, 0.0}, {60.0, 0.0, 0.0, 0.0}});
    RecallPolicy never(v, {});
    never.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem_v(v, VerifierMode::semantic);
    CHECK(greedy_accuracy(never, {0, 1}, sem_v) == 0.0);
    CHECK_THROWS(greedy_accuracy(perfect, {}, sem));
}

TEST_CASE("pass_at_k_curve is flat at 1.0 for a deterministic-correct policy") {
    auto u = micro_universe({{60.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 60.0, 0.0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    const auto curve = pass_at_k_curve(policy, {0, 1}, sem, 32,
                                       default_pass_at_k_budgets(32), 7);
    for (double v : curve.values) CHECK(v == 1.0);
    for (std::size_t i = 1; i < curve.values.size(); ++i)
        CHECK(curve.values[i] >= curve.values[i - 1]);
}

TEST_CASE("pass@1 under sampling matches the correct-probability oracle") {
    // p(correct) = 0.5: two equal logits, one correct entity form
    auto u = micro_universe({{1.0, -60.0, 1.0, -60.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    const auto curve =
        pass_at_k_curve(policy, {0}, sem, 256, {1}, 13);
    // binomial: sd of c/256 is 0.5/16; allow 4 sigma
    CHECK(std::abs(curve.values[0] - 0.5) < 4.0 * 0.5 / 16.0);
}

TEST_CASE("majority vote verifies the modal entity") {
    // correct form 0 at probability ~0.88 vs distractor 2
    auto u = micro_universe({{2.0, -60.0, 0.0, -60.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    CHECK(majority_vote(policy, 0, sem, 32, 3) == 1);
    // flip: dominant wrong mode
    auto v = micro_universe({{-2.0, -60.0, 0.0, -60.0}, {0, 0, 0, 0}});
    RecallPolicy wrong(v, {});
    wrong.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem_v(v, VerifierMode::semantic);
    CHECK(majority_vote(wrong, 0, sem_v, 32, 3) == 0);
}

TEST_CASE("alias votes pool onto their entity") {
    // Forms 0 and 1 are both entity 0; individually ~0.31 each, together they
    // outvote the single distractor at ~0.38.
    auto u = micro_universe({{0.0, 0.0, 0.2, -60.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    int wins = 0;
    for (int s = 0; s < 20; ++s) wins += majority_vote(policy, 0, sem, 64, s);
    CHECK(wins >= 18);  // normalization must aggregate the two alias forms
}

TEST_CASE("voting with m=1 is a single verified draw") {
    auto u = micro_universe({{60.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 60.0, 0.0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    CHECK(voting_accuracy(policy, {0, 1}, sem, 1, 9) == 1.0);
}

TEST_CASE("repair_rate trivial fixtures") {
    auto u = micro_universe({{0.0, 0.0, 60.0, 0.0}, {60.0, 0.0, 0.0, 0.0}});
    // pre fails both queries
    RecallPolicy pre(u, {});
    pre.weights() = {1, 0, 0, 0, 0, 0, 0};
    const Verifier sem(u, VerifierMode::semantic);
    const auto profile = measure_accessibility(pre, {0, 1}, 128, 1.0, 5);
    // post == pre: all present bins repair at 0
    for (const auto& [bin, stats] : repair_rate(pre, pre, {0, 1}, sem, profile))
        CHECK(stats.rate == 0.0);
    // post correct everywhere: all present bins repair at 1
    RecallPolicy post(u, {0, 1});
    post.weights() = {1, 0, 0, 0, 0, 0, 0};
    post.delta_row(0)[0] = 120.0;
    post.delta_row(1)[2] = 120.0;
    const auto bins = repair_rate(pre, post, {0, 1}, sem, profile);
    CHECK(!bins.empty());
    int total = 0;
    for (const auto& [bin, stats] : bins) {
        CHECK(stats.rate == 1.0);
        total += stats.n_queries;
    }
    CHECK(total == 2);
    // ordering invariance
    const auto profile_r = measure_accessibility(pre, {1, 0}, 128, 1.0, 5);
    const auto bins_r = repair_rate(pre, post, {1, 0}, sem, profile_r);
    for (const auto& [bin, stats] : bins) {
        REQUIRE(bins_r.count(bin));
        CHECK(bins_r.at(bin).n_queries == stats.n_queries);
        CHECK(bins_r.at(bin).rate == stats.rate);
    }
}

TEST_CASE("recovery_fraction arithmetic and guards") {
    CHECK(recovery_fraction(0.20, 0.20, 0.32) == doctest::Approx(0.0));
    CHECK(recovery_fraction(0.32, 0.20, 0.32) == doctest::Approx(1.0));
    CHECK(recovery_fraction(0.30, 0.20, 0.32) ==
          doctest::Approx(0.8333333).epsilon(1e-5));
    // may exceed 1 or go negative
    CHECK(recovery_fraction(0.40, 0.20, 0.32) > 1.0);
    CHECK(recovery_fraction(0.10, 0.20, 0.32) < 0.0);
    CHECK_THROWS(recovery_fraction(0.3, 0.2, 0.2));
    // invariant under a shared positive affine map
    const double a = recovery_fraction(0.30, 0.20, 0.32);
    const double b = recovery_fraction(0.30 * 2 + 1, 0.20 * 2 + 1, 0.32 * 2 + 1);
    CHECK(a == doctest::Approx(b));
}

TEST_CASE("eval report serializes its csv surfaces") {
    EvalReport report;
    report.pass_at_k_pre.ks = {1, 2};
    report.pass_at_k_pre.values = {0.1, 0.2};
    report.pass_at_k_post.ks = {1, 2};
    report.pass_at_k_post.values = {0.3, 0.4};
    report.repair[0] = {10, 0.1};
    report.repair[5] = {4, 0.75};
    CHECK(report.passk_csv().find("k,pre,post") == 0);
    CHECK(report.passk_csv().find("1,0.1") != std::string::npos);
    CHECK(report.repair_csv().find("bin,n_queries,rate") == 0);
    CHECK(!report.to_json().empty());
}
