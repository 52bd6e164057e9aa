#include <doctest.h>

#include "recall/reward.hpp"
#include "test_util.hpp"

using namespace recall;
using recall::testing::micro_universe;

// micro universe: query 0 answers entity 0, whose forms are 0 (canonical)
// and 1 (alias); query 1 answers entity 1 with canonical form 2.

TEST_CASE("semantic verification accepts any form of the answer entity") {
    auto u = micro_universe();
    const Verifier sem(u, VerifierMode::semantic);
    CHECK(sem.verify(0, u->facts[0]) == 1);  // canonical
    CHECK(sem.verify(1, u->facts[0]) == 1);  // alias
    CHECK(sem.verify(2, u->facts[0]) == 0);  // other entity
    CHECK(sem.verify(3, u->facts[0]) == 0);
}

TEST_CASE("exact verification accepts only the canonical form") {
    auto u = micro_universe();
    const Verifier exact(u, VerifierMode::exact);
    CHECK(exact.verify(0, u->facts[0]) == 1);
    CHECK(exact.verify(1, u->facts[0]) == 0);  // alias rejected
    CHECK(exact.verify(2, u->facts[0]) == 0);
}

TEST_CASE("exact reward is dominated by semantic reward on every form") {
    auto u = micro_universe();
    const Verifier sem(u, VerifierMode::semantic);
    const Verifier exact(u, VerifierMode::exact);
    for (const Fact& fact : u->facts)
        for (int v = 0; v < u->vocab_count(); ++v)
            CHECK(exact.verify(v, fact) <= sem.verify(v, fact));
}

TEST_CASE("reward_group maps verify over the samples in order") {
    auto u = micro_universe();
    const Verifier sem(u, VerifierMode::semantic);
    const auto rewards = sem.reward_group({0, 1, 2, 3, 0}, u->facts[0]);
    CHECK(rewards == std::vector<int>{1, 1, 0, 0, 1});
}

TEST_CASE("verifier mode round-trips through strings") {
    CHECK(verifier_mode_from_string("semantic") == VerifierMode::semantic);
    CHECK(verifier_mode_from_string("exact") == VerifierMode::exact);
    CHECK(to_string(VerifierMode::semantic) == "semantic");
    CHECK(to_string(VerifierMode::exact) == "exact");
    CHECK_THROWS(verifier_mode_from_string("fuzzy"));
}

TEST_CASE("a total false-negative judge rejects everything") {
    auto u = micro_universe();
    Verifier sem(u, VerifierMode::semantic);
    sem.set_false_negative_rate(1.0, 5);
    CHECK(sem.verify(0, u->facts[0]) == 0);
    CHECK(sem.verify(1, u->facts[0]) == 0);
    // false negatives never create false positives
    CHECK(sem.verify(2, u->facts[0]) == 0);
}
