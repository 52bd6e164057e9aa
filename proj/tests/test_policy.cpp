#include <doctest.h>

#include <cmath>

#include "recall/policy.hpp"
#include "test_util.hpp"

using namespace recall;
using recall::testing::micro_universe;

TEST_CASE("initial weights implement K + lambda0 * p") {
    const Weights w = RecallPolicy::initial_weights(5.0);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 5.0);
    for (int i = 2; i < kNumFeatures; ++i) CHECK(w[i] == 0.0);
}

TEST_CASE("feature map matches its definition") {
    const std::array<double, 3> knots = {1.0, 2.0, 3.0};
    const Weights phi = feature_map(2.5, 0.4, knots);
    CHECK(phi[0] == 2.5);
    CHECK(phi[1] == 0.4);
    CHECK(phi[2] == doctest::Approx(1.0));
    CHECK(phi[3] == doctest::Approx(1.5));  // hinge(2.5 - 1)
    CHECK(phi[4] == doctest::Approx(0.5));  // hinge(2.5 - 2)
    CHECK(phi[5] == 0.0);                   // hinge(2.5 - 3) clamps
    CHECK(phi[6] == 1.0);
}

TEST_CASE("identity transform reproduces K + lambda0 * p logits") {
    auto u = micro_universe({{3.0, 1.0, 2.0, 0.5}, {0.0, 0.0, 4.0, 1.0}});
    RecallPolicy policy(u, {});
    policy.weights() = RecallPolicy::initial_weights(2.0);
    const auto logits = policy.logits(0);
    for (int v = 0; v < 4; ++v)
        CHECK(logits[v] ==
              doctest::Approx(u->k(0, v) + 2.0 * u->popularity[v]));
}

TEST_CASE("zero weights give a uniform distribution") {
    auto u = micro_universe();
    RecallPolicy policy(u, {});
    policy.weights() = {};
    const auto probs = policy.probs(0);
    for (double p : probs) CHECK(p == doctest::Approx(0.25));
    CHECK(policy.log_prob(0, 2) == doctest::Approx(-std::log(4.0)));
}

TEST_CASE("probabilities are invariant to a constant logit shift") {
    auto u = micro_universe({{1.0, 2.0, 0.5, 3.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = RecallPolicy::initial_weights(0.0);
    const auto before = policy.probs(0);
    policy.weights()[6] += 17.0;  // bias adds the same amount to every form
    const auto after = policy.probs(0);
    for (int v = 0; v < 4; ++v) CHECK(before[v] == doctest::Approx(after[v]));
}

TEST_CASE("greedy breaks ties toward the lowest form id") {
    auto u = micro_universe({{7.0, 7.0, 3.0, 1.0}, {1.0, 2.0, 9.0, 9.0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};  // logits = k
    CHECK(policy.greedy(0) == 0);
    CHECK(policy.greedy(1) == 2);
}

TEST_CASE("delta rows apply only to their own train query") {
    auto u = micro_universe();
    RecallPolicy policy(u, {0});
    policy.weights() = {};
    policy.delta_row(0)[3] = 10.0;
    CHECK(policy.greedy(0) == 3);
    const auto probs1 = policy.probs(1);  // untouched query stays uniform
    for (double p : probs1) CHECK(p == doctest::Approx(0.25));
    CHECK(policy.delta_at(0, 3) == 10.0);
    CHECK(policy.delta_at(1, 3) == 0.0);
    CHECK(policy.is_train_query(0));
    CHECK(!policy.is_train_query(1));
}

TEST_CASE("sampling matches the softmax within binomial noise") {
    auto u = micro_universe({{std::log(2.0), 0.0, 0.0, 0.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const auto probs = policy.probs(0);
    CHECK(probs[0] == doctest::Approx(0.4));  // 2 / (2 + 3)
    Rng rng(123);
    const int n = 20000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += policy.sample(0, 1.0, rng) == 0;
    const double sigma = std::sqrt(0.4 * 0.6 * n);
    CHECK(std::abs(hits - 0.4 * n) < 5.0 * sigma);
}

TEST_CASE("a saturated logit is sampled essentially always") {
    auto u = micro_universe({{50.0, 0.0, 0.0, 0.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    Rng rng(7);
    for (int i = 0; i < 200; ++i) CHECK(policy.sample(0, 1.0, rng) == 0);
    // and its score gradient vanishes: p(form) ~ 1 so (1 - p) ~ 0
    const auto grad = policy.grad_log_prob(0, 0);
    CHECK(std::abs(grad.w[0]) < 1e-9);
}

TEST_CASE("temperature sharpens and flattens the distribution") {
    auto u = micro_universe({{1.0, 0.0, 0.0, 0.0}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {1, 0, 0, 0, 0, 0, 0};
    const auto cold = policy.probs(0, 0.25);
    const auto base = policy.probs(0, 1.0);
    const auto hot = policy.probs(0, 4.0);
    CHECK(cold[0] > base[0]);
    CHECK(hot[0] < base[0]);
}

TEST_CASE("grad_log_prob matches central finite differences") {
    auto u = micro_universe({{2.0, 1.0, 0.5, 0.2}, {0.3, 0.1, 1.4, 0.9}});
    RecallPolicy policy(u, {0, 1});
    policy.weights() = {0.8, -0.2, 0.1, 0.0, 0.0, 0.0, 0.3};
    policy.delta_row(0)[1] = 0.5;
    const double eps = 1e-6;
    for (int q : {0, 1}) {
        for (int form : {0, 2}) {
            const PolicyGradient g = policy.grad_log_prob(q, form);
            for (int i = 0; i < kNumFeatures; ++i) {
                RecallPolicy hi = policy, lo = policy;
                hi.weights()[i] += eps;
                lo.weights()[i] -= eps;
                const double fd =
                    (hi.log_prob(q, form) - lo.log_prob(q, form)) / (2 * eps);
                CHECK(g.w[i] == doctest::Approx(fd).epsilon(1e-4));
            }
            for (int v = 0; v < 4; ++v) {
                RecallPolicy hi = policy, lo = policy;
                hi.delta_row(q)[v] += eps;
                lo.delta_row(q)[v] -= eps;
                const double fd =
                    (hi.log_prob(q, form) - lo.log_prob(q, form)) / (2 * eps);
                CHECK(g.delta[v] == doctest::Approx(fd).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("expected score gradient under the policy is zero") {
    auto u = micro_universe({{1.0, 0.4, -0.3, 0.9}, {0, 0, 0, 0}});
    RecallPolicy policy(u, {});
    policy.weights() = {0.7, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0};
    const auto probs = policy.probs(0);
    Weights expectation{};
    for (int v = 0; v < 4; ++v) {
        const auto g = policy.grad_log_prob(0, v);
        for (int i = 0; i < kNumFeatures; ++i)
            expectation[i] += probs[v] * g.w[i];
    }
    for (int i = 0; i < kNumFeatures; ++i)
        CHECK(std::abs(expectation[i]) < 1e-10);
}

TEST_CASE("KL to the reference matches the closed form") {
    auto u = micro_universe({{0.0, 0.0, 0.0, 0.0}, {0, 0, 0, 0}});
    // Build a 2-support comparison by pushing forms 2 and 3 far down.
    RecallPolicy pi(u, {0});
    pi.weights() = {};
    pi.delta_row(0) = {0.0, 0.0, -60.0, -60.0};  // pi = (0.5, 0.5)
    RecallPolicy ref_policy(u, {0});
    ref_policy.weights() = {};
    ref_policy.delta_row(0) = {std::log(9.0), 0.0, -60.0, -60.0};  // (0.9, 0.1)
    const ReferencePolicy ref = clone_as_reference(ref_policy);
    // KL((.5,.5) || (.9,.1)) = .5 ln(.5/.9) + .5 ln(.5/.1)
    CHECK(pi.kl_to_reference(ref.get(), 0) == doctest::Approx(0.510826).epsilon(1e-4));
    const ReferencePolicy self = clone_as_reference(pi);
    CHECK(pi.kl_to_reference(self.get(), 0) == doctest::Approx(0.0));
}

TEST_CASE("reference snapshots are immune to later training edits") {
    auto u = micro_universe({{0.1, 0.2, 0.3, 0.4}, {0.4, 0.3, 0.2, 0.1}});
    RecallPolicy policy(u, {0});
    policy.weights() = {};
    const ReferencePolicy ref = clone_as_reference(policy);
    policy.weights()[0] = 42.0;
    policy.delta_row(0)[1] = 9.0;
    CHECK(ref.get().weights()[0] == 0.0);
    CHECK(ref.get().delta_at(0, 1) == 0.0);
    CHECK(policy.kl_to_reference(ref.get(), 1) > 0.0);
}
