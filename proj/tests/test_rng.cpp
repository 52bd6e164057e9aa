#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "recall/rng.hpp"

using namespace recall;

TEST_CASE("rng streams are deterministic per seed") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
        all_equal &= x == y;
        any_diff |= x != z;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("derive_seed gives independent streams per tag") {
    CHECK(derive_seed(7, 1) != derive_seed(7, 2));
    CHECK(derive_seed(7, 1) != derive_seed(8, 1));
    CHECK(derive_seed(7, 1) == derive_seed(7, 1));
}

TEST_CASE("uniform lies in [0, 1) and matches its mean") {
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // mean 0.5, sd of the mean = 1/sqrt(12*n); allow 5 sigma
    CHECK(std::abs(sum / 100000 - 0.5) < 5.0 / std::sqrt(12.0 * 100000));
}

TEST_CASE("uniform_int covers the inclusive range") {
    Rng rng(2);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 5000; ++i) {
        const int v = rng.uniform_int(3, 7);
        REQUIRE(v >= 3);
        REQUIRE(v <= 7);
        ++counts[v - 3];
    }
    for (int c : counts) CHECK(c > 0);
}

TEST_CASE("normal matches mean and sd within 5 sigma") {
    Rng rng(3);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal(2.0, 3.0);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean - 2.0) < 5.0 * 3.0 / std::sqrt(n));
    CHECK(std::abs(var - 9.0) < 5.0 * 9.0 * std::sqrt(2.0 / n));
}

TEST_CASE("categorical follows the probability vector") {
    Rng rng(4);
    const std::vector<double> probs = {0.1, 0.6, 0.3};
    std::vector<int> counts(3, 0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) ++counts[rng.categorical(probs)];
    for (int i = 0; i < 3; ++i) {
        const double sigma = std::sqrt(probs[i] * (1 - probs[i]) * n);
        CHECK(std::abs(counts[i] - probs[i] * n) < 5.0 * sigma);
    }
}

TEST_CASE("categorical with a degenerate vector always returns its support") {
    Rng rng(5);
    const std::vector<double> probs = {0.0, 1.0, 0.0};
    for (int i = 0; i < 100; ++i) CHECK(rng.categorical(probs) == 1);
}

TEST_CASE("shuffle permutes without loss") {
    Rng rng(6);
    std::vector<int> items(50);
    std::iota(items.begin(), items.end(), 0);
    auto shuffled = items;
    rng.shuffle(shuffled);
    CHECK(shuffled != items);  // 50! permutations; identity is negligible
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(shuffled == items);
}
