#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "recall/presets.hpp"
#include "recall/serialization.hpp"

using namespace recall;

TEST_CASE("every shipped preset is valid and self-consistent") {
    const auto names = preset_names();
    CHECK(names == std::vector<std::string>{"nq_like", "trivia_like",
                                            "pop_like", "simple_like"});
    for (const auto& name : names) {
        const Preset p = get_preset(name);
        CHECK(p.name == name);
        CHECK_NOTHROW(p.world.validate());
        CHECK(p.train > 0);
        CHECK(p.validation > 0);
        CHECK(p.test > 0);
        CHECK(p.train + p.validation + p.test <= p.world.n_facts);
    }
    CHECK_THROWS_AS(get_preset("bogus"), ConfigError);
}

TEST_CASE("presets round-trip through toml") {
    for (const auto& name : preset_names()) {
        const Preset p = get_preset(name);
        const Preset back = preset_from_toml(preset_to_toml(p));
        CHECK(back.name == p.name);
        CHECK(back.train == p.train);
        CHECK(back.validation == p.validation);
        CHECK(back.test == p.test);
        const WorldConfig &a = p.world, &b = back.world;
        CHECK(a.n_entities == b.n_entities);
        CHECK(a.n_relations == b.n_relations);
        CHECK(a.n_facts == b.n_facts);
        CHECK(a.vocab_size == b.vocab_size);
        CHECK(a.aliases_min == b.aliases_min);
        CHECK(a.aliases_max == b.aliases_max);
        CHECK(a.popularity_zipf_exponent == b.popularity_zipf_exponent);
        CHECK(a.suppression_strength == b.suppression_strength);
        CHECK(a.noise_floor_fraction == b.noise_floor_fraction);
        CHECK(a.accessibility_mixture.reachable_weight ==
              b.accessibility_mixture.reachable_weight);
        CHECK(a.accessibility_mixture.tail_mean ==
              b.accessibility_mixture.tail_mean);
        CHECK(a.accessibility_mixture.alias_gap_max ==
              b.accessibility_mixture.alias_gap_max);
        CHECK(a.distractor_noise.suppressor_mean ==
              b.distractor_noise.suppressor_mean);
        CHECK(a.distractor_noise.suppressor_pool ==
              b.distractor_noise.suppressor_pool);
    }
}

TEST_CASE("shipped preset files match the built-in table") {
    // The presets/ directory is versioned next to the sources; tests run from
    // the build tree, so walk up until it appears.
    namespace fs = std::filesystem;
    fs::path dir = fs::current_path();
    fs::path presets;
    for (int depth = 0; depth < 6 && presets.empty(); ++depth) {
        if (fs::exists(dir / "presets")) presets = dir / "presets";
        dir = dir.parent_path();
    }
    REQUIRE_MESSAGE(!presets.empty(), "presets directory not found");
    for (const auto& name : preset_names()) {
        const Preset built_in = get_preset(name);
        const Preset from_file =
            load_preset_file((presets / (name + ".toml")).string());
        CHECK(preset_to_toml(from_file) == preset_to_toml(built_in));
    }
}

TEST_CASE("resolve_preset prefers a file override") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "recall_presets_test";
    fs::create_directories(dir);
    Preset p = get_preset("nq_like");
    p.world.n_facts = 1234;
    p.test = 100;
    write_text_file((dir / "nq_like.toml").string(), preset_to_toml(p));
    const Preset resolved = resolve_preset("nq_like", dir.string());
    CHECK(resolved.world.n_facts == 1234);
    // absent file falls back to the built-in
    const Preset fallback = resolve_preset("trivia_like", dir.string());
    CHECK(fallback.world.n_facts == get_preset("trivia_like").world.n_facts);
    fs::remove_all(dir);
    CHECK_THROWS(load_preset_file((dir / "nq_like.toml").string()));
}
