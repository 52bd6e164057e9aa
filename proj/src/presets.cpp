#include "recall/presets.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "recall/toml.hpp"

namespace recall {

namespace {

WorldConfig base_world() {
    WorldConfig c;
    c.n_entities = 600;
    c.n_relations = 12;
    c.n_facts = 2700;
    c.vocab_size = 0;
    c.aliases_min = 1;
    c.aliases_max = 3;
    c.popularity_zipf_exponent = 0.5;
    c.suppression_strength = 12.0;
    c.distractor_noise = {0.0, 8.0, 72.0, 1.5, 10};
    c.accessibility_mixture = {0.25, 120.0, 8.0, 72.0, 2.5, 6.0, 30.0};
    c.noise_floor_fraction = 0.05;
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"nq_like", "trivia_like", "pop_like", "simple_like"};
}

Preset get_preset(const std::string& name) {
    Preset p;
    p.name = name;
    p.world = base_world();
    p.train = 2000;
    p.validation = 128;
    p.test = 500;
    if (name == "nq_like") {
        // Deep popularity ladder: a wide suppressor pool with a flat-ish
        // popularity curve spreads correction thresholds over a long range,
        // so trainers separate by how far they push the shared transform.
        p.world.suppression_strength = 34.0;
        p.world.popularity_zipf_exponent = 0.35;
        p.world.distractor_noise.suppressor_mean = 69.0;
        p.world.distractor_noise.suppressor_pool = 60;
        p.world.noise_floor_fraction = 0.20;
        return p;
    }
    if (name == "trivia_like") {
        // Shallow graded suppression: most failed facts sit just below the
        // sampling threshold, so subset training can re-ignite them.
        return p;
    }
    if (name == "pop_like") {
        // Alias-rich: many near-canonical surface forms per entity, which
        // makes the choice of reward verifier (semantic vs exact) bite.
        p.world.aliases_min = 3;
        p.world.aliases_max = 6;
        p.world.accessibility_mixture.alias_gap_min = 0.5;
        p.world.accessibility_mixture.alias_gap_max = 2.5;
        p.world.noise_floor_fraction = 0.08;
        return p;
    }
    if (name == "simple_like") {
        // Dominated by unmemorized facts: nothing to elicit, nothing to gain.
        p.world.accessibility_mixture.reachable_weight = 0.90;
        p.world.noise_floor_fraction = 0.90;
        return p;
    }
    throw ConfigError("unknown preset: " + name);
}

std::string world_config_to_toml(const WorldConfig& world) {
    std::ostringstream out;
    out.precision(12);
    out << "[world]\n";
    out << "n_entities = " << world.n_entities << "\n";
    out << "n_relations = " << world.n_relations << "\n";
    out << "n_facts = " << world.n_facts << "\n";
    out << "vocab_size = " << world.vocab_size << "\n";
    out << "aliases_min = " << world.aliases_min << "\n";
    out << "aliases_max = " << world.aliases_max << "\n";
    out << "popularity_zipf_exponent = " << world.popularity_zipf_exponent
        << "\n";
    out << "suppression_strength = " << world.suppression_strength << "\n";
    out << "noise_floor_fraction = " << world.noise_floor_fraction << "\n\n";
    const auto& m = world.accessibility_mixture;
    out << "[mixture]\n";
    out << "reachable_weight = " << m.reachable_weight << "\n";
    out << "reachable_mean = " << m.reachable_mean << "\n";
    out << "reachable_sd = " << m.reachable_sd << "\n";
    out << "tail_mean = " << m.tail_mean << "\n";
    out << "tail_sd = " << m.tail_sd << "\n";
    out << "alias_gap_min = " << m.alias_gap_min << "\n";
    out << "alias_gap_max = " << m.alias_gap_max << "\n\n";
    const auto& n = world.distractor_noise;
    out << "[noise]\n";
    out << "mean = " << n.mean << "\n";
    out << "sd = " << n.sd << "\n";
    out << "suppressor_mean = " << n.suppressor_mean << "\n";
    out << "suppressor_sd = " << n.suppressor_sd << "\n";
    out << "suppressor_pool = " << n.suppressor_pool << "\n";
    return out.str();
}

WorldConfig world_config_from_toml_doc(const toml::Document& doc) {
    WorldConfig w;
    const auto& world = doc.at("world");
    w.n_entities = static_cast<int>(world.at("n_entities").as_int());
    w.n_relations = static_cast<int>(world.at("n_relations").as_int());
    w.n_facts = static_cast<int>(world.at("n_facts").as_int());
    w.vocab_size = static_cast<int>(world.at("vocab_size").as_int());
    w.aliases_min = static_cast<int>(world.at("aliases_min").as_int());
    w.aliases_max = static_cast<int>(world.at("aliases_max").as_int());
    w.popularity_zipf_exponent =
        world.at("popularity_zipf_exponent").as_double();
    w.suppression_strength = world.at("suppression_strength").as_double();
    w.noise_floor_fraction = world.at("noise_floor_fraction").as_double();
    const auto& mix = doc.at("mixture");
    auto& m = w.accessibility_mixture;
    m.reachable_weight = mix.at("reachable_weight").as_double();
    m.reachable_mean = mix.at("reachable_mean").as_double();
    m.reachable_sd = mix.at("reachable_sd").as_double();
    m.tail_mean = mix.at("tail_mean").as_double();
    m.tail_sd = mix.at("tail_sd").as_double();
    m.alias_gap_min = mix.at("alias_gap_min").as_double();
    m.alias_gap_max = mix.at("alias_gap_max").as_double();
    const auto& noise = doc.at("noise");
    auto& n = w.distractor_noise;
    n.mean = noise.at("mean").as_double();
    n.sd = noise.at("sd").as_double();
    n.suppressor_mean = noise.at("suppressor_mean").as_double();
    n.suppressor_sd = noise.at("suppressor_sd").as_double();
    n.suppressor_pool = static_cast<int>(noise.at("suppressor_pool").as_int());
    return w;
}

std::string preset_to_toml(const Preset& p) {
    std::ostringstream out;
    out << "name = \"" << p.name << "\"\n\n";
    out << world_config_to_toml(p.world) << "\n";
    out << "[splits]\n";
    out << "train = " << p.train << "\n";
    out << "validation = " << p.validation << "\n";
    out << "test = " << p.test << "\n";
    return out.str();
}

Preset preset_from_toml(const std::string& text) {
    const toml::Document doc = toml::parse(text);
    Preset p;
    p.name = doc.at("").at("name").as_string();
    p.world = world_config_from_toml_doc(doc);
    const auto& splits = doc.at("splits");
    p.train = static_cast<int>(splits.at("train").as_int());
    p.validation = static_cast<int>(splits.at("validation").as_int());
    p.test = static_cast<int>(splits.at("test").as_int());
    p.world.validate();
    return p;
}

Preset load_preset_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("preset file not found: " + path);
    std::ostringstream buf;
    buf << file.rdbuf();
    return preset_from_toml(buf.str());
}

Preset resolve_preset(const std::string& name, const std::string& presets_dir) {
    if (!presets_dir.empty()) {
        const std::filesystem::path candidate =
            std::filesystem::path(presets_dir) / (name + ".toml");
        if (std::filesystem::exists(candidate))
            return load_preset_file(candidate.string());
    }
    return get_preset(name);
}

}  // namespace recall
