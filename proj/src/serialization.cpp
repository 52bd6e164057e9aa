#include "recall/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace recall {

namespace {

nlohmann::json config_to_json(const WorldConfig& c) {
    return {
        {"n_entities", c.n_entities},
        {"n_relations", c.n_relations},
        {"n_facts", c.n_facts},
        {"vocab_size", c.vocab_size},
        {"accessibility_mixture",
         {{"reachable_weight", c.accessibility_mixture.reachable_weight},
          {"reachable_mean", c.accessibility_mixture.reachable_mean},
          {"reachable_sd", c.accessibility_mixture.reachable_sd},
          {"tail_mean", c.accessibility_mixture.tail_mean},
          {"tail_sd", c.accessibility_mixture.tail_sd},
          {"alias_gap_min", c.accessibility_mixture.alias_gap_min},
          {"alias_gap_max", c.accessibility_mixture.alias_gap_max}}},
        {"distractor_noise",
         {{"mean", c.distractor_noise.mean},
          {"sd", c.distractor_noise.sd},
          {"suppressor_mean", c.distractor_noise.suppressor_mean},
          {"suppressor_sd", c.distractor_noise.suppressor_sd},
          {"suppressor_pool", c.distractor_noise.suppressor_pool}}},
        {"popularity_zipf_exponent", c.popularity_zipf_exponent},
        {"suppression_strength", c.suppression_strength},
        {"aliases_min", c.aliases_min},
        {"aliases_max", c.aliases_max},
        {"noise_floor_fraction", c.noise_floor_fraction},
    };
}

WorldConfig config_from_json(const nlohmann::json& j) {
    WorldConfig c;
    c.n_entities = j.at("n_entities").get<int>();
    c.n_relations = j.at("n_relations").get<int>();
    c.n_facts = j.at("n_facts").get<int>();
    c.vocab_size = j.value("vocab_size", 0);
    const auto& mix = j.at("accessibility_mixture");
    c.accessibility_mixture.reachable_weight = mix.at("reachable_weight");
    c.accessibility_mixture.reachable_mean = mix.at("reachable_mean");
    c.accessibility_mixture.reachable_sd = mix.at("reachable_sd");
    c.accessibility_mixture.tail_mean = mix.at("tail_mean");
    c.accessibility_mixture.tail_sd = mix.at("tail_sd");
    c.accessibility_mixture.alias_gap_min = mix.at("alias_gap_min");
    c.accessibility_mixture.alias_gap_max = mix.at("alias_gap_max");
    const auto& noise = j.at("distractor_noise");
    c.distractor_noise.mean = noise.at("mean");
    c.distractor_noise.sd = noise.at("sd");
    c.distractor_noise.suppressor_mean = noise.at("suppressor_mean");
    c.distractor_noise.suppressor_sd = noise.at("suppressor_sd");
    c.distractor_noise.suppressor_pool = noise.at("suppressor_pool");
    c.popularity_zipf_exponent = j.at("popularity_zipf_exponent");
    c.suppression_strength = j.at("suppression_strength");
    c.aliases_min = j.at("aliases_min");
    c.aliases_max = j.at("aliases_max");
    c.noise_floor_fraction = j.at("noise_floor_fraction");
    return c;
}

}  // namespace

std::string universe_to_json(const FactUniverse& u) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["seed"] = u.seed;
    doc["config"] = config_to_json(u.config);
    doc["n_entities"] = u.n_entities;
    doc["n_relations"] = u.n_relations;
    nlohmann::json facts = nlohmann::json::array();
    for (const auto& f : u.facts)
        facts.push_back({f.subject, f.relation, f.answer, f.query_id,
                         f.noise_floor ? 1 : 0});
    doc["facts"] = std::move(facts);
    nlohmann::json vocab = nlohmann::json::array();
    for (const auto& v : u.vocab)
        vocab.push_back({v.id, v.entity, v.is_canonical ? 1 : 0});
    doc["vocab"] = std::move(vocab);
    doc["knowledge"] = u.knowledge;  // row-major [n_facts x vocab]
    doc["popularity"] = u.popularity;
    doc["knots"] = u.knots;
    doc["content_hash"] = u.content_hash();
    return doc.dump();
}

FactUniverse universe_from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    if (doc.at("schema_version").get<int>() != 1)
        throw std::runtime_error("universe: unsupported schema version");
    FactUniverse u;
    u.seed = doc.at("seed").get<std::uint64_t>();
    u.config = config_from_json(doc.at("config"));
    u.n_entities = doc.at("n_entities").get<int>();
    u.n_relations = doc.at("n_relations").get<int>();
    for (const auto& f : doc.at("facts")) {
        Fact fact;
        fact.subject = f.at(0).get<int>();
        fact.relation = f.at(1).get<int>();
        fact.answer = f.at(2).get<int>();
        fact.query_id = f.at(3).get<int>();
        fact.noise_floor = f.at(4).get<int>() != 0;
        u.facts.push_back(fact);
    }
    u.canonical_form.assign(u.n_entities, -1);
    u.entity_forms.assign(u.n_entities, {});
    for (const auto& v : doc.at("vocab")) {
        SurfaceForm form;
        form.id = v.at(0).get<int>();
        form.entity = v.at(1).get<int>();
        form.is_canonical = v.at(2).get<int>() != 0;
        u.vocab.push_back(form);
        if (form.is_canonical) u.canonical_form[form.entity] = form.id;
        u.entity_forms[form.entity].push_back(form.id);
    }
    u.knowledge = doc.at("knowledge").get<std::vector<double>>();
    u.popularity = doc.at("popularity").get<std::vector<double>>();
    const auto knots = doc.at("knots").get<std::vector<double>>();
    std::copy(knots.begin(), knots.end(), u.knots.begin());
    if (doc.contains("content_hash") &&
        doc["content_hash"].get<std::uint64_t>() != u.content_hash())
        throw std::runtime_error("universe: content hash mismatch");
    return u;
}

std::string splits_to_json(const DatasetSplits& splits) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["train"] = splits.train;
    doc["validation"] = splits.validation;
    doc["test"] = splits.test;
    return doc.dump();
}

DatasetSplits splits_from_json(const std::string& json_text) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    if (doc.at("schema_version").get<int>() != 1)
        throw std::runtime_error("splits: unsupported schema version");
    DatasetSplits splits;
    splits.train = doc.at("train").get<std::vector<int>>();
    splits.validation = doc.at("validation").get<std::vector<int>>();
    splits.test = doc.at("test").get<std::vector<int>>();
    return splits;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace recall
