#pragma once

// Shared fixtures for the unit tests: a tiny hand-built universe with known
// scores, and a small generated world cheap enough for per-test regeneration.

#include <memory>
#include <vector>

#include "recall/policy.hpp"
#include "recall/presets.hpp"
#include "recall/world.hpp"

namespace recall::testing {

// 3 entities, 4 surface forms (entity 0 has one alias), 2 queries.
// Knowledge rows are chosen per test via the `rows` argument; knots sit far
// above any score so the hinge features stay zero unless a test wants them.
inline std::shared_ptr<const FactUniverse> micro_universe(
    std::vector<std::vector<double>> rows = {{0.0, 0.0, 0.0, 0.0},
                                             {0.0, 0.0, 0.0, 0.0}}) {
    auto u = std::make_shared<FactUniverse>();
    u->config.n_entities = 3;
    u->config.n_relations = 1;
    u->config.n_facts = static_cast<int>(rows.size());
    u->n_entities = 3;
    u->n_relations = 1;
    u->vocab = {{0, 0, true}, {1, 0, false}, {2, 1, true}, {3, 2, true}};
    for (int q = 0; q < static_cast<int>(rows.size()); ++q) {
        Fact f;
        f.subject = q;
        f.relation = 0;
        f.answer = q % 2;  // q0 -> entity 0 (forms 0 and 1), q1 -> entity 1
        f.query_id = q;
        u->facts.push_back(f);
        for (double k : rows[q]) u->knowledge.push_back(k);
    }
    u->popularity = {0.4, 0.3, 0.2, 0.1};
    u->knots = {100.0, 200.0, 300.0};
    u->canonical_form = {0, 2, 3};
    u->entity_forms = {{0, 1}, {2}, {3}};
    return u;
}

// Small but structurally complete generated world (same shape the dedup
// acceptance check uses).
inline WorldConfig small_world_config() {
    WorldConfig cfg = get_preset("nq_like").world;
    cfg.n_entities = 80;
    cfg.n_relations = 6;
    cfg.n_facts = 300;
    return cfg;
}

}  // namespace recall::testing
