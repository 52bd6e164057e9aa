#include "recall/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace recall {

RecallPolicy::RecallPolicy(std::shared_ptr<const FactUniverse> universe,
                           std::vector<int> train_queries, bool delta_enabled)
    : universe_(std::move(universe)),
      delta_enabled_(delta_enabled),
      is_train_(universe_->num_queries(), 0) {
    w_ = initial_weights(universe_->config.suppression_strength);
    for (int q : train_queries) {
        if (q < 0 || q >= universe_->num_queries())
            throw std::invalid_argument("RecallPolicy: train query out of range");
        is_train_[q] = 1;
    }
}

Weights RecallPolicy::initial_weights(double suppression_strength) {
    return {1.0, suppression_strength, 0.0, 0.0, 0.0, 0.0, 0.0};
}

double RecallPolicy::delta_at(int query, int form) const {
    const auto it = delta_.find(query);
    if (it == delta_.end()) return 0.0;
    return it->second[form];
}

std::vector<double>& RecallPolicy::delta_row(int query) {
    if (!delta_enabled_ || !is_train_[query])
        throw std::logic_error("delta_row: no delta for this query");
    auto [it, inserted] = delta_.try_emplace(query);
    if (inserted) it->second.assign(universe_->vocab_count(), 0.0);
    return it->second;
}

void RecallPolicy::set_delta_rows(
    std::unordered_map<int, std::vector<double>> rows) {
    delta_ = std::move(rows);
}

std::vector<double> RecallPolicy::logits(int query) const {
    const FactUniverse& u = *universe_;
    if (query < 0 || query >= u.num_queries())
        throw std::invalid_argument("logits: unknown query");
    const int vocab_n = u.vocab_count();
    std::vector<double> out(vocab_n);
    const double* krow =
        u.knowledge.data() + static_cast<std::size_t>(query) * vocab_n;
    for (int v = 0; v < vocab_n; ++v) {
        const Weights phi = feature_map(krow[v], u.popularity[v], u.knots);
        double z = 0.0;
        for (int j = 0; j < kNumFeatures; ++j) z += w_[j] * phi[j];
        out[v] = z;
    }
    if (const auto it = delta_.find(query); it != delta_.end()) {
        for (int v = 0; v < vocab_n; ++v) out[v] += it->second[v];
    }
    return out;
}

namespace {

// softmax in place, max-subtracted
void softmax(std::vector<double>& z, double temperature) {
    double zmax = -std::numeric_limits<double>::infinity();
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp((v - zmax) / temperature);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

}  // namespace

std::vector<double> RecallPolicy::probs(int query, double temperature) const {
    if (temperature <= 0.0)
        throw std::invalid_argument("probs: temperature must be > 0");
    std::vector<double> z = logits(query);
    softmax(z, temperature);
    return z;
}

int RecallPolicy::sample(int query, double temperature, Rng& rng) const {
    const std::vector<double> p = probs(query, temperature);
    return rng.categorical(p);
}

int RecallPolicy::greedy(int query) const {
    const std::vector<double> z = logits(query);
    int best = 0;
    for (int v = 1; v < static_cast<int>(z.size()); ++v)
        if (z[v] > z[best]) best = v;
    return best;
}

double RecallPolicy::log_prob(int query, int form) const {
    const std::vector<double> z = logits(query);
    if (form < 0 || form >= static_cast<int>(z.size()))
        throw std::invalid_argument("log_prob: form out of vocabulary");
    double zmax = -std::numeric_limits<double>::infinity();
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    return z[form] - zmax - std::log(sum);
}

PolicyGradient RecallPolicy::grad_log_prob(int query, int form) const {
    const FactUniverse& u = *universe_;
    const int vocab_n = u.vocab_count();
    if (form < 0 || form >= vocab_n)
        throw std::invalid_argument("grad_log_prob: form out of vocabulary");
    const std::vector<double> p = probs(query);
    const double* krow =
        u.knowledge.data() + static_cast<std::size_t>(query) * vocab_n;

    PolicyGradient g;
    g.delta.assign(vocab_n, 0.0);
    Weights mean_phi{};
    for (int v = 0; v < vocab_n; ++v) {
        const Weights phi = feature_map(krow[v], u.popularity[v], u.knots);
        for (int j = 0; j < kNumFeatures; ++j) mean_phi[j] += p[v] * phi[j];
        g.delta[v] = -p[v];
    }
    g.delta[form] += 1.0;
    const Weights phi_form = feature_map(krow[form], u.popularity[form], u.knots);
    for (int j = 0; j < kNumFeatures; ++j) g.w[j] = phi_form[j] - mean_phi[j];
    return g;
}

double RecallPolicy::kl_to_reference(const RecallPolicy& ref, int query) const {
    if (ref.universe_.get() != universe_.get() &&
        (ref.universe_->seed != universe_->seed ||
         ref.universe_->num_queries() != universe_->num_queries() ||
         ref.universe_->vocab_count() != universe_->vocab_count()))
        throw std::invalid_argument("kl_to_reference: different universes");
    const std::vector<double> zp = logits(query);
    const std::vector<double> zq = ref.logits(query);
    auto log_softmax = [](const std::vector<double>& z) {
        double zmax = -std::numeric_limits<double>::infinity();
        for (double v : z) zmax = std::max(zmax, v);
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - zmax);
        const double lse = zmax + std::log(sum);
        std::vector<double> out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
        return out;
    };
    const std::vector<double> lp = log_softmax(zp);
    const std::vector<double> lq = log_softmax(zq);
    double kl = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i)
        kl += std::exp(lp[i]) * (lp[i] - lq[i]);
    return std::max(kl, 0.0);
}

RecallPolicy base_policy(std::shared_ptr<const FactUniverse> universe,
                         std::vector<int> train_queries, bool delta_enabled) {
    return RecallPolicy(std::move(universe), std::move(train_queries),
                        delta_enabled);
}

std::string checkpoint_to_json(const RecallPolicy& policy) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["universe_hash"] = policy.universe().content_hash();
    doc["delta_enabled"] = policy.delta_enabled();
    doc["w"] = policy.weights();
    std::vector<int> train_queries;
    for (int q = 0; q < policy.universe().num_queries(); ++q)
        if (policy.is_train_query(q)) train_queries.push_back(q);
    doc["train_queries"] = train_queries;
    nlohmann::json triplets = nlohmann::json::array();
    for (const auto& [q, row] : policy.delta_rows()) {
        for (int v = 0; v < static_cast<int>(row.size()); ++v) {
            if (row[v] != 0.0)
                triplets.push_back(nlohmann::json::array({q, v, row[v]}));
        }
    }
    doc["delta"] = std::move(triplets);
    return doc.dump();
}

RecallPolicy checkpoint_from_json(const std::string& json_text,
                                  std::shared_ptr<const FactUniverse> universe) {
    const nlohmann::json doc = nlohmann::json::parse(json_text);
    if (doc.at("schema_version").get<int>() != 1)
        throw std::runtime_error("checkpoint: unsupported schema version");
    if (doc.at("universe_hash").get<std::uint64_t>() != universe->content_hash())
        throw std::runtime_error("checkpoint: universe hash mismatch");

    RecallPolicy policy(universe, doc.at("train_queries").get<std::vector<int>>(),
                        doc.at("delta_enabled").get<bool>());
    const auto w = doc.at("w").get<std::vector<double>>();
    if (w.size() != kNumFeatures)
        throw std::runtime_error("checkpoint: bad weight dimension");
    std::copy(w.begin(), w.end(), policy.weights().begin());
    for (const auto& t : doc.at("delta")) {
        const int q = t.at(0).get<int>();
        const int v = t.at(1).get<int>();
        policy.delta_row(q)[v] = t.at(2).get<double>();
    }
    return policy;
}

void save_checkpoint(const RecallPolicy& policy, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out << checkpoint_to_json(policy);
}

RecallPolicy load_checkpoint(const std::string& path,
                             std::shared_ptr<const FactUniverse> universe) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str(), std::move(universe));
}

}  // namespace recall
