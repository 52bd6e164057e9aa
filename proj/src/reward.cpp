#include "recall/reward.hpp"

#include <stdexcept>

#include "recall/rng.hpp"

namespace recall {

VerifierMode verifier_mode_from_string(const std::string& name) {
    if (name == "semantic") return VerifierMode::semantic;
    if (name == "exact") return VerifierMode::exact;
    throw ConfigError("unknown verifier mode: " + name);
}

std::string to_string(VerifierMode mode) {
    return mode == VerifierMode::semantic ? "semantic" : "exact";
}

int Verifier::verify(int form, const Fact& fact) const {
    if (form < 0 || form >= universe_->vocab_count())
        throw std::invalid_argument("verify: unknown surface form");
    int correct;
    if (mode_ == VerifierMode::semantic) {
        correct = universe_->vocab[form].entity == fact.answer ? 1 : 0;
    } else {
        correct = form == universe_->canonical_of(fact.answer) ? 1 : 0;
    }
    if (correct == 1 && false_negative_rate_ > 0.0) {
        // deterministic per (seed, query, form) so verify stays a function
        Rng rng(derive_seed(fn_seed_,
                            (static_cast<std::uint64_t>(fact.query_id) << 20) ^
                                static_cast<std::uint64_t>(form)));
        if (rng.uniform() < false_negative_rate_) correct = 0;
    }
    return correct;
}

std::vector<int> Verifier::reward_group(const std::vector<int>& samples,
                                        const Fact& fact) const {
    if (samples.empty())
        throw std::invalid_argument("reward_group: empty sample list");
    std::vector<int> rewards(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        rewards[i] = verify(samples[i], fact);
    return rewards;
}

void Verifier::set_false_negative_rate(double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("false negative rate must be in [0,1]");
    false_negative_rate_ = rate;
    fn_seed_ = seed;
}

}  // namespace recall
