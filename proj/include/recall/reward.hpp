#pragma once

#include <memory>
#include <string>
#include <vector>

#include "recall/world.hpp"

namespace recall {

enum class VerifierMode { semantic, exact };

VerifierMode verifier_mode_from_string(const std::string& name);
std::string to_string(VerifierMode mode);

// Binary correctness oracle. Semantic mode accepts any surface form of the
// correct entity (the testbed analog of the LLM judge, which has zero false
// positives); exact mode accepts only the canonical form.
class Verifier {
public:
    Verifier(std::shared_ptr<const FactUniverse> universe, VerifierMode mode)
        : universe_(std::move(universe)), mode_(mode) {}

    VerifierMode mode() const { return mode_; }
    const FactUniverse& universe() const { return *universe_; }

    int verify(int form, const Fact& fact) const;
    std::vector<int> reward_group(const std::vector<int>& samples,
                                  const Fact& fact) const;

    // Optional judge false-negative rate; defaults to 0 (pure oracle).
    void set_false_negative_rate(double rate, std::uint64_t seed);

private:
    std::shared_ptr<const FactUniverse> universe_;
    VerifierMode mode_;
    double false_negative_rate_ = 0.0;
    std::uint64_t fn_seed_ = 0;
};

}  // namespace recall
