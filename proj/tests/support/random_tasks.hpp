#pragma once

// Seeded generators for small tabular tasks used by the property tests.
// Everything is derived from a single seed so failures reproduce exactly.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kdlab/task.hpp"

namespace kdlab::testing {

struct RandomTaskParams {
    std::size_t max_tokens = 4;   // |V| drawn from [2, max_tokens]
    std::size_t max_horizon = 4;  // T drawn from [1, max_horizon]
    std::size_t max_inputs = 2;
    double reward_span = 1.0;     // rewards uniform in [-span, span]
    double logit_span = 1.5;      // teacher logits uniform in [-span, span]
};

// A task with random rewards and a random tabular teacher. The input
// distribution is a normalized random vector, so non-uniform initial
// states are exercised too.
inline Task random_task(std::uint64_t seed, const RandomTaskParams& p = {}) {
    RandomStream rng = RandomStream::derived(seed, 0x7A5B);
    const std::size_t n_tokens = 2 + rng.index_below(p.max_tokens - 1);
    const std::size_t horizon = 1 + rng.index_below(p.max_horizon);
    const std::size_t n_inputs = 1 + rng.index_below(p.max_inputs);

    Vocabulary vocab;
    for (std::size_t i = 0; i < n_tokens; ++i)
        vocab.tokens.push_back("t" + std::to_string(i));
    for (std::size_t i = 0; i < n_inputs; ++i)
        vocab.input_symbols.push_back("x" + std::to_string(i));

    numvec input_dist(n_inputs);
    double mass = 0.0;
    for (double& w : input_dist) {
        w = 0.1 + rng.uniform01();
        mass += w;
    }
    for (double& w : input_dist) w /= mass;

    // Rewards and teacher logits are keyed off the dense state ids, so the
    // task is a pure function of the seed.
    auto states = build_state_index(vocab, horizon);
    numvec rewards(states->decision_state_count() * n_tokens);
    for (double& r : rewards) r = rng.uniform(-p.reward_span, p.reward_span);
    numvec logits(rewards.size());
    for (double& z : logits) z = rng.uniform(-p.logit_span, p.logit_span);

    return make_task(
        "random-" + std::to_string(seed), vocab, horizon, input_dist,
        [&](const Prefix& pre, int a) {
            return rewards[states->id_of(pre) * n_tokens + a];
        },
        [&](std::shared_ptr<const StateIndex> idx,
            std::shared_ptr<const FeatureMap>) {
            return Policy::tabular_from_logits(std::move(idx), n_tokens,
                                               logits);
        },
        states);
}

// Random tabular student for the same task.
inline Policy random_student(const Task& task, std::uint64_t seed,
                             double logit_span = 1.5) {
    RandomStream rng = RandomStream::derived(seed, 0x57D7);
    numvec logits(task.states->decision_state_count() * task.n_tokens());
    for (double& z : logits) z = rng.uniform(-logit_span, logit_span);
    return Policy::tabular_from_logits(task.states, task.n_tokens(), logits);
}

}  // namespace kdlab::testing
