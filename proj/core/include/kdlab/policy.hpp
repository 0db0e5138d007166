#pragma once

#include <memory>
#include <span>
#include <string>

#include "kdlab/features.hpp"
#include "kdlab/state_space.hpp"
#include "kdlab/types.hpp"

namespace kdlab {

enum class PolicyKind { tabular_softmax, linear_softmax, mlp };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& s);

struct PolicyShape {
    PolicyKind kind = PolicyKind::tabular_softmax;
    std::size_t n_tokens = 0;
    std::size_t n_states = 0;     // tabular rows
    std::size_t feature_dim = 0;  // linear / mlp input width
    std::size_t hidden_dim = 0;   // mlp only

    std::size_t param_count() const;
};

/**
Softmax policy over the token alphabet. Three parameterizations:

  tabular_softmax  one logit row per decision state
  linear_softmax   logits = W * prefix_features, W is |V| x d row-major
  mlp              logits = W2 * tanh(W1 * prefix_features + b1) + b2,
                   parameters packed [W1, b1, W2, b2] row-major

Probabilities are strictly positive by construction. Evaluation methods
are const and share no mutable state, so concurrent reads are safe;
set_params requires exclusive access.
*/
class Policy {
  public:
    static Policy tabular(std::shared_ptr<const StateIndex> states,
                          std::size_t n_tokens);
    static Policy tabular_from_logits(std::shared_ptr<const StateIndex> states,
                                      std::size_t n_tokens, numvec logits);
    static Policy linear(std::shared_ptr<const FeatureMap> features,
                         std::size_t n_tokens);
    /// Weights drawn uniform(-scale, scale) so hidden units differ at init.
    static Policy mlp(std::shared_ptr<const FeatureMap> features,
                      std::size_t n_tokens, std::size_t hidden_dim,
                      RandomStream& rng, double scale = 0.1);

    const PolicyShape& shape() const { return shape_; }
    std::span<const double> params() const { return values_; }
    void set_params(numvec values);
    void axpy_params(double scale, std::span<const double> direction);

    numvec logits(const Prefix& p) const;
    /// Strictly positive, sums to 1 within 1e-12.
    numvec action_probs(const Prefix& p) const;

    /// d log pi(a | p) / d params, flattened to param_count() entries.
    numvec log_prob_grad(const Prefix& p, int a) const;
    /// acc += scale * log_prob_grad(p, a); touches only nonzero entries.
    void add_log_prob_grad(const Prefix& p, int a, double scale,
                           std::span<double> acc) const;

    std::shared_ptr<const StateIndex> state_index() const { return states_; }
    std::shared_ptr<const FeatureMap> feature_map() const { return features_; }

  private:
    Policy() = default;

    numvec raw_logits(const Prefix& p) const;
    void check_action(int a) const;

    PolicyShape shape_;
    numvec values_;
    std::shared_ptr<const StateIndex> states_;
    std::shared_ptr<const FeatureMap> features_;
};

/// Softmax with max-subtraction; throws NonFiniteError on bad logits.
numvec softmax(std::span<const double> logits);

}  // namespace kdlab
