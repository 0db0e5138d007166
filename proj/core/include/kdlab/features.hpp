#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "kdlab/types.hpp"

namespace kdlab {

/**
Fixed featurization shared by the linear and mlp function classes.

A prefix is viewed as the sequence (input, token_1, ..., token_t). Its
feature vector is the concatenation of one-hot encodings of the last two
sequence elements (each slot spans input symbols, then tokens, then a
"nothing there" flag for positions before the sequence start) and a
one-hot of the prefix length. Dimension: 2*(|X| + |V| + 1) + T.

State-action features place the prefix features in the block selected by
the action, with all other blocks zero, so a linear head can score each
action independently. Dimension: |V| * prefix_dim().
*/
class FeatureMap {
  public:
    FeatureMap(std::size_t n_inputs, std::size_t n_tokens, std::size_t horizon);

    std::size_t n_inputs() const { return n_inputs_; }
    std::size_t n_tokens() const { return n_tokens_; }
    std::size_t horizon() const { return horizon_; }

    std::size_t prefix_dim() const { return 2 * slot_dim_ + horizon_; }
    std::size_t state_action_dim() const { return n_tokens_ * prefix_dim(); }

    /// Writes prefix_dim() values; `out` must be zeroed or is overwritten.
    void prefix_features(const Prefix& p, std::span<double> out) const;
    numvec prefix_features(const Prefix& p) const;

    numvec state_action_features(const Prefix& p, int token) const;

  private:
    std::size_t n_inputs_;
    std::size_t n_tokens_;
    std::size_t horizon_;
    std::size_t slot_dim_;  // n_inputs + n_tokens + 1
};

std::shared_ptr<const FeatureMap> build_feature_map(const Vocabulary& vocab,
                                                    std::size_t horizon);

}  // namespace kdlab
