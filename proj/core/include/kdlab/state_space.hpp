#pragma once

#include <cstddef>
#include <memory>

#include "kdlab/types.hpp"

namespace kdlab {

/**
Dense ids over every reachable prefix up to and including the horizon.
Ids are assigned level by level: all length-0 prefixes in input order,
then length-1 prefixes ordered by (input, token), and so on; within a
level the id encodes the prefix in base |V|. Levels 0..T-1 are the
decision states (an action is still taken there); level T holds the
terminal states used by value backups.

Construction throws CapExceededError when the total state count would
exceed `max_states`; tabular parameterizations and the exact solvers all
share this guard.
*/
class StateIndex {
  public:
    static constexpr std::size_t default_max_states = 8u << 20;

    StateIndex(std::size_t n_inputs, std::size_t n_tokens, std::size_t horizon,
               std::size_t max_states = default_max_states);

    std::size_t n_inputs() const { return n_inputs_; }
    std::size_t n_tokens() const { return n_tokens_; }
    std::size_t horizon() const { return horizon_; }

    /// States at levels 0..T-1 (where actions are taken).
    std::size_t decision_state_count() const { return level_begin_[horizon_]; }
    /// All states including the terminal level.
    std::size_t total_state_count() const { return level_begin_[horizon_ + 1]; }

    std::size_t level_begin(std::size_t t) const;
    std::size_t level_count(std::size_t t) const;
    std::size_t level_of(std::size_t id) const;

    std::size_t id_of(const Prefix& p) const;
    Prefix prefix_of(std::size_t id) const;

    /// Id of the prefix reached by appending `token`.
    std::size_t child(std::size_t id, int token) const;

  private:
    std::size_t n_inputs_;
    std::size_t n_tokens_;
    std::size_t horizon_;
    std::vector<std::size_t> level_begin_;  // horizon_ + 2 entries
};

std::shared_ptr<const StateIndex> build_state_index(
    const Vocabulary& vocab, std::size_t horizon,
    std::size_t max_states = StateIndex::default_max_states);

}  // namespace kdlab
