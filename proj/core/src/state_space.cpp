#include "kdlab/state_space.hpp"

#include <limits>

namespace kdlab {

StateIndex::StateIndex(std::size_t n_inputs, std::size_t n_tokens,
                       std::size_t horizon, std::size_t max_states)
    : n_inputs_(n_inputs), n_tokens_(n_tokens), horizon_(horizon) {
    if (n_inputs == 0 || n_tokens == 0)
        throw std::invalid_argument("state index needs inputs and tokens");
    if (horizon == 0) throw std::invalid_argument("horizon must be positive");
    level_begin_.resize(horizon_ + 2);
    level_begin_[0] = 0;
    std::size_t level = n_inputs_;
    for (std::size_t t = 0; t <= horizon_; ++t) {
        level_begin_[t + 1] = level_begin_[t] + level;
        if (level_begin_[t + 1] > max_states)
            throw CapExceededError("state space exceeds cap of " +
                                   std::to_string(max_states) + " states");
        if (t < horizon_) {
            if (level > max_states / n_tokens_)
                throw CapExceededError("state space exceeds cap of " +
                                       std::to_string(max_states) + " states");
            level *= n_tokens_;
        }
    }
}

std::size_t StateIndex::level_begin(std::size_t t) const {
    if (t > horizon_) throw HorizonExceededError("level past horizon");
    return level_begin_[t];
}

std::size_t StateIndex::level_count(std::size_t t) const {
    if (t > horizon_) throw HorizonExceededError("level past horizon");
    return level_begin_[t + 1] - level_begin_[t];
}

std::size_t StateIndex::level_of(std::size_t id) const {
    if (id >= total_state_count())
        throw std::out_of_range("state id out of range");
    std::size_t t = 0;
    while (id >= level_begin_[t + 1]) ++t;
    return t;
}

std::size_t StateIndex::id_of(const Prefix& p) const {
    if (p.input >= n_inputs_)
        throw TokenOutOfRangeError("input symbol index out of range");
    const std::size_t t = p.length();
    if (t > horizon_)
        throw HorizonExceededError("prefix longer than horizon");
    std::size_t code = p.input;
    for (int tok : p.generated) {
        if (tok < 0 || static_cast<std::size_t>(tok) >= n_tokens_)
            throw TokenOutOfRangeError("token index out of range");
        code = code * n_tokens_ + static_cast<std::size_t>(tok);
    }
    return level_begin_[t] + code;
}

Prefix StateIndex::prefix_of(std::size_t id) const {
    const std::size_t t = level_of(id);
    std::size_t code = id - level_begin_[t];
    Prefix p;
    p.generated.resize(t);
    for (std::size_t i = t; i-- > 0;) {
        p.generated[i] = static_cast<int>(code % n_tokens_);
        code /= n_tokens_;
    }
    p.input = code;
    return p;
}

std::size_t StateIndex::child(std::size_t id, int token) const {
    if (token < 0 || static_cast<std::size_t>(token) >= n_tokens_)
        throw TokenOutOfRangeError("token index out of range");
    const std::size_t t = level_of(id);
    if (t >= horizon_)
        throw HorizonExceededError("stepping past the horizon");
    const std::size_t code = id - level_begin_[t];
    return level_begin_[t + 1] + code * n_tokens_ +
           static_cast<std::size_t>(token);
}

std::shared_ptr<const StateIndex> build_state_index(const Vocabulary& vocab,
                                                    std::size_t horizon,
                                                    std::size_t max_states) {
    vocab.validate();
    return std::make_shared<const StateIndex>(vocab.input_count(), vocab.size(),
                                              horizon, max_states);
}

}  // namespace kdlab
