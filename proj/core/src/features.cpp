#include "kdlab/features.hpp"

#include <algorithm>

namespace kdlab {

FeatureMap::FeatureMap(std::size_t n_inputs, std::size_t n_tokens,
                       std::size_t horizon)
    : n_inputs_(n_inputs),
      n_tokens_(n_tokens),
      horizon_(horizon),
      slot_dim_(n_inputs + n_tokens + 1) {
    if (n_inputs == 0 || n_tokens == 0 || horizon == 0)
        throw std::invalid_argument("feature map needs inputs, tokens, horizon");
}

void FeatureMap::prefix_features(const Prefix& p, std::span<double> out) const {
    if (out.size() != prefix_dim())
        throw std::invalid_argument("feature buffer has wrong size");
    if (p.input >= n_inputs_)
        throw TokenOutOfRangeError("input symbol index out of range");
    const std::size_t t = p.length();
    if (t >= horizon_)
        throw HorizonExceededError("features requested past the last decision");
    std::fill(out.begin(), out.end(), 0.0);

    // Slot 0 describes sequence element t (the most recent), slot 1
    // element t-1. Element 0 is the input symbol; element j >= 1 is
    // generated token j-1; negative positions get the "none" flag.
    for (std::size_t slot = 0; slot < 2; ++slot) {
        const std::size_t base = slot * slot_dim_;
        const long pos = static_cast<long>(t) - static_cast<long>(slot);
        if (pos < 0) {
            out[base + slot_dim_ - 1] = 1.0;
        } else if (pos == 0) {
            out[base + p.input] = 1.0;
        } else {
            const int tok = p.generated[static_cast<std::size_t>(pos - 1)];
            if (tok < 0 || static_cast<std::size_t>(tok) >= n_tokens_)
                throw TokenOutOfRangeError("token index out of range");
            out[base + n_inputs_ + static_cast<std::size_t>(tok)] = 1.0;
        }
    }
    out[2 * slot_dim_ + t] = 1.0;
}

numvec FeatureMap::prefix_features(const Prefix& p) const {
    numvec out(prefix_dim());
    prefix_features(p, out);
    return out;
}

numvec FeatureMap::state_action_features(const Prefix& p, int token) const {
    if (token < 0 || static_cast<std::size_t>(token) >= n_tokens_)
        throw TokenOutOfRangeError("token index out of range");
    numvec out(state_action_dim(), 0.0);
    const std::size_t base = static_cast<std::size_t>(token) * prefix_dim();
    prefix_features(p, std::span<double>(out.data() + base, prefix_dim()));
    return out;
}

std::shared_ptr<const FeatureMap> build_feature_map(const Vocabulary& vocab,
                                                    std::size_t horizon) {
    vocab.validate();
    return std::make_shared<const FeatureMap>(vocab.input_count(), vocab.size(),
                                              horizon);
}

}  // namespace kdlab
