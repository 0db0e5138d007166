#include "kdlab/policy.hpp"

#include <algorithm>
#include <cmath>

namespace kdlab {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::tabular_softmax: return "tabular_softmax";
        case PolicyKind::linear_softmax: return "linear_softmax";
        case PolicyKind::mlp: return "mlp";
    }
    throw std::invalid_argument("bad PolicyKind");
}

PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "tabular_softmax" || s == "tabular")
        return PolicyKind::tabular_softmax;
    if (s == "linear_softmax" || s == "linear") return PolicyKind::linear_softmax;
    if (s == "mlp") return PolicyKind::mlp;
    throw std::invalid_argument("bad policy kind: " + s);
}

std::size_t PolicyShape::param_count() const {
    switch (kind) {
        case PolicyKind::tabular_softmax: return n_states * n_tokens;
        case PolicyKind::linear_softmax: return n_tokens * feature_dim;
        case PolicyKind::mlp:
            return hidden_dim * feature_dim + hidden_dim +
                   n_tokens * hidden_dim + n_tokens;
    }
    throw std::invalid_argument("bad PolicyKind");
}

numvec softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax of nothing");
    if (!all_finite(logits)) throw NonFiniteError("non-finite logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    numvec probs(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

Policy Policy::tabular(std::shared_ptr<const StateIndex> states,
                       std::size_t n_tokens) {
    return tabular_from_logits(
        states, n_tokens, numvec(states->decision_state_count() * n_tokens, 0.0));
}

Policy Policy::tabular_from_logits(std::shared_ptr<const StateIndex> states,
                                   std::size_t n_tokens, numvec logits) {
    if (!states) throw std::invalid_argument("null state index");
    if (n_tokens != states->n_tokens())
        throw std::invalid_argument("token count disagrees with state index");
    Policy p;
    p.shape_.kind = PolicyKind::tabular_softmax;
    p.shape_.n_tokens = n_tokens;
    p.shape_.n_states = states->decision_state_count();
    p.states_ = std::move(states);
    p.set_params(std::move(logits));
    return p;
}

Policy Policy::linear(std::shared_ptr<const FeatureMap> features,
                      std::size_t n_tokens) {
    if (!features) throw std::invalid_argument("null feature map");
    if (n_tokens != features->n_tokens())
        throw std::invalid_argument("token count disagrees with feature map");
    Policy p;
    p.shape_.kind = PolicyKind::linear_softmax;
    p.shape_.n_tokens = n_tokens;
    p.shape_.feature_dim = features->prefix_dim();
    p.features_ = std::move(features);
    p.set_params(numvec(p.shape_.param_count(), 0.0));
    return p;
}

Policy Policy::mlp(std::shared_ptr<const FeatureMap> features,
                   std::size_t n_tokens, std::size_t hidden_dim,
                   RandomStream& rng, double scale) {
    if (!features) throw std::invalid_argument("null feature map");
    if (n_tokens != features->n_tokens())
        throw std::invalid_argument("token count disagrees with feature map");
    if (hidden_dim == 0) throw std::invalid_argument("mlp needs hidden units");
    Policy p;
    p.shape_.kind = PolicyKind::mlp;
    p.shape_.n_tokens = n_tokens;
    p.shape_.feature_dim = features->prefix_dim();
    p.shape_.hidden_dim = hidden_dim;
    p.features_ = std::move(features);
    numvec init(p.shape_.param_count());
    for (double& v : init) v = rng.uniform(-scale, scale);
    p.set_params(std::move(init));
    return p;
}

void Policy::set_params(numvec values) {
    if (values.size() != shape_.param_count())
        throw std::invalid_argument("parameter vector has wrong size");
    if (!all_finite(values)) throw NonFiniteError("non-finite policy params");
    values_ = std::move(values);
}

void Policy::axpy_params(double scale, std::span<const double> direction) {
    if (direction.size() != values_.size())
        throw std::invalid_argument("direction vector has wrong size");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += scale * direction[i];
    if (!all_finite(values_)) throw NonFiniteError("non-finite policy params");
}

void Policy::check_action(int a) const {
    if (a < 0 || static_cast<std::size_t>(a) >= shape_.n_tokens)
        throw TokenOutOfRangeError("action index out of range");
}

numvec Policy::raw_logits(const Prefix& p) const {
    const std::size_t V = shape_.n_tokens;
    switch (shape_.kind) {
        case PolicyKind::tabular_softmax: {
            if (p.length() >= states_->horizon())
                throw HorizonExceededError("terminal state has no actions");
            const std::size_t s = states_->id_of(p);
            return numvec(values_.begin() + static_cast<long>(s * V),
                          values_.begin() + static_cast<long>((s + 1) * V));
        }
        case PolicyKind::linear_softmax: {
            const numvec x = features_->prefix_features(p);
            const std::size_t d = shape_.feature_dim;
            numvec z(V, 0.0);
            for (std::size_t y = 0; y < V; ++y) {
                double acc = 0.0;
                const double* row = values_.data() + y * d;
                for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
                z[y] = acc;
            }
            return z;
        }
        case PolicyKind::mlp: {
            const numvec x = features_->prefix_features(p);
            const std::size_t d = shape_.feature_dim;
            const std::size_t H = shape_.hidden_dim;
            const double* w1 = values_.data();
            const double* b1 = w1 + H * d;
            const double* w2 = b1 + H;
            const double* b2 = w2 + V * H;
            numvec h(H);
            for (std::size_t k = 0; k < H; ++k) {
                double acc = b1[k];
                const double* row = w1 + k * d;
                for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
                h[k] = std::tanh(acc);
            }
            numvec z(V);
            for (std::size_t y = 0; y < V; ++y) {
                double acc = b2[y];
                const double* row = w2 + y * H;
                for (std::size_t k = 0; k < H; ++k) acc += row[k] * h[k];
                z[y] = acc;
            }
            return z;
        }
    }
    throw std::invalid_argument("bad PolicyKind");
}

numvec Policy::logits(const Prefix& p) const { return raw_logits(p); }

numvec Policy::action_probs(const Prefix& p) const {
    return softmax(raw_logits(p));
}

numvec Policy::log_prob_grad(const Prefix& p, int a) const {
    numvec grad(shape_.param_count(), 0.0);
    add_log_prob_grad(p, a, 1.0, grad);
    return grad;
}

void Policy::add_log_prob_grad(const Prefix& p, int a, double scale,
                               std::span<double> acc) const {
    check_action(a);
    if (acc.size() != shape_.param_count())
        throw std::invalid_argument("gradient buffer has wrong size");
    const std::size_t V = shape_.n_tokens;
    // d log pi(a) / d logit_y = [y == a] - pi(y)
    switch (shape_.kind) {
        case PolicyKind::tabular_softmax: {
            const numvec probs = softmax(raw_logits(p));
            const std::size_t s = states_->id_of(p);
            double* row = acc.data() + s * V;
            for (std::size_t y = 0; y < V; ++y) row[y] -= scale * probs[y];
            row[static_cast<std::size_t>(a)] += scale;
            return;
        }
        case PolicyKind::linear_softmax: {
            const numvec probs = softmax(raw_logits(p));
            const numvec x = features_->prefix_features(p);
            const std::size_t d = shape_.feature_dim;
            for (std::size_t y = 0; y < V; ++y) {
                const double gz =
                    scale * ((static_cast<std::size_t>(a) == y ? 1.0 : 0.0) -
                             probs[y]);
                if (gz == 0.0) continue;
                double* row = acc.data() + y * d;
                for (std::size_t j = 0; j < d; ++j) row[j] += gz * x[j];
            }
            return;
        }
        case PolicyKind::mlp: {
            const numvec x = features_->prefix_features(p);
            const std::size_t d = shape_.feature_dim;
            const std::size_t H = shape_.hidden_dim;
            const double* w1 = values_.data();
            const double* b1 = w1 + H * d;
            const double* w2 = b1 + H;
            numvec h(H);
            for (std::size_t k = 0; k < H; ++k) {
                double v = b1[k];
                const double* row = w1 + k * d;
                for (std::size_t j = 0; j < d; ++j) v += row[j] * x[j];
                h[k] = std::tanh(v);
            }
            numvec z(V);
            {
                const double* b2 = w2 + V * H;
                for (std::size_t y = 0; y < V; ++y) {
                    double v = b2[y];
                    const double* row = w2 + y * H;
                    for (std::size_t k = 0; k < H; ++k) v += row[k] * h[k];
                    z[y] = v;
                }
            }
            const numvec probs = softmax(z);
            numvec gz(V);
            for (std::size_t y = 0; y < V; ++y)
                gz[y] = scale * ((static_cast<std::size_t>(a) == y ? 1.0 : 0.0) -
                                 probs[y]);
            double* acc_w1 = acc.data();
            double* acc_b1 = acc_w1 + H * d;
            double* acc_w2 = acc_b1 + H;
            double* acc_b2 = acc_w2 + V * H;
            numvec gh(H, 0.0);
            for (std::size_t y = 0; y < V; ++y) {
                const double g = gz[y];
                acc_b2[y] += g;
                double* row = acc_w2 + y * H;
                const double* w2row = w2 + y * H;
                for (std::size_t k = 0; k < H; ++k) {
                    row[k] += g * h[k];
                    gh[k] += g * w2row[k];
                }
            }
            for (std::size_t k = 0; k < H; ++k) {
                const double gpre = gh[k] * (1.0 - h[k] * h[k]);
                acc_b1[k] += gpre;
                double* row = acc_w1 + k * d;
                for (std::size_t j = 0; j < d; ++j) row[j] += gpre * x[j];
            }
            return;
        }
    }
    throw std::invalid_argument("bad PolicyKind");
}

}  // namespace kdlab
