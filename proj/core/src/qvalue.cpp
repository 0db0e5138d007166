#include "kdlab/qvalue.hpp"

#include <cmath>

namespace kdlab {

std::string to_string(QKind kind) {
    switch (kind) {
        case QKind::tabular: return "tabular";
        case QKind::linear_head: return "linear_head";
        case QKind::mlp_head: return "mlp_head";
    }
    throw std::invalid_argument("bad QKind");
}

QKind q_kind_from_string(const std::string& s) {
    if (s == "tabular") return QKind::tabular;
    if (s == "linear_head" || s == "linear") return QKind::linear_head;
    if (s == "mlp_head" || s == "mlp") return QKind::mlp_head;
    throw std::invalid_argument("bad critic kind: " + s);
}

BoundMode BoundMode::tanh_bounded(double b) {
    if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument("bound must be positive and finite");
    return {true, b};
}

std::size_t QShape::param_count() const {
    switch (kind) {
        case QKind::tabular: return n_states * n_tokens;
        case QKind::linear_head: return feature_dim;
        case QKind::mlp_head:
            return hidden_dim * feature_dim + hidden_dim + hidden_dim + 1;
    }
    throw std::invalid_argument("bad QKind");
}

QFunction QFunction::tabular(std::shared_ptr<const StateIndex> states,
                             BoundMode bound) {
    if (!states) throw std::invalid_argument("null state index");
    numvec zeros(states->decision_state_count() * states->n_tokens(), 0.0);
    return tabular_from_values(std::move(states), std::move(zeros), bound);
}

QFunction QFunction::tabular_from_values(
    std::shared_ptr<const StateIndex> states, numvec cells, BoundMode bound) {
    if (!states) throw std::invalid_argument("null state index");
    QFunction f;
    f.shape_.kind = QKind::tabular;
    f.shape_.n_tokens = states->n_tokens();
    f.shape_.n_states = states->decision_state_count();
    f.bound_ = bound;
    f.states_ = std::move(states);
    f.set_params(std::move(cells));
    return f;
}

QFunction QFunction::linear(std::shared_ptr<const FeatureMap> features,
                            BoundMode bound, RandomStream& rng,
                            double init_scale) {
    if (!features) throw std::invalid_argument("null feature map");
    QFunction f;
    f.shape_.kind = QKind::linear_head;
    f.shape_.n_tokens = features->n_tokens();
    f.shape_.feature_dim = features->state_action_dim();
    f.bound_ = bound;
    f.features_ = std::move(features);
    numvec init(f.shape_.param_count());
    for (double& v : init) v = rng.uniform(-init_scale, init_scale);
    f.set_params(std::move(init));
    return f;
}

QFunction QFunction::mlp(std::shared_ptr<const FeatureMap> features,
                         std::size_t hidden_dim, BoundMode bound,
                         RandomStream& rng, double init_scale) {
    if (!features) throw std::invalid_argument("null feature map");
    if (hidden_dim == 0) throw std::invalid_argument("mlp needs hidden units");
    QFunction f;
    f.shape_.kind = QKind::mlp_head;
    f.shape_.n_tokens = features->n_tokens();
    f.shape_.feature_dim = features->state_action_dim();
    f.shape_.hidden_dim = hidden_dim;
    f.bound_ = bound;
    f.features_ = std::move(features);
    numvec init(f.shape_.param_count());
    for (double& v : init) v = rng.uniform(-init_scale, init_scale);
    f.set_params(std::move(init));
    return f;
}

void QFunction::set_params(numvec values) {
    if (values.size() != shape_.param_count())
        throw std::invalid_argument("parameter vector has wrong size");
    if (!all_finite(values)) throw NonFiniteError("non-finite critic params");
    values_ = std::move(values);
}

void QFunction::axpy_params(double scale, std::span<const double> direction) {
    if (direction.size() != values_.size())
        throw std::invalid_argument("direction vector has wrong size");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += scale * direction[i];
    if (!all_finite(values_)) throw NonFiniteError("non-finite critic params");
}

void QFunction::check_action(int a) const {
    if (a < 0 || static_cast<std::size_t>(a) >= shape_.n_tokens)
        throw TokenOutOfRangeError("action index out of range");
}

double QFunction::raw_value(const Prefix& p, int a) const {
    check_action(a);
    switch (shape_.kind) {
        case QKind::tabular: {
            if (p.length() >= states_->horizon())
                throw HorizonExceededError("terminal state has no action values");
            const std::size_t s = states_->id_of(p);
            return values_[s * shape_.n_tokens + static_cast<std::size_t>(a)];
        }
        case QKind::linear_head: {
            // Only the block selected by `a` is nonzero in the feature
            // vector, so restrict the dot product to it.
            const numvec x = features_->prefix_features(p);
            const std::size_t d = features_->prefix_dim();
            const double* w = values_.data() + static_cast<std::size_t>(a) * d;
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += w[j] * x[j];
            return acc;
        }
        case QKind::mlp_head: {
            const numvec x = features_->prefix_features(p);
            const std::size_t d = features_->prefix_dim();
            const std::size_t D = shape_.feature_dim;
            const std::size_t H = shape_.hidden_dim;
            const std::size_t col0 = static_cast<std::size_t>(a) * d;
            const double* w1 = values_.data();
            const double* b1 = w1 + H * D;
            const double* w2 = b1 + H;
            const double b2 = w2[H];
            double acc = b2;
            for (std::size_t k = 0; k < H; ++k) {
                double pre = b1[k];
                const double* row = w1 + k * D + col0;
                for (std::size_t j = 0; j < d; ++j) pre += row[j] * x[j];
                acc += w2[k] * std::tanh(pre);
            }
            return acc;
        }
    }
    throw std::invalid_argument("bad QKind");
}

double QFunction::value(const Prefix& p, int a) const {
    const double raw = raw_value(p, a);
    if (!bound_.bounded) return raw;
    return bound_.bound * std::tanh(raw / bound_.bound);
}

numvec QFunction::param_grad(const Prefix& p, int a) const {
    numvec grad(shape_.param_count(), 0.0);
    add_param_grad(p, a, 1.0, grad);
    return grad;
}

void QFunction::add_param_grad(const Prefix& p, int a, double scale,
                               std::span<double> acc) const {
    check_action(a);
    if (acc.size() != shape_.param_count())
        throw std::invalid_argument("gradient buffer has wrong size");
    double chain = scale;
    if (bound_.bounded) {
        const double th = std::tanh(raw_value(p, a) / bound_.bound);
        chain *= 1.0 - th * th;
    }
    switch (shape_.kind) {
        case QKind::tabular: {
            if (p.length() >= states_->horizon())
                throw HorizonExceededError("terminal state has no action values");
            const std::size_t s = states_->id_of(p);
            acc[s * shape_.n_tokens + static_cast<std::size_t>(a)] += chain;
            return;
        }
        case QKind::linear_head: {
            const numvec x = features_->prefix_features(p);
            const std::size_t d = features_->prefix_dim();
            double* w = acc.data() + static_cast<std::size_t>(a) * d;
            for (std::size_t j = 0; j < d; ++j) w[j] += chain * x[j];
            return;
        }
        case QKind::mlp_head: {
            const numvec x = features_->prefix_features(p);
            const std::size_t d = features_->prefix_dim();
            const std::size_t D = shape_.feature_dim;
            const std::size_t H = shape_.hidden_dim;
            const std::size_t col0 = static_cast<std::size_t>(a) * d;
            const double* w1 = values_.data();
            const double* b1 = w1 + H * D;
            const double* w2 = b1 + H;
            double* acc_w1 = acc.data();
            double* acc_b1 = acc_w1 + H * D;
            double* acc_w2 = acc_b1 + H;
            double* acc_b2 = acc_w2 + H;
            for (std::size_t k = 0; k < H; ++k) {
                double pre = b1[k];
                const double* row = w1 + k * D + col0;
                for (std::size_t j = 0; j < d; ++j) pre += row[j] * x[j];
                const double h = std::tanh(pre);
                acc_w2[k] += chain * h;
                const double gpre = chain * w2[k] * (1.0 - h * h);
                acc_b1[k] += gpre;
                double* acc_row = acc_w1 + k * D + col0;
                for (std::size_t j = 0; j < d; ++j) acc_row[j] += gpre * x[j];
            }
            *acc_b2 += chain;
            return;
        }
    }
    throw std::invalid_argument("bad QKind");
}

}  // namespace kdlab
