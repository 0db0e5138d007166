#pragma once

#include <memory>
#include <span>
#include <string>

#include "kdlab/features.hpp"
#include "kdlab/state_space.hpp"
#include "kdlab/types.hpp"

namespace kdlab {

enum class QKind { tabular, linear_head, mlp_head };

std::string to_string(QKind kind);
QKind q_kind_from_string(const std::string& s);

/**
Output range control for critics. Unbounded critics emit the raw score;
bounded ones squash it through B * tanh(raw / B), which keeps |f| < B
while staying near-identity for |raw| << B.
*/
struct BoundMode {
    bool bounded = false;
    double bound = 1.0;

    static BoundMode unbounded() { return {false, 1.0}; }
    static BoundMode tanh_bounded(double b);
};

struct QShape {
    QKind kind = QKind::tabular;
    std::size_t n_tokens = 0;
    std::size_t n_states = 0;     // tabular rows
    std::size_t feature_dim = 0;  // linear_head / mlp_head input width
    std::size_t hidden_dim = 0;   // mlp_head only

    std::size_t param_count() const;
};

/**
Scalar state-action score f(s, a). Parameterizations:

  tabular      one value per (decision state, token) cell
  linear_head  raw = w . features(s, a); the gradient is the feature
               vector itself
  mlp_head     raw = w2 . tanh(W1 * features(s, a) + b1) + b2,
               parameters packed [W1, b1, w2, b2] row-major

Evaluation methods are const and share no mutable state; set_params
requires exclusive access.
*/
class QFunction {
  public:
    static QFunction tabular(std::shared_ptr<const StateIndex> states,
                             BoundMode bound);
    static QFunction tabular_from_values(std::shared_ptr<const StateIndex> states,
                                         numvec cells, BoundMode bound);
    static QFunction linear(std::shared_ptr<const FeatureMap> features,
                            BoundMode bound, RandomStream& rng,
                            double init_scale = 0.01);
    static QFunction mlp(std::shared_ptr<const FeatureMap> features,
                         std::size_t hidden_dim, BoundMode bound,
                         RandomStream& rng, double init_scale = 0.01);

    const QShape& shape() const { return shape_; }
    const BoundMode& bound_mode() const { return bound_; }
    std::span<const double> params() const { return values_; }
    void set_params(numvec values);
    void axpy_params(double scale, std::span<const double> direction);

    double value(const Prefix& p, int a) const;
    /// d value / d params, flattened.
    numvec param_grad(const Prefix& p, int a) const;
    /// acc += scale * param_grad(p, a); touches only nonzero entries.
    void add_param_grad(const Prefix& p, int a, double scale,
                        std::span<double> acc) const;

    std::shared_ptr<const StateIndex> state_index() const { return states_; }
    std::shared_ptr<const FeatureMap> feature_map() const { return features_; }

  private:
    QFunction() = default;

    double raw_value(const Prefix& p, int a) const;
    void check_action(int a) const;

    QShape shape_;
    BoundMode bound_;
    numvec values_;
    std::shared_ptr<const StateIndex> states_;
    std::shared_ptr<const FeatureMap> features_;
};

}  // namespace kdlab
