#include "kdlab/sft.hpp"

#include <cmath>

namespace kdlab {

SftResult sft_train(const Task& task, const Dataset& data, Policy pol,
                    double lr, std::size_t steps, RandomStream& rng,
                    std::size_t batch_size) {
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    // lr = 0 is a legal no-op (losses still recorded); only reject negatives.
    if (lr < 0.0 || !std::isfinite(lr))
        throw std::invalid_argument("learning rate must be nonnegative");
    for (const auto& tr : data.trajectories)
        if (tr.actions.size() != task.horizon)
            throw HorizonExceededError("dataset trajectory length != horizon");

    SftResult result{std::move(pol), {}};
    result.loss_history.reserve(steps);
    numvec grad(result.policy.shape().param_count());

    for (std::size_t step = 0; step < steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double nll = 0.0;
        const double w = 1.0 / static_cast<double>(batch_size * task.horizon);
        for (std::size_t b = 0; b < batch_size; ++b) {
            const Trajectory& tr =
                data.trajectories[rng.index_below(data.size())];
            for (std::size_t t = 0; t < task.horizon; ++t) {
                const Prefix p = tr.prefix_at(t);
                const int a = tr.actions[t];
                nll -= w * std::log(result.policy.action_probs(p)[
                                        static_cast<std::size_t>(a)]);
                result.policy.add_log_prob_grad(p, a, -w, grad);
            }
        }
        result.policy.axpy_params(-lr, grad);
        result.loss_history.push_back(nll);
    }
    return result;
}

}  // namespace kdlab
