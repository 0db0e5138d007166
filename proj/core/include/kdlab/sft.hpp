#pragma once

#include "kdlab/task.hpp"

namespace kdlab {

struct SftResult {
    Policy policy;
    numvec loss_history;  // batch-mean negative log likelihood per step
};

/**
Behavior cloning: minibatch SGD on the negative log likelihood of the
dataset's actions. Batches are drawn with replacement; the loss history
stores the per-decision mean NLL of each batch.
*/
SftResult sft_train(const Task& task, const Dataset& data, Policy pol,
                    double lr, std::size_t steps, RandomStream& rng,
                    std::size_t batch_size = 32);

}  // namespace kdlab
