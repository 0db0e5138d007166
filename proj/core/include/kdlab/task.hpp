#pragma once

#include <functional>
#include <memory>
#include <string>

#include "kdlab/policy.hpp"
#include "kdlab/types.hpp"

namespace kdlab {

/**
A complete distillation problem: alphabets, horizon, input distribution,
a dense reward table over (decision state, token), and the teacher
policy. The state index and feature map are shared by every policy and
critic attached to the task so ids and feature layouts agree.
*/
struct Task {
    std::string name;
    Vocabulary vocab;
    std::size_t horizon = 1;
    numvec input_dist;  // over vocab.input_symbols
    std::shared_ptr<const StateIndex> states;
    std::shared_ptr<const FeatureMap> features;
    numvec reward_table;  // decision_state_count() x |V|
    Policy teacher;
    double r_max = 0.0;  // max |reward| over all cells

    double reward_by_id(std::size_t state_id, int a) const;
    double reward(const Prefix& p, int a) const;
    std::size_t n_tokens() const { return vocab.size(); }
    std::size_t n_inputs() const { return vocab.input_count(); }
};

using RewardFn = std::function<double(const Prefix&, int)>;
using TeacherFactory = std::function<Policy(
    std::shared_ptr<const StateIndex>, std::shared_ptr<const FeatureMap>)>;

/**
Assembles and validates a task. The reward function is tabulated over
every decision state; the teacher factory receives the shared state
index and feature map. Pass a pre-built index to share it with reward
or teacher closures that need ids during construction.
*/
Task make_task(std::string name, Vocabulary vocab, std::size_t horizon,
               numvec input_dist, const RewardFn& reward,
               const TeacherFactory& teacher_factory,
               std::shared_ptr<const StateIndex> prebuilt = nullptr);

/// Appends one token; validates the action and remaining horizon.
Prefix step(const Task& task, const Prefix& p, int a);

/// Draws an input symbol from the task's input distribution.
std::size_t sample_input(const Task& task, RandomStream& rng);

/// Generates a full length-T trajectory with rewards attached.
Trajectory rollout(const Task& task, const Policy& pol, std::size_t input,
                   RandomStream& rng, SourceTag source);

/// Convenience: sample the input, then roll out.
Trajectory rollout(const Task& task, const Policy& pol, RandomStream& rng,
                   SourceTag source);

/**
n teacher trajectories with inputs drawn i.i.d. from the task's input
distribution. Each trajectory uses a stream derived from (master seed,
index), so the result is independent of traversal order.
*/
Dataset generate_dataset(const Task& task, std::size_t n, RandomStream& rng);

}  // namespace kdlab
